#include "oncoprompt/smiles_lint.hpp"

#include <array>
#include <cctype>

namespace oncoprompt {

namespace {

bool allowed(char c) {
  const auto u = static_cast<unsigned char>(c);
  if (std::isalnum(u)) return true;
  switch (c) {
    case '(': case ')': case '[': case ']': case '=': case '#': case '@':
    case '+': case '-': case '/': case '\\': case '%': case '.':
      return true;
    default:
      return false;
  }
}

}  // namespace

bool validate_smiles_lite(std::string_view text) {
  if (text.empty()) return false;

  // Ring labels 0-9 plus %10-%99. Digits inside brackets are isotopes,
  // hydrogen counts or charges, not ring closures.
  std::array<unsigned, 100> ring_count{};
  int depth = 0;
  bool in_bracket = false;

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (!allowed(c)) return false;
    if (c == '[') {
      if (in_bracket) return false;
      in_bracket = true;
    } else if (c == ']') {
      if (!in_bracket) return false;
      in_bracket = false;
    } else if (in_bracket) {
      continue;
    } else if (c == '(') {
      ++depth;
    } else if (c == ')') {
      if (--depth < 0) return false;
    } else if (c == '%') {
      if (i + 2 >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i + 1])) ||
          !std::isdigit(static_cast<unsigned char>(text[i + 2]))) {
        return false;
      }
      ++ring_count[static_cast<std::size_t>((text[i + 1] - '0') * 10 + (text[i + 2] - '0'))];
      i += 2;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      ++ring_count[static_cast<std::size_t>(c - '0')];
    }
  }
  if (depth != 0 || in_bracket) return false;
  for (unsigned n : ring_count) {
    if (n % 2 != 0) return false;
  }
  return true;
}

}  // namespace oncoprompt
