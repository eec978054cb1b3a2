#pragma once

#include <string_view>

namespace oncoprompt {

// Cheap sanity check for SMILES strings coming from annotation tables. It
// accepts the SMILES character set (letters, digits, ()[]=#@+-/\%.), requires
// balanced parentheses and brackets, and requires every ring-closure digit
// to occur an even number of times. Not a grammar: "CC(C)(" style mistakes
// are caught, chemically invalid strings are not.
bool validate_smiles_lite(std::string_view text);

}  // namespace oncoprompt
