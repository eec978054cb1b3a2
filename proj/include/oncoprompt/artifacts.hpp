#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "oncoprompt/cohort.hpp"
#include "oncoprompt/gateway.hpp"

namespace oncoprompt {

// Versioned JSON artifacts. Every document carries "version": 1 and the
// digest of the configuration that produced it.

inline constexpr int kArtifactVersion = 1;

nlohmann::ordered_json cohort_to_json(const Cohort& cohort);
Cohort cohort_from_json(const nlohmann::json& doc);

nlohmann::ordered_json split_to_json(const SplitResult& split, const SplitSpec& spec,
                                     const Cohort& cohort);
SplitResult split_from_json(const nlohmann::json& doc);

nlohmann::ordered_json prediction_to_json(std::size_t index, const Prediction& p);
Prediction prediction_from_json(const nlohmann::json& item);

/// Writes `bytes` through a temporary sibling and renames it into place,
/// so readers never observe a partial file. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

/// Adds version/config_digest and writes pretty-printed JSON.
void write_artifact(const std::filesystem::path& path, nlohmann::ordered_json doc,
                    const std::string& config_digest);
/// Loads a JSON artifact and checks its version and digest. A mismatch
/// throws ValidationError naming the file.
nlohmann::json read_artifact(const std::filesystem::path& path, const std::string& config_digest);

}  // namespace oncoprompt
