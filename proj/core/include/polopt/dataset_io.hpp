#pragma once

// Dataset files.
//
//   dataset.jsonl   one record per sample:
//                   {"material_id": int, "category": "wood"|..., "mueller": [16 floats, row-major]}
//   manifest.json   {"seed": .., "materials_per_category": .., "samples_per_material": ..,
//                    "split": {"train": [ids], "test": [ids]}}
//
// Measured data can be imported through the same JSONL schema; without a
// manifest the split is drawn with assign_split.

#include <filesystem>
#include <string>

#include "polopt/format_error.hpp"
#include "polopt/materials.hpp"

namespace polopt {

inline constexpr const char* kDatasetFile = "dataset.jsonl";
inline constexpr const char* kManifestFile = "manifest.json";

std::string dataset_to_jsonl(const Dataset& dataset);
std::string manifest_to_json(const Dataset& dataset);

/// Writes dataset.jsonl and manifest.json into `dir` (created if needed).
void save_dataset(const std::filesystem::path& dir, const Dataset& dataset);

/// Parses JSONL records. Throws FormatError with the offending line number.
Dataset dataset_from_jsonl(std::string_view text);

/// Loads `path`, which is either a directory holding dataset.jsonl (and
/// optionally manifest.json) or a JSONL file. Without a manifest the split
/// is drawn with `fallback_seed`.
Dataset load_dataset(const std::filesystem::path& path, std::uint64_t fallback_seed = 1);

}  // namespace polopt
