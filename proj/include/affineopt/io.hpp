#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "affineopt/problem.hpp"

namespace affineopt {

/**
 * Instance document:
 *
 *   {"objective": {"kind": "quadratic" | "smoothed_l1",
 *                  "params": {"A": [[...]], "c": [...]} | {"e": ...},
 *                  "mu": ..., "lip": ...},
 *    "K": "<matrix csv path, relative to the json file>",
 *    "b": [...]}
 */
nlohmann::json instance_to_json(const ProblemInstance& inst, const std::string& matrix_path);
ProblemInstance instance_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);

/// Writes <dir>/<stem>.json and <dir>/<stem>_K.csv; returns the json path.
std::filesystem::path save_instance(const ProblemInstance& inst, const std::filesystem::path& dir,
                                    const std::string& stem);
ProblemInstance load_instance(const std::filesystem::path& json_path);

}  // namespace affineopt
