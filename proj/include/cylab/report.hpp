#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "cylab/errors.hpp"
#include "cylab/experiments.hpp"

namespace cylab {

/// A file could not be read or written.
class IoError : public LabError {
public:
    using LabError::LabError;
};

nlohmann::json to_json(const VerdictReport& r);
/// Inverse of to_json; throws InvalidInput naming the first bad field.
VerdictReport report_from_json(const nlohmann::json& j);

/// Sorted keys, two-space indent, floats as %.17g, non-finite as null.
std::string canonical_dump(const nlohmann::json& j);

/// Header `parameter,defect` then one %.17g row per table entry.
std::string table_csv(const VerdictReport& r);

void write_text(const std::filesystem::path& path, const std::string& text);

struct EmittedPaths {
    std::filesystem::path json;
    std::filesystem::path csv;
};

/// Writes <dir>/<stem>.json (the report plus `extra` keys) and <dir>/<stem>.csv.
EmittedPaths emit_report(const VerdictReport& r, const std::filesystem::path& dir, const std::string& stem,
                         const nlohmann::json& extra = nlohmann::json::object());

}  // namespace cylab
