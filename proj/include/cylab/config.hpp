#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cylab/cylinder.hpp"
#include "cylab/errors.hpp"

namespace cylab {

/// A configuration field is missing, mistyped or out of range.
class ConfigError : public InvalidInput {
public:
    ConfigError(const std::string& field, const std::string& what)
        : InvalidInput("config field '" + field + "': " + what), field_(field) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Reads typed fields of one JSON object, records the resolved value of every
/// field (defaults included) into an echo object, and rejects unknown keys.
class FieldReader {
public:
    FieldReader(const nlohmann::json& in, nlohmann::json& echo, std::string path);

    double number(const std::string& key, std::optional<double> fallback = std::nullopt);
    int integer(const std::string& key, std::optional<int> fallback = std::nullopt);
    std::uint64_t seed(const std::string& key, std::optional<std::uint64_t> fallback = std::nullopt);
    bool boolean(const std::string& key, std::optional<bool> fallback = std::nullopt);
    std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt);
    std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt);
    bool has(const std::string& key) const;
    /// Sub-object reader; an absent key reads as {}.
    FieldReader object(const std::string& key);
    std::string path(const std::string& key) const;
    /// Echoes a resolved value that was not read through this reader.
    void record(const std::string& key, nlohmann::json value);
    /// Throws ConfigError for keys present in the input but never read.
    void finish() const;

private:
    const nlohmann::json* in_;
    nlohmann::json* echo_;
    std::string path_;
    const nlohmann::json& raw(const std::string& key) const;
};

struct BoundarySpec {
    std::string type = "aps";  ///< aps, generalized_aps, negative, calderon, random, custom
    std::uint64_t seed = 0;
    double length = 0.0;
    std::string file;
};

struct LabConfig {
    std::vector<double> b_values;
    int kernel_dim = 0;
    std::uint64_t kernel_lagrangian_seed = 0;

    Geometry geometry = Geometry::interval;
    double length = 1.0;
    std::vector<double> R_list;

    PotentialSpec potential;

    /// Decoupled (left/right, each a point of its end's inward structure) or
    /// coupled (a point of the doubled structure).
    std::optional<BoundarySpec> left, right, coupled;

    double window = 70.0;
    std::optional<double> tolerance;

    std::string experiment_id;
    nlohmann::json experiment_params = nlohmann::json::object();

    std::filesystem::path output_dir = ".";
    std::string output_stem;

    std::filesystem::path base_dir;  ///< custom matrix files are relative to this
    nlohmann::json echo;             ///< every field with defaults resolved
};

LabConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".");
LabConfig load_config(const std::filesystem::path& path);

BoundarySpec parse_boundary_spec(FieldReader r);
nlohmann::json boundary_spec_json(const BoundarySpec& s);

TangentialStructure build_structure(const LabConfig& cfg);
/// The boundary condition described by spec as a point of S.
GrassmannianPoint build_boundary(const LabConfig& cfg, const BoundarySpec& spec, const TangentialStructure& S,
                                 const std::string& field);
CylinderOperator build_operator(const LabConfig& cfg);
/// The operator's boundary condition as one projection of the doubled structure.
GrassmannianPoint doubled_boundary(const LabConfig& cfg);

/// Matrix file: {"re": [[...]], "im": [[...]]} with "im" optional.
Mat read_matrix_file(const std::filesystem::path& path);

}  // namespace cylab
