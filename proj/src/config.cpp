#include "cylab/config.hpp"

#include <fstream>
#include <sstream>

#include "cylab/report.hpp"

namespace cylab {

using nlohmann::json;

// ---------------------------------------------------------------- FieldReader

FieldReader::FieldReader(const json& in, json& echo, std::string path)
    : in_(&in), echo_(&echo), path_(std::move(path)) {
    if (!in.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    if (!echo_->is_object()) *echo_ = json::object();
}

std::string FieldReader::path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

bool FieldReader::has(const std::string& key) const { return in_->contains(key); }

const json& FieldReader::raw(const std::string& key) const { return in_->at(key); }

double FieldReader::number(const std::string& key, std::optional<double> fallback) {
    double v;
    if (has(key)) {
        if (!raw(key).is_number()) throw ConfigError(path(key), "expected a number");
        v = raw(key).get<double>();
        if (!std::isfinite(v)) throw ConfigError(path(key), "must be finite");
    } else if (fallback) {
        v = *fallback;
    } else {
        throw ConfigError(path(key), "missing");
    }
    (*echo_)[key] = v;
    return v;
}

int FieldReader::integer(const std::string& key, std::optional<int> fallback) {
    int v;
    if (has(key)) {
        if (!raw(key).is_number_integer()) throw ConfigError(path(key), "expected an integer");
        v = raw(key).get<int>();
    } else if (fallback) {
        v = *fallback;
    } else {
        throw ConfigError(path(key), "missing");
    }
    (*echo_)[key] = v;
    return v;
}

std::uint64_t FieldReader::seed(const std::string& key, std::optional<std::uint64_t> fallback) {
    std::uint64_t v;
    if (has(key)) {
        if (!raw(key).is_number_unsigned()) throw ConfigError(path(key), "expected a non-negative integer");
        v = raw(key).get<std::uint64_t>();
    } else if (fallback) {
        v = *fallback;
    } else {
        throw ConfigError(path(key), "missing");
    }
    (*echo_)[key] = v;
    return v;
}

bool FieldReader::boolean(const std::string& key, std::optional<bool> fallback) {
    bool v;
    if (has(key)) {
        if (!raw(key).is_boolean()) throw ConfigError(path(key), "expected true or false");
        v = raw(key).get<bool>();
    } else if (fallback) {
        v = *fallback;
    } else {
        throw ConfigError(path(key), "missing");
    }
    (*echo_)[key] = v;
    return v;
}

std::string FieldReader::text(const std::string& key, std::optional<std::string> fallback) {
    std::string v;
    if (has(key)) {
        if (!raw(key).is_string()) throw ConfigError(path(key), "expected a string");
        v = raw(key).get<std::string>();
    } else if (fallback) {
        v = *fallback;
    } else {
        throw ConfigError(path(key), "missing");
    }
    (*echo_)[key] = v;
    return v;
}

std::vector<double> FieldReader::numbers(const std::string& key, std::optional<std::vector<double>> fallback) {
    std::vector<double> v;
    if (has(key)) {
        if (!raw(key).is_array()) throw ConfigError(path(key), "expected an array of numbers");
        for (const auto& x : raw(key)) {
            if (!x.is_number()) throw ConfigError(path(key), "expected an array of numbers");
            v.push_back(x.get<double>());
        }
    } else if (fallback) {
        v = *fallback;
    } else {
        throw ConfigError(path(key), "missing");
    }
    (*echo_)[key] = v;
    return v;
}

FieldReader FieldReader::object(const std::string& key) {
    static const json empty = json::object();
    json& sub = (*echo_)[key];
    if (!sub.is_object()) sub = json::object();
    return FieldReader(has(key) ? raw(key) : empty, sub, path(key));
}

void FieldReader::record(const std::string& key, json value) { (*echo_)[key] = std::move(value); }

void FieldReader::finish() const {
    for (auto it = in_->begin(); it != in_->end(); ++it)
        if (!echo_->contains(it.key())) throw ConfigError(path(it.key()), "unknown field");
}

// ---------------------------------------------------------------- parsing

BoundarySpec parse_boundary_spec(FieldReader r) {
    BoundarySpec s;
    s.type = r.text("type");
    if (s.type == "generalized_aps" || s.type == "random") {
        s.seed = r.seed("seed", 0);
    } else if (s.type == "calderon") {
        s.length = r.number("length", std::nullopt);
        if (!(s.length > 0.0)) throw ConfigError(r.path("length"), "must be positive");
    } else if (s.type == "custom") {
        s.file = r.text("file");
    } else if (s.type != "aps" && s.type != "negative") {
        throw ConfigError(r.path("type"),
                          "unknown boundary type '" + s.type +
                              "' (aps, generalized_aps, negative, calderon, random, custom)");
    }
    r.finish();
    return s;
}

json boundary_spec_json(const BoundarySpec& s) {
    json j{{"type", s.type}};
    if (s.type == "generalized_aps" || s.type == "random") j["seed"] = s.seed;
    if (s.type == "calderon") j["length"] = s.length;
    if (s.type == "custom") j["file"] = s.file;
    return j;
}

LabConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    json in;
    try {
        in = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<document>", e.what());
    }
    LabConfig c;
    c.base_dir = base_dir;
    json echo = json::object();
    FieldReader root(in, echo, "");

    {
        FieldReader s = root.object("structure");
        c.b_values = s.numbers("b_values");
        if (c.b_values.empty()) throw ConfigError("structure.b_values", "must not be empty");
        for (double b : c.b_values)
            if (!(b > 0.0)) throw ConfigError("structure.b_values", "entries must be positive");
        c.kernel_dim = s.integer("kernel_dim", 0);
        if (c.kernel_dim < 0 || c.kernel_dim % 2 != 0)
            throw ConfigError("structure.kernel_dim", "must be a non-negative even integer");
        c.kernel_lagrangian_seed = s.seed("kernel_lagrangian_seed", 0);
        s.finish();
    }
    {
        FieldReader g = root.object("geometry");
        const std::string kind = g.text("kind", "interval");
        if (kind == "interval")
            c.geometry = Geometry::interval;
        else if (kind == "circle")
            c.geometry = Geometry::circle;
        else
            throw ConfigError("geometry.kind", "must be 'interval' or 'circle'");
        c.length = g.number("length", 1.0);
        if (!(c.length > 0.0)) throw ConfigError("geometry.length", "must be positive");
        c.R_list = g.numbers("R_list", std::vector<double>{});
        for (double R : c.R_list)
            if (!(R >= 0.0)) throw ConfigError("geometry.R_list", "entries must be non-negative");
        g.finish();
    }
    {
        FieldReader p = root.object("potential");
        const std::string kind = p.text("kind", "zero");
        if (kind == "bump") {
            const double a = p.number("amplitude");
            const double x0 = p.number("center");
            const double w = p.number("width");
            if (!(w > 0.0)) throw ConfigError("potential.width", "must be positive");
            if (x0 - w < -1e-12 || x0 + w > c.length + 1e-12)
                throw ConfigError("potential.center", "bump support must stay a half-width inside [0, geometry.length]");
            c.potential = PotentialSpec::bump(a, x0, w);
        } else if (kind != "zero") {
            throw ConfigError("potential.kind", "must be 'zero' or 'bump'");
        }
        p.finish();
    }
    if (root.has("boundary")) {
        FieldReader b = root.object("boundary");
        if (b.has("coupled")) {
            if (b.has("left") || b.has("right"))
                throw ConfigError("boundary", "give either coupled or left/right, not both");
            c.coupled = parse_boundary_spec(b.object("coupled"));
        } else {
            c.left = parse_boundary_spec(b.object("left"));
            c.right = parse_boundary_spec(b.object("right"));
        }
        b.finish();
    }
    {
        FieldReader s = root.object("solver");
        c.window = s.number("window", 70.0);
        if (!(c.window > 0.0)) throw ConfigError("solver.window", "must be positive");
        if (s.has("tolerance")) {
            c.tolerance = s.number("tolerance");
            if (!(*c.tolerance >= 0.0)) throw ConfigError("solver.tolerance", "must be non-negative");
        }
        s.finish();
    }
    if (root.has("experiment")) {
        if (!in.at("experiment").is_object()) throw ConfigError("experiment", "expected an object");
        FieldReader e = root.object("experiment");
        c.experiment_id = e.text("id");
        // parameters are read, echoed and checked by the experiment dispatcher
        if (in.at("experiment").contains("params")) {
            c.experiment_params = in.at("experiment").at("params");
            if (!c.experiment_params.is_object()) throw ConfigError("experiment.params", "expected an object");
        }
        echo["experiment"]["params"] = json::object();
        e.finish();
    }
    {
        FieldReader o = root.object("output");
        c.output_dir = o.text("dir", ".");
        c.output_stem = o.text("stem", "");
        o.finish();
    }
    root.finish();
    c.echo = echo;
    return c;
}

LabConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read config " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

// ---------------------------------------------------------------- building

Mat read_matrix_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read matrix file " + path.string());
    json j;
    try {
        j = json::parse(f);
    } catch (const json::parse_error& e) {
        throw InvalidInput("matrix file " + path.string() + ": " + e.what());
    }
    auto part = [&](const char* key) -> std::vector<std::vector<double>> {
        if (!j.contains(key)) return {};
        try {
            return j.at(key).get<std::vector<std::vector<double>>>();
        } catch (const json::exception&) {
            throw InvalidInput("matrix file " + path.string() + ": '" + key + "' must be an array of rows");
        }
    };
    const auto re = part("re");
    const auto im = part("im");
    if (re.empty()) throw InvalidInput("matrix file " + path.string() + ": 're' is missing or empty");
    const int rows = static_cast<int>(re.size()), cols = static_cast<int>(re[0].size());
    if (!im.empty() && static_cast<int>(im.size()) != rows)
        throw InvalidInput("matrix file " + path.string() + ": 're' and 'im' differ in shape");
    Mat M(rows, cols);
    for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(re[r].size()) != cols || (!im.empty() && static_cast<int>(im[r].size()) != cols))
            throw InvalidInput("matrix file " + path.string() + ": ragged rows");
        for (int k = 0; k < cols; ++k) M(r, k) = cplx(re[r][k], im.empty() ? 0.0 : im[r][k]);
    }
    return M;
}

TangentialStructure build_structure(const LabConfig& cfg) {
    const TangentialStructure T = standard_structure(cfg.b_values);
    return cfg.kernel_dim > 0 ? extend_with_kernel(T, cfg.kernel_dim) : T;
}

GrassmannianPoint build_boundary(const LabConfig& cfg, const BoundarySpec& spec, const TangentialStructure& S,
                                 const std::string& field) {
    try {
        if (spec.type == "aps") {
            if (S.invertible()) return aps_projection(S);
            return aps_projection(S, random_kernel_lagrangian(S, cfg.kernel_lagrangian_seed));
        }
        if (spec.type == "generalized_aps") {
            if (S.invertible()) throw ConfigError(field + ".type", "generalized_aps needs structure.kernel_dim > 0");
            GrassmannianPoint P = aps_projection(S, random_kernel_lagrangian(S, spec.seed));
            P.tag = GrassmannianTag::generalized_aps;
            return P;
        }
        if (spec.type == "negative") {
            if (!S.invertible()) throw ConfigError(field + ".type", "negative needs an invertible B");
            return GrassmannianPoint::make(S, negative_spectral_projection(S), GrassmannianTag::aps, "negative");
        }
        if (spec.type == "random") return random_lagrangian(S, spec.seed);
        if (spec.type == "calderon") {
            const TangentialStructure T = build_structure(cfg);
            if (S.dim() != 2 * T.dim()) throw ConfigError(field + ".type", "calderon is a coupled condition");
            return calderon_graph_projection(T, spec.length);
        }
        if (spec.type == "custom") {
            Mat P = read_matrix_file(cfg.base_dir / spec.file);
            if (P.rows() != S.dim() || P.cols() != S.dim())
                throw ConfigError(field + ".file", "matrix must be " + std::to_string(S.dim()) + "x" +
                                                       std::to_string(S.dim()));
            return GrassmannianPoint::make(S, std::move(P), GrassmannianTag::custom, spec.file);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidInput& e) {
        throw ConfigError(field, e.what());
    }
    throw ConfigError(field + ".type", "unknown boundary type");
}

GrassmannianPoint doubled_boundary(const LabConfig& cfg) {
    const TangentialStructure T = build_structure(cfg);
    const TangentialStructure D = doubled_structure(T);
    if (cfg.coupled) return build_boundary(cfg, *cfg.coupled, D, "boundary.coupled");
    if (!cfg.left || !cfg.right) throw ConfigError("boundary", "missing");
    const TangentialStructure R = TangentialStructure::from_matrices(-T.B(), -T.J());
    const GrassmannianPoint l = build_boundary(cfg, *cfg.left, T, "boundary.left");
    const GrassmannianPoint r = build_boundary(cfg, *cfg.right, R, "boundary.right");
    const int n = T.dim();
    Mat P = Mat::Zero(2 * n, 2 * n);
    P.topLeftCorner(n, n) = l.P;
    P.bottomRightCorner(n, n) = r.P;
    return GrassmannianPoint::make(D, std::move(P), l.tag == r.tag ? l.tag : GrassmannianTag::custom,
                                  "left " + cfg.left->type + ", right " + cfg.right->type);
}

CylinderOperator build_operator(const LabConfig& cfg) {
    const TangentialStructure T = build_structure(cfg);
    if (cfg.geometry == Geometry::circle) {
        if (cfg.coupled || cfg.left) throw ConfigError("boundary", "a circle takes no boundary condition");
        return CylinderOperator::circle(T, cfg.length, cfg.potential);
    }
    return CylinderOperator::interval_coupled(T, cfg.length, cfg.potential, doubled_boundary(cfg));
}

}  // namespace cylab
