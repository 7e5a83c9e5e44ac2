#include "cylab/lab.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "cylab/report.hpp"

namespace cylab {

using nlohmann::json;

namespace {

const std::vector<std::string> kCommands{"spectrum", "eta", "zetadet", "flow", "verify", "sweep"};
const std::vector<std::string> kSweepable{"adiabatic_eta_gluing", "adiabatic_det_dirichlet", "adiabatic_det_aps"};

std::vector<std::uint64_t> seeds_of(FieldReader& r, const std::string& key, std::vector<double> fallback) {
    std::vector<std::uint64_t> out;
    for (double s : r.numbers(key, std::move(fallback))) {
        if (!(s >= 0.0) || s != std::floor(s)) throw ConfigError(r.path(key), "seeds must be non-negative integers");
        out.push_back(static_cast<std::uint64_t>(s));
    }
    return out;
}

// a point of the doubled structure given as an experiment parameter
GrassmannianPoint coupled_param(const LabConfig& cfg, FieldReader& r, const std::string& key,
                                const BoundarySpec& fallback) {
    const TangentialStructure D = doubled_structure(build_structure(cfg));
    BoundarySpec spec = fallback;
    if (r.has(key))
        spec = parse_boundary_spec(r.object(key));
    else
        r.record(key, boundary_spec_json(fallback));
    return build_boundary(cfg, spec, D, r.path(key));
}

BoundarySpec random_spec(std::uint64_t seed) {
    BoundarySpec s;
    s.type = "random";
    s.seed = seed;
    return s;
}

double tol(const LabConfig& cfg, double fallback) { return cfg.tolerance.value_or(fallback); }

std::vector<double> require_R(const LabConfig& cfg) {
    if (cfg.R_list.empty()) throw ConfigError("geometry.R_list", "this experiment needs a non-empty R_list");
    return cfg.R_list;
}

json spectrum_json(const Spectrum& s) {
    json j;
    j["eigenvalues"] = s.eigenvalues;
    j["window"] = s.window;
    j["method"] = to_string(s.method);
    j["period"] = s.period;
    j["branches"] = {{"positive", s.branches_pos}, {"negative", s.branches_neg}};
    j["certificate"] = {{"checked", s.certificate.checked},
                        {"cutoff", s.certificate.cutoff},
                        {"primary_count", s.certificate.primary_count},
                        {"oracle_count", s.certificate.oracle_count},
                        {"oracle_points", s.certificate.oracle_points}};
    return j;
}

std::string stem_for(const LabConfig& cfg, const std::string& fallback) {
    return cfg.output_stem.empty() ? fallback : cfg.output_stem;
}

int verdict_code(const VerdictReport& r) {
    if (r.low_confidence) return exit_low_confidence;
    return r.pass ? exit_ok : exit_failed;
}

}  // namespace

VerdictReport run_experiment(const LabConfig& cfg, json& params_echo) {
    const std::string& id = cfg.experiment_id;
    if (id.empty()) throw ConfigError("experiment.id", "missing");
    FieldReader p(cfg.experiment_params, params_echo, "experiment.params");
    const TangentialStructure T = build_structure(cfg);
    const TangentialStructure D = doubled_structure(T);
    VerdictReport r;

    if (id == "scott_wojciechowski") {
        const auto seeds = seeds_of(p, "seeds", {1, 2, 3, 4, 5});
        const bool with_c = p.boolean("include_calderon", true);
        p.finish();
        std::vector<GrassmannianPoint> Ps;
        for (auto s : seeds) Ps.push_back(random_lagrangian(D, s));
        if (with_c) Ps.push_back(calderon_graph_projection(T, cfg.length));
        r = verify_scott_wojciechowski(T, cfg.length, Ps, cfg.window, tol(cfg, 1e-4));
    } else if (id == "relative_eta") {
        const auto P = coupled_param(cfg, p, "P", random_spec(1));
        const auto Q = coupled_param(cfg, p, "Q", random_spec(2));
        p.finish();
        r = verify_relative_eta(T, cfg.length, cfg.potential, P, Q, cfg.window, tol(cfg, 1e-3));
    } else if (id == "adiabatic_eta_gluing") {
        GluingGeometry g;
        g.length_x = p.number("length_x", cfg.length);
        g.length_y = p.number("length_y", cfg.length);
        const std::string side = p.text("potential_side", "x");
        if (side == "x")
            g.V_x = cfg.potential;
        else if (side == "y")
            g.V_y = cfg.potential;
        else
            throw ConfigError(p.path("potential_side"), "must be 'x' or 'y'");
        const auto P = coupled_param(cfg, p, "P", BoundarySpec{});
        p.finish();
        r = adiabatic_eta_gluing(T, g, P, require_R(cfg), cfg.window, tol(cfg, 1e-3));
    } else if (id == "adiabatic_det_dirichlet" || id == "adiabatic_det_aps") {
        p.finish();
        if (cfg.potential.active()) throw ConfigError("potential.kind", "determinant surgery needs zero potential");
        r = id == "adiabatic_det_dirichlet"
                ? adiabatic_det_dirichlet(T, require_R(cfg), cfg.window, tol(cfg, 1e-3), cfg.length)
                : adiabatic_det_aps(T, require_R(cfg), cfg.window, tol(cfg, 1e-3), cfg.length);
    } else if (id == "zeta_at_zero_invariance") {
        const auto seeds = seeds_of(p, "seeds", {1, 2, 3, 4, 5});
        const bool special = p.boolean("include_special", true);
        p.finish();
        r = zeta_at_zero_invariance(T, cfg.length, cfg.potential, seeds, cfg.window, special, tol(cfg, 2e-3));
    } else if (id == "conjugation_index") {
        ConjugationProblem pb{T, p.number("length_x", cfg.length), p.number("length_y", cfg.length), Mat()};
        const int k = p.integer("winding", 0);
        const double phase = p.number("phase", 0.125);
        p.finish();
        pb.Phi = winding_unitary(T, k, phase);
        r = conjugation_index(pb);
    } else if (id == "spectral_flow_vs_winding") {
        GrassmannianPoint base;
        if (p.has("base") || (!cfg.coupled && !cfg.left))
            base = coupled_param(cfg, p, "base", random_spec(5));
        else
            base = doubled_boundary(cfg);
        const int w = p.integer("winding", 1);
        const int steps = p.integer("steps", 20);
        const double eta_window = p.number("eta_window", 0.0);
        p.finish();
        r = spectral_flow_vs_winding(T, cfg.length, phase_loop(D, base, w), steps, eta_window, tol(cfg, 1e-3));
    } else {
        throw ConfigError("experiment.id", "unknown experiment '" + id + "'");
    }
    return r;
}

int run_lab(const std::string& command, const std::filesystem::path& config,
            const std::optional<std::filesystem::path>& out_dir, std::ostream& out, std::ostream& err) {
    try {
        if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end()) {
            err << "lab: unknown command '" << command << "'\n";
            return exit_invalid_config;
        }
        LabConfig cfg = load_config(config);
        const std::filesystem::path dir = out_dir ? *out_dir : cfg.base_dir / cfg.output_dir;
        json extra;
        extra["command"] = command;

        if (command == "spectrum" || command == "eta" || command == "zetadet") {
            const CylinderOperator op = build_operator(cfg);
            json result;
            bool low = false;
            if (command == "spectrum") {
                result = spectrum_json(eigenvalues_in_window(op, cfg.window));
            } else if (command == "eta") {
                const EtaResult e = eta_invariant(op, cfg.window);
                result = {{"eta", e.eta},
                          {"eta_heat", e.eta_heat},
                          {"reduced_eta", e.reduced_eta},
                          {"eta_mod_Z_reduced", e.eta_mod_Z_reduced},
                          {"dim_ker", e.dim_ker},
                          {"window", e.window},
                          {"error_estimate", e.error_estimate},
                          {"low_confidence", e.low_confidence}};
                low = e.low_confidence;
            } else {
                const ZetaResult z = zeta_sq(op, cfg.window);
                const EtaResult e = eta_invariant(op, cfg.window);
                const DetResult d = assemble_det(z, e);
                result = {{"modulus", d.modulus},
                          {"phase", d.phase},
                          {"value", {{"re", d.value.real()}, {"im", d.value.imag()}}},
                          {"zeta_at_0", d.zeta_at_0},
                          {"zeta_prime_at_0", d.zeta_prime_at_0},
                          {"eta", d.eta},
                          {"dim_ker", d.dim_ker},
                          {"error_estimate", d.error_estimate},
                          {"low_confidence", z.low_confidence || e.low_confidence}};
                low = z.low_confidence || e.low_confidence;
            }
            json doc = extra;
            doc["result"] = result;
            doc["config"] = cfg.echo;
            std::error_code ec;
            std::filesystem::create_directories(dir, ec);
            if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
            const auto path = dir / (stem_for(cfg, command) + ".json");
            write_text(path, canonical_dump(doc));
            out << path.string() << "\n";
            if (low) err << "lab: result flagged low-confidence\n";
            return low ? exit_low_confidence : exit_ok;
        }

        LabConfig run_cfg = cfg;
        if (command == "flow") {
            if (!run_cfg.experiment_id.empty() && run_cfg.experiment_id != "spectral_flow_vs_winding")
                throw ConfigError("experiment.id", "flow runs spectral_flow_vs_winding");
            run_cfg.experiment_id = "spectral_flow_vs_winding";
        }
        if (command == "sweep" &&
            std::find(kSweepable.begin(), kSweepable.end(), run_cfg.experiment_id) == kSweepable.end())
            throw ConfigError("experiment.id", "sweep needs one of adiabatic_eta_gluing, adiabatic_det_dirichlet, "
                                               "adiabatic_det_aps");
        json params = json::object();
        const VerdictReport r = run_experiment(run_cfg, params);
        json echo = cfg.echo;
        echo["experiment"]["id"] = run_cfg.experiment_id;
        echo["experiment"]["params"] = params;
        extra["config"] = echo;
        const auto paths = emit_report(r, dir, stem_for(cfg, run_cfg.experiment_id), extra);
        out << paths.json.string() << "\n" << paths.csv.string() << "\n";
        const int code = verdict_code(r);
        if (code == exit_failed)
            err << "lab: " << r.id << " failed: defect " << r.defect << " > tolerance " << r.tolerance << "\n";
        if (code == exit_low_confidence) err << "lab: " << r.id << " is low-confidence\n";
        return code;
    } catch (const IoError& e) {
        err << "lab: " << e.what() << "\n";
        return exit_internal;
    } catch (const InvalidInput& e) {
        err << "lab: invalid configuration: " << e.what() << "\n";
        return exit_invalid_config;
    } catch (const LabError& e) {
        err << "lab: numerical failure: " << e.what() << "\n";
        return exit_low_confidence;
    } catch (const std::exception& e) {
        err << "lab: internal error: " << e.what() << "\n";
        return exit_internal;
    }
}

}  // namespace cylab
