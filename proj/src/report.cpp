#include "cylab/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace cylab {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void dump(const json& j, int indent, std::string& out) {
    const std::string pad(indent + 2, ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad + json(it.key()).dump() + ": ";
                dump(it.value(), indent + 2, out);
            }
            out += "\n" + std::string(indent, ' ') + "}";
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ",\n";
                out += pad;
                dump(j[i], indent + 2, out);
            }
            out += "\n" + std::string(indent, ' ') + "]";
            return;
        }
        case json::value_t::number_float:
            out += fmt(j.get<double>());
            return;
        default:
            out += j.dump();
    }
}

json complex_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

double number(const json& j, const std::string& field) {
    if (j.is_null()) return std::nan("");
    if (!j.is_number()) throw InvalidInput("report field '" + field + "' is not a number");
    return j.get<double>();
}

const json& field(const json& j, const std::string& key) {
    if (!j.contains(key)) throw InvalidInput("report field '" + key + "' is missing");
    return j.at(key);
}

}  // namespace

nlohmann::json to_json(const VerdictReport& r) {
    json j;
    j["id"] = r.id;
    j["inputs"] = r.inputs;
    j["inputs_digest"] = r.inputs_digest;
    j["lhs"] = complex_json(r.lhs);
    j["rhs"] = complex_json(r.rhs);
    j["defect"] = r.defect;
    j["tolerance"] = r.tolerance;
    j["pass"] = r.pass;
    j["low_confidence"] = r.low_confidence;
    j["notes"] = r.notes;
    json rows = json::array();
    for (const auto& t : r.table) rows.push_back(json{{"parameter", t.parameter}, {"defect", t.defect}});
    j["table"] = rows;
    return j;
}

VerdictReport report_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw InvalidInput("report is not a JSON object");
    VerdictReport r;
    try {
        r.id = field(j, "id").get<std::string>();
        r.inputs = field(j, "inputs").get<std::map<std::string, std::string>>();
        r.inputs_digest = field(j, "inputs_digest").get<std::string>();
        const auto& l = field(j, "lhs");
        r.lhs = cplx(number(field(l, "re"), "lhs.re"), number(field(l, "im"), "lhs.im"));
        const auto& h = field(j, "rhs");
        r.rhs = cplx(number(field(h, "re"), "rhs.re"), number(field(h, "im"), "rhs.im"));
        r.defect = number(field(j, "defect"), "defect");
        r.tolerance = number(field(j, "tolerance"), "tolerance");
        r.pass = field(j, "pass").get<bool>();
        r.low_confidence = field(j, "low_confidence").get<bool>();
        r.notes = field(j, "notes").get<std::vector<std::string>>();
        for (const auto& row : field(j, "table"))
            r.table.push_back({number(field(row, "parameter"), "table.parameter"),
                               number(field(row, "defect"), "table.defect")});
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("report: ") + e.what());
    }
    return r;
}

std::string canonical_dump(const nlohmann::json& j) {
    std::string out;
    dump(j, 0, out);
    return out + "\n";
}

std::string table_csv(const VerdictReport& r) {
    std::string s = "parameter,defect\n";
    for (const auto& t : r.table) s += fmt(t.parameter) + "," + fmt(t.defect) + "\n";
    return s;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << text;
    f.close();
    if (!f) throw IoError("write failed for " + path.string());
}

EmittedPaths emit_report(const VerdictReport& r, const std::filesystem::path& dir, const std::string& stem,
                         const nlohmann::json& extra) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    json j = to_json(r);
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    EmittedPaths p{dir / (stem + ".json"), dir / (stem + ".csv")};
    write_text(p.json, canonical_dump(j));
    write_text(p.csv, table_csv(r));
    return p;
}

}  // namespace cylab
