#include "ergolang/config.hpp"

#include <fstream>

#include "ergolang/errors.hpp"

namespace ergolang {

using nlohmann::json;

const std::vector<std::string>& known_experiments() {
    static const std::vector<std::string> tags = {
        "tabulate-lambda", "certify",      "decay",    "gibbs",
        "exp-moment",      "minorization", "windowed", "simulate",
        "levelsets"};
    return tags;
}

namespace {

template <class T>
T field_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigParse(std::string("field '") + key + "': " + e.what());
    }
}

json require_object(const json& j, const char* key) {
    if (!j.contains(key)) {
        throw ConfigParse(std::string("missing required block '") + key + "'");
    }
    return j.at(key);
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
    ExperimentConfig c;

    const json pot = require_object(j, "potential");
    if (!pot.contains("terms") || !pot.at("terms").is_array() || pot.at("terms").empty()) {
        throw ConfigParse("potential.terms must be a non-empty array");
    }
    for (const auto& t : pot.at("terms")) {
        Term term;
        if (!t.contains("coefficient") || !t.contains("exponent")) {
            throw ConfigParse("potential.terms entries need coefficient and exponent");
        }
        term.coefficient = t.at("coefficient").get<double>();
        term.exponent = t.at("exponent").get<double>();
        c.potential.terms.push_back(term);
    }
    c.potential.offset = field_or(pot, "offset", 0.0);
    c.allow_marginal_exponent = field_or(pot, "allow_marginal_exponent", false);

    if (j.contains("langevin")) {
        const json lv = j.at("langevin");
        c.langevin.gamma = field_or(lv, "gamma", 1.0);
        c.langevin.temperature = field_or(lv, "temperature", 1.0);
    }
    if (j.contains("integrator")) {
        const json iv = j.at("integrator");
        const std::string scheme = field_or<std::string>(iv, "scheme", "baoab");
        if (scheme == "baoab") {
            c.integrator.scheme = Scheme::baoab_splitting;
        } else if (scheme == "euler_maruyama") {
            c.integrator.scheme = Scheme::euler_maruyama;
        } else {
            throw ConfigParse("integrator.scheme must be 'baoab' or 'euler_maruyama'");
        }
        c.integrator.dt_max = field_or(iv, "dt_max", 0.05);
        c.integrator.steps_per_period = field_or(iv, "steps_per_period", 200);
        c.integrator.h_floor = field_or(iv, "h_floor", 1e-9);
        c.integrator.record_stride = field_or(iv, "record_stride", 1);
        if (c.integrator.steps_per_period < 32) {
            throw ConfigParse("integrator.steps_per_period must be >= 32");
        }
        if (!(c.integrator.dt_max > c.integrator.h_floor && c.integrator.h_floor > 0.0)) {
            throw ConfigParse("integrator needs dt_max > h_floor > 0");
        }
    }
    if (j.contains("quadrature")) {
        const json qv = j.at("quadrature");
        c.quadrature.nodes_per_panel = field_or(qv, "nodes_per_panel", 24);
        c.quadrature.max_refinements = field_or(qv, "max_refinements", 40);
        c.quadrature.rel_tol = field_or(qv, "rel_tol", 1e-10);
        if (c.quadrature.nodes_per_panel < 8) {
            throw ConfigParse("quadrature.nodes_per_panel must be >= 8");
        }
        if (!(c.quadrature.rel_tol > 0.0 && c.quadrature.rel_tol <= 1e-4)) {
            throw ConfigParse("quadrature.rel_tol must lie in (0, 1e-4]");
        }
    }
    if (j.contains("seeds")) {
        c.master_seed = field_or<std::uint64_t>(j.at("seeds"), "master_seed", 1);
    }
    if (j.contains("output")) {
        const json ov = j.at("output");
        c.output.directory = field_or<std::string>(ov, "directory", "out");
        c.output.write_csv = field_or(ov, "write_csv", true);
        c.output.write_overlay = field_or(ov, "write_overlay", true);
    }

    const json exp = require_object(j, "experiment");
    if (!exp.contains("type")) throw ConfigParse("experiment.type is required");
    c.experiment = exp.at("type").get<std::string>();
    bool known = false;
    for (const auto& tag : known_experiments()) known = known || tag == c.experiment;
    if (!known) {
        throw UnknownExperiment("unknown experiment type '" + c.experiment + "'");
    }
    c.experiment_params = exp;
    c.experiment_params.erase("type");
    return c;
}

json serialize_config(const ExperimentConfig& c) {
    json j;
    json terms = json::array();
    for (const auto& t : c.potential.terms) {
        terms.push_back({{"coefficient", t.coefficient}, {"exponent", t.exponent}});
    }
    j["potential"] = {{"terms", terms},
                      {"offset", c.potential.offset},
                      {"allow_marginal_exponent", c.allow_marginal_exponent}};
    j["langevin"] = {{"gamma", c.langevin.gamma}, {"temperature", c.langevin.temperature}};
    j["integrator"] = {
        {"scheme", c.integrator.scheme == Scheme::baoab_splitting ? "baoab" : "euler_maruyama"},
        {"dt_max", c.integrator.dt_max},
        {"steps_per_period", c.integrator.steps_per_period},
        {"h_floor", c.integrator.h_floor},
        {"record_stride", c.integrator.record_stride}};
    j["quadrature"] = {{"nodes_per_panel", c.quadrature.nodes_per_panel},
                       {"max_refinements", c.quadrature.max_refinements},
                       {"rel_tol", c.quadrature.rel_tol}};
    j["seeds"] = {{"master_seed", c.master_seed}};
    j["output"] = {{"directory", c.output.directory},
                   {"write_csv", c.output.write_csv},
                   {"write_overlay", c.output.write_overlay}};
    json exp = c.experiment_params;
    exp["type"] = c.experiment;
    j["experiment"] = exp;
    return j;
}

void apply_override(json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw ConfigParse("override must look like path.to.key=value: " + assignment);
    }
    const std::string path = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);

    json* node = &j;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot - start);
        if (key.empty()) throw ConfigParse("override path has an empty segment: " + path);
        if (dot == std::string::npos) {
            json parsed = json::parse(value, nullptr, false);
            (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
            return;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigParse("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigParse(std::string("invalid JSON in ") + path + ": " + e.what());
    }
    for (const auto& o : overrides) apply_override(j, o);
    return parse_config(j);
}

}  // namespace ergolang
