#include "mgstab/microgrid.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace mgstab {

namespace {

using nlohmann::json;

void require(bool ok, const std::string& field, const std::string& what) {
    if (!ok) {
        throw ConfigError("config field '" + field + "': " + what);
    }
}

std::string indexed(const std::string& array, std::size_t i, const std::string& field) {
    return array + "[" + std::to_string(i) + "]." + field;
}

double get_number(const json& obj, const std::string& context, const std::string& key) {
    if (!obj.contains(key)) {
        throw ConfigError("config field '" + context + key + "': missing");
    }
    if (!obj[key].is_number()) {
        throw ConfigError("config field '" + context + key + "': not a number");
    }
    return obj[key].get<double>();
}

double get_number_or(const json& obj, const std::string& context, const std::string& key,
                     double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) {
        throw ConfigError("config field '" + context + key + "': not a number");
    }
    return obj[key].get<double>();
}

}  // namespace

void validate(const MicrogridConfig& cfg) {
    require(!cfg.dgs.empty(), "dgs", "at least one DG required");
    require(cfg.v_nominal > 0.0, "v_nominal", "must be > 0");
    require(cfg.omega_nominal > 0.0, "omega_nominal", "must be > 0");
    require(cfg.phase_factor > 0.0, "phase_factor", "must be > 0");
    for (std::size_t i = 0; i < cfg.dgs.size(); ++i) {
        const DgParams& dg = cfg.dgs[i];
        require(dg.m > 0.0, indexed("dgs", i, "m"), "must be > 0");
        require(dg.n >= 0.0, indexed("dgs", i, "n"), "must be >= 0");
        require(dg.omega_set > 0.0, indexed("dgs", i, "omega_set"), "must be > 0");
        require(dg.e_set > 0.0, indexed("dgs", i, "e_set"), "must be > 0");
        require(dg.w_f > 0.0, indexed("dgs", i, "w_f"), "must be > 0");
        require(dg.inductance > 0.0, indexed("dgs", i, "L"), "must be > 0");
        require(dg.resistance >= 0.0, indexed("dgs", i, "r"), "must be >= 0");
        require(std::isfinite(dg.m) && std::isfinite(dg.n) && std::isfinite(dg.omega_set) &&
                    std::isfinite(dg.e_set) && std::isfinite(dg.w_f) &&
                    std::isfinite(dg.inductance) && std::isfinite(dg.resistance),
                indexed("dgs", i, "*"), "must be finite");
    }
    require(!cfg.loads.empty(), "loads", "at least one load required");
    double p_total = 0.0;
    double q_total = 0.0;
    for (std::size_t i = 0; i < cfg.loads.size(); ++i) {
        require(cfg.loads[i].p_rated >= 0.0, indexed("loads", i, "p_rated"), "must be >= 0");
        require(std::isfinite(cfg.loads[i].p_rated) && std::isfinite(cfg.loads[i].q_rated),
                indexed("loads", i, "*"), "must be finite");
        p_total += cfg.loads[i].p_rated;
        q_total += cfg.loads[i].q_rated;
    }
    require(p_total != 0.0 || q_total != 0.0, "loads",
            "unified load must have nonzero apparent power");
    for (std::size_t i = 0; i < cfg.feeders.size(); ++i) {
        require(cfg.feeders[i].r_line >= 0.0, indexed("feeders", i, "r_line"), "must be >= 0");
        require(cfg.feeders[i].x_line >= 0.0, indexed("feeders", i, "x_line"), "must be >= 0");
    }
}

void validate(const SimplifiedModel& model) {
    require(!model.dgs.empty(), "dgs", "at least one DG required");
    require(model.z_load_mag > 0.0, "z_load_mag", "must be > 0");
    require(std::abs(model.theta_z) < M_PI / 2.0, "theta_z",
            "must lie in (-pi/2, pi/2) for a passive load");
    require(model.v_nominal > 0.0, "v_nominal", "must be > 0");
    require(model.omega_nominal > 0.0, "omega_nominal", "must be > 0");
    require(model.phase_factor > 0.0, "phase_factor", "must be > 0");
}

std::pair<double, double> aggregate_loads(const std::vector<LoadSpec>& loads) {
    if (loads.empty()) {
        throw ConfigError("config field 'loads': at least one load required");
    }
    double p = 0.0;
    double q = 0.0;
    for (const LoadSpec& load : loads) {
        p += load.p_rated;
        q += load.q_rated;
    }
    return {p, q};
}

std::pair<double, double> load_impedance_from_rating(double p_total, double q_total,
                                                     double v_nominal, double phase_factor) {
    const double s_total = std::hypot(p_total, q_total);
    if (s_total == 0.0) {
        throw ConfigError("config field 'loads': unified load must have nonzero apparent power");
    }
    if (v_nominal <= 0.0) {
        throw ConfigError("config field 'v_nominal': must be > 0");
    }
    const double z = phase_factor * v_nominal * v_nominal / s_total;
    const double theta = std::atan2(q_total, p_total);
    return {z, theta};
}

SimplifiedModel build_simplified_model(const MicrogridConfig& cfg) {
    validate(cfg);
    const auto [p_total, q_total] = aggregate_loads(cfg.loads);
    const auto [z, theta] =
        load_impedance_from_rating(p_total, q_total, cfg.v_nominal, cfg.phase_factor);
    SimplifiedModel model;
    model.dgs = cfg.dgs;  // coupling impedances unchanged; feeders dropped
    model.z_load_mag = z;
    model.theta_z = theta;
    model.phase_factor = cfg.phase_factor;
    model.v_nominal = cfg.v_nominal;
    model.omega_nominal = cfg.omega_nominal;
    return model;
}

MicrogridConfig table1_fixture(double m_base, double n_base) {
    MicrogridConfig cfg;
    cfg.v_nominal = 180.0;
    cfg.omega_nominal = 2.0 * M_PI * 60.0;
    cfg.phase_factor = 1.5;

    const double couplings[3][2] = {{1.57e-3, 0.19}, {2.46e-3, 0.29}, {2.0e-3, 0.24}};
    for (int i = 0; i < 3; ++i) {
        DgParams dg;
        dg.m = m_base / static_cast<double>(i + 1);
        dg.n = n_base / static_cast<double>(i + 1);
        dg.omega_set = 380.0;
        // set value above nominal so the droop- and coupling-depressed bus
        // runs near 180 V and carries the full rated load
        dg.e_set = 210.0;
        dg.w_f = 31.85;
        dg.inductance = couplings[i][0];
        dg.resistance = couplings[i][1];
        cfg.dgs.push_back(dg);
    }

    cfg.loads = {{6000.0, 4000.0}, {2000.0, 1000.0}, {4000.0, 3000.0}};
    cfg.feeders = {{40.8e-3, 34.0e-3}, {16.3e-3, 13.6e-3}, {24.5e-3, 20.4e-3}};
    return cfg;
}

MicrogridConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& err) {
        throw ConfigError(std::string("config is not valid JSON: ") + err.what());
    }
    if (!doc.is_object()) {
        throw ConfigError("config root must be a JSON object");
    }

    MicrogridConfig cfg;
    cfg.v_nominal = get_number(doc, "", "v_nominal");
    cfg.omega_nominal = get_number(doc, "", "omega_nominal");
    cfg.phase_factor = get_number_or(doc, "", "phase_factor", 1.5);

    if (!doc.contains("dgs") || !doc["dgs"].is_array()) {
        throw ConfigError("config field 'dgs': missing or not an array");
    }
    for (std::size_t i = 0; i < doc["dgs"].size(); ++i) {
        const json& j = doc["dgs"][i];
        const std::string ctx = "dgs[" + std::to_string(i) + "].";
        DgParams dg;
        dg.m = get_number(j, ctx, "m");
        dg.n = get_number(j, ctx, "n");
        dg.omega_set = get_number(j, ctx, "omega_set");
        dg.e_set = get_number_or(j, ctx, "e_set", cfg.v_nominal);
        dg.w_f = get_number(j, ctx, "w_f");
        dg.inductance = get_number(j, ctx, "L");
        dg.resistance = get_number(j, ctx, "r");
        cfg.dgs.push_back(dg);
    }

    if (!doc.contains("loads") || !doc["loads"].is_array()) {
        throw ConfigError("config field 'loads': missing or not an array");
    }
    for (std::size_t i = 0; i < doc["loads"].size(); ++i) {
        const json& j = doc["loads"][i];
        const std::string ctx = "loads[" + std::to_string(i) + "].";
        cfg.loads.push_back({get_number(j, ctx, "p_rated"), get_number(j, ctx, "q_rated")});
    }

    if (doc.contains("feeders")) {
        if (!doc["feeders"].is_array()) {
            throw ConfigError("config field 'feeders': not an array");
        }
        for (std::size_t i = 0; i < doc["feeders"].size(); ++i) {
            const json& j = doc["feeders"][i];
            const std::string ctx = "feeders[" + std::to_string(i) + "].";
            cfg.feeders.push_back({get_number(j, ctx, "r_line"), get_number(j, ctx, "x_line")});
        }
    }

    validate(cfg);
    return cfg;
}

MicrogridConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_to_json(const MicrogridConfig& cfg) {
    json doc;
    doc["v_nominal"] = cfg.v_nominal;
    doc["omega_nominal"] = cfg.omega_nominal;
    doc["phase_factor"] = cfg.phase_factor;
    doc["dgs"] = json::array();
    for (const DgParams& dg : cfg.dgs) {
        doc["dgs"].push_back({{"m", dg.m},
                              {"n", dg.n},
                              {"omega_set", dg.omega_set},
                              {"e_set", dg.e_set},
                              {"w_f", dg.w_f},
                              {"L", dg.inductance},
                              {"r", dg.resistance}});
    }
    doc["loads"] = json::array();
    for (const LoadSpec& load : cfg.loads) {
        doc["loads"].push_back({{"p_rated", load.p_rated}, {"q_rated", load.q_rated}});
    }
    doc["feeders"] = json::array();
    for (const FeederSegment& seg : cfg.feeders) {
        doc["feeders"].push_back({{"r_line", seg.r_line}, {"x_line", seg.x_line}});
    }
    return doc.dump();
}

std::uint64_t config_digest(const MicrogridConfig& cfg) {
    const std::string canonical = config_to_json(cfg);
    std::uint64_t hash = 1469598103934665603ull;  // FNV-1a offset basis
    for (unsigned char c : canonical) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

}  // namespace mgstab
