#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rislink/sim.hpp"

namespace rislink {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<double> parse_numbers(const std::string& value, const std::string& key) {
    std::string cleaned = value;
    for (auto& c : cleaned) {
        if (c == ',') c = ' ';
    }
    std::istringstream is(cleaned);
    std::vector<double> out;
    double v = 0.0;
    while (is >> v) out.push_back(v);
    std::string rest;
    if (is.clear(), is >> rest) {
        throw std::invalid_argument("config: bad numeric value for '" + key + "'");
    }
    if (out.empty()) throw std::invalid_argument("config: empty value for '" + key + "'");
    return out;
}

double parse_one(const std::string& value, const std::string& key) {
    const auto v = parse_numbers(value, key);
    if (v.size() != 1) throw std::invalid_argument("config: expected one value for '" + key + "'");
    return v[0];
}

int parse_int(const std::string& value, const std::string& key) {
    const double v = parse_one(value, key);
    const int i = static_cast<int>(v);
    if (v != i) throw std::invalid_argument("config: expected integer for '" + key + "'");
    return i;
}

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw std::invalid_argument("config: expected boolean for '" + key + "'");
}

Vec3 parse_vec3(const std::string& value, const std::string& key) {
    const auto v = parse_numbers(value, key);
    if (v.size() != 3) throw std::invalid_argument("config: expected 3 values for '" + key + "'");
    return {v[0], v[1], v[2]};
}

} // namespace

SimConfig parse_config_text(const std::string& text) {
    SimConfig cfg = default_config();
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": empty key or value");
        }
        if (key == "scenario") {
            if (value == "los") cfg.scenario = Scenario::los;
            else if (value == "nlos") cfg.scenario = Scenario::nlos;
            else throw std::invalid_argument("config: scenario must be los or nlos");
        } else if (key == "mode") {
            if (value == "proposed") cfg.mode = EstimatorMode::proposed;
            else if (value == "onoff") cfg.mode = EstimatorMode::conventional_onoff;
            else throw std::invalid_argument("config: mode must be proposed or onoff");
        } else if (key == "phi_data") {
            if (value == "optimized") cfg.phi_data = PhiDataMode::optimized;
            else if (value == "ones") cfg.phi_data = PhiDataMode::ones;
            else throw std::invalid_argument("config: phi_data must be optimized or ones");
        } else if (key == "ap_position") {
            cfg.geometry.ap_position = parse_vec3(value, key);
        } else if (key == "user_center") {
            cfg.geometry.user_center = parse_vec3(value, key);
        } else if (key == "ris_positions") {
            cfg.geometry.ris_positions.clear();
            std::istringstream groups(value);
            std::string group;
            while (std::getline(groups, group, ';')) {
                group = trim(group);
                if (group.empty()) continue;
                cfg.geometry.ris_positions.push_back(parse_vec3(group, key));
            }
            if (cfg.geometry.ris_positions.empty()) {
                throw std::invalid_argument("config: empty ris_positions");
            }
            cfg.geometry.L = static_cast<int>(cfg.geometry.ris_positions.size());
        } else if (key == "user_radius") {
            cfg.geometry.user_radius = parse_one(value, key);
        } else if (key == "m") {
            cfg.geometry.M = parse_int(value, key);
        } else if (key == "k") {
            cfg.geometry.K = parse_int(value, key);
        } else if (key == "l") {
            cfg.geometry.L = parse_int(value, key);
        } else if (key == "n_elements") {
            cfg.geometry.N = parse_int(value, key);
        } else if (key == "code_n") {
            cfg.code_n = parse_int(value, key);
        } else if (key == "code_rate") {
            cfg.code_rate = parse_one(value, key);
        } else if (key == "code_column_weight") {
            cfg.code_column_weight = parse_int(value, key);
        } else if (key == "n_pilot") {
            cfg.n_pilot = parse_int(value, key);
        } else if (key == "pt_grid_dbm") {
            cfg.pt_grid_dbm = parse_numbers(value, key);
        } else if (key == "trials") {
            cfg.trials = parse_int(value, key);
        } else if (key == "idd_iterations") {
            cfg.idd_iterations = parse_int(value, key);
        } else if (key == "ce_iterations") {
            cfg.ce_iterations = parse_int(value, key);
        } else if (key == "bp_max_iters") {
            cfg.bp_max_iters = parse_int(value, key);
        } else if (key == "tol") {
            cfg.tol = parse_one(value, key);
        } else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(parse_one(value, key));
        } else if (key == "threads") {
            cfg.threads = parse_int(value, key);
        } else if (key == "noise_dbm_per_hz") {
            cfg.noise_dbm_per_hz = parse_one(value, key);
        } else if (key == "bandwidth_hz") {
            cfg.bandwidth_hz = parse_one(value, key);
        } else if (key == "direct_extra_loss_db") {
            cfg.direct_extra_loss_db = parse_one(value, key);
        } else if (key == "genie_csi") {
            cfg.genie_csi = parse_bool(value, key);
        } else if (key == "include_data_columns") {
            cfg.include_data_columns = parse_bool(value, key);
        } else if (key == "exclude_unconverged") {
            cfg.exclude_unconverged = parse_bool(value, key);
        } else {
            throw std::invalid_argument("config: unknown key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

SimConfig parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_config_text(buf.str());
}

} // namespace rislink
