#include "roadfield/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace roadfield {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

void check_known(const std::string& key) {
    const auto& keys = known_config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
        throw UsageError("unknown config key '" + key + "'");
}

} // namespace

const std::vector<std::string>& known_config_keys() {
    static const std::vector<std::string> keys = {
        // physics
        "D", "d", "mu_bar", "nu_bar", "f_prime0", "kernel", "mu_kernel", "reaction",
        // dispersion
        "mode", "eps", "L", "delta", "nodes", "dump_curves",
        // stationary
        "Y", "N", "newton_tol", "max_iters", "eps_list", "dump_profile",
        // simulate
        "model", "T", "dt", "Lx", "Ly", "dx", "dy",
        "datum_shape", "datum_amplitude", "datum_amplitude_u", "datum_radius",
        "snapshot_every", "wall_guard",
        // analysis / converge
        "experiment", "t_sample", "theta", "window_fraction", "observe_every",
        "c_probes", "eta",
        // driver
        "out_dir", "threads",
    };
    return keys;
}

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    try {
        std::size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw UsageError("key '" + key + "' expects a number, got '" + it->second + "'");
    }
}

int RunConfig::get_int(const std::string& key, int fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    try {
        std::size_t pos = 0;
        const int v = std::stoi(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw UsageError("key '" + key + "' expects an integer, got '" + it->second + "'");
    }
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw UsageError("key '" + key + "' expects true|false, got '" + it->second + "'");
}

std::vector<double> RunConfig::get_list(const std::string& key,
                                        const std::vector<double>& fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            out.push_back(std::stod(item));
        } catch (...) {
            throw UsageError("key '" + key + "' expects a comma-separated number list");
        }
    }
    return out;
}

ModelParams RunConfig::make_params() const {
    ModelParams p;
    p.D = get_double("D", 1.0);
    p.d = get_double("d", 1.0);
    p.mu_bar = get_double("mu_bar", 1.0);
    p.nu_bar = get_double("nu_bar", 1.0);
    p.f_prime0 = get_double("f_prime0", 1.0);
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return p;
}

KernelPair RunConfig::make_kernels() const {
    KernelPair k;
    const std::string nu = get_string("kernel", "cos2");
    std::string mu = get_string("mu_kernel", "proportional");
    try {
        k.nu = ExchangeKernel::from_name(nu);
        k.mu = (mu == "proportional") ? k.nu : ExchangeKernel::from_name(mu);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return k;
}

Problem RunConfig::make_problem() const {
    const ModelParams p = make_params();
    Problem prob{p, make_kernels(),
                 get_string("reaction", "logistic") == "zero" ? Reaction::zero()
                                                              : Reaction::logistic(p.f_prime0)};
    try {
        prob.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return prob;
}

RunConfig parse_config(const std::string& file_path,
                       const std::vector<std::pair<std::string, std::string>>& overrides) {
    RunConfig cfg;
    if (!file_path.empty()) {
        std::ifstream in(file_path);
        if (!in) throw UsageError("cannot read config file '" + file_path + "'");
        std::stringstream buffer;
        buffer << in.rdbuf();
        const std::string text = buffer.str();
        const std::string body = trim(text);
        if (!body.empty() && body.front() == '{') {
            // Emitted manifest: read its "config" object.
            nlohmann::json j = nlohmann::json::parse(body, nullptr, true, true);
            const nlohmann::json& c = j.contains("config") ? j.at("config") : j;
            for (auto it = c.begin(); it != c.end(); ++it) {
                check_known(it.key());
                cfg.values[it.key()] = it.value().is_string()
                                           ? it.value().get<std::string>()
                                           : it.value().dump();
            }
        } else {
            std::stringstream lines(text);
            std::string line;
            int lineno = 0;
            while (std::getline(lines, line)) {
                ++lineno;
                const auto hash = line.find('#');
                if (hash != std::string::npos) line = line.substr(0, hash);
                line = trim(line);
                if (line.empty()) continue;
                const auto eq = line.find('=');
                if (eq == std::string::npos)
                    throw UsageError("config line " + std::to_string(lineno) + ": expected key=value");
                const std::string key = trim(line.substr(0, eq));
                check_known(key);
                cfg.values[key] = trim(line.substr(eq + 1));
            }
        }
    }
    for (const auto& [key, value] : overrides) {
        check_known(key);
        cfg.values[key] = value;
    }
    return cfg;
}

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_manifest(const std::string& path, const RunConfig& config,
                    const std::map<std::string, std::string>& runtime) {
    nlohmann::json j;
    j["config"] = nlohmann::json::object();
    for (const auto& [k, v] : config.values) j["config"][k] = v;
    j["runtime"] = nlohmann::json::object();
    for (const auto& [k, v] : runtime) j["runtime"][k] = v;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest '" + path + "'");
    out << j.dump(2) << "\n";
}

} // namespace roadfield
