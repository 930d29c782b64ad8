// Run configuration: a flat key=value view merged from a config file (or a
// previously emitted JSON manifest) and command-line overrides. Unknown keys
// are usage errors; all numeric output is printed with 17 significant
// digits so a manifest round-trips bitwise.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "roadfield/params.hpp"
#include "roadfield/simulate.hpp"

namespace roadfield {

class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

struct RunConfig {
    std::map<std::string, std::string> values;

    bool has(const std::string& key) const { return values.count(key) != 0; }
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

    ModelParams make_params() const;   // validates against ModelParams invariants
    KernelPair make_kernels() const;   // kernel= and mu_kernel= (or "proportional")
    Problem make_problem() const;
};

// The full key registry; parse rejects anything else by name.
const std::vector<std::string>& known_config_keys();

// Reads a flat key=value file ('#' comments allowed) or the "config"
// object of an emitted JSON manifest, then applies flag overrides.
RunConfig parse_config(const std::string& file_path,
                       const std::vector<std::pair<std::string, std::string>>& overrides);

// 17-significant-digit decimal rendering; round-trips doubles exactly.
std::string format_g17(double v);

// Serializes {"config": values, "runtime": extra} to path.
void write_manifest(const std::string& path, const RunConfig& config,
                    const std::map<std::string, std::string>& runtime);

} // namespace roadfield
