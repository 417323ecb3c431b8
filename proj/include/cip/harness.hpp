#pragma once

#include "cip/precoders.hpp"
#include "cip/sumrate.hpp"
#include "cip/types.hpp"

#include <string>
#include <vector>

namespace cip {

struct ScenarioConfig {
    std::string id = "default";
    int K = 0, M = 0;
    double sigma2 = 1.0;
    double channel_variance = 1.0;
    double power = 1.0;
    RVector zeta;       // linear SNR targets
    RVector weights_r;  // CIMM
    RVector weights_phi;  // sum rate
    int psk_order = 4;
    PskOffset psk_offset = PskOffset::Zero;
    int trials = 1000;
    uint64_t seed = 1;
    int coherence_block = 1;
    std::vector<std::string> algorithms{"cipm"};
    double mcs_ser_target = 1e-3;
    std::vector<int> mcs_orders{2, 4, 8, 16};
    int rank1_samples = 1000;
    IotaRule iota = IotaRule::Clamped;
    bool cimrt_genie_powers = false;
    PlaneOrder cimrt_plane_order = PlaneOrder::Forward;
    bool noise = false;
    double cimm_delta = 1e-6;  // relative to P
};

struct ExperimentConfig {
    std::vector<ScenarioConfig> scenarios;
};

class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::string> v);
    const std::vector<std::string>& violations() const { return violations_; }

private:
    std::vector<std::string> violations_;
};

const std::vector<std::string>& known_algorithms();
bool is_bound_algorithm(const std::string& name);

ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "<text>");
// Re-checks a (possibly edited) scenario; returns every violation.
std::vector<std::string> validate_scenario(const ScenarioConfig& s);

struct MetricRecord {
    std::string scenario_id;
    int trial = 0;
    int slot = 0;
    std::string algorithm;
    std::string metric;
    double value = 0.0;

    bool operator==(const MetricRecord&) const = default;
};

double energy_efficiency(const RVector& rates, double power);
// sum_j log2(1 + zeta_j) / power
double energy_efficiency_from_targets(const RVector& zeta, double power);

enum class RunMode { Simulate, Bounds };

std::vector<MetricRecord> run_montecarlo(const ScenarioConfig& cfg, int threads = 1,
                                         RunMode mode = RunMode::Simulate);
std::vector<MetricRecord> run_experiment(const ExperimentConfig& cfg, int threads = 1,
                                         RunMode mode = RunMode::Simulate);

std::string format_value(double v);
void write_csv(const std::vector<MetricRecord>& rows, const std::string& path);
std::string to_csv(const std::vector<MetricRecord>& rows);
std::vector<MetricRecord> read_csv(const std::string& path);

}  // namespace cip
