#pragma once

/// Monte-Carlo orchestration: configuration (defaults mirror the evaluated
/// system), per-trial pipeline, power sweeps with a bounded worker pool and
/// CSV emission. Per-trial randomness derives from (seed, power, trial), so
/// serial and parallel sweeps emit identical bytes.

#include <cstdint>
#include <string>
#include <vector>

#include "rislink/channel.hpp"
#include "rislink/estimator.hpp"

namespace rislink {

enum class EstimatorMode { proposed, conventional_onoff };
enum class PhiDataMode { optimized, ones };

struct SimConfig {
    SystemGeometry geometry;
    Scenario scenario = Scenario::los;
    int code_n = 512;
    double code_rate = 0.5;
    int code_column_weight = 3;
    int n_pilot = 16;
    std::vector<double> pt_grid_dbm;
    int trials = 200;
    int idd_iterations = 2;
    int ce_iterations = 1;  // refinement rounds rho
    int bp_max_iters = 50;
    double tol = 1e-3;
    std::uint64_t seed = 1;
    EstimatorMode mode = EstimatorMode::proposed;
    int threads = 0;  // 0 = hardware concurrency
    double noise_dbm_per_hz = -170.0;
    double bandwidth_hz = 1e6;
    double direct_extra_loss_db = 0.0;
    bool genie_csi = false;
    bool include_data_columns = true;
    bool exclude_unconverged = true;
    PhiDataMode phi_data = PhiDataMode::optimized;

    double sigma_n2() const;
    void validate() const;
};

/// Defaults for the evaluated system: 8-antenna AP at the origin, two
/// 16-element surfaces at (500, +/-10, 0), four users in a 5 m disc around
/// (500, 0, 0), -170 dBm/Hz noise over 1 MHz, rate-1/2 length-512 code.
SimConfig default_config();

/// key = value text, '#' comments; unknown keys are rejected.
SimConfig parse_config_file(const std::string& path);
SimConfig parse_config_text(const std::string& text);

double dbm_to_watt(double dbm);

struct TrialRecord {
    double nmse_direct = 0.0;
    double nmse_cascaded = 0.0;
    double ber = 0.0;
    int iterations_used = 0;
    double lambda_cond = 0.0;
    int pilots_used = 0;
    int converged_users = 0;
    double nmse_coarse = 0.0;
    std::vector<double> nmse_trace;
};

/// Everything the transmitter side produces for one block, deterministic in
/// (seed, pt_dbm, trial_index). Exposed so reference pipelines in tests can
/// share the exact realization.
struct TrialSetup {
    ChannelSet ch;
    CascadedMatrices casc;
    PacketLayout layout;
    PilotBook book;
    ReflectionSchedule schedule;
    std::vector<std::vector<std::uint8_t>> info_bits;  // per user
    std::vector<std::vector<std::uint8_t>> codewords;  // per user
    CMat symbols;  // K x T
    CMat rx;       // M x T
};

TrialSetup make_trial_setup(const SimConfig& cfg, double pt_dbm, int trial_index,
                            const LdpcCode& code);

TrialRecord run_trial(const SimConfig& cfg, double pt_dbm, int trial_index,
                      const LdpcCode& code);
/// Convenience overload constructing the code from the config.
TrialRecord run_trial(const SimConfig& cfg, double pt_dbm, int trial_index);

struct SweepPoint {
    double pt_dbm = 0.0;
    double nmse_direct_mean = 0.0;
    double nmse_cascaded_mean = 0.0;
    double ber_mean = 0.0;
    double nmse_ci = 0.0;
    double ber_ci = 0.0;
    double mean_iters = 0.0;
    double mean_cond = 0.0;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    std::vector<std::vector<TrialRecord>> records;  // per point, per trial
};

SweepResult run_sweep(const SimConfig& cfg);

/// Fixed 8-column schema, one row per grid point, full-precision decimals.
void emit_csv(const SweepResult& result, const std::string& path);
/// Optional per-iteration oracle NMSE traces.
void emit_trace_csv(const SweepResult& result, const std::string& path);

} // namespace rislink
