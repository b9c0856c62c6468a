// Command-line front end: Monte-Carlo sweeps to CSV plus parity-check matrix
// export for cross-validation with external decoders.

#include <cstdio>
#include <fstream>
#include <string>

#include <CLI11.hpp>

#include "rislink/kernels.hpp"
#include "rislink/ldpc.hpp"
#include "rislink/sim.hpp"

int main(int argc, char** argv) {
    CLI::App app{"rislink: multi-RIS MIMO uplink link-level simulator"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "run a power sweep and write CSV results");
    std::string config_path, out_path, trace_path, scenario, mode;
    int pilots = -1, rho = -1, trials = -1, threads = -1;
    long long seed = -1;
    sim->add_option("--config", config_path, "config file (key = value), defaults otherwise")
        ->check(CLI::ExistingFile);
    sim->add_option("--out", out_path, "output CSV path")->required();
    sim->add_option("--scenario", scenario, "los|nlos override");
    sim->add_option("--pilots", pilots, "pilot symbol count override");
    sim->add_option("--rho", rho, "channel-estimation refinement iterations override");
    sim->add_option("--trials", trials, "Monte-Carlo trials per grid point");
    sim->add_option("--seed", seed, "master seed override");
    sim->add_option("--mode", mode, "proposed|onoff override");
    sim->add_option("--trace", trace_path, "also write per-iteration NMSE traces");
    sim->add_option("--threads", threads, "worker threads (0 = hardware)");

    // export-alist
    auto* alist = app.add_subcommand("export-alist", "write the parity-check matrix in alist form");
    std::string alist_out;
    int code_n = 512, col_weight = 3;
    double rate = 0.5;
    long long code_seed = 1;
    alist->add_option("--out", alist_out, "output alist path")->required();
    alist->add_option("--code-n", code_n, "block length in bits");
    alist->add_option("--rate", rate, "code rate");
    alist->add_option("--column-weight", col_weight, "regular column weight");
    alist->add_option("--seed", code_seed, "construction seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            rislink::SimConfig cfg = config_path.empty()
                                         ? rislink::default_config()
                                         : rislink::parse_config_file(config_path);
            if (!scenario.empty()) {
                if (scenario == "los") cfg.scenario = rislink::Scenario::los;
                else if (scenario == "nlos") cfg.scenario = rislink::Scenario::nlos;
                else throw std::invalid_argument("--scenario must be los or nlos");
            }
            if (!mode.empty()) {
                if (mode == "proposed") cfg.mode = rislink::EstimatorMode::proposed;
                else if (mode == "onoff") cfg.mode = rislink::EstimatorMode::conventional_onoff;
                else throw std::invalid_argument("--mode must be proposed or onoff");
            }
            if (pilots >= 0) cfg.n_pilot = pilots;
            if (rho >= 0) cfg.ce_iterations = rho;
            if (trials > 0) cfg.trials = trials;
            if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
            if (threads >= 0) cfg.threads = threads;
            cfg.validate();

            std::printf("kernels: %s backend\n", rislink::kernels::backend_name());
            std::printf("sweep: %zu grid points x %d trials, scenario %s, mode %s\n",
                        cfg.pt_grid_dbm.size(), cfg.trials,
                        cfg.scenario == rislink::Scenario::los ? "los" : "nlos",
                        cfg.mode == rislink::EstimatorMode::proposed ? "proposed" : "onoff");
            const rislink::SweepResult result = rislink::run_sweep(cfg);
            rislink::emit_csv(result, out_path);
            std::printf("wrote %s\n", out_path.c_str());
            if (!trace_path.empty()) {
                rislink::emit_trace_csv(result, trace_path);
                std::printf("wrote %s\n", trace_path.c_str());
            }
        } else if (alist->parsed()) {
            const auto code = rislink::LdpcCode::construct_regular(
                code_n, rate, col_weight, static_cast<std::uint64_t>(code_seed));
            std::ofstream f(alist_out);
            if (!f) throw std::runtime_error("cannot open " + alist_out);
            code.write_alist(f);
            std::printf("wrote %s (%d x %d, column weight %d)\n", alist_out.c_str(),
                        code.m(), code.n(), code.column_weight());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
