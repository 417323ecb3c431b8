// Command-line front end. Talks to the library only through cip.h.
#include "cip/cip.h"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <map>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitOther = 1;

int report_failure(const char* what, cip_status s) {
    std::fprintf(stderr, "%s: %s: %s\n", what, cip_status_name(s), cip_last_error());
    return s == CIP_CONFIG_ERROR ? kExitConfig : kExitOther;
}

void print_summary(const cip_table* t) {
    // mean per (scenario, algorithm, metric); per-user metrics folded together
    std::map<std::tuple<std::string, std::string, std::string>, std::pair<double, long>> acc;
    const size_t n = cip_table_size(t);
    for (size_t i = 0; i < n; ++i) {
        cip_row r;
        if (cip_table_row(t, i, &r) != CIP_OK) continue;
        std::string metric = r.metric;
        if (auto dot = metric.find('.'); dot != std::string::npos) metric.resize(dot);
        auto& a = acc[{r.scenario_id, r.algorithm, metric}];
        a.first += r.value;
        a.second += 1;
    }
    std::printf("%zu rows\n", n);
    std::printf("%-16s %-22s %-20s %10s %14s\n", "scenario", "algorithm", "metric", "count", "mean");
    for (const auto& [key, a] : acc) {
        const auto& [sc, alg, metric] = key;
        if (metric == "failure")
            std::printf("%-16s %-22s %-20s %10ld %14s\n", sc.c_str(), alg.c_str(), metric.c_str(),
                        a.second, "-");
        else
            std::printf("%-16s %-22s %-20s %10ld %14.6g\n", sc.c_str(), alg.c_str(), metric.c_str(),
                        a.second, a.first / a.second);
    }
}

int run_batch(const std::string& config, const std::string& out_dir, cip_run_mode mode,
              const char* file_name, const uint64_t* seed, const int* trials, int threads) {
    cip_config* cfg = nullptr;
    if (cip_status s = cip_config_load(config.c_str(), &cfg); s != CIP_OK)
        return report_failure("config", s);
    if (seed) cip_config_set_seed(cfg, *seed);
    if (trials) {
        if (cip_status s = cip_config_set_trials(cfg, *trials); s != CIP_OK) {
            cip_config_free(cfg);
            return report_failure("config", s);
        }
    }
    cip_table* table = nullptr;
    cip_status s = cip_run(cfg, mode, threads, &table);
    cip_config_free(cfg);
    if (s != CIP_OK) return report_failure("run", s);

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        std::fprintf(stderr, "cannot create %s: %s\n", out_dir.c_str(), ec.message().c_str());
        cip_table_free(table);
        return kExitOther;
    }
    const std::string path = (fs::path(out_dir) / file_name).string();
    s = cip_table_write_csv(table, path.c_str());
    if (s != CIP_OK) {
        cip_table_free(table);
        return report_failure("write", s);
    }
    print_summary(table);
    std::printf("wrote %s\n", path.c_str());
    cip_table_free(table);
    return 0;
}

int run_oneshot(int K, int M, int psk, const std::string& alg_name, uint64_t seed, double power,
                double snr, double sigma2) {
    cip_algorithm alg;
    if (cip_algorithm_from_name(alg_name.c_str(), &alg) != CIP_OK) {
        std::fprintf(stderr, "%s\n", cip_last_error());
        return kExitConfig;
    }
    cip_channel* ch = nullptr;
    if (cip_status s = cip_channel_generate(K, M, 1.0, seed, sigma2, &ch); s != CIP_OK) {
        std::fprintf(stderr, "channel: %s: %s\n", cip_status_name(s), cip_last_error());
        return s == CIP_INVALID_ARGUMENT ? kExitConfig : kExitNumerical;
    }
    std::vector<int> idx(K);
    if (cip_status s = cip_symbols_draw(K, psk, seed + 1, idx.data()); s != CIP_OK) {
        std::fprintf(stderr, "symbols: %s: %s\n", cip_status_name(s), cip_last_error());
        cip_channel_free(ch);
        return kExitConfig;
    }
    std::vector<double> targets(K, snr);
    cip_request req{alg, psk, idx.data(), targets.data(), nullptr, power};
    cip_solution* sol = nullptr;
    cip_status s = cip_solve(ch, &req, &sol);
    if (s != CIP_OK) {
        std::fprintf(stderr, "solve: %s: %s\n", cip_status_name(s), cip_last_error());
        cip_channel_free(ch);
        return s == CIP_INVALID_ARGUMENT ? kExitConfig : kExitNumerical;
    }

    std::vector<double> h(2 * K * M), x(2 * M), rx(2 * K), sn(K);
    cip_channel_data(ch, h.data(), h.size());
    cip_solution_x(sol, x.data(), x.size());
    cip_solution_rx(sol, rx.data(), rx.size());
    cip_solution_snr(sol, sn.data(), sn.size());

    std::printf("K=%d M=%d psk=%d seed=%llu\n", K, M, psk, static_cast<unsigned long long>(seed));
    std::printf("symbols:");
    for (int v : idx) std::printf(" %d", v);
    std::printf("\nH:\n");
    for (int j = 0; j < K; ++j) {
        std::printf(" ");
        for (int m = 0; m < M; ++m) {
            const size_t o = 2 * (static_cast<size_t>(j) * M + m);
            std::printf(" %+.6f%+.6fi", h[o], h[o + 1]);
        }
        std::printf("\n");
    }
    std::printf("x:");
    for (int m = 0; m < M; ++m) std::printf(" %+.6f%+.6fi", x[2 * m], x[2 * m + 1]);
    std::printf("\nrx:");
    for (int j = 0; j < K; ++j) std::printf(" %+.6f%+.6fi", rx[2 * j], rx[2 * j + 1]);
    std::printf("\nsnr:");
    for (double v : sn) std::printf(" %.6g", v);
    std::printf("\n%s", cip_solution_report(sol));
    cip_solution_free(sol);
    cip_channel_free(ch);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Symbol-level constructive-interference precoding simulator"};
    app.require_subcommand(1);

    std::string config, out_dir;
    uint64_t seed = 0;
    int trials = 0, threads = 0;

    auto* sim = app.add_subcommand("simulate", "Monte-Carlo run, writes <out>/metrics.csv");
    sim->add_option("--config", config, "scenario file")->required()->check(CLI::ExistingFile);
    sim->add_option("--out", out_dir, "output directory")->required();
    auto* seed_opt = sim->add_option("--seed", seed, "override every scenario seed");
    auto* trials_opt = sim->add_option("--trials", trials, "override every scenario trial count");
    sim->add_option("--threads", threads, "worker threads (0 = all cores)");

    auto* bnd = app.add_subcommand("bound", "bound computation, writes <out>/bounds.csv");
    bnd->add_option("--config", config, "scenario file")->required()->check(CLI::ExistingFile);
    bnd->add_option("--out", out_dir, "output directory")->required();
    bnd->add_option("--threads", threads, "worker threads (0 = all cores)");

    int K = 2, M = 2, psk = 4;
    std::string algorithm = "cipm";
    uint64_t one_seed = 1;
    double power = 1.0, snr = 1.0, sigma2 = 1.0;
    auto* one = app.add_subcommand("oneshot", "solve one random instance and print diagnostics");
    one->add_option("--K", K, "users")->required();
    one->add_option("--M", M, "transmit antennas")->required();
    one->add_option("--psk", psk, "PSK order")->default_val(4);
    one->add_option("--algorithm", algorithm, "cipm|cizf|cimrt|cimm|cisr_pa|cisr_g|zf|mmse|nmrt")
        ->default_val("cipm");
    one->add_option("--seed", one_seed, "channel and symbol seed")->default_val(1);
    one->add_option("--power", power, "power budget")->default_val(1.0);
    one->add_option("--snr", snr, "linear SNR target for every user")->default_val(1.0);
    one->add_option("--sigma2", sigma2, "noise variance")->default_val(1.0);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    if (*sim)
        return run_batch(config, out_dir, CIP_RUN_SIMULATE, "metrics.csv",
                         seed_opt->count() ? &seed : nullptr,
                         trials_opt->count() ? &trials : nullptr, threads);
    if (*bnd) return run_batch(config, out_dir, CIP_RUN_BOUNDS, "bounds.csv", nullptr, nullptr, threads);
    return run_oneshot(K, M, psk, algorithm, one_seed, power, snr, sigma2);
}
