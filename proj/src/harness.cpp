#include "cip/harness.hpp"
#include "cip/bounds.hpp"
#include "cip/model.hpp"
#include "cip/power.hpp"
#include "rng.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

namespace cip {

double energy_efficiency(const RVector& rates, double power) {
    if (!(power > 0.0)) throw Error(Errc::InvalidArgument, "energy efficiency needs power > 0");
    return rates.sum() / power;
}

double energy_efficiency_from_targets(const RVector& zeta, double power) {
    RVector r(zeta.size());
    for (Eigen::Index j = 0; j < zeta.size(); ++j) r(j) = std::log2(1.0 + zeta(j));
    return energy_efficiency(r, power);
}

namespace {

enum Purpose : uint64_t { kChannel = 0, kSymbols = 1, kRank1 = 2, kPhases = 3, kNoise = 16 };

struct Emitter {
    const ScenarioConfig& cfg;
    std::vector<MetricRecord>& out;
    int trial, slot;
    std::string algo;

    void operator()(const std::string& metric, double v) {
        out.push_back(MetricRecord{cfg.id, trial, slot, algo, metric, v});
    }
    void snrs(const RVector& s) {
        for (Eigen::Index j = 0; j < s.size(); ++j) (*this)("per_user_snr." + std::to_string(j), s(j));
    }
};

// Cached per channel draw: nothing here depends on the symbols.
struct BlockCache {
    std::optional<BoundResult> genie, multicast, rank1, genie_rate, multicast_rate;
    std::optional<Error> genie_err, multicast_err, rank1_err, genie_rate_err, multicast_rate_err;
};

template <class F>
const BoundResult& cached(std::optional<BoundResult>& slot, std::optional<Error>& err, F&& make) {
    if (!slot && !err) {
        try {
            slot = make();
        } catch (const Error& e) {
            err = e;
        }
    }
    if (err) throw *err;
    return *slot;
}

double symbol_error_rate(const ChannelMatrix& H, const CVector& x, const SymbolVector& d,
                         const std::vector<int>& users, const std::vector<int>& orders,
                         uint64_t seed) {
    if (users.empty()) return 0.0;
    Rng rng(seed);
    const double s = std::sqrt(H.sigma2());
    const CVector y = H.H() * x;
    int errors = 0;
    for (size_t u = 0; u < users.size(); ++u) {
        const int j = users[u];
        const cplx r = y(j) + s * rng.cgauss();
        if (r == cplx(0.0, 0.0) || !detect_psk(r, orders[u], d[j]).correct) ++errors;
    }
    return static_cast<double>(errors) / users.size();
}

// Noiseless receive must sit in every user's sector for a target-driven closed
// form; the power is then scaled until the weakest user meets its target.
void closed_form_rows(const ScenarioConfig& cfg, const ChannelMatrix& H, const SymbolVector& d,
                      const CVector& x_unit, Emitter& emit, uint64_t noise_seed) {
    const CVector y = H.H() * x_unit;
    for (int j = 0; j < H.K(); ++j)
        if (y(j) == cplx(0.0, 0.0) || !detect_psk(y(j), d[j].order, d[j]).correct) {
            emit("energy_efficiency", 0.0);
            throw Error(Errc::Infeasible, "noiseless receive outside the detection sector");
        }
    double scale = 0.0;
    for (int j = 0; j < H.K(); ++j)
        scale = std::max(scale, H.sigma2() * cfg.zeta(j) / std::norm(y(j)));
    const double power = scale * x_unit.squaredNorm();
    const CVector x = std::sqrt(scale) * x_unit;
    emit("power", power);
    emit.snrs((H.H() * x).cwiseAbs2() / H.sigma2());
    if (power > 0) emit("energy_efficiency", energy_efficiency_from_targets(cfg.zeta, power));
    if (cfg.noise) {
        std::vector<int> users, orders;
        for (int j = 0; j < H.K(); ++j) {
            users.push_back(j);
            orders.push_back(d[j].order);
        }
        emit("ser", symbol_error_rate(H, x, d, users, orders, noise_seed));
    }
}

void run_algorithm(const ScenarioConfig& cfg, const std::string& algo, const ChannelMatrix& H,
                   const SymbolVector& d, BlockCache& cache, Emitter& emit, uint64_t trial_seed,
                   uint64_t noise_seed) {
    const int K = H.K();
    const double P = cfg.power;
    SumRateOptions sro;
    sro.table = default_mcs_table(cfg.mcs_ser_target, cfg.mcs_orders);
    sro.iota = cfg.iota;
    sro.seed = mix64(trial_seed ^ kPhases);

    auto all_users = [&] {
        std::vector<int> u(K), o(K);
        for (int j = 0; j < K; ++j) {
            u[j] = j;
            o[j] = d[j].order;
        }
        return std::make_pair(u, o);
    };

    auto power_bound = [&](const BoundResult& b) {
        emit("power", b.value);
        if (b.value > 0) emit("energy_efficiency", energy_efficiency_from_targets(cfg.zeta, b.value));
    };

    if (algo == "cipm") {
        const CipmSolution s = cipm_solve(H, d, cfg.zeta);
        emit("power", s.power);
        emit.snrs(s.per_user_rx.cwiseAbs2() / H.sigma2());
        if (s.power > 0) emit("energy_efficiency", energy_efficiency_from_targets(cfg.zeta, s.power));
        if (cfg.noise) {
            auto [u, o] = all_users();
            emit("ser", symbol_error_rate(H, s.x.x, d, u, o, noise_seed));
        }
    } else if (algo == "cizf") {
        const CiPrecoderOutput o = cizf_precoder(H, d, 1.0);
        closed_form_rows(cfg, H, d, o.x.x, emit, noise_seed);
    } else if (algo == "cimrt") {
        RVector p = equal_powers(K, 1.0);
        if (cfg.cimrt_genie_powers) {
            const BoundResult& g = cached(cache.genie, cache.genie_err,
                                          [&] { return genie_min_power(H, cfg.zeta); });
            if (g.powers.sum() > 0) p = g.powers;
        }
        CimrtOptions opt;
        opt.order = cfg.cimrt_plane_order;
        opt.target_weights = cfg.zeta.cwiseMax(1e-300);
        const CimrtOutput o = cimrt_precoder(H, d, p, 1.0, opt);
        closed_form_rows(cfg, H, d, o.x.x, emit, noise_seed);
    } else if (algo == "cimm") {
        const CimmSolution s = cimm_solve(H, d, cfg.weights_r, P, cfg.cimm_delta * P);
        const RVector snr = s.per_user_rx.cwiseAbs2() / H.sigma2();
        RVector rates(K);
        for (int j = 0; j < K; ++j) rates(j) = std::log2(1.0 + snr(j));
        emit("power", s.q.power);
        emit.snrs(snr);
        emit("min_weighted_snr", (snr.array() / cfg.weights_r.array()).minCoeff());
        emit("sum_rate", rates.sum());
        emit("energy_efficiency", energy_efficiency(rates, s.q.power));
        if (cfg.noise) {
            auto [u, o] = all_users();
            emit("ser", symbol_error_rate(H, s.q.x, d, u, o, noise_seed));
        }
    } else if (algo == "cisr_pa" || algo == "cisr_g") {
        const SumRateSolution s = algo == "cisr_pa" ? cisr_pa(H, d, P, cfg.weights_phi, sro)
                                                    : cisr_g(H, d, P, cfg.weights_phi, sro);
        emit("power", s.q.power);
        emit.snrs(s.per_user_snr);
        emit("sum_rate", s.weighted_sum_rate);
        emit("energy_efficiency", s.weighted_sum_rate / s.q.power);
        if (cfg.noise) {
            std::vector<int> o;
            for (int j : s.served) o.push_back(s.per_user_order[j]);
            emit("ser", symbol_error_rate(H, s.q.x, d, s.served, o, noise_seed));
        }
    } else if (algo == "zf" || algo == "mmse" || algo == "nmrt") {
        LinearPrecoder W = algo == "zf"     ? zf_precoder(H)
                           : algo == "mmse" ? mmse_precoder(H, H.sigma2(), P)
                                            : nmrt_precoder(H);
        W.powers = equal_powers(K, P);
        const RVector sinr = conventional_sinr(H, W, H.sigma2());
        RVector rates(K);
        for (int j = 0; j < K; ++j) rates(j) = std::log2(1.0 + sinr(j));
        // user-level precoders meet the budget on average, tr(W P W^H) = P
        emit("power", P);
        emit.snrs(sinr);
        emit("sum_rate", rates.sum());
        emit("energy_efficiency", energy_efficiency(rates, P));
        if (cfg.noise) {
            auto [u, o] = all_users();
            emit("ser", symbol_error_rate(H, linear_transmit(W, d), d, u, o, noise_seed));
        }
    } else if (algo == "genie") {
        power_bound(cached(cache.genie, cache.genie_err, [&] { return genie_min_power(H, cfg.zeta); }));
    } else if (algo == "multicast") {
        power_bound(cached(cache.multicast, cache.multicast_err,
                           [&] { return multicast_min_power(H, cfg.zeta); }));
    } else if (algo == "multicast_rank1") {
        power_bound(cached(cache.rank1, cache.rank1_err, [&] {
            return multicast_min_power_rank1(H, cfg.zeta, cfg.rank1_samples,
                                             mix64(trial_seed ^ kRank1));
        }));
    } else if (algo == "genie_sumrate") {
        emit("sum_rate",
             cached(cache.genie_rate, cache.genie_rate_err, [&] { return genie_sumrate(H, P); }).value);
    } else if (algo == "multicast_sumrate") {
        emit("sum_rate", cached(cache.multicast_rate, cache.multicast_rate_err, [&] {
                             return multicast_max_sumrate(H, P, cfg.weights_phi);
                         }).value);
    } else {
        throw Error(Errc::InvalidArgument, "unknown algorithm '" + algo + "'");
    }
}

std::vector<MetricRecord> run_trial(const ScenarioConfig& cfg, int trial,
                                    const std::vector<std::string>& algos) {
    std::vector<MetricRecord> out;
    const uint64_t tseed = stream_seed(cfg.seed, static_cast<uint64_t>(trial), 0, kChannel);
    const ChannelMatrix H =
        generate_channel(cfg.K, cfg.M, cfg.channel_variance, tseed, cfg.sigma2);
    BlockCache cache;
    for (int slot = 0; slot < cfg.coherence_block; ++slot) {
        const SymbolVector d =
            random_symbols(cfg.K, cfg.psk_order,
                           stream_seed(cfg.seed, static_cast<uint64_t>(trial), slot + 1, kSymbols),
                           cfg.psk_offset);
        for (size_t a = 0; a < algos.size(); ++a) {
            Emitter emit{cfg, out, trial, slot, algos[a]};
            const uint64_t nseed =
                stream_seed(cfg.seed, static_cast<uint64_t>(trial), slot + 1, kNoise + a);
            try {
                run_algorithm(cfg, algos[a], H, d, cache, emit, tseed, nseed);
            } catch (const Error& e) {
                emit("failure", static_cast<double>(static_cast<int>(e.code())));
            }
        }
    }
    return out;
}

}  // namespace

std::vector<MetricRecord> run_montecarlo(const ScenarioConfig& cfg, int threads, RunMode mode) {
    if (auto v = validate_scenario(cfg); !v.empty()) throw ConfigError(std::move(v));
    std::vector<std::string> algos;
    for (const auto& a : cfg.algorithms)
        if (mode == RunMode::Simulate || is_bound_algorithm(a)) algos.push_back(a);
    if (mode == RunMode::Bounds && algos.empty()) {
        for (const auto& a : known_algorithms())
            if (is_bound_algorithm(a) && (cfg.K <= cfg.M || a.rfind("multicast", 0) == 0))
                algos.push_back(a);
    }

    std::vector<std::vector<MetricRecord>> per(cfg.trials);
    if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min(threads, cfg.trials);
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&] {
        try {
            for (int t; (t = next.fetch_add(1)) < cfg.trials;) per[t] = run_trial(cfg, t, algos);
        } catch (...) {
            std::lock_guard<std::mutex> lk(failure_mu);
            if (!failure) failure = std::current_exception();
            next = cfg.trials;
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    std::vector<MetricRecord> rows;
    for (auto& v : per)
        for (auto& r : v) rows.push_back(std::move(r));
    return rows;
}

std::vector<MetricRecord> run_experiment(const ExperimentConfig& cfg, int threads, RunMode mode) {
    std::vector<MetricRecord> rows;
    for (const auto& s : cfg.scenarios) {
        auto r = run_montecarlo(s, threads, mode);
        rows.insert(rows.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
    }
    return rows;
}

}  // namespace cip
