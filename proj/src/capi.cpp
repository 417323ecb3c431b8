#include "cip/cip.h"

#include "cip/bounds.hpp"
#include "cip/harness.hpp"
#include "cip/model.hpp"
#include "cip/power.hpp"
#include "cip/precoders.hpp"
#include "cip/sumrate.hpp"

#include <cmath>
#include <algorithm>
#include <cstring>
#include <memory>
#include <sstream>
#include <string>

struct cip_config {
    cip::ExperimentConfig cfg;
};

struct cip_table {
    std::vector<cip::MetricRecord> rows;
};

struct cip_channel {
    cip::ChannelMatrix H;
};

struct cip_solution {
    int K = 0, M = 0;
    cip::CVector x, rx;
    cip::RVector snr;
    double power = 0.0, value = 0.0;
    std::string report;
};

namespace {

thread_local std::string g_last_error;

cip_status to_status(cip::Errc c) {
    switch (c) {
    case cip::Errc::InvalidArgument: return CIP_INVALID_ARGUMENT;
    case cip::Errc::DimensionMismatch: return CIP_DIMENSION_MISMATCH;
    case cip::Errc::DegenerateChannel: return CIP_DEGENERATE_CHANNEL;
    case cip::Errc::SingularChannel: return CIP_SINGULAR_CHANNEL;
    case cip::Errc::IllConditioned: return CIP_ILL_CONDITIONED;
    case cip::Errc::Infeasible: return CIP_INFEASIBLE;
    case cip::Errc::SolverFailure: return CIP_SOLVER_FAILURE;
    case cip::Errc::UnsupportedShape: return CIP_UNSUPPORTED_SHAPE;
    case cip::Errc::RotationInfeasible: return CIP_ROTATION_INFEASIBLE;
    case cip::Errc::AmbiguousDetection: return CIP_AMBIGUOUS_DETECTION;
    case cip::Errc::Config: return CIP_CONFIG_ERROR;
    case cip::Errc::Io: return CIP_IO_ERROR;
    }
    return CIP_INTERNAL_ERROR;
}

template <class F>
cip_status guarded(F&& f) {
    try {
        g_last_error.clear();
        f();
        return CIP_OK;
    } catch (const cip::Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return CIP_INTERNAL_ERROR;
    } catch (...) {
        g_last_error = "unknown exception";
        return CIP_INTERNAL_ERROR;
    }
}

cip_status null_arg(const char* what) {
    g_last_error = std::string("null argument: ") + what;
    return CIP_INVALID_ARGUMENT;
}

void copy_complex(const cip::CVector& v, double* out, size_t len) {
    if (len < 2 * static_cast<size_t>(v.size()))
        throw cip::Error(cip::Errc::DimensionMismatch, "output buffer too small");
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out[2 * i] = v(i).real();
        out[2 * i + 1] = v(i).imag();
    }
}

const char* kAlgNames[] = {"cipm", "cizf", "cimrt", "cimm", "cisr_pa", "cisr_g", "zf", "mmse", "nmrt"};

}  // namespace

extern "C" {

const char* cip_last_error(void) { return g_last_error.c_str(); }

const char* cip_status_name(cip_status s) {
    switch (s) {
    case CIP_OK: return "ok";
    case CIP_INVALID_ARGUMENT: return "invalid-argument";
    case CIP_DIMENSION_MISMATCH: return "dimension-mismatch";
    case CIP_DEGENERATE_CHANNEL: return "degenerate-channel";
    case CIP_SINGULAR_CHANNEL: return "singular-channel";
    case CIP_ILL_CONDITIONED: return "ill-conditioned";
    case CIP_INFEASIBLE: return "infeasible";
    case CIP_SOLVER_FAILURE: return "solver-failure";
    case CIP_UNSUPPORTED_SHAPE: return "unsupported-shape";
    case CIP_ROTATION_INFEASIBLE: return "rotation-infeasible";
    case CIP_AMBIGUOUS_DETECTION: return "ambiguous-detection";
    case CIP_CONFIG_ERROR: return "config-error";
    case CIP_IO_ERROR: return "io-error";
    case CIP_INTERNAL_ERROR: return "internal-error";
    }
    return "unknown";
}

const char* cip_version(void) { return "1.0.0"; }

cip_status cip_config_load(const char* path, cip_config** out) {
    if (!path) return null_arg("path");
    if (!out) return null_arg("out");
    *out = nullptr;
    return guarded([&] { *out = new cip_config{cip::parse_config(path)}; });
}

cip_status cip_config_parse(const char* text, cip_config** out) {
    if (!text) return null_arg("text");
    if (!out) return null_arg("out");
    *out = nullptr;
    return guarded([&] { *out = new cip_config{cip::parse_config_text(text)}; });
}

void cip_config_free(cip_config* cfg) { delete cfg; }

size_t cip_config_scenario_count(const cip_config* cfg) {
    return cfg ? cfg->cfg.scenarios.size() : 0;
}

cip_status cip_config_set_seed(cip_config* cfg, uint64_t seed) {
    if (!cfg) return null_arg("cfg");
    for (auto& s : cfg->cfg.scenarios) s.seed = seed;
    return CIP_OK;
}

cip_status cip_config_set_trials(cip_config* cfg, int trials) {
    if (!cfg) return null_arg("cfg");
    if (trials < 1) {
        g_last_error = "trials must be >= 1";
        return CIP_CONFIG_ERROR;
    }
    for (auto& s : cfg->cfg.scenarios) s.trials = trials;
    return CIP_OK;
}

cip_status cip_run(const cip_config* cfg, cip_run_mode mode, int threads, cip_table** out) {
    if (!cfg) return null_arg("cfg");
    if (!out) return null_arg("out");
    *out = nullptr;
    return guarded([&] {
        auto rows = cip::run_experiment(
            cfg->cfg, threads, mode == CIP_RUN_BOUNDS ? cip::RunMode::Bounds : cip::RunMode::Simulate);
        *out = new cip_table{std::move(rows)};
    });
}

size_t cip_table_size(const cip_table* t) { return t ? t->rows.size() : 0; }

cip_status cip_table_row(const cip_table* t, size_t i, cip_row* out) {
    if (!t) return null_arg("table");
    if (!out) return null_arg("out");
    if (i >= t->rows.size()) {
        g_last_error = "row index out of range";
        return CIP_INVALID_ARGUMENT;
    }
    const auto& r = t->rows[i];
    *out = cip_row{r.scenario_id.c_str(), r.trial, r.slot, r.algorithm.c_str(), r.metric.c_str(),
                   r.value};
    return CIP_OK;
}

cip_status cip_table_write_csv(const cip_table* t, const char* path) {
    if (!t) return null_arg("table");
    if (!path) return null_arg("path");
    return guarded([&] { cip::write_csv(t->rows, path); });
}

void cip_table_free(cip_table* t) { delete t; }

cip_status cip_channel_generate(int K, int M, double sigma2_h, uint64_t seed, double sigma2_noise,
                                cip_channel** out) {
    if (!out) return null_arg("out");
    *out = nullptr;
    return guarded([&] {
        *out = new cip_channel{cip::generate_channel(K, M, sigma2_h, seed, sigma2_noise)};
    });
}

cip_status cip_channel_create(int K, int M, const double* data, double sigma2_noise,
                              cip_channel** out) {
    if (!data) return null_arg("data");
    if (!out) return null_arg("out");
    *out = nullptr;
    return guarded([&] {
        if (K < 1 || M < 1) throw cip::Error(cip::Errc::InvalidArgument, "K and M must be >= 1");
        cip::CMatrix h(K, M);
        for (int j = 0; j < K; ++j)
            for (int m = 0; m < M; ++m) {
                const size_t o = 2 * (static_cast<size_t>(j) * M + m);
                h(j, m) = cip::cplx(data[o], data[o + 1]);
            }
        *out = new cip_channel{cip::ChannelMatrix(std::move(h), sigma2_noise)};
    });
}

cip_status cip_channel_dims(const cip_channel* ch, int* K, int* M) {
    if (!ch) return null_arg("channel");
    if (K) *K = ch->H.K();
    if (M) *M = ch->H.M();
    return CIP_OK;
}

cip_status cip_channel_data(const cip_channel* ch, double* out, size_t len) {
    if (!ch) return null_arg("channel");
    if (!out) return null_arg("out");
    return guarded([&] {
        const auto& h = ch->H.H();
        const size_t need = 2 * static_cast<size_t>(h.size());
        if (len < need) throw cip::Error(cip::Errc::DimensionMismatch, "output buffer too small");
        for (int j = 0; j < h.rows(); ++j)
            for (int m = 0; m < h.cols(); ++m) {
                const size_t o = 2 * (static_cast<size_t>(j) * h.cols() + m);
                out[o] = h(j, m).real();
                out[o + 1] = h(j, m).imag();
            }
    });
}

void cip_channel_free(cip_channel* ch) { delete ch; }

cip_status cip_symbols_draw(int K, int order, uint64_t seed, int* indices) {
    if (!indices) return null_arg("indices");
    return guarded([&] {
        const auto d = cip::random_symbols(K, order, seed);
        for (int j = 0; j < K; ++j) indices[j] = d[j].index;
    });
}

cip_status cip_algorithm_from_name(const char* name, cip_algorithm* out) {
    if (!name) return null_arg("name");
    if (!out) return null_arg("out");
    for (int i = 0; i < static_cast<int>(sizeof kAlgNames / sizeof *kAlgNames); ++i)
        if (std::strcmp(name, kAlgNames[i]) == 0) {
            *out = static_cast<cip_algorithm>(i);
            return CIP_OK;
        }
    g_last_error = std::string("unknown algorithm '") + name + "'";
    return CIP_INVALID_ARGUMENT;
}

cip_status cip_solve(const cip_channel* ch, const cip_request* req, cip_solution** out) {
    if (!ch) return null_arg("channel");
    if (!req) return null_arg("request");
    if (!out) return null_arg("out");
    if (!req->symbol_indices) return null_arg("symbol_indices");
    *out = nullptr;
    return guarded([&] {
        using namespace cip;
        const ChannelMatrix& H = ch->H;
        const int K = H.K();
        SymbolVector d;
        for (int j = 0; j < K; ++j) d.push_back(psk_point(req->psk_order, req->symbol_indices[j]));
        RVector zeta = RVector::Ones(K), w = RVector::Ones(K);
        if (req->snr_targets)
            for (int j = 0; j < K; ++j) zeta(j) = req->snr_targets[j];
        if (req->weights)
            for (int j = 0; j < K; ++j) w(j) = req->weights[j];
        const double P = req->power;

        auto sol = std::make_unique<cip_solution>();
        sol->K = K;
        sol->M = H.M();
        std::ostringstream rep;
        rep.precision(10);
        rep << "algorithm: " << kAlgNames[req->algorithm] << "\n";
        auto finish_x = [&](const CVector& x) {
            sol->x = x;
            sol->rx = H.H() * x;
            sol->power = x.squaredNorm();
            if (sol->snr.size() == 0) sol->snr = sol->rx.cwiseAbs2() / H.sigma2();
            double worst = 0.0;
            for (int j = 0; j < K; ++j)
                if (std::abs(sol->rx(j)) > 0)
                    worst = std::max(worst, std::abs(wrap_angle(std::arg(sol->rx(j)) - d[j].angle())));
            rep << "max_angle_error: " << worst << "\n";
            int ok = 0;
            for (int j = 0; j < K; ++j)
                if (sol->rx(j) != cplx(0.0, 0.0) && detect_psk(sol->rx(j), d[j].order, d[j]).correct) ++ok;
            rep << "noiseless_detected: " << ok << "/" << K << "\n";
        };

        switch (req->algorithm) {
        case CIP_ALG_CIPM: {
            const CipmSolution s = cipm_solve(H, d, zeta);
            rep << "condition: " << s.condition << "\n";
            finish_x(s.x.x);
            sol->value = s.power;
            break;
        }
        case CIP_ALG_CIZF: {
            const CiPrecoderOutput o = cizf_precoder(H, d, P);
            rep << "gamma: " << o.gamma << "\n";
            finish_x(o.x.x);
            sol->value = sol->power;
            break;
        }
        case CIP_ALG_CIMRT: {
            const CimrtOutput o = cimrt_precoder(H, d, equal_powers(K, P), P);
            for (const auto& p : o.state.planes)
                rep << "plane(" << p.k << "," << p.j << "): " << plane_status_name(p.status)
                    << " alpha=" << p.alpha << " delta=" << p.delta
                    << " reduction=" << p.reduction << (p.note.empty() ? "" : " note=" + p.note)
                    << "\n";
            finish_x(o.x.x);
            sol->value = sol->power;
            break;
        }
        case CIP_ALG_CIMM: {
            const CimmSolution s = cimm_solve(H, d, w, P);
            rep << "t_star: " << s.t_star << "\niterations: " << s.iterations << "\n";
            finish_x(s.q.x);
            sol->value = s.t_star;
            break;
        }
        case CIP_ALG_CISR_PA:
        case CIP_ALG_CISR_G: {
            const SumRateSolution s = req->algorithm == CIP_ALG_CISR_PA ? cisr_pa(H, d, P, w)
                                                                        : cisr_g(H, d, P, w);
            rep << "served:";
            for (int j : s.served) rep << " " << j;
            rep << "\norders:";
            for (int o : s.per_user_order) rep << " " << o;
            rep << "\n";
            if (s.tag == 'G') {
                rep << "subset:";
                for (int j : s.subset) rep << " " << j;
                rep << "\n";
            } else {
                rep << "alignment_residual: " << s.alignment_residual << "\n";
            }
            if (!s.note.empty()) rep << "note: " << s.note << "\n";
            sol->snr = s.per_user_snr;
            finish_x(s.q.x);
            sol->value = s.weighted_sum_rate;
            break;
        }
        case CIP_ALG_ZF:
        case CIP_ALG_MMSE:
        case CIP_ALG_NMRT: {
            LinearPrecoder W = req->algorithm == CIP_ALG_ZF     ? zf_precoder(H)
                               : req->algorithm == CIP_ALG_MMSE ? mmse_precoder(H, H.sigma2(), P)
                                                                : nmrt_precoder(H);
            W.powers = equal_powers(K, P);
            sol->snr = conventional_sinr(H, W, H.sigma2());
            double rate = 0.0;
            for (int j = 0; j < K; ++j) rate += std::log2(1.0 + sol->snr(j));
            finish_x(linear_transmit(W, d));
            sol->value = rate;
            break;
        }
        default:
            throw Error(Errc::InvalidArgument, "unknown algorithm");
        }
        rep << "power: " << sol->power << "\nvalue: " << sol->value << "\n";
        sol->report = rep.str();
        *out = sol.release();
    });
}

int cip_solution_users(const cip_solution* s) { return s ? s->K : 0; }
int cip_solution_antennas(const cip_solution* s) { return s ? s->M : 0; }
double cip_solution_power(const cip_solution* s) { return s ? s->power : 0.0; }
double cip_solution_value(const cip_solution* s) { return s ? s->value : 0.0; }

cip_status cip_solution_x(const cip_solution* s, double* out, size_t len) {
    if (!s) return null_arg("solution");
    if (!out) return null_arg("out");
    return guarded([&] { copy_complex(s->x, out, len); });
}

cip_status cip_solution_rx(const cip_solution* s, double* out, size_t len) {
    if (!s) return null_arg("solution");
    if (!out) return null_arg("out");
    return guarded([&] { copy_complex(s->rx, out, len); });
}

cip_status cip_solution_snr(const cip_solution* s, double* out, size_t len) {
    if (!s) return null_arg("solution");
    if (!out) return null_arg("out");
    return guarded([&] {
        if (len < static_cast<size_t>(s->snr.size()))
            throw cip::Error(cip::Errc::DimensionMismatch, "output buffer too small");
        for (Eigen::Index i = 0; i < s->snr.size(); ++i) out[i] = s->snr(i);
    });
}

const char* cip_solution_report(const cip_solution* s) { return s ? s->report.c_str() : ""; }

void cip_solution_free(cip_solution* s) { delete s; }

}  // extern "C"
