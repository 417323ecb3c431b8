#include "cip/harness.hpp"
#include "cip/model.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace cip {

namespace {

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& e : v) s += (s.empty() ? "" : "\n") + e;
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, ',')) {
        cur = trim(cur);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

bool parse_double(const std::string& s, double& v) {
    if (s.empty()) return false;
    errno = 0;
    char* end = nullptr;
    v = std::strtod(s.c_str(), &end);
    return errno == 0 && end == s.c_str() + s.size() && std::isfinite(v);
}

bool parse_int(const std::string& s, long long& v) {
    if (s.empty()) return false;
    errno = 0;
    char* end = nullptr;
    v = std::strtoll(s.c_str(), &end, 10);
    return errno == 0 && end == s.c_str() + s.size();
}

bool parse_u64(const std::string& s, uint64_t& v) {
    if (s.empty() || s[0] == '-') return false;
    errno = 0;
    char* end = nullptr;
    v = std::strtoull(s.c_str(), &end, 10);
    return errno == 0 && end == s.c_str() + s.size();
}

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> k{
        "K", "M", "sigma2", "channel_variance", "power", "power_db", "rate_target",
        "snr_target", "weights_r", "weights_phi", "psk_order", "psk_offset", "trials", "seed",
        "coherence_block", "algorithms", "mcs_ser_target", "mcs_orders", "rank1_samples",
        "iota_rule", "cimrt_powers", "cimrt_plane_order", "noise", "cimm_delta"};
    return k;
}

struct Entry {
    std::string value;
    int line = 0;
};

using Section = std::map<std::string, Entry>;

struct Builder {
    std::vector<std::string>& errs;
    std::string where;

    void bad(const std::string& key, const Entry& e, const std::string& why) {
        errs.push_back(where + ": line " + std::to_string(e.line) + ": " + key + ": " + why);
    }

    bool real(const Section& s, const std::string& key, double& out) {
        auto it = s.find(key);
        if (it == s.end()) return false;
        if (!parse_double(it->second.value, out)) {
            bad(key, it->second, "expected a number, got '" + it->second.value + "'");
            return false;
        }
        return true;
    }

    bool integer(const Section& s, const std::string& key, long long& out) {
        auto it = s.find(key);
        if (it == s.end()) return false;
        if (!parse_int(it->second.value, out)) {
            bad(key, it->second, "expected an integer, got '" + it->second.value + "'");
            return false;
        }
        return true;
    }

    bool list(const Section& s, const std::string& key, std::vector<double>& out) {
        auto it = s.find(key);
        if (it == s.end()) return false;
        out.clear();
        for (const auto& t : split_list(it->second.value)) {
            double v;
            if (!parse_double(t, v)) {
                bad(key, it->second, "expected numbers, got '" + t + "'");
                return false;
            }
            out.push_back(v);
        }
        if (out.empty()) {
            bad(key, it->second, "empty list");
            return false;
        }
        return true;
    }

    bool word(const Section& s, const std::string& key, std::string& out) {
        auto it = s.find(key);
        if (it == s.end()) return false;
        out = it->second.value;
        return true;
    }
};

RVector expand(const std::vector<double>& v, int K) {
    if (v.size() == 1) return RVector::Constant(K, v[0]);
    RVector r(v.size());
    for (size_t i = 0; i < v.size(); ++i) r(i) = v[i];
    return r;
}

ScenarioConfig build(const std::string& id, const Section& s, std::vector<std::string>& errs) {
    ScenarioConfig c;
    c.id = id;
    Builder b{errs, "scenario '" + id + "'"};
    long long iv = 0;
    double dv = 0;
    std::string w;

    if (b.integer(s, "K", iv)) c.K = static_cast<int>(iv);
    else if (!s.count("K")) errs.push_back(b.where + ": missing required key K");
    if (b.integer(s, "M", iv)) c.M = static_cast<int>(iv);
    else if (!s.count("M")) errs.push_back(b.where + ": missing required key M");
    if (b.real(s, "sigma2", dv)) c.sigma2 = dv;
    if (b.real(s, "channel_variance", dv)) c.channel_variance = dv;
    if (s.count("power") && s.count("power_db"))
        errs.push_back(b.where + ": give power or power_db, not both");
    if (b.real(s, "power", dv)) c.power = dv;
    if (b.real(s, "power_db", dv)) c.power = std::pow(10.0, dv / 10.0);

    const int K = std::max(c.K, 1);
    std::vector<double> lv;
    if (s.count("rate_target") && s.count("snr_target"))
        errs.push_back(b.where + ": give rate_target or snr_target, not both");
    auto sized = [&](const std::string& key, const std::vector<double>& v) {
        if (v.size() != 1 && static_cast<int>(v.size()) != c.K) {
            b.bad(key, s.at(key), "needs 1 or K=" + std::to_string(c.K) + " values");
            return false;
        }
        return true;
    };
    c.zeta = RVector::Ones(K);  // default: 1 bit/s/Hz
    if (b.list(s, "rate_target", lv) && sized("rate_target", lv)) {
        c.zeta = expand(lv, K);
        for (Eigen::Index i = 0; i < c.zeta.size(); ++i) c.zeta(i) = std::exp2(c.zeta(i)) - 1.0;
    }
    if (b.list(s, "snr_target", lv) && sized("snr_target", lv)) c.zeta = expand(lv, K);
    c.weights_r = RVector::Ones(K);
    c.weights_phi = RVector::Ones(K);
    if (b.list(s, "weights_r", lv) && sized("weights_r", lv)) c.weights_r = expand(lv, K);
    if (b.list(s, "weights_phi", lv) && sized("weights_phi", lv)) c.weights_phi = expand(lv, K);

    if (b.integer(s, "psk_order", iv)) c.psk_order = static_cast<int>(iv);
    if (b.word(s, "psk_offset", w)) {
        if (w == "zero") c.psk_offset = PskOffset::Zero;
        else if (w == "half_step") c.psk_offset = PskOffset::HalfStep;
        else b.bad("psk_offset", s.at("psk_offset"), "expected zero or half_step");
    }
    if (b.integer(s, "trials", iv)) c.trials = static_cast<int>(std::clamp<long long>(iv, -1, 1LL << 30));
    if (auto it = s.find("seed"); it != s.end()) {
        uint64_t u;
        if (parse_u64(it->second.value, u)) c.seed = u;
        else b.bad("seed", it->second, "expected an unsigned 64-bit integer");
    }
    if (b.integer(s, "coherence_block", iv))
        c.coherence_block = static_cast<int>(std::clamp<long long>(iv, -1, 1LL << 30));
    if (auto it = s.find("algorithms"); it != s.end()) c.algorithms = split_list(it->second.value);
    if (b.real(s, "mcs_ser_target", dv)) c.mcs_ser_target = dv;
    if (b.list(s, "mcs_orders", lv)) {
        c.mcs_orders.clear();
        for (double o : lv) c.mcs_orders.push_back(static_cast<int>(o));
    }
    if (b.integer(s, "rank1_samples", iv)) c.rank1_samples = static_cast<int>(std::clamp<long long>(iv, -1, 1LL << 30));
    if (b.word(s, "iota_rule", w)) {
        if (w == "clamped") c.iota = IotaRule::Clamped;
        else if (w == "verbatim") c.iota = IotaRule::Verbatim;
        else b.bad("iota_rule", s.at("iota_rule"), "expected clamped or verbatim");
    }
    if (b.word(s, "cimrt_powers", w)) {
        if (w == "equal") c.cimrt_genie_powers = false;
        else if (w == "genie") c.cimrt_genie_powers = true;
        else b.bad("cimrt_powers", s.at("cimrt_powers"), "expected equal or genie");
    }
    if (b.word(s, "cimrt_plane_order", w)) {
        if (w == "forward") c.cimrt_plane_order = PlaneOrder::Forward;
        else if (w == "reverse") c.cimrt_plane_order = PlaneOrder::Reverse;
        else b.bad("cimrt_plane_order", s.at("cimrt_plane_order"), "expected forward or reverse");
    }
    if (b.word(s, "noise", w)) {
        if (w == "true" || w == "1" || w == "yes") c.noise = true;
        else if (w == "false" || w == "0" || w == "no") c.noise = false;
        else b.bad("noise", s.at("noise"), "expected true or false");
    }
    if (b.real(s, "cimm_delta", dv)) c.cimm_delta = dv;
    return c;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> v)
    : Error(Errc::Config, join(v)), violations_(std::move(v)) {}

const std::vector<std::string>& known_algorithms() {
    static const std::vector<std::string> a{
        "cipm", "cizf", "cimrt", "cimm", "cisr_pa", "cisr_g", "zf", "mmse", "nmrt",
        "multicast", "multicast_rank1", "genie", "genie_sumrate", "multicast_sumrate"};
    return a;
}

bool is_bound_algorithm(const std::string& n) {
    return n == "multicast" || n == "multicast_rank1" || n == "genie" || n == "genie_sumrate" ||
           n == "multicast_sumrate";
}

std::vector<std::string> validate_scenario(const ScenarioConfig& c) {
    std::vector<std::string> e;
    const std::string w = "scenario '" + c.id + "': ";
    if (c.id.empty() || c.id.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.-") != std::string::npos)
        e.push_back(w + "id may only use letters, digits, '_', '.', '-'");
    if (c.K < 1) e.push_back(w + "K must be >= 1");
    if (c.M < 1) e.push_back(w + "M must be >= 1");
    if (c.K > 16 || c.M > 16) e.push_back(w + "K and M are limited to 16");
    if (!(c.sigma2 > 0)) e.push_back(w + "sigma2 must be > 0");
    if (!(c.channel_variance > 0)) e.push_back(w + "channel_variance must be > 0");
    if (!(c.power > 0)) e.push_back(w + "power must be > 0");
    if (!valid_psk_order(c.psk_order)) e.push_back(w + "psk_order must be a power of two >= 2");
    if (c.trials < 1) e.push_back(w + "trials must be >= 1");
    if (c.coherence_block < 1) e.push_back(w + "coherence_block must be >= 1");
    if (!(c.mcs_ser_target > 0 && c.mcs_ser_target < 0.5))
        e.push_back(w + "mcs_ser_target must lie in (0, 0.5)");
    for (int o : c.mcs_orders)
        if (!valid_psk_order(o)) e.push_back(w + "mcs_orders entries must be powers of two >= 2");
    if (c.rank1_samples < 1) e.push_back(w + "rank1_samples must be >= 1");
    if (!(c.cimm_delta > 0)) e.push_back(w + "cimm_delta must be > 0");
    if (c.K >= 1) {
        if (c.zeta.size() != c.K || (c.zeta.array() < 0).any())
            e.push_back(w + "targets must be K values >= 0");
        if (c.weights_r.size() != c.K || !(c.weights_r.array() > 0).all())
            e.push_back(w + "weights_r must be K values > 0");
        if (c.weights_phi.size() != c.K || (c.weights_phi.array() < 0).any())
            e.push_back(w + "weights_phi must be K values >= 0");
    }
    if (c.algorithms.empty()) e.push_back(w + "algorithms list is empty");
    const auto& known = known_algorithms();
    for (const auto& a : c.algorithms) {
        if (std::find(known.begin(), known.end(), a) == known.end()) {
            e.push_back(w + "unknown algorithm '" + a + "'");
            continue;
        }
        static const std::vector<std::string> needs_tall{"cipm", "cizf", "cimrt", "cimm",
                                                         "cisr_pa", "zf", "genie",
                                                         "genie_sumrate"};
        if (c.K > c.M && std::find(needs_tall.begin(), needs_tall.end(), a) != needs_tall.end())
            e.push_back(w + "algorithm '" + a + "' requires K <= M (K=" + std::to_string(c.K) +
                        ", M=" + std::to_string(c.M) + ")");
        if (a == "cisr_g" && c.K > 12)
            e.push_back(w + "algorithm 'cisr_g' requires K <= 12 (subset enumeration)");
    }
    return e;
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    std::vector<std::string> errs;
    Section common;
    std::vector<std::pair<std::string, Section>> scen;
    Section* cur = &common;
    std::istringstream is(text);
    std::string raw;
    int line = 0;
    const auto& keys = known_keys();
    while (std::getline(is, raw)) {
        ++line;
        std::string l = raw;
        if (auto p = l.find_first_of("#;"); p != std::string::npos) l = l.substr(0, p);
        l = trim(l);
        if (l.empty()) continue;
        const std::string at = origin + ":" + std::to_string(line) + ": ";
        if (l.front() == '[') {
            if (l.back() != ']') {
                errs.push_back(at + "malformed section header");
                continue;
            }
            const std::string name = trim(l.substr(1, l.size() - 2));
            if (name == "common") {
                cur = &common;
            } else if (name.rfind("scenario", 0) == 0 && name.size() > 8 &&
                       (name[8] == ' ' || name[8] == '\t')) {
                const std::string id = trim(name.substr(8));
                for (const auto& s : scen)
                    if (s.first == id) errs.push_back(at + "duplicate scenario '" + id + "'");
                scen.emplace_back(id, Section{});
                cur = &scen.back().second;
            } else {
                errs.push_back(at + "unknown section [" + name + "]");
                cur = nullptr;
            }
            continue;
        }
        const auto eq = l.find('=');
        if (eq == std::string::npos) {
            errs.push_back(at + "expected key = value");
            continue;
        }
        const std::string key = trim(l.substr(0, eq)), val = trim(l.substr(eq + 1));
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            errs.push_back(at + "unknown key '" + key + "'");
            continue;
        }
        if (!cur) continue;
        if (cur->count(key)) {
            errs.push_back(at + "duplicate key '" + key + "'");
            continue;
        }
        (*cur)[key] = Entry{val, line};
    }

    ExperimentConfig cfg;
    if (scen.empty()) scen.emplace_back("default", Section{});
    for (auto& [id, sec] : scen) {
        Section merged = common;
        for (auto& [k, v] : sec) merged[k] = v;
        ScenarioConfig c = build(id, merged, errs);
        for (auto& v : validate_scenario(c)) errs.push_back(std::move(v));
        cfg.scenarios.push_back(std::move(c));
    }
    if (!errs.empty()) throw ConfigError(std::move(errs));
    return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError({path + ": cannot open config file"});
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

}  // namespace cip
