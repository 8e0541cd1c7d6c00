#pragma once

// Experiment harness: configuration profiles and file parsing, dataset
// generation, network training, Monte-Carlo NMSE evaluation and the L / M
// sweeps. Every command is a pure function of the configuration and master
// seed.

#include "isacest/channel.hpp"
#include "isacest/dataset.hpp"
#include "isacest/estimators.hpp"
#include "isacest/nn/architectures.hpp"
#include "isacest/nn/inference.hpp"
#include "isacest/nn/params_io.hpp"
#include "isacest/nn/train.hpp"
#include "isacest/parallel.hpp"
#include "isacest/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace isacest {

struct ExperimentConfig {
    std::string profile = "desk";
    SystemConfig system;
    nn::TrainConfig train;
    int se_hidden = 256;
    nn::CeDnnWidths ce;

    std::vector<double> train_snr_db{10.0, 15.0, 20.0};
    std::vector<double> test_snr_db;
    int V = 1000;
    int U = 10;
    double snr_ch_db = 30.0;
    int T_on = 1000;
    double rho = kDefaultRho;
    double train_frac = 0.9;
    double val_frac = 0.1;
    bool per_user_training = false;

    std::vector<int> sweep_L{10, 15, 20, 25, 30};
    std::vector<int> sweep_M{2, 4, 6, 8};
    std::vector<double> sweep_snr_db{5.0, 15.0};
    int sweep_m_L = 15;

    std::uint64_t seed = 2022;
    std::string out_dir = "out";
    int threads = 1;

    void validate() const {
        system.validate();
        train.validate();
        if (train_snr_db.empty() || test_snr_db.empty() || sweep_L.empty() || sweep_M.empty() ||
            sweep_snr_db.empty())
            throw ConfigError("SNR and sweep grids must be non-empty");
        if (V < 1 || U < 1 || T_on < 1) throw ConfigError("V, U and T_on must be at least 1");
        if (static_cast<long long>(V) * U < train.batch_size) throw ConfigError("V*U must be at least the batch size");
        if (!(rho > 0.0)) throw ConfigError("rho must be positive");
        if (se_hidden < 1) throw ConfigError("se_hidden must be positive");
        for (int l : sweep_L)
            if (l < 1) throw ConfigError("sweep_L entries must be positive");
        for (int m : sweep_M)
            if (m < 1) throw ConfigError("sweep_M entries must be positive");
        if (sweep_m_L < 1) throw ConfigError("sweep_m_L must be positive");
    }
};

inline std::vector<double> snr_range(double lo, double hi, double step) {
    std::vector<double> out;
    const auto n = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
    for (long long i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
}

/// `paper`: the published geometry and network sizes. `desk`: the same
/// structure at CPU-friendly scale.
inline ExperimentConfig make_profile(const std::string& name) {
    ExperimentConfig c;
    c.profile = name;
    c.test_snr_db = snr_range(-10.0, 20.0, 2.5);
    if (name == "paper") {
        c.system.with_antennas(4).with_irs(30);
        c.V = 1000;
        c.U = 10;
        c.train.max_epochs = 300;
        c.ce = {128, 64, 1024, 4};
    } else if (name == "desk") {
        c.system.with_antennas(4).with_irs(16);
        c.V = 500;
        c.U = 4;
        c.train.max_epochs = 100;
        c.ce = {32, 16, 256, 4};
    } else {
        throw ConfigError("unknown profile '" + name + "' (expected desk or paper)");
    }
    return c;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double d = 0;
    try {
        d = std::stod(v, &used);
    } catch (...) {
        throw ConfigError("config key '" + key + "': '" + v + "' is not a number");
    }
    if (used != v.size()) throw ConfigError("config key '" + key + "': '" + v + "' is not a number");
    return d;
}

inline long long parse_int(const std::string& key, const std::string& v) {
    const double d = parse_double(key, v);
    if (d != std::floor(d)) throw ConfigError("config key '" + key + "': '" + v + "' is not an integer");
    return static_cast<long long>(d);
}

/// "a, b, c" or "lo:hi:step".
inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
    if (v.find(':') != std::string::npos) {
        std::vector<double> parts;
        std::stringstream ss(v);
        std::string tok;
        while (std::getline(ss, tok, ':')) parts.push_back(parse_double(key, trim(tok)));
        if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0])
            throw ConfigError("config key '" + key + "': range must be lo:hi:step");
        return snr_range(parts[0], parts[1], parts[2]);
    }
    std::vector<double> out;
    std::stringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(parse_double(key, tok));
    }
    if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
    return out;
}

inline std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    for (double d : parse_list(key, v)) {
        if (d != std::floor(d)) throw ConfigError("config key '" + key + "': entries must be integers");
        out.push_back(static_cast<int>(d));
    }
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config key '" + key + "': expected true/false");
}

}  // namespace detail

/// Parses `key = value` lines (`#` starts a comment). The base profile comes
/// from `profile_override`, else a `profile` key, else desk. Unknown keys are
/// rejected. P and C follow M and L unless given explicitly.
inline ExperimentConfig parse_config(std::istream& is, const std::optional<std::string>& profile_override = {}) {
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    int lineno = 0;
    std::set<std::string> seen;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        auto key = detail::trim(line.substr(0, eq));
        auto val = detail::trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
        if (!seen.insert(key).second) throw ConfigError("config key '" + key + "' given twice");
        entries.emplace_back(std::move(key), std::move(val));
    }

    std::string profile = "desk";
    for (const auto& [k, v] : entries)
        if (k == "profile") profile = v;
    if (profile_override) profile = *profile_override;
    ExperimentConfig c = make_profile(profile);

    auto& s = c.system;
    auto& t = c.train;
    using Setter = std::function<void(const std::string&, const std::string&)>;
    auto num = [](double& dst) -> Setter { return [&dst](auto& k, auto& v) { dst = detail::parse_double(k, v); }; };
    auto integer = [](int& dst) -> Setter {
        return [&dst](auto& k, auto& v) { dst = static_cast<int>(detail::parse_int(k, v)); };
    };
    bool explicit_P = false, explicit_C = false;
    const std::map<std::string, Setter> setters{
        {"profile", [](auto&, auto&) {}},
        {"M", integer(s.M)},
        {"L", integer(s.L)},
        {"K", integer(s.K)},
        {"P", [&](auto& k, auto& v) { s.P = static_cast<int>(detail::parse_int(k, v)); explicit_P = true; }},
        {"C", [&](auto& k, auto& v) { s.C = static_cast<int>(detail::parse_int(k, v)); explicit_C = true; }},
        {"theta_S", num(s.theta_S)},
        {"theta_B", num(s.theta_B)},
        {"theta_I", num(s.theta_I)},
        {"K_BI", num(s.K_BI)},
        {"K_IU", num(s.K_IU)},
        {"d_S", num(s.d_S)},
        {"d_BI", num(s.d_BI)},
        {"d_IU", num(s.d_IU)},
        {"gamma_S", num(s.gamma_S)},
        {"gamma_BI", num(s.gamma_BI)},
        {"gamma_IU", num(s.gamma_IU)},
        {"zeta0_dB", num(s.zeta0_dB)},
        {"d0", num(s.d0)},
        {"P0_dBm", num(s.P0_dBm)},
        {"antenna_spacing_ratio", num(s.antenna_spacing_ratio)},
        {"learning_rate", num(t.learning_rate)},
        {"batch_size", integer(t.batch_size)},
        {"max_epochs", integer(t.max_epochs)},
        {"patience", integer(t.patience)},
        {"beta1", num(t.beta1)},
        {"beta2", num(t.beta2)},
        {"epsilon", num(t.epsilon)},
        {"se_hidden", integer(c.se_hidden)},
        {"ce_filters1", integer(c.ce.filters1)},
        {"ce_filters2", integer(c.ce.filters2)},
        {"ce_dense", integer(c.ce.dense)},
        {"ce_kernel", integer(c.ce.kernel)},
        {"train_snr_db", [&](auto& k, auto& v) { c.train_snr_db = detail::parse_list(k, v); }},
        {"test_snr_db", [&](auto& k, auto& v) { c.test_snr_db = detail::parse_list(k, v); }},
        {"V", integer(c.V)},
        {"U", integer(c.U)},
        {"snr_ch_db", num(c.snr_ch_db)},
        {"T_on", integer(c.T_on)},
        {"rho", num(c.rho)},
        {"train_frac", num(c.train_frac)},
        {"val_frac", num(c.val_frac)},
        {"per_user_training", [&](auto& k, auto& v) { c.per_user_training = detail::parse_bool(k, v); }},
        {"sweep_L", [&](auto& k, auto& v) { c.sweep_L = detail::parse_int_list(k, v); }},
        {"sweep_M", [&](auto& k, auto& v) { c.sweep_M = detail::parse_int_list(k, v); }},
        {"sweep_snr_db", [&](auto& k, auto& v) { c.sweep_snr_db = detail::parse_list(k, v); }},
        {"sweep_m_L", integer(c.sweep_m_L)},
        {"seed", [&](auto& k, auto& v) { c.seed = static_cast<std::uint64_t>(detail::parse_int(k, v)); }},
        {"out_dir", [&](auto&, auto& v) { c.out_dir = v; }},
    };
    for (const auto& [k, v] : entries) {
        const auto it = setters.find(k);
        if (it == setters.end()) throw ConfigError("unknown config key '" + k + "'");
        it->second(k, v);
    }
    if (!explicit_P) s.P = s.M;
    if (!explicit_C) s.C = s.L;
    c.validate();
    return c;
}

inline ExperimentConfig load_config(const std::string& path, const std::optional<std::string>& profile_override = {}) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config '" + path + "'");
    return parse_config(is, profile_override);
}

// --- trained estimators ---------------------------------------------------

/// A trained network together with the preprocessing it expects.
struct TrainedEstimator {
    nn::NetworkSpec spec;
    nn::NetworkParams params;
    FeatureStats stats;
    double rho = kDefaultRho;
};

struct FitReport {
    nn::TrainHistory history;
    double holdout_nmse = 0.0;  // mean per-sample NMSE on the held-out split
    Eigen::Index n_train = 0, n_validation = 0, n_holdout = 0;
};

inline nn::NetworkSpec se_spec(const ExperimentConfig& c, const SystemConfig& s) {
    return nn::build_se_dnn(s.M, s.P, s.C, c.se_hidden);
}
inline nn::NetworkSpec ce_spec(const ExperimentConfig& c, const SystemConfig& s) {
    return nn::build_ce_dnn(s.P, s.C, s.M, s.L, c.ce);
}

inline double mean_sample_nmse(const RMat& pred, const RMat& target) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < pred.cols(); ++j)
        acc += (pred.col(j) - target.col(j)).squaredNorm() / target.col(j).squaredNorm();
    return acc / static_cast<double>(pred.cols());
}

/// split -> standardize/scale -> train, all streams derived from `rng`.
inline std::pair<TrainedEstimator, FitReport> fit_estimator(const nn::NetworkSpec& spec, const Dataset& pooled,
                                                            const ExperimentConfig& cfg, const RngStream& rng,
                                                            const nn::EpochCallback& on_epoch = {}) {
    RngStream split_rng = rng.child(1);
    Split sp = split(pooled, split_rng, cfg.train_frac, cfg.val_frac);
    preprocess(sp.train, {std::ref(sp.validation), std::ref(sp.test)}, cfg.rho);
    RngStream init_rng = rng.child(2);
    nn::TrainConfig tc = cfg.train;
    tc.seed = rng.child(3).engine()();
    auto res = nn::train(spec, nn::init_params(spec, init_rng), sp.train, sp.validation, tc, on_epoch);

    FitReport rep;
    rep.history = std::move(res.history);
    rep.n_train = sp.train.size();
    rep.n_validation = sp.validation.size();
    rep.n_holdout = sp.test.size();
    if (!sp.test.empty()) rep.holdout_nmse = mean_sample_nmse(nn::predict(spec, res.params, sp.test.inputs), sp.test.targets);
    return {TrainedEstimator{spec, std::move(res.params), *sp.train.stats, cfg.rho}, std::move(rep)};
}

inline void save_estimator(const TrainedEstimator& est, const SystemConfig& sys, ChannelKind kind,
                           const std::filesystem::path& stem) {
    nn::save_params(est.spec, est.params, stem.string() + ".params");
    Dataset st = Dataset::with_shape(kind, sys, 0);
    st.stats = est.stats;
    st.rho = est.rho;
    st.preprocessed = true;
    save_dataset(st, stem.string() + ".stats");
}

inline TrainedEstimator load_estimator(const nn::NetworkSpec& spec, const std::filesystem::path& stem) {
    TrainedEstimator est;
    est.spec = spec;
    est.params = nn::load_params(spec, stem.string() + ".params");
    Dataset st = load_dataset(stem.string() + ".stats");
    if (!st.stats) throw FormatError("'" + stem.string() + ".stats' carries no feature statistics");
    if (st.input_len() != spec.input_len * spec.input_channels)
        throw ShapeError("'" + stem.string() + ".stats' does not match the network input length");
    est.stats = *st.stats;
    est.rho = st.rho;
    return est;
}

// --- Monte-Carlo evaluation -----------------------------------------------

struct CellResult {
    double ls_sense = 0.0, dnn_sense = 0.0;
    double ls_comm = 0.0, dnn_comm = 0.0;
    std::size_t n_sense = 0, n_comm = 0;
    bool has_dnn_sense = false, has_dnn_comm = false;
};

struct CellRequest {
    bool sensing = true;
    bool communication = true;
    const TrainedEstimator* se = nullptr;
    std::vector<const TrainedEstimator*> ce;  // one per user, or a single shared entry
};

/// T_on fresh realizations at one SNR; NMSE is the mean of per-realization
/// ratios. Communication averages over all K users.
inline CellResult evaluate_cell(const SystemConfig& sys, double snr_db, int T_on, const RngStream& rng,
                                const CellRequest& req, int threads = 1) {
    const PilotConfig pilots = build_pilots(sys);
    const auto T = static_cast<std::size_t>(T_on);
    const auto K = static_cast<std::size_t>(sys.K);
    const double sigma2 = sensing_noise_var(sys, snr_db);
    const double varsigma2 = user_noise_var(sys, snr_db);

    std::vector<double> ls_s(T), ls_c(T * K);
    std::vector<CMat> true_A(req.se ? T : 0), true_B(req.ce.empty() ? 0 : T * K);
    RMat in_s(req.se ? 2 * sys.M * sys.P * sys.C : 0, req.se ? static_cast<Eigen::Index>(T) : 0);
    RMat in_c(req.ce.empty() ? 0 : 2 * sys.P * sys.C, req.ce.empty() ? 0 : static_cast<Eigen::Index>(T * K));

    parallel_for(T, threads, [&](std::size_t r) {
        RngStream ch_rng = rng.child({r, 0});
        const ChannelRealization h = draw_realization(sys, ch_rng);
        if (req.sensing) {
            RngStream rx = rng.child({r, 1});
            const SensingFrames f = receive_sensing(h.A, pilots, sigma2, rx);
            ls_s[r] = nmse(ls_sense(f, pilots), h.A);
            if (req.se) {
                in_s.col(static_cast<Eigen::Index>(r)) = build_sensing_pair(f, h.A).input;
                true_A[r] = h.A;
            }
        }
        if (req.communication) {
            for (std::size_t k = 0; k < K; ++k) {
                RngStream rx = rng.child({r, 2 + k});
                const UserFrames z = receive_user(h.B[k], pilots, varsigma2, rx, static_cast<int>(k));
                const std::size_t idx = r * K + k;
                ls_c[idx] = nmse(ls_comm(z, pilots), h.B[k]);
                if (!req.ce.empty()) {
                    in_c.col(static_cast<Eigen::Index>(idx)) = build_user_pair(z, h.B[k]).input;
                    true_B[idx] = h.B[k];
                }
            }
        }
    });

    auto mean = [](const std::vector<double>& v) {
        double a = 0.0;
        for (double x : v) a += x;
        return a / static_cast<double>(v.size());
    };
    CellResult out;
    if (req.sensing) {
        out.n_sense = T;
        out.ls_sense = mean(ls_s);
        if (req.se) {
            const auto est = nn::infer_channels(req.se->spec, req.se->params, in_s, req.se->stats, req.se->rho, sys.M,
                                                sys.M);
            std::vector<double> e(T);
            for (std::size_t r = 0; r < T; ++r) e[r] = nmse(est[r], true_A[r]);
            out.dnn_sense = mean(e);
            out.has_dnn_sense = true;
        }
    }
    if (req.communication) {
        out.n_comm = T * K;
        out.ls_comm = mean(ls_c);
        if (!req.ce.empty()) {
            std::vector<double> e(T * K);
            for (std::size_t k = 0; k < K; ++k) {
                const TrainedEstimator* ce = req.ce.size() == 1 ? req.ce.front() : req.ce.at(k);
                RMat cols(in_c.rows(), static_cast<Eigen::Index>(T));
                for (std::size_t r = 0; r < T; ++r) cols.col(static_cast<Eigen::Index>(r)) = in_c.col(static_cast<Eigen::Index>(r * K + k));
                const auto est = nn::infer_channels(ce->spec, ce->params, cols, ce->stats, ce->rho, sys.M, sys.L);
                for (std::size_t r = 0; r < T; ++r) e[r * K + k] = nmse(est[r], true_B[r * K + k]);
            }
            out.dnn_comm = mean(e);
            out.has_dnn_comm = true;
        }
    }
    return out;
}

// --- results --------------------------------------------------------------

struct SweepRow {
    double value = 0.0;  // sweep variable (L or M); unused for SNR-only tables
    double snr_db = 0.0;
    std::string channel;  // sensing | communication
    Method method = Method::LS;
    double nmse = 0.0;
    std::size_t n = 0;
};

struct SweepResult {
    std::string variable;  // "" for the SNR table, else "L" or "M"
    std::vector<SweepRow> rows;

    void add_cell(double value, double snr_db, const CellResult& c) {
        if (c.n_sense) {
            rows.push_back({value, snr_db, "sensing", Method::LS, c.ls_sense, c.n_sense});
            if (c.has_dnn_sense) rows.push_back({value, snr_db, "sensing", Method::SeDnn, c.dnn_sense, c.n_sense});
        }
        if (c.n_comm) {
            rows.push_back({value, snr_db, "communication", Method::LS, c.ls_comm, c.n_comm});
            if (c.has_dnn_comm) rows.push_back({value, snr_db, "communication", Method::CeDnn, c.dnn_comm, c.n_comm});
        }
    }

    /// Looks up one NMSE value; throws if absent.
    double at(double value, double snr_db, const std::string& channel, Method m) const {
        for (const auto& r : rows)
            if (r.value == value && r.snr_db == snr_db && r.channel == channel && r.method == m) return r.nmse;
        throw std::out_of_range("SweepResult: no such row");
    }
};

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_csv(const SweepResult& res, std::ostream& os) {
    if (!res.variable.empty()) os << res.variable << ',';
    os << "snr_db,channel,method,nmse,n\n";
    for (const auto& r : res.rows) {
        if (!res.variable.empty()) os << format_double(r.value) << ',';
        os << format_double(r.snr_db) << ',' << r.channel << ',' << to_string(r.method) << ',' << format_double(r.nmse)
           << ',' << r.n << '\n';
    }
}

inline void write_csv(const SweepResult& res, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open '" + path.string() + "' for writing");
    write_csv(res, os);
}

inline void write_history_csv(const nn::TrainHistory& h, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open '" + path.string() + "' for writing");
    os << "epoch,train_loss,val_loss,best_val_loss,best_epoch,status\n";
    double best = std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    for (std::size_t i = 0; i < h.epochs.size(); ++i) {
        const auto& e = h.epochs[i];
        if (e.val_loss < best) {
            best = e.val_loss;
            best_epoch = e.epoch;
        }
        const bool last = i + 1 == h.epochs.size();
        os << e.epoch << ',' << format_double(e.train_loss) << ',' << format_double(e.val_loss) << ','
           << format_double(best) << ',' << best_epoch << ',' << (last ? nn::to_string(h.stop) : "running") << '\n';
    }
}

/// Static log-scale line chart of a result table, one series per
/// (channel, method[, snr]). The x axis is SNR, or the sweep variable.
inline void write_svg_plot(const SweepResult& res, const std::filesystem::path& path, const std::string& title) {
    struct Series {
        std::string name;
        std::vector<std::pair<double, double>> pts;
    };
    std::vector<Series> series;
    for (const auto& r : res.rows) {
        std::string name = r.channel + " " + std::string(to_string(r.method));
        if (!res.variable.empty()) name += " @" + format_double(r.snr_db) + " dB";
        auto it = std::find_if(series.begin(), series.end(), [&](const Series& s) { return s.name == name; });
        if (it == series.end()) {
            series.push_back({name, {}});
            it = std::prev(series.end());
        }
        const double x = res.variable.empty() ? r.snr_db : r.value;
        it->pts.emplace_back(x, std::log10(std::max(r.nmse, 1e-12)));
    }
    if (series.empty()) throw Error("write_svg_plot: nothing to plot");
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& s : series)
        for (auto [x, y] : s.pts) {
            x0 = std::min(x0, x), x1 = std::max(x1, x);
            y0 = std::min(y0, y), y1 = std::max(y1, y);
        }
    y0 = std::floor(y0);
    y1 = std::ceil(y1);
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    const double W = 640, H = 420, ml = 70, mr = 190, mt = 40, mb = 50;
    auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
    auto py = [&](double y) { return mt + (y1 - y) / (y1 - y0) * (H - mt - mb); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open '" + path.string() + "' for writing");
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\">" << title << "</text>\n";
    os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double y = y0; y <= y1 + 1e-9; y += 1.0) {
        os << "<line x1=\"" << ml << "\" x2=\"" << W - mr << "\" y1=\"" << py(y) << "\" y2=\"" << py(y)
           << "\" stroke=\"#ddd\"/>\n";
        os << "<text x=\"" << ml - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">1e" << y << "</text>\n";
    }
    std::set<double> xs;
    for (const auto& s : series)
        for (auto [x, y] : s.pts) xs.insert(x);
    const std::size_t every = std::max<std::size_t>(1, xs.size() / 8);
    std::size_t i = 0;
    for (double x : xs)
        if (i++ % every == 0)
            os << "<text x=\"" << px(x) << "\" y=\"" << H - mb + 16 << "\" text-anchor=\"middle\">" << format_double(x)
               << "</text>\n";
    os << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
       << (res.variable.empty() ? "SNR (dB)" : res.variable) << "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* col = colors[s % std::size(colors)];
        os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
        for (auto [x, y] : series[s].pts) os << px(x) << ',' << py(y) << ' ';
        os << "\"/>\n";
        const double ly = mt + 14 + 16 * static_cast<double>(s);
        os << "<line x1=\"" << W - mr + 10 << "\" x2=\"" << W - mr + 30 << "\" y1=\"" << ly - 4 << "\" y2=\"" << ly - 4
           << "\" stroke=\"" << col << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << W - mr + 34 << "\" y=\"" << ly << "\">" << series[s].name << "</text>\n";
    }
    os << "</svg>\n";
}

// --- commands -------------------------------------------------------------

using Log = std::function<void(const std::string&)>;

namespace streams {
// top-level purposes under the master seed
inline constexpr std::uint64_t kTrainData = 1;
inline constexpr std::uint64_t kTestData = 2;
inline constexpr std::uint64_t kFit = 3;
inline constexpr std::uint64_t kEval = 4;
inline constexpr std::uint64_t kSweepL = 5;
inline constexpr std::uint64_t kSweepM = 6;
}  // namespace streams

inline std::string snr_tag(double snr) {
    std::string s = format_double(snr);
    for (auto& ch : s)
        if (ch == '-') ch = 'm';
    return s;
}

inline GenerateOptions train_generate_options(const ExperimentConfig& c, std::vector<double> snrs) {
    return {c.V, c.U, std::move(snrs), c.snr_ch_db, c.threads};
}

/// Pooled-SNR training sets for the sensing channel and every user, plus
/// augmentation-free test sets per test SNR. Returns the files written.
inline std::vector<std::filesystem::path> cmd_generate(const ExperimentConfig& c, const Log& log = {}) {
    c.validate();
    const std::filesystem::path out(c.out_dir);
    std::filesystem::create_directories(out);
    const RngStream master(c.seed);
    std::vector<std::filesystem::path> written;
    std::vector<ChannelKind> kinds{ChannelKind::sensing()};
    for (int k = 0; k < c.system.K; ++k) kinds.push_back(ChannelKind::for_user(k));

    for (const auto& kind : kinds) {
        Dataset ds = generate_dataset(c.system, kind, train_generate_options(c, c.train_snr_db),
                                      master.child(streams::kTrainData));
        ds.role = Role::Train;
        const auto path = out / (kind.tag() + "_train.ds");
        save_dataset(ds, path.string());
        if (log) log("wrote " + path.string() + " (" + std::to_string(ds.size()) + " samples)");
        written.push_back(path);
    }
    for (std::size_t si = 0; si < c.test_snr_db.size(); ++si) {
        GenerateOptions opt{c.T_on, 1, {c.test_snr_db[si]}, c.snr_ch_db, c.threads};
        for (const auto& kind : kinds) {
            Dataset ds = generate_dataset(c.system, kind, opt, master.child({streams::kTestData, si}));
            ds.role = Role::Test;
            const auto path = out / (kind.tag() + "_test_snr" + snr_tag(c.test_snr_db[si]) + ".ds");
            save_dataset(ds, path.string());
            written.push_back(path);
        }
    }
    if (log) log("wrote " + std::to_string(written.size()) + " dataset files to " + out.string());
    return written;
}

inline nn::EpochCallback epoch_logger(const Log& log, const std::string& name) {
    if (!log) return {};
    return [log, name](const nn::EpochRecord& e) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s epoch %3d  train %.6g  val %.6g", name.c_str(), e.epoch, e.train_loss,
                      e.val_loss);
        log(buf);
    };
}

inline void log_fit(const Log& log, const std::string& name, const FitReport& r) {
    if (!log) return;
    char buf[200];
    std::snprintf(buf, sizeof buf, "%s: %zu epochs, best %d, stop=%s, holdout NMSE %.4g (train %lld / val %lld / test %lld)",
                  name.c_str(), r.history.epochs.size(), r.history.best_epoch, nn::to_string(r.history.stop).c_str(),
                  r.holdout_nmse, static_cast<long long>(r.n_train), static_cast<long long>(r.n_validation),
                  static_cast<long long>(r.n_holdout));
    log(buf);
}

inline Dataset load_checked(const std::filesystem::path& path, const ExperimentConfig& c, ChannelKind kind) {
    if (!std::filesystem::exists(path))
        throw Error("missing dataset '" + path.string() + "' (run generate first)");
    Dataset ds = load_dataset(path.string());
    if (ds.kind != kind || ds.M != c.system.M || ds.P != c.system.P || ds.C != c.system.C || ds.L != c.system.L)
        throw ShapeError("dataset '" + path.string() + "' was generated for a different configuration");
    return ds;
}

/// Trains SE-DNN on the pooled sensing set and CE-DNN on pooled user data
/// (or one CE-DNN per user). Writes params, stats and history CSVs.
inline void cmd_train(const ExperimentConfig& c, const Log& log = {}) {
    c.validate();
    const std::filesystem::path out(c.out_dir);
    const RngStream fit_root = RngStream(c.seed).child(streams::kFit);

    {
        const Dataset ds = load_checked(out / "sensing_train.ds", c, ChannelKind::sensing());
        auto [est, rep] = fit_estimator(se_spec(c, c.system), ds, c, fit_root.child(0), epoch_logger(log, "se-dnn"));
        save_estimator(est, c.system, ChannelKind::sensing(), out / "se_dnn");
        write_history_csv(rep.history, out / "se_dnn_history.csv");
        log_fit(log, "se-dnn", rep);
    }
    if (c.per_user_training) {
        for (int k = 0; k < c.system.K; ++k) {
            const auto kind = ChannelKind::for_user(k);
            const Dataset ds = load_checked(out / (kind.tag() + "_train.ds"), c, kind);
            const std::string name = "ce_dnn_" + kind.tag();
            auto [est, rep] = fit_estimator(ce_spec(c, c.system), ds, c, fit_root.child(1 + static_cast<std::uint64_t>(k)),
                                            epoch_logger(log, name));
            save_estimator(est, c.system, kind, out / name);
            write_history_csv(rep.history, out / (name + "_history.csv"));
            log_fit(log, name, rep);
        }
    } else {
        Dataset pooled = load_checked(out / "user0_train.ds", c, ChannelKind::for_user(0));
        for (int k = 1; k < c.system.K; ++k)
            pooled.append(load_checked(out / ("user" + std::to_string(k) + "_train.ds"), c, ChannelKind::for_user(k)));
        auto [est, rep] = fit_estimator(ce_spec(c, c.system), pooled, c, fit_root.child(1000), epoch_logger(log, "ce-dnn"));
        save_estimator(est, c.system, ChannelKind::for_user(0), out / "ce_dnn");
        write_history_csv(rep.history, out / "ce_dnn_history.csv");
        log_fit(log, "ce-dnn", rep);
    }
}

/// NMSE versus SNR for LS and the trained networks on fresh realizations.
inline SweepResult cmd_eval(const ExperimentConfig& c, bool skip_dnn = false, const Log& log = {}) {
    c.validate();
    const std::filesystem::path out(c.out_dir);
    std::optional<TrainedEstimator> se;
    std::vector<TrainedEstimator> ce;
    CellRequest req;
    if (!skip_dnn) {
        auto need = [&](const std::filesystem::path& stem) {
            if (!std::filesystem::exists(stem.string() + ".params"))
                throw Error("missing trained parameters '" + stem.string() + ".params' (run train first)");
        };
        need(out / "se_dnn");
        se = load_estimator(se_spec(c, c.system), out / "se_dnn");
        req.se = &*se;
        if (c.per_user_training) {
            for (int k = 0; k < c.system.K; ++k) {
                const auto stem = out / ("ce_dnn_user" + std::to_string(k));
                need(stem);
                ce.push_back(load_estimator(ce_spec(c, c.system), stem));
            }
        } else {
            need(out / "ce_dnn");
            ce.push_back(load_estimator(ce_spec(c, c.system), out / "ce_dnn"));
        }
        for (const auto& e : ce) req.ce.push_back(&e);
    }
    const RngStream root = RngStream(c.seed).child(streams::kEval);
    SweepResult res;
    for (std::size_t si = 0; si < c.test_snr_db.size(); ++si) {
        const double snr = c.test_snr_db[si];
        const CellResult cell = evaluate_cell(c.system, snr, c.T_on, root.child(si), req, c.threads);
        res.add_cell(0.0, snr, cell);
        if (log) {
            char buf[200];
            std::snprintf(buf, sizeof buf, "snr %6.2f dB  sensing LS %.4g%s  comm LS %.4g%s", snr, cell.ls_sense,
                          cell.has_dnn_sense ? (" DNN " + format_double(cell.dnn_sense).substr(0, 8)).c_str() : "",
                          cell.ls_comm, cell.has_dnn_comm ? (" DNN " + format_double(cell.dnn_comm).substr(0, 8)).c_str() : "");
            log(buf);
        }
    }
    return res;
}

struct SweepOptions {
    bool sensing = true;
    bool communication = true;
    bool skip_dnn = false;
};

/// Trains on data pooled over sweep_snr_db and evaluates at each of those
/// SNRs, for one system configuration. User data comes from user 0 (all
/// users share one distribution); evaluation covers every user.
inline void sweep_point(const ExperimentConfig& c, const SystemConfig& sys, double value, const RngStream& root,
                        const SweepOptions& opt, SweepResult& res, const Log& log) {
    std::optional<TrainedEstimator> se, ce;
    const GenerateOptions gen = train_generate_options(c, c.sweep_snr_db);
    const std::string label = res.variable + "=" + format_double(value);
    if (!opt.skip_dnn && opt.sensing) {
        const Dataset ds = generate_dataset(sys, ChannelKind::sensing(), gen, root.child(1));
        auto fit = fit_estimator(se_spec(c, sys), ds, c, root.child(2), epoch_logger(log, "se-dnn " + label));
        log_fit(log, "se-dnn " + label, fit.second);
        se = std::move(fit.first);
    }
    if (!opt.skip_dnn && opt.communication) {
        const Dataset ds = generate_dataset(sys, ChannelKind::for_user(0), gen, root.child(3));
        auto fit = fit_estimator(ce_spec(c, sys), ds, c, root.child(4), epoch_logger(log, "ce-dnn " + label));
        log_fit(log, "ce-dnn " + label, fit.second);
        ce = std::move(fit.first);
    }
    CellRequest req;
    req.sensing = opt.sensing;
    req.communication = opt.communication;
    if (se) req.se = &*se;
    if (ce) req.ce = {&*ce};
    for (std::size_t si = 0; si < c.sweep_snr_db.size(); ++si) {
        const CellResult cell = evaluate_cell(sys, c.sweep_snr_db[si], c.T_on, root.child({5, si}), req, c.threads);
        res.add_cell(value, c.sweep_snr_db[si], cell);
    }
}

/// CE-DNN vs LS over the IRS size grid.
inline SweepResult cmd_sweep_l(const ExperimentConfig& c, bool skip_dnn = false, const Log& log = {}) {
    c.validate();
    SweepResult res;
    res.variable = "L";
    const RngStream root = RngStream(c.seed).child(streams::kSweepL);
    for (int L : c.sweep_L) {
        SystemConfig sys = c.system;
        sys.with_irs(L);
        sys.validate();
        sweep_point(c, sys, L, root.child(static_cast<std::uint64_t>(L)), {false, true, skip_dnn}, res, log);
    }
    return res;
}

/// SE-DNN and CE-DNN vs LS over the antenna-count grid at L = sweep_m_L.
inline SweepResult cmd_sweep_m(const ExperimentConfig& c, const SweepOptions& opt = {}, const Log& log = {}) {
    c.validate();
    SweepResult res;
    res.variable = "M";
    const RngStream root = RngStream(c.seed).child(streams::kSweepM);
    for (int M : c.sweep_M) {
        SystemConfig sys = c.system;
        sys.with_antennas(M).with_irs(c.sweep_m_L);
        sys.validate();
        sweep_point(c, sys, M, root.child(static_cast<std::uint64_t>(M)), opt, res, log);
    }
    return res;
}

}  // namespace isacest
