#pragma once

// Input/target pair construction, augmented dataset generation,
// standardization and splitting, plus the flat binary dataset container.
//
// Samples are stored column-wise: `inputs` is input_len x count and
// `targets` is target_len x count, so minibatches are plain column blocks.

#include "isacest/binary_io.hpp"
#include "isacest/channel.hpp"
#include "isacest/numerics.hpp"
#include "isacest/parallel.hpp"
#include "isacest/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace isacest {

inline constexpr double kDefaultRho = 1e4;
inline constexpr double kStdFloor = 1e-12;

/// Which estimator a dataset feeds: the BS sensing network or user k's
/// communication network.
struct ChannelKind {
    enum class Type { Sensing, User } type = Type::Sensing;
    int user = 0;

    static ChannelKind sensing() { return {Type::Sensing, 0}; }
    static ChannelKind for_user(int k) { return {Type::User, k}; }
    bool is_sensing() const { return type == Type::Sensing; }

    std::string tag() const { return is_sensing() ? "sensing" : "user" + std::to_string(user); }
    static ChannelKind parse(const std::string& s) {
        if (s == "sensing") return sensing();
        if (s.rfind("user", 0) == 0 && s.size() > 4) return for_user(std::stoi(s.substr(4)));
        throw FormatError("unknown channel kind '" + s + "'");
    }
    bool operator==(const ChannelKind&) const = default;
};

enum class Role { Train, Validation, Test };

inline std::string to_string(Role r) {
    switch (r) {
    case Role::Train: return "train";
    case Role::Validation: return "validation";
    case Role::Test: return "test";
    }
    return "?";
}

inline Role parse_role(const std::string& s) {
    if (s == "train") return Role::Train;
    if (s == "validation") return Role::Validation;
    if (s == "test") return Role::Test;
    throw FormatError("unknown dataset role '" + s + "'");
}

struct Sample {
    RVec input;
    RVec target;
    double snr_db = 0.0;
    std::int64_t v = 0;  // origin index
    std::int64_t u = 1;  // copy index, 1 = original
};

struct SampleMeta {
    double snr_db = 0.0;
    std::int64_t v = 0;
    std::int64_t u = 1;
    bool operator==(const SampleMeta&) const = default;
};

/// Per-feature z-score statistics computed on a training set.
struct FeatureStats {
    RVec mean;
    RVec std;  // already floored at kStdFloor

    static FeatureStats fit(const RMat& inputs) {
        FeatureStats s;
        const auto n = static_cast<double>(inputs.cols());
        s.mean = inputs.rowwise().sum() / n;
        s.std.resize(inputs.rows());
        for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
            const double var = (inputs.row(i).array() - s.mean(i)).square().sum() / n;
            s.std(i) = std::max(std::sqrt(var), kStdFloor);
        }
        return s;
    }

    /// Features whose std sits at the floor are constant and map to 0.
    void apply(RMat& inputs) const {
        if (inputs.rows() != mean.size()) throw ShapeError("FeatureStats: feature length mismatch");
        for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
            if (std(i) <= kStdFloor)
                inputs.row(i).setZero();
            else
                inputs.row(i) = (inputs.row(i).array() - mean(i)) / std(i);
        }
    }
    RVec apply(const RVec& x) const {
        RMat m = x;
        apply(m);
        return m.col(0);
    }
};

struct Dataset {
    ChannelKind kind;
    int M = 0, P = 0, C = 0, L = 0;
    RMat inputs;   // input_len x count
    RMat targets;  // target_len x count
    std::vector<SampleMeta> meta;
    std::optional<FeatureStats> stats;
    double rho = kDefaultRho;
    bool preprocessed = false;  // inputs standardized and targets scaled by rho
    Role role = Role::Train;

    Eigen::Index size() const { return inputs.cols(); }
    Eigen::Index input_len() const { return inputs.rows(); }
    Eigen::Index target_len() const { return targets.rows(); }
    bool empty() const { return size() == 0; }

    static Dataset with_shape(ChannelKind kind, const SystemConfig& cfg, Eigen::Index count) {
        Dataset d;
        d.kind = kind;
        d.M = cfg.M;
        d.P = cfg.P;
        d.C = cfg.C;
        d.L = cfg.L;
        const auto in_len = kind.is_sensing() ? 2 * cfg.M * cfg.P * cfg.C : 2 * cfg.P * cfg.C;
        const auto out_len = kind.is_sensing() ? 2 * cfg.M * cfg.M : 2 * cfg.M * cfg.L;
        d.inputs.resize(in_len, count);
        d.targets.resize(out_len, count);
        d.meta.resize(static_cast<std::size_t>(count));
        return d;
    }

    Sample sample(Eigen::Index i) const {
        const auto& m = meta.at(static_cast<std::size_t>(i));
        return {inputs.col(i), targets.col(i), m.snr_db, m.v, m.u};
    }

    void set(Eigen::Index i, const Sample& s) {
        inputs.col(i) = s.input;
        targets.col(i) = s.target;
        meta[static_cast<std::size_t>(i)] = {s.snr_db, s.v, s.u};
    }

    Dataset subset(const std::vector<Eigen::Index>& idx) const {
        Dataset d = *this;
        d.inputs.resize(input_len(), static_cast<Eigen::Index>(idx.size()));
        d.targets.resize(target_len(), static_cast<Eigen::Index>(idx.size()));
        d.meta.resize(idx.size());
        for (std::size_t j = 0; j < idx.size(); ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            d.inputs.col(jj) = inputs.col(idx[j]);
            d.targets.col(jj) = targets.col(idx[j]);
            d.meta[j] = meta[static_cast<std::size_t>(idx[j])];
        }
        return d;
    }

    /// Appends the samples of `other` (same kind and shape).
    void append(const Dataset& other) {
        if (other.input_len() != input_len() || other.target_len() != target_len())
            throw ShapeError("Dataset::append: shape mismatch");
        const auto n = size();
        inputs.conservativeResize(Eigen::NoChange, n + other.size());
        targets.conservativeResize(Eigen::NoChange, n + other.size());
        inputs.rightCols(other.size()) = other.inputs;
        targets.rightCols(other.size()) = other.targets;
        meta.insert(meta.end(), other.meta.begin(), other.meta.end());
    }
};

/// [Re vec[Y_1..Y_C]; Im vec[Y_1..Y_C]] paired with [Re vec A; Im vec A].
inline Sample build_sensing_pair(const SensingFrames& frames, const CMat& A) {
    if (frames.Y.empty()) throw ShapeError("build_sensing_pair: no frames");
    const auto block = frames.Y.front().size();
    const auto n = block * static_cast<Eigen::Index>(frames.Y.size());
    Sample s;
    s.input.resize(2 * n);
    Eigen::Index off = 0;
    for (const auto& y : frames.Y) {
        if (y.size() != block) throw ShapeError("build_sensing_pair: ragged frames");
        const CVec v = vec(y);
        s.input.segment(off, block) = v.real();
        s.input.segment(n + off, block) = v.imag();
        off += block;
    }
    const CVec a = vec(A);
    s.target.resize(2 * a.size());
    s.target << a.real(), a.imag();
    return s;
}

/// [Re [z_1..z_C]; Im [z_1..z_C]] paired with [Re vec B_k; Im vec B_k].
inline Sample build_user_pair(const UserFrames& frames, const CMat& Bk) {
    if (frames.z.empty()) throw ShapeError("build_user_pair: no frames");
    const auto P = frames.z.front().size();
    const auto n = P * static_cast<Eigen::Index>(frames.z.size());
    Sample s;
    s.input.resize(2 * n);
    Eigen::Index off = 0;
    for (const auto& z : frames.z) {
        if (z.size() != P) throw ShapeError("build_user_pair: ragged frames");
        s.input.segment(off, P) = z.real();
        s.input.segment(n + off, P) = z.imag();
        off += P;
    }
    const CVec b = vec(Bk);
    s.target.resize(2 * b.size());
    s.target << b.real(), b.imag();
    return s;
}

/// Inverse of the target layout: first half real, second half imaginary,
/// column-major.
inline CMat target_to_channel(const RVec& t, Eigen::Index rows, Eigen::Index cols) {
    const auto n = rows * cols;
    if (t.size() != 2 * n) throw ShapeError("target_to_channel: length mismatch");
    CVec c(n);
    c.real() = t.head(n);
    c.imag() = t.tail(n);
    return unvec(c, rows, cols);
}

/// H + N with N ~ CN(0, P_ch / SNR_ch) and P_ch the mean per-entry power of H.
inline CMat augment_channel(const CMat& H, double snr_ch_db, RngStream& rng) {
    const double energy = fro_norm_sq(H);
    if (!(energy > 0.0)) throw std::invalid_argument("augment_channel: zero channel");
    const double p_ch = energy / static_cast<double>(H.size());
    return H + randn_complex(H.rows(), H.cols(), p_ch / db_to_linear(snr_ch_db), rng);
}

struct GenerateOptions {
    int V = 1000;
    int U = 10;
    std::vector<double> snr_db{10.0, 15.0, 20.0};
    double snr_ch_db = 30.0;
    int threads = 1;
};

/// Builds V*U samples per SNR. Copy u >= 2 of origin v is simulated from a
/// noise-corrupted channel with fresh receiver noise but keeps the clean
/// channel as its target.
inline Dataset generate_dataset(const SystemConfig& cfg, ChannelKind kind, const GenerateOptions& opt,
                                const RngStream& rng) {
    cfg.validate();
    if (opt.V < 1 || opt.U < 1) throw ConfigError("generate_dataset: V and U must be at least 1");
    if (!kind.is_sensing() && (kind.user < 0 || kind.user >= cfg.K))
        throw ConfigError("generate_dataset: user index out of range");
    const PilotConfig pilots = build_pilots(cfg);
    const auto per_snr = static_cast<std::size_t>(opt.V) * static_cast<std::size_t>(opt.U);
    Dataset ds = Dataset::with_shape(kind, cfg, static_cast<Eigen::Index>(per_snr * opt.snr_db.size()));
    const RngStream base = rng.child({kind.is_sensing() ? 0ULL : 1ULL + static_cast<std::uint64_t>(kind.user)});

    const std::size_t origins = static_cast<std::size_t>(opt.V) * opt.snr_db.size();
    parallel_for(origins, opt.threads, [&](std::size_t job) {
        const std::size_t si = job / static_cast<std::size_t>(opt.V);
        const auto v = static_cast<std::int64_t>(job % static_cast<std::size_t>(opt.V));
        const double snr = opt.snr_db[si];
        RngStream ch_rng = base.child({si, static_cast<std::uint64_t>(v), 0});

        CMat truth;
        if (kind.is_sensing()) {
            truth = draw_sensing_channel(cfg, ch_rng).A;
        } else {
            truth = draw_comm_channels(cfg, ch_rng).B[static_cast<std::size_t>(kind.user)];
        }
        for (int u = 1; u <= opt.U; ++u) {
            RngStream rx_rng = base.child({si, static_cast<std::uint64_t>(v), static_cast<std::uint64_t>(u)});
            const CMat channel = u == 1 ? truth : augment_channel(truth, opt.snr_ch_db, rx_rng);
            Sample s = kind.is_sensing()
                           ? build_sensing_pair(receive_sensing(channel, pilots, sensing_noise_var(cfg, snr), rx_rng),
                                                truth)
                           : build_user_pair(receive_user(channel, pilots, user_noise_var(cfg, snr), rx_rng, kind.user),
                                             truth);
            s.snr_db = snr;
            s.v = v;
            s.u = u;
            ds.set(static_cast<Eigen::Index>(job * static_cast<std::size_t>(opt.U) + static_cast<std::size_t>(u - 1)),
                   s);
        }
    });
    return ds;
}

/// Standardizes every dataset with the training statistics and scales all
/// targets by rho. Statistics are kept on each dataset for inference.
inline void preprocess(Dataset& train, const std::vector<std::reference_wrapper<Dataset>>& others,
                       double rho = kDefaultRho) {
    if (train.empty()) throw ShapeError("preprocess: empty training set");
    if (train.preprocessed) throw ShapeError("preprocess: training set already preprocessed");
    const FeatureStats stats = FeatureStats::fit(train.inputs);
    auto transform = [&](Dataset& d) {
        if (d.preprocessed) throw ShapeError("preprocess: dataset already preprocessed");
        stats.apply(d.inputs);
        d.targets *= rho;
        d.rho = rho;
        d.stats = stats;
        d.preprocessed = true;
    };
    transform(train);
    for (auto& d : others) transform(d.get());
}

struct Split {
    Dataset train;
    Dataset validation;
    Dataset test;
};

/// Shuffled partition: train_frac of the samples go to training, of which
/// val_frac_of_train is held out for validation; the rest is test.
inline Split split(const Dataset& ds, RngStream& rng, double train_frac = 0.9, double val_frac_of_train = 0.1) {
    if (!(train_frac > 0.0 && train_frac < 1.0) || !(val_frac_of_train > 0.0 && val_frac_of_train < 1.0))
        throw std::invalid_argument("split: fractions must lie in (0, 1)");
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(ds.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::shuffle(idx.begin(), idx.end(), rng.engine());
    const auto n = idx.size();
    const auto n_train_all = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(n)));
    const auto n_val = static_cast<std::size_t>(std::llround(val_frac_of_train * static_cast<double>(n_train_all)));
    const auto n_train = n_train_all - n_val;
    auto part = [&](std::size_t lo, std::size_t hi, Role role) {
        Dataset d = ds.subset({idx.begin() + static_cast<std::ptrdiff_t>(lo), idx.begin() + static_cast<std::ptrdiff_t>(hi)});
        d.role = role;
        return d;
    };
    return {part(0, n_train, Role::Train), part(n_train, n_train_all, Role::Validation),
            part(n_train_all, n, Role::Test)};
}

// --- container -----------------------------------------------------------
//
//   ISACDS1 <kind> <M> <P> <C> <L> <count> <input_len> <target_len>\n
//   count x (input, target) float64 LE, sample-major
//   count x (snr_dB f64, v i64, u i64)
//   STATS <role> <preprocessed> <has_stats>\n
//   rho f64, then mean[input_len], std[input_len] when has_stats

inline constexpr const char* kDatasetMagic = "ISACDS1";

inline void save_dataset(const Dataset& ds, std::ostream& os) {
    os << kDatasetMagic << ' ' << ds.kind.tag() << ' ' << ds.M << ' ' << ds.P << ' ' << ds.C << ' ' << ds.L << ' '
       << ds.size() << ' ' << ds.input_len() << ' ' << ds.target_len() << '\n';
    for (Eigen::Index i = 0; i < ds.size(); ++i) {
        io::write_block(os, ds.inputs.col(i));
        io::write_block(os, ds.targets.col(i));
    }
    for (const auto& m : ds.meta) {
        io::write_f64(os, m.snr_db);
        io::write_i64(os, m.v);
        io::write_i64(os, m.u);
    }
    os << "STATS " << to_string(ds.role) << ' ' << (ds.preprocessed ? 1 : 0) << ' ' << (ds.stats ? 1 : 0) << '\n';
    io::write_f64(os, ds.rho);
    if (ds.stats) {
        io::write_block(os, ds.stats->mean);
        io::write_block(os, ds.stats->std);
    }
    if (!os) throw Error("save_dataset: write failed");
}

inline Dataset load_dataset(std::istream& is) {
    std::istringstream head(io::read_line(is));
    std::string magic, kind;
    Eigen::Index count = 0, in_len = 0, out_len = 0;
    Dataset ds;
    head >> magic >> kind >> ds.M >> ds.P >> ds.C >> ds.L >> count >> in_len >> out_len;
    if (!head || magic != kDatasetMagic) throw FormatError("not a dataset file");
    if (count < 0 || in_len < 0 || out_len < 0) throw FormatError("corrupt dataset header");
    ds.kind = ChannelKind::parse(kind);
    ds.inputs.resize(in_len, count);
    ds.targets.resize(out_len, count);
    RMat col_in(in_len, 1), col_out(out_len, 1);
    for (Eigen::Index i = 0; i < count; ++i) {
        io::read_block(is, col_in);
        io::read_block(is, col_out);
        ds.inputs.col(i) = col_in;
        ds.targets.col(i) = col_out;
    }
    ds.meta.resize(static_cast<std::size_t>(count));
    for (auto& m : ds.meta) {
        m.snr_db = io::read_f64(is);
        m.v = io::read_i64(is);
        m.u = io::read_i64(is);
    }
    std::istringstream st(io::read_line(is));
    std::string tag, role;
    int pre = 0, has_stats = 0;
    st >> tag >> role >> pre >> has_stats;
    if (!st || tag != "STATS") throw FormatError("dataset file: missing statistics block");
    ds.role = parse_role(role);
    ds.preprocessed = pre != 0;
    ds.rho = io::read_f64(is);
    if (has_stats) {
        FeatureStats s;
        RMat m(in_len, 1), sd(in_len, 1);
        io::read_block(is, m);
        io::read_block(is, sd);
        s.mean = m.col(0);
        s.std = sd.col(0);
        ds.stats = std::move(s);
    }
    return ds;
}

inline void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    save_dataset(ds, os);
}

inline Dataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open '" + path + "'");
    return load_dataset(is);
}

}  // namespace isacest
