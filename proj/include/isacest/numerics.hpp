#pragma once

// Complex-matrix primitives shared by the channel, protocol, estimator and
// dataset code: DFT matrices, square pseudoinverse, column-major vec/unvec,
// Frobenius norms and reproducible complex-Gaussian sampling.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace isacest {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;  // column-major, double precision
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct SingularMatrixError : Error {
    using Error::Error;
};
struct ShapeError : Error {
    using Error::Error;
};
struct FormatError : Error {
    using Error::Error;
};

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

/// Reproducible random stream keyed by (seed, stream id).
///
/// Streams are single-owner. Code that fans work out (per sample, per
/// sub-frame, per thread) derives child streams with `child()` instead of
/// sharing one engine, so results do not depend on scheduling.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
        : seed_(seed), stream_(stream_id) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream_id),
                          static_cast<std::uint32_t>(stream_id >> 32)};
        engine_.seed(seq);
    }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_; }

    /// Independent stream addressed by a path of ids below this one.
    RngStream child(std::initializer_list<std::uint64_t> path) const {
        std::uint64_t id = detail::splitmix64(stream_ ^ 0x6a09e667f3bcc909ULL);
        for (auto p : path) id = detail::splitmix64(id ^ detail::splitmix64(p + 0x3c6ef372fe94f82bULL));
        return RngStream(seed_, id);
    }
    RngStream child(std::uint64_t id) const { return child({id}); }

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }  // [0, 1)
    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// n x n DFT matrix with entry (r, q) = exp(j 2 pi r q / n), 0-based indices,
/// scaled by 1/sqrt(n) when `normalized`.
inline CMat dft_matrix(Eigen::Index n, bool normalized) {
    if (n < 1) throw ShapeError("dft_matrix: n must be positive");
    CMat out(n, n);
    const double scale = normalized ? 1.0 / std::sqrt(static_cast<double>(n)) : 1.0;
    for (Eigen::Index q = 0; q < n; ++q) {
        for (Eigen::Index r = 0; r < n; ++r) {
            // reduce r*q mod n first so large sizes keep full phase accuracy
            const auto k = static_cast<double>((r * q) % n);
            out(r, q) = std::polar(scale, 2.0 * std::numbers::pi * k / static_cast<double>(n));
        }
    }
    return out;
}

/// X^H (X X^H)^{-1} for a square, full-rank X.
inline CMat pinv_square(const CMat& x) {
    if (x.rows() != x.cols()) throw ShapeError("pinv_square: matrix must be square");
    const CMat gram = x * x.adjoint();
    Eigen::FullPivLU<CMat> lu(gram);
    if (!lu.isInvertible())
        throw SingularMatrixError("pinv_square: X X^H is singular");
    // cheap 1-norm condition estimate; the pilots used here are scaled unitary
    const double rcond = lu.rcond();
    if (!(rcond > 1e-12))
        throw SingularMatrixError("pinv_square: X X^H is numerically singular (rcond " +
                                  std::to_string(rcond) + ")");
    return x.adjoint() * lu.inverse();
}

/// Column-stacking vectorization: column 0 first.
inline CVec vec(const CMat& m) {
    return Eigen::Map<const CVec>(m.data(), m.size());
}

inline CMat unvec(const CVec& v, Eigen::Index rows, Eigen::Index cols) {
    if (v.size() != rows * cols) throw ShapeError("unvec: length does not match rows*cols");
    return Eigen::Map<const CMat>(v.data(), rows, cols);
}

inline double fro_norm_sq(const CMat& m) { return m.squaredNorm(); }

/// i.i.d. CN(0, variance) entries: real and imaginary parts N(0, variance/2).
inline CMat randn_complex(Eigen::Index rows, Eigen::Index cols, double variance, RngStream& rng) {
    if (variance < 0.0) throw std::invalid_argument("randn_complex: negative variance");
    CMat out(rows, cols);
    const double s = std::sqrt(variance / 2.0);
    for (Eigen::Index j = 0; j < out.size(); ++j) {
        const double re = rng.normal();
        const double im = rng.normal();
        out.data()[j] = cplx(s * re, s * im);
    }
    return out;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

}  // namespace isacest
