#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace bellman {

/// Deterministic random source. The transforms (uniform, Box-Muller normal,
/// QR-based rotations) are implemented here rather than taken from
/// <random> distributions so that a given seed produces the same stream on
/// every standard library.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Inclusive on both ends.
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(eng_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    double normal() {
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    Eigen::VectorXd normal_vector(int dim) {
        Eigen::VectorXd v(dim);
        for (int i = 0; i < dim; ++i) v(i) = normal();
        return v;
    }

    /// Haar-ish random orthogonal matrix from the QR factorization of a
    /// Gaussian matrix, with the R-diagonal sign fix.
    Eigen::MatrixXd random_rotation(int dim) {
        if (dim == 1) {
            Eigen::MatrixXd m(1, 1);
            m(0, 0) = uniform() < 0.5 ? -1.0 : 1.0;
            return m;
        }
        Eigen::MatrixXd a(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) a(i, j) = normal();
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
        Eigen::MatrixXd qmat = qr.householderQ();
        Eigen::MatrixXd rmat = qr.matrixQR().triangularView<Eigen::Upper>();
        for (int j = 0; j < dim; ++j)
            if (rmat(j, j) < 0.0) qmat.col(j) *= -1.0;
        return qmat;
    }

  private:
    std::mt19937_64 eng_;
};

/// Deterministic stream for (seed, index) pairs, used by Monte-Carlo paths,
/// optimizer restarts and regenerated tree draws.
inline Rng make_stream(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed;
    s ^= 0x9e3779b97f4a7c15ull * (index + 1);
    s ^= s >> 29;
    s *= 0xbf58476d1ce4e5b9ull;
    s ^= s >> 32;
    return Rng(s);
}

} // namespace bellman
