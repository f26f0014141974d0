#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "bellman/random.hpp"

namespace testutil {

inline bool rel_close(double a, double b, double rel, double abs_floor = 0.0) {
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + abs_floor;
}

/// Random rotation applied to both vectors of a pair.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> rotate_pair(bellman::Rng& rng,
                                                               const Eigen::VectorXd& x,
                                                               const Eigen::VectorXd& y) {
    const Eigen::MatrixXd rot = rng.random_rotation(static_cast<int>(x.size()));
    return {rot * x, rot * y};
}

} // namespace testutil
