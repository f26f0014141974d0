#include "bellman/dyadic_oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bellman/random.hpp"

namespace bellman {

namespace {

// Cached bottom-up averages and sibling differences of one pair.
struct TreeCache {
    int depth = 0;
    std::vector<Eigen::MatrixXd> avg_phi, avg_psi;   // level k: dim x 2^k
    std::vector<Eigen::MatrixXd> dvec_phi, dvec_psi; // internal level k: right - left child
    std::vector<Eigen::VectorXd> dnorm_phi, dnorm_psi;

    void build(const DyadicFunctionPair& dp) {
        depth = dp.depth;
        avg_phi.assign(depth + 1, {});
        avg_psi.assign(depth + 1, {});
        dvec_phi.assign(depth, {});
        dvec_psi.assign(depth, {});
        dnorm_phi.assign(depth, {});
        dnorm_psi.assign(depth, {});
        avg_phi[depth] = dp.phi_leaves;
        avg_psi[depth] = dp.psi_leaves;
        for (int k = depth - 1; k >= 0; --k) {
            const int n = 1 << k;
            for (auto* pair : {&avg_phi, &avg_psi}) {
                auto& up = (*pair)[k + 1];
                auto& cur = (*pair)[k];
                cur.resize(up.rows(), n);
                for (int i = 0; i < n; ++i) {
                    cur.col(i) = 0.5 * (up.col(2 * i) + up.col(2 * i + 1));
                }
            }
        }
        for (int k = 0; k < depth; ++k) {
            const int n = 1 << k;
            dvec_phi[k].resize(dp.phi_leaves.rows(), n);
            dvec_psi[k].resize(dp.psi_leaves.rows(), n);
            dnorm_phi[k].resize(n);
            dnorm_psi[k].resize(n);
            for (int i = 0; i < n; ++i) {
                dvec_phi[k].col(i) = avg_phi[k + 1].col(2 * i + 1) - avg_phi[k + 1].col(2 * i);
                dvec_psi[k].col(i) = avg_psi[k + 1].col(2 * i + 1) - avg_psi[k + 1].col(2 * i);
                dnorm_phi[k](i) = dvec_phi[k].col(i).norm();
                dnorm_psi[k](i) = dvec_psi[k].col(i).norm();
            }
        }
    }

    double value() const {
        double total = 0.0;
        for (int k = 0; k < depth; ++k) {
            total += 0.25 * std::ldexp(dnorm_phi[k].dot(dnorm_psi[k]), -k);
        }
        return total;
    }

    // Central difference of the objective in one leaf coordinate: only the
    // ancestor-chain terms change, so the difference is assembled from them.
    double leaf_derivative(bool phi_side, int leaf, int comp, double h) const {
        const auto& dvec = phi_side ? dvec_phi : dvec_psi;
        const auto& partner = phi_side ? dnorm_psi : dnorm_phi;
        double acc = 0.0;
        for (int k = 0; k < depth; ++k) {
            const int node = leaf >> (depth - k);
            const bool right_child = ((leaf >> (depth - k - 1)) & 1) != 0;
            const double tau = (right_child ? 1.0 : -1.0) * std::ldexp(h, -(depth - k - 1));
            const auto d = dvec[k].col(node);
            const double nd2 = d.squaredNorm();
            const double dc = d(comp);
            const double base = nd2 - dc * dc;
            const double n_plus = std::sqrt(base + (dc + tau) * (dc + tau));
            const double n_minus = std::sqrt(base + (dc - tau) * (dc - tau));
            acc += 0.25 * std::ldexp(partner[k](node) * (n_plus - n_minus), -k);
        }
        return acc / (2.0 * h);
    }
};

double moment_mean(const Eigen::MatrixXd& leaves, double p) {
    double acc = 0.0;
    for (int i = 0; i < leaves.cols(); ++i) acc += std::pow(leaves.col(i).norm(), p);
    return acc / leaves.cols();
}

// Shift columns so the mean hits `target` exactly, then contract deviations
// toward `target` by the largest t in [0,1] with mean |target + t d|^power
// <= budget (bisection keeping the feasible endpoint).
void project_component(Eigen::MatrixXd& leaves, const Eigen::VectorXd& target, double power,
                       double budget) {
    const Eigen::VectorXd shift = target - leaves.rowwise().mean();
    leaves.colwise() += shift;
    if (moment_mean(leaves, power) <= budget) return;

    Eigen::MatrixXd dev = leaves.colwise() - target;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        Eigen::MatrixXd cand = (dev * mid).colwise() + target;
        if (moment_mean(cand, power) <= budget) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-14) break;
    }
    leaves = (dev * lo).colwise() + target;
}

bool within_constraints(const DyadicFunctionPair& dp, const BellmanPoint& pt,
                        const ExponentPair& e) {
    const double tol = 1e-10;
    const double mean_tol_phi = tol * (1.0 + pt.zeta.norm());
    const double mean_tol_psi = tol * (1.0 + pt.eta.norm());
    if ((dp.phi_leaves.rowwise().mean() - pt.zeta).norm() > mean_tol_phi) return false;
    if ((dp.psi_leaves.rowwise().mean() - pt.eta).norm() > mean_tol_psi) return false;
    if (moment_mean(dp.phi_leaves, e.p) > pt.Z + tol * (1.0 + pt.Z)) return false;
    if (moment_mean(dp.psi_leaves, e.q) > pt.H + tol * (1.0 + pt.H)) return false;
    return true;
}

} // namespace

double objective(const DyadicFunctionPair& dp) {
    if (dp.phi_leaves.cols() != (1 << dp.depth) || dp.psi_leaves.cols() != (1 << dp.depth) ||
        dp.phi_leaves.rows() != dp.psi_leaves.rows() || dp.phi_leaves.rows() < 1) {
        throw std::invalid_argument("objective: malformed dyadic pair");
    }
    TreeCache cache;
    cache.build(dp);
    return cache.value();
}

DyadicFunctionPair feasible_project(const DyadicFunctionPair& dp, const BellmanPoint& pt,
                                    const ExponentPair& e) {
    if (dp.phi_leaves.rows() != pt.zeta.size()) {
        throw std::invalid_argument("feasible_project: dimension mismatch with the point");
    }
    if (!pt.scalars().in_domain(e)) {
        throw std::invalid_argument("feasible_project: infeasible target point");
    }
    if (within_constraints(dp, pt, e)) return dp;

    DyadicFunctionPair out = dp;
    project_component(out.phi_leaves, pt.zeta, e.p, pt.Z);
    project_component(out.psi_leaves, pt.eta, e.q, pt.H);
    return out;
}

DyadicFunctionPair split_leaves(const DyadicFunctionPair& dp, int extra_depth) {
    if (extra_depth < 0) throw std::invalid_argument("split_leaves: extra_depth must be >= 0");
    const int factor = 1 << extra_depth;
    DyadicFunctionPair out;
    out.depth = dp.depth + extra_depth;
    out.phi_leaves.resize(dp.phi_leaves.rows(), dp.phi_leaves.cols() * factor);
    out.psi_leaves.resize(dp.psi_leaves.rows(), dp.psi_leaves.cols() * factor);
    for (int i = 0; i < dp.phi_leaves.cols(); ++i) {
        for (int r = 0; r < factor; ++r) {
            out.phi_leaves.col(i * factor + r) = dp.phi_leaves.col(i);
            out.psi_leaves.col(i * factor + r) = dp.psi_leaves.col(i);
        }
    }
    return out;
}

namespace {

struct AscentResult {
    double value = 0.0;
    DyadicFunctionPair pair;
};

AscentResult ascend(DyadicFunctionPair pair, const BellmanPoint& pt, const ExponentPair& e,
                    int max_iterations) {
    TreeCache cache;
    cache.build(pair);
    double cur = cache.value();
    if (pair.depth == 0) return {cur, pair};

    const int dim = pair.dim();
    const int leaves = pair.leaves();
    Eigen::MatrixXd grad_phi(dim, leaves), grad_psi(dim, leaves);

    const double slack_phi = std::pow(std::max(0.0, pt.Z - std::pow(pt.zeta.norm(), e.p)),
                                      1.0 / e.p);
    const double slack_psi = std::pow(std::max(0.0, pt.H - std::pow(pt.eta.norm(), e.q)),
                                      1.0 / e.q);
    const double move_scale = 0.5 * (slack_phi + slack_psi) + 1e-3;
    double step = -1.0; // set from the first gradient

    for (int iter = 0; iter < max_iterations; ++iter) {
        const double h =
            1e-6 * (1.0 + std::max(pair.phi_leaves.cwiseAbs().maxCoeff(),
                                   pair.psi_leaves.cwiseAbs().maxCoeff()));
        for (int j = 0; j < leaves; ++j) {
            for (int c = 0; c < dim; ++c) {
                grad_phi(c, j) = cache.leaf_derivative(true, j, c, h);
                grad_psi(c, j) = cache.leaf_derivative(false, j, c, h);
            }
        }
        const double gnorm = std::sqrt(grad_phi.squaredNorm() + grad_psi.squaredNorm());
        if (gnorm < 1e-14) break;
        if (step < 0.0) step = 0.2 * move_scale * std::sqrt(2.0 * dim * leaves) / gnorm;

        bool accepted = false;
        double trial = step;
        for (int bt = 0; bt < 30 && !accepted; ++bt, trial *= 0.5) {
            DyadicFunctionPair cand = pair;
            cand.phi_leaves += trial * grad_phi;
            cand.psi_leaves += trial * grad_psi;
            cand = feasible_project(cand, pt, e);
            TreeCache cand_cache;
            cand_cache.build(cand);
            const double val = cand_cache.value();
            if (val > cur + 1e-15 * (1.0 + std::abs(cur))) {
                const double rel = (val - cur) / std::max(1e-300, std::abs(val));
                pair = std::move(cand);
                cache = std::move(cand_cache);
                cur = val;
                accepted = true;
                step = trial * 2.0;
                if (rel < 1e-9) return {cur, pair};
            }
        }
        if (!accepted) break;
    }
    return {cur, pair};
}

} // namespace

MaximizeResult maximize(const BellmanPoint& pt, const ExponentPair& e, int depth, int restarts,
                        std::uint64_t seed, int max_iterations,
                        const DyadicFunctionPair* warm_start) {
    if (depth < 0 || depth > 12) throw std::invalid_argument("maximize: depth in [0, 12]");
    if (restarts < 1) throw std::invalid_argument("maximize: restarts must be >= 1");
    if (!pt.scalars().in_domain(e)) throw std::invalid_argument("maximize: point outside domain");

    const int dim = static_cast<int>(pt.zeta.size());
    const int leaves = 1 << depth;
    const double noise_phi =
        0.25 * std::pow(std::max(0.0, pt.Z - std::pow(pt.zeta.norm(), e.p)), 1.0 / e.p);
    const double noise_psi =
        0.25 * std::pow(std::max(0.0, pt.H - std::pow(pt.eta.norm(), e.q)), 1.0 / e.q);

    MaximizeResult best;
    best.value = -1.0;

    const auto consider = [&](const AscentResult& r) {
        if (r.value > best.value) {
            best.value = r.value;
            best.pair = r.pair;
        }
    };

    if (warm_start != nullptr) {
        if (warm_start->depth != depth || warm_start->dim() != dim) {
            throw std::invalid_argument("maximize: warm start shape mismatch");
        }
        consider(ascend(feasible_project(*warm_start, pt, e), pt, e, max_iterations));
    }

    for (int r = 0; r < restarts; ++r) {
        Rng rng = make_stream(seed, static_cast<std::uint64_t>(r));
        DyadicFunctionPair init;
        init.depth = depth;
        init.phi_leaves.resize(dim, leaves);
        init.psi_leaves.resize(dim, leaves);
        for (int j = 0; j < leaves; ++j) {
            init.phi_leaves.col(j) = noise_phi * rng.normal_vector(dim);
            init.psi_leaves.col(j) = noise_psi * rng.normal_vector(dim);
        }
        const Eigen::VectorXd phi_shift = pt.zeta - init.phi_leaves.rowwise().mean();
        const Eigen::VectorXd psi_shift = pt.eta - init.psi_leaves.rowwise().mean();
        init.phi_leaves.colwise() += phi_shift;
        init.psi_leaves.colwise() += psi_shift;
        init = feasible_project(init, pt, e);
        consider(ascend(init, pt, e, max_iterations));
    }
    return best;
}

} // namespace bellman
