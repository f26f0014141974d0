#include "bellman/martingale.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "bellman/special_functions.hpp"

namespace bellman {

namespace {

bool node_valid(const TreeNode& node) {
    if (node.children.empty()) return true;
    double psum = 0.0;
    Eigen::VectorXd f_mean = Eigen::VectorXd::Zero(node.f_value.size());
    Eigen::VectorXd g_mean = Eigen::VectorXd::Zero(node.g_value.size());
    for (const TreeNode& ch : node.children) {
        psum += ch.probability;
        f_mean += ch.probability * ch.f_value;
        g_mean += ch.probability * ch.g_value;
        const double df = (ch.f_value - node.f_value).norm();
        const double dg = (ch.g_value - node.g_value).norm();
        if (dg > df + kTreeSubordTol) return false;
        if (!node_valid(ch)) return false;
    }
    if (std::abs(psum - 1.0) > kTreeProbTol) return false;
    if ((f_mean - node.f_value).lpNorm<Eigen::Infinity>() > kTreeMeanTol) return false;
    if ((g_mean - node.g_value).lpNorm<Eigen::Infinity>() > kTreeMeanTol) return false;
    return true;
}

void grow_node(TreeNode& node, Rng& rng, int levels_left, int branching, int dim) {
    if (levels_left == 0) return;
    const int m = branching;
    std::vector<double> w(m);
    double wsum = 0.0;
    for (int i = 0; i < m; ++i) {
        w[i] = 0.1 + rng.uniform();
        wsum += w[i];
    }
    for (int i = 0; i < m; ++i) w[i] /= wsum;

    std::vector<Eigen::VectorXd> df(m), dg(m);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < m; ++i) {
        df[i] = rng.normal_vector(dim);
        mean += w[i] * df[i];
    }
    for (int i = 0; i < m; ++i) df[i] -= mean;

    mean.setZero();
    for (int i = 0; i < m; ++i) {
        dg[i] = rng.uniform() * (rng.random_rotation(dim) * df[i]);
        mean += w[i] * dg[i];
    }
    for (int i = 0; i < m; ++i) dg[i] -= mean;

    // The mean-zero projection can break the contraction; a single uniform
    // rescale restores |dg_i| <= |df_i| for every child at once.
    double alpha = 1.0;
    bool degenerate = false;
    for (int i = 0; i < m; ++i) {
        const double nf = df[i].norm();
        const double ng = dg[i].norm();
        if (nf < 1e-14) {
            if (ng > 0.0) degenerate = true;
            continue;
        }
        alpha = std::max(alpha, ng / nf);
    }
    for (int i = 0; i < m; ++i) {
        if (degenerate) {
            dg[i].setZero();
        } else if (alpha > 1.0) {
            dg[i] /= alpha;
        }
    }

    node.children.resize(m);
    for (int i = 0; i < m; ++i) {
        node.children[i].probability = w[i];
        node.children[i].f_value = node.f_value + df[i];
        node.children[i].g_value = node.g_value + dg[i];
        grow_node(node.children[i], rng, levels_left - 1, branching, dim);
    }
}

} // namespace

bool tree_is_valid(const MartingaleTree& t) {
    if (t.dimension < 1 || t.root.f_value.size() != t.dimension ||
        t.root.g_value.size() != t.dimension) {
        return false;
    }
    return node_valid(t.root);
}

MartingaleTree random_ds_pair(std::uint64_t seed, int depth, int branching, int dim) {
    if (depth < 0 || depth > 12) throw std::invalid_argument("random_ds_pair: depth in [0, 12]");
    if (branching < 2 || branching > 3) {
        throw std::invalid_argument("random_ds_pair: branching in {2, 3}");
    }
    if (dim < 1 || dim > 3) throw std::invalid_argument("random_ds_pair: dim in {1, 2, 3}");

    for (std::uint64_t attempt = 0; attempt < 8; ++attempt) {
        Rng rng = make_stream(seed, attempt);
        MartingaleTree t;
        t.depth = depth;
        t.dimension = dim;
        t.root.probability = 1.0;
        t.root.f_value = rng.normal_vector(dim);
        t.root.g_value = rng.normal_vector(dim);
        grow_node(t.root, rng, depth, branching, dim);
        if (tree_is_valid(t)) return t;
    }
    throw std::runtime_error("random_ds_pair: could not generate a valid tree");
}

namespace {

void leaf_moments(const TreeNode& node, double prob, double p, double& ef_p, double& eg_p) {
    if (node.children.empty()) {
        ef_p += prob * std::pow(node.f_value.norm(), p);
        eg_p += prob * std::pow(node.g_value.norm(), p);
        return;
    }
    for (const TreeNode& ch : node.children) leaf_moments(ch, prob * ch.probability, p, ef_p, eg_p);
}

} // namespace

std::pair<double, double> tree_terminal_moments(const MartingaleTree& t, double p) {
    double ef_p = 0.0, eg_p = 0.0;
    leaf_moments(t.root, 1.0, p, ef_p, eg_p);
    return {ef_p, eg_p};
}

double verify_subordination_bound(const MartingaleTree& t, double gamma, const ExponentPair& e) {
    if (!(e.p > 1.0) || !(e.p < 2.0)) {
        throw std::invalid_argument("verify_subordination_bound: requires 1 < p < 2");
    }
    if (!tree_is_valid(t)) throw std::invalid_argument("verify_subordination_bound: invalid tree");
    const auto [ef_p, eg_p] = tree_terminal_moments(t, e.p);
    const double b0 = b_special(t.root.f_value, t.root.g_value, gamma, e);
    return cost_constant(gamma, e) * ef_p + b0 - eg_p;
}

namespace {

void require_chain_common(const ChainParams& cp, const ExponentPair& e) {
    if (!(e.p > 1.0) || !(e.p <= 2.0)) throw std::invalid_argument("chain: requires 1 < p <= 2");
    if (!(cp.gamma > 0.0) || !(cp.gamma < e.gamma_max())) {
        throw std::invalid_argument("chain: gamma out of (0, 1/(p-1))");
    }
    if (!(cp.Y >= 0.0)) throw std::invalid_argument("chain: Y must be >= 0");
    if (!(cp.delta > 0.0)) throw std::invalid_argument("chain: delta must be > 0");
}

} // namespace

ChainStats extremal_chain_case2(const ChainParams& cp) {
    const ExponentPair e = ExponentPair::from_p(cp.p);
    require_chain_common(cp, e);
    if (cp.eps != 0.0) throw std::invalid_argument("extremal_chain_case2: eps must be 0");
    if (!(cp.Y < cp.gamma)) throw std::invalid_argument("extremal_chain_case2: requires Y < gamma");

    const double g = cp.gamma, Y = cp.Y, dl = cp.delta, p = cp.p;
    const double P = (g + dl * (g - 1.0)) / ((1.0 + 2.0 * dl) * (g + dl * (g + 1.0)));
    const double step_p = std::pow(1.0 + 2.0 * dl, p);
    if (!(step_p * P < 1.0)) {
        throw std::domain_error("extremal_chain_case2: delta too large for given gamma "
                                "(geometric tail does not converge)");
    }
    const double x0 = (1.0 + Y) / (g + 1.0);
    const double c = (g - Y) / ((g + dl * (g + 1.0)) * (1.0 + Y));
    const double m0 = 1.0 - c;

    ChainStats st;
    st.tail_ratio = P;
    st.ef_p = std::pow(x0, p) * (m0 + c * (1.0 - P) * step_p / (1.0 - step_p * P));
    st.eg_p = std::pow(g, p) * st.ef_p;
    st.eg_signed_power = Y * std::pow(g * (1.0 + Y) / (g + 1.0), p - 2.0);
    st.ef_mean =
        x0 * (m0 + c * (1.0 - P) * (1.0 + 2.0 * dl) / (1.0 - (1.0 + 2.0 * dl) * P));

    st.atoms.push_back({x0, m0});
    double cum = m0;
    double value = x0;
    double mass = c * (1.0 - P);
    for (int k = 1; cum < 1.0 - 1e-14 && k < 2000000; ++k) {
        value *= 1.0 + 2.0 * dl;
        st.atoms.push_back({value, mass});
        cum += mass;
        mass *= P;
    }
    st.atoms.back().mass += 1.0 - cum; // remainder to the final atom
    return st;
}

double case1_epsilon(double gamma, double Y, double z_ratio, const ExponentPair& e) {
    if (!(z_ratio > 1.0)) throw std::invalid_argument("case1_epsilon: requires Zbar/|zeta|^p > 1");
    const double p = e.p;
    return (1.0 - (p - 1.0) * gamma) * Y * std::pow(1.0 + gamma, p - 1.0) /
           std::pow(1.0 + Y, p) * (z_ratio - 1.0);
}

ChainStats extremal_chain_case1(const ChainParams& cp) {
    const ExponentPair e = ExponentPair::from_p(cp.p);
    require_chain_common(cp, e);
    if (!(cp.eps > 0.0)) throw std::invalid_argument("extremal_chain_case1: requires eps > 0");
    if (!(cp.eps < 1.0)) throw std::invalid_argument("extremal_chain_case1: eps must be < 1");

    ChainParams sub = cp;
    sub.Y = 0.0;
    sub.eps = 0.0;
    const ChainStats tail = extremal_chain_case2(sub);

    const double p = cp.p, Y = cp.Y, eps = cp.eps;
    const double pi_a = Y / (Y + eps);
    const double pi_b = eps / (Y + eps);
    const double scale = 1.0 + Y;

    ChainStats st;
    st.tail_ratio = tail.tail_ratio;
    st.ef_p = pi_a * std::pow(1.0 - eps, p) + pi_b * std::pow(scale, p) * tail.ef_p;
    st.eg_p = pi_a * std::pow(Y + eps, p) + pi_b * std::pow(scale, p) * tail.eg_p;
    st.eg_signed_power = Y * std::pow(Y + eps, p - 2.0);
    st.ef_mean = pi_a * (1.0 - eps) + pi_b * scale * tail.ef_mean;

    st.atoms.reserve(tail.atoms.size() + 1);
    st.atoms.push_back({1.0 - eps, pi_a});
    for (const ChainAtom& a : tail.atoms) st.atoms.push_back({scale * a.f_value, pi_b * a.mass});
    return st;
}

double lower_bound_value(const BellmanPoint& pt, const ExponentPair& e, double delta,
                         double shrink) {
    if (!(e.p > 1.0) || !(e.p <= 2.0)) {
        throw std::invalid_argument("lower_bound_value: requires 1 < p <= 2");
    }
    if (!(shrink > 0.0) || !(shrink < 1.0)) {
        throw std::invalid_argument("lower_bound_value: shrink must be in (0, 1)");
    }
    if (!(delta > 0.0) || !(delta < 0.1)) {
        throw std::invalid_argument("lower_bound_value: delta must be in (0, 0.1)");
    }
    const ScalarParams s = pt.scalars();
    const double zp = std::pow(s.zeta_norm, e.p);
    const double hq = std::pow(s.eta_norm, e.q);
    if (!(s.Z > zp) || !(s.H > hq)) {
        throw std::invalid_argument("lower_bound_value: requires strict interior point");
    }
    if (!(s.zeta_norm > 0.0)) {
        throw std::invalid_argument("lower_bound_value: requires |zeta| > 0");
    }
    const double z_bar = zp + shrink * (s.Z - zp);
    const double h_bar = hq + shrink * (s.H - hq);

    if (hq * z_bar < zp * h_bar) {
        const GammaYSolution sol = solve_system({s.zeta_norm, s.eta_norm, z_bar, h_bar}, e);
        ChainParams cp{e.p, sol.gamma, sol.Y, delta, 0.0};
        const ChainStats st = extremal_chain_case2(cp);
        const double k = std::pow(h_bar * zp / (z_bar * std::pow(sol.gamma, e.p)), 1.0 / e.q);
        return s.zeta_norm * k * st.eg_p - s.zeta_norm * s.eta_norm * sol.Y;
    }

    if (!(s.eta_norm > 0.0)) {
        throw std::invalid_argument("lower_bound_value: degenerate case selection");
    }
    const double y_star = f_univariate_argmin({s.zeta_norm, s.eta_norm, z_bar, h_bar}, e);
    const double gamma1 = (1.0 - 10.0 * delta) * e.gamma_max();
    const double eps = case1_epsilon(gamma1, y_star, z_bar / zp, e);
    ChainParams cp{e.p, gamma1, y_star, delta, eps};
    const ChainStats st = extremal_chain_case1(cp);
    return s.zeta_norm * s.eta_norm * std::pow(y_star + eps, 2.0 - e.p) / y_star * st.eg_p -
           s.zeta_norm * s.eta_norm * y_star;
}

McChainStats simulate_chain_mc(const ChainParams& cp, long long n_paths, std::uint64_t seed,
                               long long step_cap) {
    const ExponentPair e = ExponentPair::from_p(cp.p);
    require_chain_common(cp, e);
    if (cp.eps == 0.0 && !(cp.Y < cp.gamma)) {
        throw std::invalid_argument("simulate_chain_mc: requires Y < gamma when eps = 0");
    }
    if (n_paths < 1) throw std::invalid_argument("simulate_chain_mc: n_paths must be >= 1");

    const double g = cp.gamma, dl = cp.delta, p = cp.p;
    double s_f = 0, s_f2 = 0, s_fp = 0, s_fp2 = 0, s_gp = 0, s_gp2 = 0;
    double s_gs = 0, s_gs2 = 0, s_g = 0, s_g2 = 0;
    long long capped = 0;

    for (long long path = 0; path < n_paths; ++path) {
        Rng rng = make_stream(seed, static_cast<std::uint64_t>(path));
        double x = 1.0, y = cp.Y;
        bool absorbed = false;

        if (cp.eps > 0.0) {
            if (rng.uniform() < cp.Y / (cp.Y + cp.eps)) {
                x = 1.0 - cp.eps;
                y = cp.Y + cp.eps;
                absorbed = true; // above the cone, rule (v)
            } else {
                x = 1.0 + cp.Y;
                y = 0.0;
            }
        }

        long long steps = 0;
        while (!absorbed) {
            if (++steps > step_cap) {
                ++capped;
                break;
            }
            if (y == 0.0) {
                const double total = 2.0 * g + 2.0 * dl * (g + 1.0);
                const double u = rng.uniform() * total;
                if (u < 2.0 * g) {
                    const double sign = u < g ? 1.0 : -1.0;
                    y = sign * dl * x;
                    x *= 1.0 + dl;
                } else {
                    const double sign = u < 2.0 * g + dl * (g + 1.0) ? 1.0 : -1.0;
                    x /= g + 1.0;
                    y = sign * g * x;
                    absorbed = true;
                }
            } else if (y > 0.0 && y < g * x) {
                if (rng.uniform() < y * (g + 1.0) / (g * (x + y))) {
                    x = (x + y) / (g + 1.0);
                    y = g * x;
                    absorbed = true;
                } else {
                    x += y;
                    y = 0.0;
                }
            } else if (y < 0.0 && -y < g * x) {
                if (rng.uniform() < -y * (g + 1.0) / (g * (x - y))) {
                    x = (x - y) / (g + 1.0);
                    y = -g * x;
                    absorbed = true;
                } else {
                    x -= y;
                    y = 0.0;
                }
            } else {
                absorbed = true;
            }
        }

        const double fp = std::pow(x, p);
        const double gp = std::pow(std::abs(y), p);
        const double gs = y == 0.0 ? 0.0 : y * std::pow(std::abs(y), p - 2.0);
        s_f += x;
        s_f2 += x * x;
        s_fp += fp;
        s_fp2 += fp * fp;
        s_gp += gp;
        s_gp2 += gp * gp;
        s_gs += gs;
        s_gs2 += gs * gs;
        s_g += y;
        s_g2 += y * y;
    }

    const double n = static_cast<double>(n_paths);
    const auto finalize = [n](double sum, double sum2, double& mean, double& se) {
        mean = sum / n;
        const double var = std::max(0.0, sum2 / n - mean * mean);
        se = std::sqrt(var / n);
    };
    McChainStats mc;
    mc.n_paths = n_paths;
    mc.capped_paths = capped;
    finalize(s_fp, s_fp2, mc.ef_p, mc.ef_p_se);
    finalize(s_gp, s_gp2, mc.eg_p, mc.eg_p_se);
    finalize(s_gs, s_gs2, mc.eg_signed_power, mc.eg_signed_power_se);
    finalize(s_f, s_f2, mc.ef_mean, mc.ef_mean_se);
    finalize(s_g, s_g2, mc.eg_mean, mc.eg_mean_se);
    return mc;
}

double verify_haar_unconditionality(const std::vector<Eigen::VectorXd>& coeffs,
                                    const std::vector<int>& signs, const ExponentPair& e) {
    if (coeffs.empty() || coeffs.size() > 4096) {
        throw std::invalid_argument("verify_haar_unconditionality: need 1..4096 coefficients");
    }
    if (signs.size() != coeffs.size()) {
        throw std::invalid_argument("verify_haar_unconditionality: signs/coeffs size mismatch");
    }
    const int dim = static_cast<int>(coeffs[0].size());
    for (const auto& a : coeffs) {
        if (a.size() != dim) {
            throw std::invalid_argument("verify_haar_unconditionality: mixed dimensions");
        }
    }
    for (int s : signs) {
        if (s != 1 && s != -1) {
            throw std::invalid_argument("verify_haar_unconditionality: signs must be +-1");
        }
    }

    const std::size_t n_max = coeffs.size() - 1;
    int cells = 1;
    if (n_max >= 1) {
        const int j_top = std::bit_width(n_max) - 1; // level of the last index
        cells = 1 << (j_top + 1);
    }

    Eigen::MatrixXd plain = Eigen::MatrixXd::Zero(cells, dim);
    Eigen::MatrixXd flipped = Eigen::MatrixXd::Zero(cells, dim);
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        const Eigen::VectorXd& a = coeffs[k];
        if (k == 0) {
            plain.rowwise() += a.transpose();
            flipped.rowwise() += (signs[0] * a).transpose();
            continue;
        }
        const int j = std::bit_width(k) - 1;
        const int l = static_cast<int>(k) - (1 << j);
        const int width = cells >> j;
        const int start = l * width;
        for (int c = 0; c < width; ++c) {
            const double sgn = c < width / 2 ? 1.0 : -1.0;
            plain.row(start + c) += sgn * a.transpose();
            flipped.row(start + c) += sgn * signs[k] * a.transpose();
        }
    }

    double num = 0.0, den = 0.0;
    for (int c = 0; c < cells; ++c) {
        den += std::pow(plain.row(c).norm(), e.p);
        num += std::pow(flipped.row(c).norm(), e.p);
    }
    den /= cells;
    num /= cells;
    if (den == 0.0) {
        throw std::domain_error("verify_haar_unconditionality: zero function, undefined ratio");
    }
    return std::pow(num, 1.0 / e.p) / std::pow(den, 1.0 / e.p);
}

} // namespace bellman
