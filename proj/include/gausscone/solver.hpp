#pragma once

// Discrete Gauss image problem: find log-radii x so that the convexification
// K = conv{exp(x_i) v_i} + C pushes lambda forward onto a multiple of mu.
//
// With a_ji = log|<u_j, v_i>|, L = |lambda| and M = mu(Omega_C), the functional
//
//     Phi(x) = (1/M) sum_i mu_i x_i - (1/L) sum_j lambda_j min_i (a_ji + x_i)
//
// is convex and piecewise linear; 0 in its subdifferential is exactly the
// measure identity mu = (M/L) lambda(K, .).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gausscone/errors.hpp"
#include "gausscone/gauss_map.hpp"
#include "gausscone/pseudocone.hpp"
#include "gausscone/tie_transport.hpp"

namespace gausscone {

/// Instance (C, lambda, mu). The mu atom directions are the vertex directions of K.
class GaussImageProblem {
public:
    GaussImageProblem(AtomicSphericalMeasure lambda, AtomicSphericalMeasure mu)
        : lambda_(std::move(lambda)), mu_(std::move(mu)) {
        if (lambda_.patch() != Patch::OmegaCDual) throw DomainViolation("lambda must live on Omega_{C°}");
        if (mu_.patch() != Patch::OmegaC) throw DomainViolation("mu must live on Omega_C");
        if (!same_cone(lambda_.cone(), mu_.cone())) throw ConeMismatch("lambda and mu refer to different cones");
        log_pairing_.resize(lambda_.size(), mu_.size());
        for (int j = 0; j < lambda_.size(); ++j) {
            for (int i = 0; i < mu_.size(); ++i) {
                const double ip = lambda_.atoms()[j].direction.dot(mu_.atoms()[i].direction);
                if (!(ip <= -kTransversalFloor)) {
                    throw NonTransversalPair("lambda atom " + std::to_string(j) + " and mu atom " + std::to_string(i) +
                                             " are not strictly transversal");
                }
                log_pairing_(j, i) = std::log(-ip);
            }
        }
    }

    const Cone& cone() const noexcept { return mu_.cone(); }
    const AtomicSphericalMeasure& lambda() const noexcept { return lambda_; }
    const AtomicSphericalMeasure& mu() const noexcept { return mu_; }
    int lambda_size() const noexcept { return lambda_.size(); }
    int mu_size() const noexcept { return mu_.size(); }
    double lambda_mass() const noexcept { return lambda_.total_mass(); }
    double mu_mass() const noexcept { return mu_.total_mass(); }
    double balance_ratio() const noexcept { return lambda_mass() / mu_mass(); }

    /// a_ji = log|<u_j, v_i>| (rows: lambda atoms, columns: mu atoms).
    const Mat& log_pairing() const noexcept { return log_pairing_; }

    /// (L/M) mu_i, the lambda(K, .) masses a solution must produce.
    std::vector<double> target_masses() const {
        std::vector<double> t(mu_size());
        for (int i = 0; i < mu_size(); ++i) t[i] = mu_.atoms()[i].weight * balance_ratio();
        return t;
    }

    VRepPseudoCone pseudo_cone(const Vec& log_radii) const {
        if (log_radii.size() != mu_size()) throw DirectionMismatch("log-radii length differs from mu atom count");
        std::vector<double> radii(mu_size());
        for (int i = 0; i < mu_size(); ++i) radii[i] = std::exp(log_radii[i]);
        return VRepPseudoCone(cone(), mu_.directions(), std::move(radii));
    }

private:
    AtomicSphericalMeasure lambda_;
    AtomicSphericalMeasure mu_;
    Mat log_pairing_;
};

namespace detail {

inline void check_point(const Vec& x, const GaussImageProblem& p) {
    if (x.size() != p.mu_size() || !x.allFinite()) throw DomainViolation("log-radii must be finite with one entry per mu atom");
}

// log1p of the relative tie tolerance, i.e. the tie slack in the log domain.
inline double log_tie_slack() { return std::log1p(kTieTolerance); }

struct Evaluation {
    double phi = 0.0;
    std::vector<int> assignment;
    std::vector<double> masses;  // lambda units
};

inline Evaluation evaluate(const GaussImageProblem& p, const Vec& x) {
    const Mat& a = p.log_pairing();
    const double slack = log_tie_slack();
    Evaluation ev;
    ev.assignment.resize(p.lambda_size());
    ev.masses.assign(p.mu_size(), 0.0);
    double mu_term = 0.0;
    for (int i = 0; i < p.mu_size(); ++i) mu_term += p.mu().atoms()[i].weight * x[i];
    double lambda_term = 0.0;
    for (int j = 0; j < p.lambda_size(); ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < p.mu_size(); ++i) best = std::min(best, a(j, i) + x[i]);
        int chosen = 0;
        while (a(j, chosen) + x[chosen] > best + slack) ++chosen;
        ev.assignment[j] = chosen;
        const double w = p.lambda().atoms()[j].weight;
        ev.masses[chosen] += w;
        lambda_term += w * best;
    }
    ev.phi = mu_term / p.mu_mass() - lambda_term / p.lambda_mass();
    return ev;
}

inline double residual_linf(const GaussImageProblem& p, const std::vector<double>& masses) {
    double r = 0.0;
    for (int i = 0; i < p.mu_size(); ++i) {
        r = std::max(r, std::abs(masses[i] / p.lambda_mass() - p.mu().atoms()[i].weight / p.mu_mass()));
    }
    return r;
}

inline Vec centered(Vec x) {
    x.array() -= x.mean();
    return x;
}

} // namespace detail

inline double phi_value(const Vec& x, const GaussImageProblem& p) {
    detail::check_point(x, p);
    return detail::evaluate(p, x).phi;
}

/// g_i = mu_i/M - (lambda mass assigned to i)/L, ties broken to the lowest index.
inline Vec phi_subgradient(const Vec& x, const GaussImageProblem& p) {
    detail::check_point(x, p);
    const auto ev = detail::evaluate(p, x);
    Vec g(p.mu_size());
    for (int i = 0; i < p.mu_size(); ++i) {
        g[i] = p.mu().atoms()[i].weight / p.mu_mass() - ev.masses[i] / p.lambda_mass();
    }
    return g;
}

/// Phi with each inner min replaced by the softmin -tau log sum exp(-s/tau).
inline double phi_smoothed(const Vec& x, const GaussImageProblem& p, double tau) {
    detail::check_point(x, p);
    const Mat& a = p.log_pairing();
    double mu_term = 0.0;
    for (int i = 0; i < p.mu_size(); ++i) mu_term += p.mu().atoms()[i].weight * x[i];
    double lambda_term = 0.0;
    for (int j = 0; j < p.lambda_size(); ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < p.mu_size(); ++i) best = std::min(best, a(j, i) + x[i]);
        double acc = 0.0;
        for (int i = 0; i < p.mu_size(); ++i) acc += std::exp(-(a(j, i) + x[i] - best) / tau);
        lambda_term += p.lambda().atoms()[j].weight * (best - tau * std::log(acc));
    }
    return mu_term / p.mu_mass() - lambda_term / p.lambda_mass();
}

inline Vec phi_smoothed_gradient(const Vec& x, const GaussImageProblem& p, double tau) {
    detail::check_point(x, p);
    const Mat& a = p.log_pairing();
    Vec g(p.mu_size());
    for (int i = 0; i < p.mu_size(); ++i) g[i] = p.mu().atoms()[i].weight / p.mu_mass();
    Vec soft(p.mu_size());
    for (int j = 0; j < p.lambda_size(); ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < p.mu_size(); ++i) best = std::min(best, a(j, i) + x[i]);
        for (int i = 0; i < p.mu_size(); ++i) soft[i] = std::exp(-(a(j, i) + x[i] - best) / tau);
        soft /= soft.sum();
        g -= (p.lambda().atoms()[j].weight / p.lambda_mass()) * soft;
    }
    return g;
}

struct Certificate {
    bool certified = false;
    std::vector<TieSplit> splits;  // fractional routing of tied lambda atoms
    std::vector<double> masses;    // lambda(K, .) after splitting, lambda units
    double residual_linf = 0.0;    // after splitting
};

namespace detail {

// Splits tied atoms so that each vertex receives (L/M) mu_i, if possible.
inline Certificate certify_assignment(const GaussImageProblem& p, const std::vector<int>& assignment,
                                      const std::vector<int>& ties, const std::vector<std::vector<int>>& tie_candidates) {
    const auto target = p.target_masses();
    std::vector<double> fixed(p.mu_size(), 0.0);
    std::vector<bool> tied(p.lambda_size(), false);
    for (int j : ties) tied[j] = true;
    for (int j = 0; j < p.lambda_size(); ++j) {
        if (!tied[j]) fixed[assignment[j]] += p.lambda().atoms()[j].weight;
    }
    std::vector<double> supplies;
    for (int j : ties) supplies.push_back(p.lambda().atoms()[j].weight);
    std::vector<double> demands(p.mu_size());
    for (int i = 0; i < p.mu_size(); ++i) demands[i] = target[i] - fixed[i];

    const double tol = 1e-12 * p.lambda_mass();
    const auto split = split_ties(supplies, tie_candidates, demands, ties, tol);

    Certificate out;
    out.masses = fixed;
    for (int i = 0; i < p.mu_size(); ++i) out.masses[i] += split.received[i];
    out.splits = split.flows;
    out.residual_linf = residual_linf(p, out.masses);
    bool demands_ok = true;
    for (double d : demands) demands_ok = demands_ok && d >= -tol;
    out.certified = demands_ok && split.feasible && out.residual_linf <= 1e-12;
    return out;
}

struct LogTies {
    std::vector<int> assignment;
    std::vector<int> ties;
    std::vector<std::vector<int>> candidates;
};

inline LogTies log_ties(const GaussImageProblem& p, const Vec& x) {
    const Mat& a = p.log_pairing();
    const double slack = log_tie_slack();
    LogTies out;
    out.assignment.resize(p.lambda_size());
    for (int j = 0; j < p.lambda_size(); ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < p.mu_size(); ++i) best = std::min(best, a(j, i) + x[i]);
        std::vector<int> cand;
        for (int i = 0; i < p.mu_size(); ++i) {
            if (a(j, i) + x[i] <= best + slack) cand.push_back(i);
        }
        out.assignment[j] = cand.front();
        if (cand.size() > 1) {
            out.ties.push_back(j);
            out.candidates.push_back(std::move(cand));
        }
    }
    return out;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[std::max(a, b)] = std::min(a, b);
        return true;
    }
};

// Active-set finishing step. Builds the spanning tree of smallest gaps
// s_ji - min_i s_ji at x (Kruskal), moves x so that every tree edge is an
// exact tie, and accepts the move only if the unique tree flow is
// nonnegative and no non-tree edge undercuts a tree edge. Those are the
// complementary-slackness conditions for a minimizer of Phi.
inline std::optional<Vec> snap_to_tree(const GaussImageProblem& p, const Vec& x) {
    const int ml = p.lambda_size();
    const int mm = p.mu_size();
    const Mat& a = p.log_pairing();

    struct Gap {
        double gap;
        int atom;
        int vertex;
    };
    std::vector<Gap> gaps;
    gaps.reserve(static_cast<std::size_t>(ml) * mm);
    for (int j = 0; j < ml; ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < mm; ++i) best = std::min(best, a(j, i) + x[i]);
        for (int i = 0; i < mm; ++i) gaps.push_back({a(j, i) + x[i] - best, j, i});
    }
    std::sort(gaps.begin(), gaps.end(), [](const Gap& l, const Gap& r) {
        if (l.gap != r.gap) return l.gap < r.gap;
        return l.atom != r.atom ? l.atom < r.atom : l.vertex < r.vertex;
    });

    // Nodes: atoms 0..ml-1, vertices ml..ml+mm-1.
    UnionFind uf(ml + mm);
    std::vector<std::vector<std::pair<int, int>>> adj(ml + mm);  // (neighbor, atom-vertex edge id unused)
    int edges = 0;
    for (const auto& g : gaps) {
        if (edges == ml + mm - 1) break;
        if (uf.unite(g.atom, ml + g.vertex)) {
            adj[g.atom].push_back({ml + g.vertex, 0});
            adj[ml + g.vertex].push_back({g.atom, 0});
            ++edges;
        }
    }
    if (edges != ml + mm - 1) return std::nullopt;

    // Potentials along the tree from vertex 0: a_ji + x_i = phi_j on every tree edge.
    Vec xs = Vec::Zero(mm);
    Vec level = Vec::Zero(ml);
    std::vector<int> order, parent(ml + mm, -1);
    std::vector<bool> seen(ml + mm, false);
    order.push_back(ml);
    seen[ml] = true;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const int node = order[k];
        for (const auto& [nb, unused] : adj[node]) {
            if (seen[nb]) continue;
            seen[nb] = true;
            parent[nb] = node;
            order.push_back(nb);
            if (nb < ml) {
                level[nb] = a(nb, node - ml) + xs[node - ml];
            } else {
                xs[nb - ml] = level[node] - a(node, nb - ml);
            }
        }
    }

    // Tree flow: net supply lambda_j/L at atoms, demand mu_i/M at vertices.
    std::vector<double> excess(ml + mm);
    for (int j = 0; j < ml; ++j) excess[j] = p.lambda().atoms()[j].weight / p.lambda_mass();
    for (int i = 0; i < mm; ++i) excess[ml + i] = -p.mu().atoms()[i].weight / p.mu_mass();
    const double flow_tol = 1e-12;
    for (std::size_t k = order.size(); k-- > 1;) {
        const int node = order[k];
        const double up = excess[node];  // flow from node to its parent
        const double atom_to_vertex = node < ml ? up : -up;
        if (atom_to_vertex < -flow_tol) return std::nullopt;
        excess[parent[node]] += up;
    }

    for (int j = 0; j < ml; ++j) {
        for (int i = 0; i < mm; ++i) {
            if (a(j, i) + xs[i] < level[j] - 1e-12 * (1.0 + std::abs(level[j]))) return std::nullopt;
        }
    }
    return centered(std::move(xs));
}

} // namespace detail

inline Certificate certify(const Vec& x, const GaussImageProblem& p) {
    detail::check_point(x, p);
    const auto t = detail::log_ties(p, x);
    return detail::certify_assignment(p, t.assignment, t.ties, t.candidates);
}

struct SolveConfig {
    double tol = 1e-6;
    int max_iter = 200000;
    std::optional<std::uint64_t> seed;  // random-normal initialization when set
    double tau = 0.1;                   // initial softmin warm-start temperature, 0 disables
    double tau_min = 1e-8;              // warm start anneals by decades down to this temperature
    int snap_every = 20;                // 0 disables the tie-tree snap
    int patience = 40;                  // non-improving steps before the Polyak level gap halves
    std::function<void(int, double)> observer;  // (iteration, best phi so far)
};

struct SolveResult {
    Vec log_radii;
    double phi = 0.0;
    double residual_linf = 0.0;  // after tie splitting when certified, else tie-broken
    double plain_residual = 0.0; // tie-broken pushforward, no splitting
    int iterations = 0;
    bool converged = false;
    bool certified = false;
    std::vector<TieSplit> tie_assignment;
    double balance_ratio = 1.0;
    bool unique_minimizer = false;  // positive-mass edges connect every vertex
};

namespace detail {

inline bool positive_mass_graph_connected(const GaussImageProblem& p, const LogTies& t, const Certificate& c) {
    const int ml = p.lambda_size();
    UnionFind uf(ml + p.mu_size());
    std::vector<bool> tied(ml, false);
    for (int j : t.ties) tied[j] = true;
    for (int j = 0; j < ml; ++j) {
        if (!tied[j]) uf.unite(j, ml + t.assignment[j]);
    }
    for (const auto& s : c.splits) {
        if (s.mass > 1e-12 * p.lambda_mass()) uf.unite(s.atom, ml + s.vertex);
    }
    const int root = uf.find(0);
    for (int k = 1; k < ml + p.mu_size(); ++k) {
        if (uf.find(k) != root) return false;
    }
    return true;
}

// Damped Newton on Phi_tau for a decreasing sequence of temperatures. The
// Hessian annihilates the all-ones vector, so the step is solved with the
// gauge direction pinned by a rank-one term.
inline Vec smoothed_warm_start(const GaussImageProblem& p, Vec x, double tau0, double tau_min) {
    const int m = p.mu_size();
    const Mat& a = p.log_pairing();
    const Mat gauge = Mat::Constant(m, m, 1.0 / m);
    Vec soft(m);
    for (double tau = tau0; tau >= tau_min; tau *= 0.1) {
        for (int it = 0; it < 60; ++it) {
            Vec g(m);
            for (int i = 0; i < m; ++i) g[i] = p.mu().atoms()[i].weight / p.mu_mass();
            Mat h = Mat::Zero(m, m);
            for (int j = 0; j < p.lambda_size(); ++j) {
                double best = std::numeric_limits<double>::infinity();
                for (int i = 0; i < m; ++i) best = std::min(best, a(j, i) + x[i]);
                for (int i = 0; i < m; ++i) soft[i] = std::exp(-(a(j, i) + x[i] - best) / tau);
                soft /= soft.sum();
                const double w = p.lambda().atoms()[j].weight / p.lambda_mass();
                g -= w * soft;
                h.diagonal() += (w / tau) * soft;
                h.noalias() -= (w / tau) * soft * soft.transpose();
            }
            h += gauge * (1.0 + h.trace() / m);
            h.diagonal().array() += 1e-12 * (1.0 + h.trace() / m);
            const Vec d = centered(h.ldlt().solve(-g));
            const double slope = g.dot(d);
            if (!(slope < 0.0) || -slope < 1e-24) break;
            const double f0 = phi_smoothed(x, p, tau);
            double t = 1.0;
            Vec trial = x + d;
            for (int ls = 0; ls < 60 && phi_smoothed(trial, p, tau) > f0 + 1e-4 * t * slope; ++ls) {
                t *= 0.5;
                trial = x + t * d;
            }
            x = centered(std::move(trial));
        }
    }
    return x;
}

inline SolveResult finish(const GaussImageProblem& p, const Vec& x, int iterations, double tol) {
    SolveResult r;
    r.log_radii = x;
    r.iterations = iterations;
    r.balance_ratio = p.balance_ratio();
    const auto ev = evaluate(p, x);
    r.phi = ev.phi;
    r.plain_residual = residual_linf(p, ev.masses);
    const auto t = log_ties(p, x);
    const auto c = certify_assignment(p, t.assignment, t.ties, t.candidates);
    r.certified = c.certified;
    if (c.certified) {
        r.residual_linf = c.residual_linf;
        r.tie_assignment = c.splits;
        r.unique_minimizer = positive_mass_graph_connected(p, t, c);
    } else {
        r.residual_linf = r.plain_residual;
    }
    r.converged = r.residual_linf <= tol;
    return r;
}

} // namespace detail

/// Subgradient descent on Phi with Polyak steps toward an adaptive level,
/// mean-zero recentering, best-iterate tracking, and a periodic exact snap
/// onto the tie tree of the best iterate.
inline SolveResult solve(const GaussImageProblem& p, const SolveConfig& cfg = {}) {
    const int m = p.mu_size();
    Vec x = Vec::Zero(m);
    if (cfg.seed) {
        std::mt19937_64 rng(*cfg.seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (int i = 0; i < m; ++i) x[i] = normal(rng);
    }
    x = detail::centered(std::move(x));

    if (cfg.tau > 0.0) x = detail::smoothed_warm_start(p, std::move(x), cfg.tau, cfg.tau_min);

    Vec best_x = x;
    double best_phi = std::numeric_limits<double>::infinity();
    double level_gap = -1.0;
    int stalled = 0;
    int k = 1;
    for (; k <= cfg.max_iter; ++k) {
        const auto ev = detail::evaluate(p, x);
        if (ev.phi < best_phi) {
            best_phi = ev.phi;
            best_x = x;
            stalled = 0;
        } else {
            ++stalled;
        }
        if (cfg.observer) cfg.observer(k, best_phi);

        if (detail::residual_linf(p, ev.masses) <= cfg.tol) {
            auto r = detail::finish(p, x, k, cfg.tol);
            if (r.converged) return r;
        }
        if (cfg.snap_every > 0 && (k == 1 || k % cfg.snap_every == 0)) {
            if (auto snapped = detail::snap_to_tree(p, best_x)) {
                auto r = detail::finish(p, *snapped, k, cfg.tol);
                if (r.converged && r.phi <= best_phi + 1e-12 * (1.0 + std::abs(best_phi))) return r;
            }
        }

        Vec g(m);
        for (int i = 0; i < m; ++i) g[i] = p.mu().atoms()[i].weight / p.mu_mass() - ev.masses[i] / p.lambda_mass();
        const double g2 = g.squaredNorm();
        if (level_gap < 0.0) level_gap = 0.5 * std::sqrt(g2);
        if (stalled >= cfg.patience) {
            level_gap *= 0.5;
            stalled = 0;
            x = best_x;
            continue;
        }
        double step;
        if (level_gap > 1e-14) {
            step = (ev.phi - (best_phi - level_gap)) / g2;
        } else {
            step = 0.1 / std::sqrt(static_cast<double>(k));
        }
        x = detail::centered(x - step * g);
    }

    if (cfg.snap_every > 0) {
        if (auto snapped = detail::snap_to_tree(p, best_x)) {
            auto r = detail::finish(p, *snapped, cfg.max_iter, cfg.tol);
            if (r.converged) return r;
        }
    }
    return detail::finish(p, best_x, std::min(k, cfg.max_iter), cfg.tol);
}

struct VerifyReport {
    std::vector<double> masses;            // tie-broken lambda(K, .), lambda units
    std::vector<double> target;            // (L/M) mu_i
    std::vector<double> vertex_residuals;  // |masses_i/L - mu_i/M|
    double max_residual = 0.0;
    std::vector<int> ties;
    double split_residual = 0.0;           // after fractional tie splitting, when it helps
    bool passed = false;
};

/// Recomputes lambda(K, .) from scratch and compares it to mu.
inline VerifyReport verify(const VRepPseudoCone& k, const GaussImageProblem& p, double tol) {
    if (k.size() != p.mu_size()) throw DirectionMismatch("K and mu have different numbers of directions");
    for (int i = 0; i < k.size(); ++i) {
        const Vec diff = k.directions()[i].coords() - p.mu().atoms()[i].direction.coords();
        if (diff.lpNorm<Eigen::Infinity>() > 1e-12) {
            throw DirectionMismatch("vertex direction " + std::to_string(i) + " differs from mu atom");
        }
    }
    const auto pf = pushforward(k, p.lambda());
    VerifyReport out;
    out.masses = pf.masses;
    out.target = p.target_masses();
    out.ties = pf.ties;
    out.vertex_residuals.resize(k.size());
    for (int i = 0; i < k.size(); ++i) {
        out.vertex_residuals[i] = std::abs(pf.masses[i] / p.lambda_mass() - p.mu().atoms()[i].weight / p.mu_mass());
        out.max_residual = std::max(out.max_residual, out.vertex_residuals[i]);
    }
    out.split_residual = out.max_residual;
    if (!pf.ties.empty()) {
        const auto c = detail::certify_assignment(p, pf.assignment, pf.ties, pf.tie_candidates);
        if (c.certified) out.split_residual = std::min(out.split_residual, c.residual_linf);
    }
    out.passed = out.split_residual <= tol;
    return out;
}

} // namespace gausscone
