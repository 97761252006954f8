#pragma once

// Slow, independent cross-checks: exhaustive grid minimization of Phi, finite
// differences of the smoothed functional, dense sampling audits of the
// support/radial/copolar identities, and difference quotients of Wulff shape
// radial functions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gausscone/errors.hpp"
#include "gausscone/pseudocone.hpp"
#include "gausscone/simplex.hpp"
#include "gausscone/solver.hpp"
#include "gausscone/spherical_cone.hpp"

namespace gausscone::oracle {

inline constexpr int kMaxGridAtoms = 4;
inline constexpr double kMaxGridPoints = 1e7;

/// Per-coordinate grid [lo, hi] with spacing `step`; coordinate 0 is pinned to 0.
struct GridSpec {
    double lo = -2.0;
    double hi = 2.0;
    double step = 0.01;

    int points_per_axis() const { return static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1; }
};

struct GridResult {
    Vec x_best;
    double phi_best = 0.0;
    double phi_grid = 0.0;  // before local refinement
    long long evaluated = 0;
};

/// Resolution bound for comparing a grid optimum against an exact one: Phi is
/// 2-Lipschitz in the max norm (|g|_1 <= 2) and the optimum is within step/2
/// of a grid point in every free coordinate.
inline double grid_bound(const GridSpec& grid) { return grid.step; }

/// Exhaustive minimization of Phi over the gauge-fixed grid, followed by a
/// compass search from the best grid point. Ties in Phi go to the point
/// closest to the origin.
inline GridResult grid_search_phi(const GaussImageProblem& p, const GridSpec& grid, bool refine = true) {
    const int m = p.mu_size();
    if (m > kMaxGridAtoms) throw GridTooLarge("grid search supports at most 4 mu atoms");
    if (!(grid.lo < grid.hi) || !(grid.step > 0.0)) throw GridTooLarge("grid needs lo < hi and step > 0");
    const int axis = grid.points_per_axis();
    const double total = std::pow(static_cast<double>(axis), m - 1);
    if (total > kMaxGridPoints) throw GridTooLarge("grid exceeds 1e7 points");

    GridResult out;
    out.x_best = Vec::Zero(m);
    out.phi_best = std::numeric_limits<double>::infinity();
    std::vector<int> idx(std::max(0, m - 1), 0);
    Vec x = Vec::Zero(m);
    for (;;) {
        for (int c = 1; c < m; ++c) x[c] = grid.lo + idx[c - 1] * grid.step;
        const double phi = phi_value(x, p);
        ++out.evaluated;
        const double tie = 1e-13 * (1.0 + std::abs(out.phi_best));
        const bool closer = std::abs(phi - out.phi_best) <= tie && x.norm() < out.x_best.norm();
        if (out.evaluated == 1 || phi < out.phi_best - tie || closer) {
            out.phi_best = std::min(phi, out.phi_best);
            out.x_best = x;
        }
        int c = 0;
        while (c < m - 1 && ++idx[c] == axis) idx[c++] = 0;
        if (c == m - 1) break;
    }
    out.phi_grid = out.phi_best;

    if (refine && m > 1) {
        for (double h = grid.step; h > 1e-10; h *= 0.5) {
            bool moved = true;
            while (moved) {
                moved = false;
                for (int c = 1; c < m; ++c) {
                    for (double sgn : {1.0, -1.0}) {
                        Vec trial = out.x_best;
                        trial[c] += sgn * h;
                        const double phi = phi_value(trial, p);
                        if (phi < out.phi_best - 1e-15) {
                            out.phi_best = phi;
                            out.x_best = trial;
                            moved = true;
                        }
                    }
                }
            }
        }
    }
    return out;
}

/// max_i |(Phi_tau(x + t e_i) - Phi_tau(x - t e_i)) / 2t - g_i|, where g is the
/// analytic subgradient. Throws TiedPoint if some lambda atom is tied at
/// 10 times the tie tolerance.
inline double fd_check_subgradient(const GaussImageProblem& p, const Vec& x, double tau, double t) {
    const Mat& a = p.log_pairing();
    const double slack = std::log1p(10.0 * kTieTolerance);
    for (int j = 0; j < p.lambda_size(); ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < p.mu_size(); ++i) best = std::min(best, a(j, i) + x[i]);
        int near = 0;
        for (int i = 0; i < p.mu_size(); ++i) near += a(j, i) + x[i] <= best + slack ? 1 : 0;
        if (near > 1) throw TiedPoint("lambda atom " + std::to_string(j) + " is tied at this point");
    }
    const Vec g = phi_subgradient(x, p);
    double dev = 0.0;
    for (int i = 0; i < p.mu_size(); ++i) {
        Vec xp = x, xm = x;
        xp[i] += t;
        xm[i] -= t;
        const double fd = (phi_smoothed(xp, p, tau) - phi_smoothed(xm, p, tau)) / (2.0 * t);
        dev = std::max(dev, std::abs(fd - g[i]));
    }
    return dev;
}

/// h̄_K(u) for a Wulff shape by a direct LP over its halfspaces:
///   min -<u, D b>  s.t.  -<D b, n_j> - s_j = f_j,  b, s >= 0,
/// with D the generators of the recession cone. Independent of the copolar route.
inline double support_value_lp(const HRepPseudoCone& k, const Direction& u) {
    const int n = k.dim();
    const int m = k.size();
    const Mat d = k.cone().generator_matrix();
    Mat a = Mat::Zero(m, n + m);
    Vec b(m);
    for (int j = 0; j < m; ++j) {
        a.row(j).head(n) = -(d.transpose() * k.normals()[j].coords()).transpose();
        a(j, n + j) = -1.0;
        b[j] = k.offsets()[j];
    }
    Vec c = Vec::Zero(n + m);
    c.head(n) = -(d.transpose() * u.coords());
    const auto sol = lp::solve(a, b, c);
    if (sol.status != lp::Status::Optimal) throw LPFailure("support LP did not reach an optimum");
    return sol.objective;
}

struct DualityAuditReport {
    int checks = 0;
    int violations = 0;
    double max_exact_error = 0.0;  // relative, over the closed-form identities
    double max_inf_gap = 0.0;      // relative gap of the sampled infimum above h̄
    double min_inf_gap = 0.0;      // most negative relative gap (an undercut if < -1e-9)
    double max_cloud_gap = 0.0;    // same gap using the shared random cloud alone
    int max_refine_used = 0;       // most adaptive evaluations spent on one probe
    std::vector<std::string> messages;

    bool passed() const { return violations == 0; }
};

struct AuditOptions {
    int samples = 1000;           // directions per exact identity
    int inf_samples = 5000;       // shared random cloud of radial evaluations
    int inf_probes = 20;          // support directions probed against that infimum
    int inf_refine = 5000;        // adaptive evaluations per probe on top of the cloud
    double exact_tol = 1e-9;
    double inf_gap_tol = 0.02;
};

namespace detail {

inline void record(DualityAuditReport& r, bool ok, const std::string& what) {
    ++r.checks;
    if (!ok) {
        ++r.violations;
        if (r.messages.size() < 20) r.messages.push_back(what);
    }
}

// On the chart <u, z> = -1 the map z -> |<u, v>| rho(v), v = z / |z|, equals
// rho(z) and is convex. Each radial solve also certifies a supporting normal w
// at rho(z) z, and rho(z) <w, z> / <w, z'> is a convex minorant touching at z,
// so its gradient is a subgradient. A central-cut ellipsoid method in the
// chart then walks the samples to the infimum; the value returned is the
// smallest one actually evaluated.
inline double refine_infimum(const VRepPseudoCone& k, const Direction& u, const Vec& start, int budget, int& used) {
    used = 0;
    double best = std::numeric_limits<double>::infinity();
    const int d = k.dim() - 1;
    if (budget <= 0 || d < 1) return best;
    const Vec uc = u.coords();
    const Mat t = Mat(Eigen::HouseholderQR<Mat>(uc).householderQ()).rightCols(d);
    const Vec z0 = start / -uc.dot(start);
    Vec c = Vec::Zero(d);
    Mat b = Mat::Identity(d, d) * (1e3 * z0.norm());
    const auto& facets = k.cone().facet_normals();
    for (int it = 0; it < 20 * budget && used < budget; ++it) {
        const Vec z = z0 + t * c;
        const Vec zn = z.normalized();
        int wall = -1;
        double margin = 1e-9;
        for (int j = 0; j < static_cast<int>(facets.size()); ++j) {
            const double m = -facets[j].dot(zn);
            if (m < margin) {
                margin = m;
                wall = j;
            }
        }
        Vec g;
        if (wall >= 0) {
            g = t.transpose() * facets[wall].coords();
        } else {
            RadialSolve rs;
            try {
                rs = radial_solve(k, Direction::normalized(z));
            } catch (const LPFailure&) {
                break;
            }
            ++used;
            const double f = rs.radius * -uc.dot(zn);
            best = std::min(best, f);
            g = t.transpose() * (-f / rs.normal.dot(z) * rs.normal);
        }
        Vec q = b.transpose() * g;
        const double qn = q.norm();
        if (!(qn > 0.0) || !std::isfinite(qn)) break;
        q /= qn;
        const Vec bq = b * q;
        if (d == 1) {
            c -= 0.5 * bq;
            b *= 0.5;
        } else {
            const double dd = static_cast<double>(d);
            c -= bq / (dd + 1.0);
            b = dd / std::sqrt(dd * dd - 1.0) * (b - (1.0 - std::sqrt((dd - 1.0) / (dd + 1.0))) * bq * q.transpose());
        }
        if (b.colwise().norm().maxCoeff() < 1e-13 * (1.0 + z0.norm())) break;
    }
    return best;
}

} // namespace detail

/// Cross-evaluates a convexification V and its copolar Wulff shape H = V*:
///  - rho_H(u) * h̄_V(u) = 1 on sampled u (closed forms on both sides),
///  - h̄_V(u) equals -max_i <u, p_i>,
///  - rho_H(u) u lies on the boundary of H,
///  - rho_V(v) (LP) * h̄_H(v) (direct halfspace LP) = 1 on sampled v,
///  - the sampled infimum of |<u, v>| rho_V(v) is never below h̄_V(u) and
///    within `inf_gap_tol` above it. Samples are a shared random cloud plus
///    adaptive samples per probe steered by the radial supporting normals.
inline DualityAuditReport dense_duality_audit(const VRepPseudoCone& v_rep, std::uint64_t seed, const AuditOptions& opt = {}) {
    DualityAuditReport r;
    const HRepPseudoCone h_rep = copolar(v_rep);
    const Cone& cone = v_rep.cone();
    const Cone dual = dual_cone(cone);
    std::mt19937_64 rng(seed);
    const double tol = opt.exact_tol;

    const auto us = sample_interior_directions(dual, opt.samples, rng());
    for (const auto& u : us) {
        const double hv = support_value(v_rep, u);
        const double rh = radial_value(h_rep, u);
        const double err = std::abs(rh * hv - 1.0);
        r.max_exact_error = std::max(r.max_exact_error, err);
        detail::record(r, err <= tol, "radial(H) * support(V) != 1");

        double best = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < v_rep.size(); ++i) best = std::max(best, u.dot(v_rep.vertex(i)));
        const double err2 = std::abs(hv + best) / hv;
        r.max_exact_error = std::max(r.max_exact_error, err2);
        detail::record(r, err2 <= 1e-12, "support(V) != -max <u, p_i>");

        const Vec y = rh * u.coords();
        double slack = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < h_rep.size(); ++j) slack = std::max(slack, h_rep.normals()[j].dot(y) + h_rep.offsets()[j]);
        const double err3 = std::abs(slack) / (1.0 + y.norm());
        r.max_exact_error = std::max(r.max_exact_error, err3);
        detail::record(r, contains(h_rep, y, tol) && err3 <= tol, "radial(H) point is not on the boundary of H");
    }

    const auto vs = sample_interior_directions(cone, opt.samples, rng());
    for (const auto& v : vs) {
        const double rv = radial_value(v_rep, v);
        const double hh = support_value_lp(h_rep, v);
        const double err = std::abs(rv * hh - 1.0);
        r.max_exact_error = std::max(r.max_exact_error, err);
        detail::record(r, err <= tol, "radial(V) * support_lp(H) != 1");
    }

    if (opt.inf_samples > 0 && opt.inf_probes > 0) {
        const auto dense = sample_interior_directions(cone, opt.inf_samples, rng());
        std::vector<double> radial(dense.size());
        for (std::size_t s = 0; s < dense.size(); ++s) radial[s] = radial_value(v_rep, dense[s]);
        const auto probes = sample_interior_directions(dual, opt.inf_probes, rng());
        for (const auto& u : probes) {
            double inf = std::numeric_limits<double>::infinity();
            Vec best = dense.front().coords();
            for (std::size_t s = 0; s < dense.size(); ++s) {
                const double val = -u.dot(dense[s]) * radial[s];
                if (val < inf) {
                    inf = val;
                    best = dense[s].coords();
                }
            }
            const double cloud = inf;
            int used = 0;
            inf = std::min(inf, detail::refine_infimum(v_rep, u, best, opt.inf_refine, used));
            r.max_refine_used = std::max(r.max_refine_used, used);
            const double hv = support_value(v_rep, u);
            const double gap = (inf - hv) / hv;
            r.max_cloud_gap = std::max(r.max_cloud_gap, (cloud - hv) / hv);
            r.max_inf_gap = std::max(r.max_inf_gap, gap);
            r.min_inf_gap = std::min(r.min_inf_gap, gap);
            detail::record(r, gap >= -tol, "sampled infimum undercuts the closed-form support value");
            detail::record(r, gap <= opt.inf_gap_tol, "sampled infimum exceeds support value by more than the gap bound");
        }
    }
    return r;
}

inline DualityAuditReport dense_duality_audit(const HRepPseudoCone& h_rep, std::uint64_t seed, const AuditOptions& opt = {}) {
    return dense_duality_audit(copolar(h_rep), seed, opt);
}

struct VariationReport {
    std::vector<double> t_values;
    std::vector<double> max_error;  // per t, over the used samples
    double empirical_constant = 0.0;  // max error / t
    int used = 0;
    int excluded_kinks = 0;
    bool linear_decrease = true;
};

/// Difference quotients (log rho_[f_t](v) - log rho_[f_0](v)) / t against
/// g(u_active) for log f_t = log f_0 + t g on the normal set. Directions whose
/// active constraint is not unique at relative tolerance `kink_tol` are
/// excluded. Samples are drawn until `samples` usable directions are found.
inline VariationReport wulff_variation_check(const Cone& cone, const std::vector<Direction>& normals,
                                             const std::vector<double>& f0, const std::vector<double>& g,
                                             const std::vector<double>& t_values, int samples, std::uint64_t seed,
                                             double kink_tol = 1e-9) {
    const HRepPseudoCone base = wulff_shape(cone, normals, f0);
    std::vector<HRepPseudoCone> moved;
    for (double t : t_values) {
        std::vector<double> ft(f0.size());
        for (std::size_t j = 0; j < f0.size(); ++j) ft[j] = f0[j] * std::exp(t * g[j]);
        moved.push_back(wulff_shape(cone, normals, std::move(ft)));
    }

    VariationReport r;
    r.t_values = t_values;
    r.max_error.assign(t_values.size(), 0.0);
    std::mt19937_64 rng(seed);
    const int cap = 100 * std::max(samples, 1);
    int drawn = 0;
    while (r.used < samples && drawn < cap) {
        const auto v = sample_interior_directions(cone, 1, rng()).front();
        ++drawn;
        const auto active = active_constraint(base, v, kink_tol);
        if (!active.unique) {
            ++r.excluded_kinks;
            continue;
        }
        ++r.used;
        const double log0 = std::log(radial_value(base, v));
        std::vector<double> err(t_values.size());
        for (std::size_t k = 0; k < t_values.size(); ++k) {
            const double q = (std::log(radial_value(moved[k], v)) - log0) / t_values[k];
            err[k] = std::abs(q - g[active.index]);
            r.max_error[k] = std::max(r.max_error[k], err[k]);
            r.empirical_constant = std::max(r.empirical_constant, err[k] / std::abs(t_values[k]));
        }
        // At least linear decay between consecutive t, up to a rounding floor.
        for (std::size_t k = 1; k < t_values.size(); ++k) {
            const double ratio = std::abs(t_values[k] / t_values[k - 1]);
            const double floor = 1e-15 * (1.0 + std::abs(log0)) / std::abs(t_values[k]) * 8.0;
            if (err[k] > err[k - 1] * ratio * (1.0 + 1e-6) + floor) r.linear_decrease = false;
        }
    }
    return r;
}

/// Helper for callers that want a kink direction: the unit v in a 2D cone where
/// constraints a and b of a Wulff shape are both active.
inline Direction kink_direction_2d(const HRepPseudoCone& k, int a, int b) {
    // f_a |<v, u_b>| = f_b |<v, u_a>| with v = (cos s, sin s); solve the linear
    // relation w.v = 0 where w = f_a u_b - f_b u_a.
    const Vec w = k.offsets()[a] * k.normals()[b].coords() - k.offsets()[b] * k.normals()[a].coords();
    Vec v(2);
    v << -w[1], w[0];
    if (!interior_contains(k.cone(), v)) v = -v;
    return Direction::normalized(v);
}

} // namespace gausscone::oracle
