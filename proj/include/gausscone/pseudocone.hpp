#pragma once

// C-pseudo-cones in the two exact polyhedral forms:
//
//   VRepPseudoCone  <f> = conv{rho_i v_i} + C            (convexification)
//   HRepPseudoCone  [f] = C ∩ ⋂_j {y : <y, u_j> <= -f_j}  (Wulff shape)
//
// The copolar K* = {x : <x, y> <= -1 for all y in K} maps one form onto the
// other with reciprocal values and the dual recession cone.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "gausscone/errors.hpp"
#include "gausscone/simplex.hpp"
#include "gausscone/spherical_cone.hpp"

namespace gausscone {

inline constexpr double kTransversalFloor = 1e-12;
inline constexpr double kClosureTolerance = 1e-10;

namespace detail {

inline void check_positive(const std::vector<double>& values, const char* what) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]) || !(values[i] > 0.0)) {
            throw NonPositiveValue(std::string(what) + " " + std::to_string(i) + " is not finite and positive");
        }
    }
}

// |<a, b>| for a pair that must pair strictly negatively.
inline double transversal_pairing(const Vec& a, const Vec& b) {
    const double ip = a.dot(b);
    if (!(ip <= -kTransversalFloor)) {
        throw NonTransversalPair("pairing <u, v> = " + std::to_string(ip) + " is not strictly negative");
    }
    return -ip;
}

} // namespace detail

/// Convexification: conv of the points rho_i v_i plus the recession cone.
class VRepPseudoCone {
public:
    VRepPseudoCone(Cone cone, std::vector<Direction> directions, std::vector<double> radii)
        : cone_(std::move(cone)), directions_(std::move(directions)), radii_(std::move(radii)) {
        if (directions_.empty() || directions_.size() != radii_.size()) {
            throw DomainViolation("need a nonempty list of directions with one radius each");
        }
        for (std::size_t i = 0; i < directions_.size(); ++i) {
            if (directions_[i].dim() != cone_.dim() || !interior_contains(cone_, directions_[i])) {
                throw DomainViolation("direction " + std::to_string(i) + " is not in the open patch of C");
            }
        }
        detail::check_positive(radii_, "radius");
    }

    const Cone& cone() const noexcept { return cone_; }
    const std::vector<Direction>& directions() const noexcept { return directions_; }
    const std::vector<double>& radii() const noexcept { return radii_; }
    int size() const noexcept { return static_cast<int>(radii_.size()); }
    int dim() const noexcept { return cone_.dim(); }
    Vec vertex(int i) const { return radii_[i] * directions_[i].coords(); }

private:
    Cone cone_;
    std::vector<Direction> directions_;
    std::vector<double> radii_;
};

/// Wulff shape: C intersected with the halfspaces <y, u_j> <= -f_j.
class HRepPseudoCone {
public:
    HRepPseudoCone(Cone cone, std::vector<Direction> normals, std::vector<double> offsets)
        : cone_(std::move(cone)), normals_(std::move(normals)), offsets_(std::move(offsets)) {
        if (normals_.empty() || normals_.size() != offsets_.size()) {
            throw DomainViolation("need a nonempty list of normals with one offset each");
        }
        const Cone dual = dual_cone(cone_);
        for (std::size_t j = 0; j < normals_.size(); ++j) {
            if (normals_[j].dim() != cone_.dim() || !interior_contains(dual, normals_[j])) {
                throw DomainViolation("normal " + std::to_string(j) + " is not in the open patch of the dual cone");
            }
        }
        detail::check_positive(offsets_, "offset");
    }

    const Cone& cone() const noexcept { return cone_; }
    const std::vector<Direction>& normals() const noexcept { return normals_; }
    const std::vector<double>& offsets() const noexcept { return offsets_; }
    int size() const noexcept { return static_cast<int>(offsets_.size()); }
    int dim() const noexcept { return cone_.dim(); }

private:
    Cone cone_;
    std::vector<Direction> normals_;
    std::vector<double> offsets_;
};

inline HRepPseudoCone wulff_shape(const Cone& cone, std::vector<Direction> normals, std::vector<double> offsets) {
    return HRepPseudoCone(cone, std::move(normals), std::move(offsets));
}

inline VRepPseudoCone convexification(const Cone& cone, std::vector<Direction> directions, std::vector<double> radii) {
    return VRepPseudoCone(cone, std::move(directions), std::move(radii));
}

inline VRepPseudoCone dilate(const VRepPseudoCone& k, double factor) {
    std::vector<double> r = k.radii();
    for (double& x : r) x *= factor;
    return VRepPseudoCone(k.cone(), k.directions(), std::move(r));
}

inline HRepPseudoCone dilate(const HRepPseudoCone& k, double factor) {
    std::vector<double> f = k.offsets();
    for (double& x : f) x *= factor;
    return HRepPseudoCone(k.cone(), k.normals(), std::move(f));
}

inline HRepPseudoCone copolar(const VRepPseudoCone& k) {
    std::vector<double> offsets;
    offsets.reserve(k.radii().size());
    for (double r : k.radii()) offsets.push_back(1.0 / r);
    return HRepPseudoCone(dual_cone(k.cone()), k.directions(), std::move(offsets));
}

inline VRepPseudoCone copolar(const HRepPseudoCone& k) {
    std::vector<double> radii;
    radii.reserve(k.offsets().size());
    for (double f : k.offsets()) radii.push_back(1.0 / f);
    return VRepPseudoCone(dual_cone(k.cone()), k.normals(), std::move(radii));
}

/// h̄_K(u) = min_i |<u, v_i>| rho_i, defined on the closed patch cl Omega_{C°}.
inline double support_value(const VRepPseudoCone& k, const Direction& u) {
    if (u.dim() != k.dim() || !closure_contains(dual_cone(k.cone()), u.coords(), kClosureTolerance)) {
        throw DomainViolation("support direction is outside cl Omega_{C°}");
    }
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < k.size(); ++i) {
        best = std::min(best, detail::transversal_pairing(u.coords(), k.directions()[i].coords()) * k.radii()[i]);
    }
    return best;
}

/// 1/rho_[f](v) = min_j |<v, u_j>| / f_j.
inline double radial_value(const HRepPseudoCone& k, const Direction& v) {
    if (v.dim() != k.dim() || !interior_contains(k.cone(), v)) {
        throw DomainViolation("radial direction is outside Omega_C");
    }
    double r = 0.0;
    for (int j = 0; j < k.size(); ++j) {
        r = std::max(r, k.offsets()[j] / detail::transversal_pairing(v.coords(), k.normals()[j].coords()));
    }
    return r;
}

/// Index of the constraint attaining rho_[f](v), and whether it is the only one
/// within relative tolerance `tie_tol`.
struct ActiveConstraint {
    int index = 0;
    bool unique = true;
};

inline ActiveConstraint active_constraint(const HRepPseudoCone& k, const Direction& v, double tie_tol) {
    std::vector<double> r(k.size());
    for (int j = 0; j < k.size(); ++j) {
        r[j] = k.offsets()[j] / detail::transversal_pairing(v.coords(), k.normals()[j].coords());
    }
    ActiveConstraint out;
    out.index = static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
    for (int j = 0; j < k.size(); ++j) {
        if (j != out.index && r[j] >= r[out.index] * (1.0 - tie_tol)) out.unique = false;
    }
    return out;
}

/// Radial point of a convexification along v, with the supporting normal read
/// off the optimal LP dual.
struct RadialSolve {
    double radius = 0.0;
    Vec normal;          // unit outer normal of K at radius * v (in cl Omega_{C°})
    bool unique = true;  // false when the LP basis is degenerate
};

/// Minimal r with r v in conv{p_i} + C, solved as
///   min r  s.t.  r v = sum a_i p_i + sum b_k g_k,  sum a_i = 1,  a, b >= 0.
/// The primal point and the dual supporting hyperplane are both checked, which
/// certifies r v in K and (r - 1e-6 r) v outside K.
inline RadialSolve radial_solve(const VRepPseudoCone& k, const Direction& v) {
    if (v.dim() != k.dim() || !interior_contains(k.cone(), v)) {
        throw DomainViolation("radial direction is outside Omega_C");
    }
    const int n = k.dim();
    const int m = k.size();
    Mat a = Mat::Zero(n + 1, 1 + m + n);
    a.col(0).head(n) = v.coords();
    double scale = 0.0;
    for (int i = 0; i < m; ++i) {
        const Vec p = k.vertex(i);
        scale = std::max(scale, p.norm());
        a.col(1 + i).head(n) = -p;
        a(n, 1 + i) = 1.0;
    }
    for (int g = 0; g < n; ++g) a.col(1 + m + g).head(n) = -k.cone().generators()[g].coords();
    Vec b = Vec::Zero(n + 1);
    b[n] = 1.0;
    Vec c = Vec::Zero(1 + m + n);
    c[0] = 1.0;

    const auto sol = lp::solve(a, b, c);
    if (sol.status != lp::Status::Optimal) throw LPFailure("radial LP did not reach an optimum");

    const double r = sol.x[0];
    const Vec residual = a * sol.x - b;
    const Vec w = -sol.duals.head(n);
    const double wn = w.norm();
    const double tol = 1e-9 * (1.0 + scale);
    bool ok = r > 0.0 && residual.lpNorm<Eigen::Infinity>() <= tol && wn > 0.0 &&
              std::abs(sol.duals[n] - r) <= 1e-9 * (1.0 + r + wn * scale);
    for (int i = 0; ok && i < m; ++i) ok = w.dot(k.vertex(i)) <= -r + 1e-9 * (1.0 + r + wn * scale);
    for (int g = 0; ok && g < n; ++g) ok = w.dot(k.cone().generators()[g].coords()) <= 1e-9 * wn;
    if (!ok) throw LPFailure("radial LP certificate failed; instance is ill-conditioned");

    return RadialSolve{r, w / wn, !sol.degenerate};
}

inline double radial_value(const VRepPseudoCone& k, const Direction& v) { return radial_solve(k, v).radius; }

/// h̄_K(u) = 1 / rho_{K*}(u).
inline double support_value(const HRepPseudoCone& k, const Direction& u) {
    return 1.0 / radial_value(copolar(k), u);
}

/// Every vertex lies strictly inside C, which makes the convexification internal.
inline bool is_internal(const VRepPseudoCone& k) {
    for (const auto& d : k.directions()) {
        if (!interior_contains(k.cone(), d)) return false;
    }
    return true;
}

/// y in conv{p_i} + C, decided by an LP feasibility problem.
inline bool contains(const VRepPseudoCone& k, const Vec& y, double tol = 1e-9) {
    const int n = k.dim();
    const int m = k.size();
    Mat a = Mat::Zero(n + 1, m + n);
    for (int i = 0; i < m; ++i) {
        a.col(i).head(n) = k.vertex(i);
        a(n, i) = 1.0;
    }
    for (int g = 0; g < n; ++g) a.col(m + g).head(n) = k.cone().generators()[g].coords();
    Vec b(n + 1);
    b.head(n) = y;
    b[n] = 1.0;
    lp::Options opt;
    opt.feasibility_tol = tol;
    return lp::solve(a, b, Vec::Zero(m + n), opt).status == lp::Status::Optimal;
}

inline bool contains(const HRepPseudoCone& k, const Vec& y, double tol = 1e-9) {
    const double scale = 1.0 + y.norm();
    for (const auto& h : k.cone().facet_normals()) {
        if (h.dot(y) > tol * scale) return false;
    }
    for (int j = 0; j < k.size(); ++j) {
        if (k.normals()[j].dot(y) > -k.offsets()[j] + tol * scale) return false;
    }
    return true;
}

/// Drops vertices that lie in the convexification of the others.
inline VRepPseudoCone reduce(const VRepPseudoCone& k) {
    std::vector<Direction> dirs = k.directions();
    std::vector<double> radii = k.radii();
    for (std::size_t j = 0; j < dirs.size() && dirs.size() > 1;) {
        std::vector<Direction> od;
        std::vector<double> orad;
        for (std::size_t i = 0; i < dirs.size(); ++i) {
            if (i == j) continue;
            od.push_back(dirs[i]);
            orad.push_back(radii[i]);
        }
        const VRepPseudoCone others(k.cone(), od, orad);
        if (radial_value(others, dirs[j]) <= radii[j] * (1.0 + 1e-12)) {
            dirs = std::move(od);
            radii = std::move(orad);
        } else {
            ++j;
        }
    }
    return VRepPseudoCone(k.cone(), std::move(dirs), std::move(radii));
}

inline HRepPseudoCone reduce(const HRepPseudoCone& k) { return copolar(reduce(copolar(k))); }

/// Euclidean distance from the origin, via accelerated projected gradient on
/// min ||P a + G b||^2 over the simplex (a) times the nonnegative orthant (b).
inline double distance_to_origin(const VRepPseudoCone& k, int max_iter = 200000) {
    const int n = k.dim();
    const int m = k.size();
    Mat basis(n, m + n);
    for (int i = 0; i < m; ++i) basis.col(i) = k.vertex(i);
    basis.rightCols(n) = k.cone().generator_matrix();
    Eigen::JacobiSVD<Mat> svd(basis);
    const double lip = std::pow(svd.singularValues()[0], 2);

    auto project = [m, n](Vec z) {
        // Euclidean projection of the first m entries onto the simplex.
        Vec s = z.head(m);
        std::vector<double> sorted(s.data(), s.data() + m);
        std::sort(sorted.begin(), sorted.end(), std::greater<>());
        double cum = 0.0, theta = 0.0;
        for (int i = 0; i < m; ++i) {
            cum += sorted[i];
            const double t = (cum - 1.0) / (i + 1);
            if (sorted[i] - t > 0.0) theta = t;
        }
        for (int i = 0; i < m; ++i) z[i] = std::max(0.0, z[i] - theta);
        for (int g = 0; g < n; ++g) z[m + g] = std::max(0.0, z[m + g]);
        return z;
    };

    Vec z = Vec::Zero(m + n);
    int start = 0;
    for (int i = 1; i < m; ++i) {
        if (k.radii()[i] < k.radii()[start]) start = i;
    }
    z[start] = 1.0;
    Vec y = z;
    double t = 1.0;
    double prev = (basis * z).norm();
    for (int it = 0; it < max_iter; ++it) {
        const Vec grad = basis.transpose() * (basis * y);
        const Vec next = project(y - grad / lip);
        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        y = next + ((t - 1.0) / tn) * (next - z);
        z = next;
        t = tn;
        const double cur = (basis * z).norm();
        if (it % 100 == 99) {
            if (std::abs(prev - cur) <= 1e-15 * (1.0 + cur)) break;
            prev = cur;
        }
    }
    return (basis * z).norm();
}

} // namespace gausscone
