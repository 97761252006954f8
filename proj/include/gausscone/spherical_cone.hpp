#pragma once

// Pointed, full-dimensional simplicial cones C, their duals C°, and the open
// spherical patches Omega_C = S^{n-1} ∩ int C.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gausscone/errors.hpp"

namespace gausscone {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kUnitTolerance = 1e-12;
inline constexpr double kInteriorMargin = 1e-10;
inline constexpr double kMaxConditionNumber = 1e12;

/// A point of the unit sphere S^{n-1}.
class Direction {
public:
    /// Wraps `coords`, which must already have unit norm.
    explicit Direction(Vec coords) : coords_(std::move(coords)) {
        if (coords_.size() < 1 || !coords_.allFinite() ||
            std::abs(coords_.norm() - 1.0) > kUnitTolerance) {
            throw DomainViolation("direction is not a finite unit vector");
        }
    }

    /// Scales a nonzero finite vector onto the sphere.
    static Direction normalized(const Vec& v) {
        const double norm = v.norm();
        if (!v.allFinite() || !(norm > 0.0)) {
            throw DomainViolation("cannot normalize a zero or non-finite vector");
        }
        return Direction(v / norm);
    }

    static Direction normalized(std::initializer_list<double> values) {
        Vec v(static_cast<Eigen::Index>(values.size()));
        Eigen::Index k = 0;
        for (double x : values) v[k++] = x;
        return normalized(v);
    }

    const Vec& coords() const noexcept { return coords_; }
    int dim() const noexcept { return static_cast<int>(coords_.size()); }
    double operator[](int k) const { return coords_[k]; }
    double dot(const Direction& other) const { return coords_.dot(other.coords_); }
    double dot(const Vec& other) const { return coords_.dot(other); }

private:
    Vec coords_;
};

/// A pointed, n-dimensional simplicial cone given by n generators.
///
/// Facet normals are outward, so C = {y : <h_k, y> <= 0 for all k}, and facet k
/// is the one not containing generator k. For a simplicial cone the outer
/// facet normals of C are exactly the generators of C°, and vice versa, so the
/// dual is built by swapping the two lists.
class Cone {
public:
    int dim() const noexcept { return static_cast<int>(generators_.size()); }
    const std::vector<Direction>& generators() const noexcept { return generators_; }
    const std::vector<Direction>& facet_normals() const noexcept { return facet_normals_; }
    const std::vector<Direction>& dual_generators() const noexcept { return facet_normals_; }

    /// Generators as the columns of an n x n matrix.
    Mat generator_matrix() const {
        Mat g(dim(), dim());
        for (int k = 0; k < dim(); ++k) g.col(k) = generators_[k].coords();
        return g;
    }

    friend Cone build_simplicial_cone(const std::vector<Direction>& generators);
    friend Cone dual_cone(const Cone& cone);

private:
    Cone(std::vector<Direction> generators, std::vector<Direction> normals)
        : generators_(std::move(generators)), facet_normals_(std::move(normals)) {}

    std::vector<Direction> generators_;
    std::vector<Direction> facet_normals_;
};

inline Cone build_simplicial_cone(const std::vector<Direction>& generators) {
    const int n = static_cast<int>(generators.size());
    if (n < 2) throw SingularGenerators("a cone needs at least two generators");
    for (const auto& g : generators) {
        if (g.dim() != n) throw SingularGenerators("need exactly n generators of length n");
    }
    Mat g(n, n);
    for (int k = 0; k < n; ++k) g.col(k) = generators[k].coords();

    Eigen::JacobiSVD<Mat> svd(g);
    const auto& sv = svd.singularValues();
    if (!(sv[n - 1] > 0.0) || sv[0] / sv[n - 1] > kMaxConditionNumber) {
        throw SingularGenerators("generator matrix is rank-deficient or ill-conditioned");
    }

    // Row k of G^{-1} is orthogonal to every generator except g_k and pairs to
    // +1 with g_k; its negation is the outward normal of the facet opposite g_k.
    const Mat inv = g.partialPivLu().inverse();
    std::vector<Direction> normals;
    normals.reserve(n);
    for (int k = 0; k < n; ++k) normals.push_back(Direction::normalized(Vec(-inv.row(k).transpose())));
    return Cone(generators, std::move(normals));
}

inline Cone build_simplicial_cone(const std::vector<Vec>& raw_generators) {
    std::vector<Direction> dirs;
    dirs.reserve(raw_generators.size());
    for (const auto& g : raw_generators) dirs.push_back(Direction::normalized(g));
    return build_simplicial_cone(dirs);
}

inline Cone dual_cone(const Cone& cone) {
    return Cone(cone.facet_normals_, cone.generators_);
}

/// True iff <h_k, x> < -eps_int * ||x|| for every facet normal (strict interior).
inline bool interior_contains(const Cone& cone, const Vec& x) {
    const double norm = x.norm();
    if (!x.allFinite() || !(norm > 0.0)) return false;
    for (const auto& h : cone.facet_normals()) {
        if (!(h.dot(x) < -kInteriorMargin * norm)) return false;
    }
    return true;
}

inline bool interior_contains(const Cone& cone, const Direction& d) {
    return interior_contains(cone, d.coords());
}

/// Membership in the closed cone, with a relative tolerance on the facet inequalities.
inline bool closure_contains(const Cone& cone, const Vec& x, double tol = kInteriorMargin) {
    const double norm = x.norm();
    if (!x.allFinite()) return false;
    for (const auto& h : cone.facet_normals()) {
        if (h.dot(x) > tol * norm) return false;
    }
    return true;
}

/// Generators agree up to permutation within `tol`.
inline bool same_cone(const Cone& a, const Cone& b, double tol = 1e-12) {
    if (a.dim() != b.dim()) return false;
    std::vector<bool> used(b.dim(), false);
    for (const auto& g : a.generators()) {
        bool found = false;
        for (int k = 0; k < b.dim(); ++k) {
            if (!used[k] && (g.coords() - b.generators()[k].coords()).lpNorm<Eigen::Infinity>() <= tol) {
                used[k] = true;
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

/// Normalized positive random combinations of the generators. Deterministic in `seed`.
inline std::vector<Direction> sample_interior_directions(const Cone& cone, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const Mat g = cone.generator_matrix();
    std::vector<Direction> out;
    out.reserve(count > 0 ? count : 0);
    Vec w(cone.dim());
    while (static_cast<int>(out.size()) < count) {
        for (int k = 0; k < cone.dim(); ++k) w[k] = unit(rng);
        const Vec x = g * w;
        if (interior_contains(cone, x)) out.push_back(Direction::normalized(x));
    }
    return out;
}

/// A random simplicial cone around a random axis, reasonably conditioned.
template <class Rng>
Cone random_simplicial_cone(int n, Rng& rng, double spread = 0.8) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (;;) {
        Vec axis(n);
        for (int k = 0; k < n; ++k) axis[k] = normal(rng);
        if (axis.norm() < 1e-3) continue;
        axis.normalize();
        std::vector<Vec> gens;
        for (int j = 0; j < n; ++j) {
            Vec z(n);
            for (int k = 0; k < n; ++k) z[k] = normal(rng);
            gens.push_back(axis + spread * z);
        }
        bool ok = true;
        for (const auto& g : gens) ok = ok && g.norm() > 1e-3;
        if (!ok) continue;
        Mat m(n, n);
        for (int k = 0; k < n; ++k) m.col(k) = gens[k].normalized();
        Eigen::JacobiSVD<Mat> svd(m);
        const auto& sv = svd.singularValues();
        if (sv[n - 1] <= 0.0 || sv[0] / sv[n - 1] > 50.0) continue;
        return build_simplicial_cone(gens);
    }
}

} // namespace gausscone
