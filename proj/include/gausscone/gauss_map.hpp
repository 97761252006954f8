#pragma once

// Reverse radial Gauss map of a convexification, the pushforward measure
// lambda(K, .) of an atomic measure on Omega_{C°}, and the tie set that
// stands in for the null set omega_K.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gausscone/errors.hpp"
#include "gausscone/pseudocone.hpp"
#include "gausscone/spherical_cone.hpp"

namespace gausscone {

inline constexpr double kTieTolerance = 1e-9;

enum class Patch { OmegaC, OmegaCDual };

struct Atom {
    Direction direction;
    double weight;
};

/// Finitely many weighted atoms on Omega_C or Omega_{C°}. `cone()` is always C;
/// `patch()` says on which side the atoms live.
class AtomicSphericalMeasure {
public:
    AtomicSphericalMeasure(Cone cone, Patch patch, std::vector<Atom> atoms)
        : cone_(std::move(cone)), patch_(patch), atoms_(std::move(atoms)) {
        if (atoms_.empty()) throw MassZero("measure has no atoms");
        const Cone host = patch_ == Patch::OmegaC ? cone_ : dual_cone(cone_);
        total_ = 0.0;
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            const auto& a = atoms_[i];
            if (a.direction.dim() != cone_.dim() || !interior_contains(host, a.direction)) {
                throw DomainViolation("atom " + std::to_string(i) + " is not in the open patch");
            }
            if (!std::isfinite(a.weight) || !(a.weight > 0.0)) {
                throw NonPositiveValue("atom " + std::to_string(i) + " has a non-positive weight");
            }
            total_ += a.weight;
        }
        if (!(total_ > 0.0) || !std::isfinite(total_)) throw MassZero("total mass must be finite and positive");
    }

    const Cone& cone() const noexcept { return cone_; }
    Patch patch() const noexcept { return patch_; }
    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    int size() const noexcept { return static_cast<int>(atoms_.size()); }
    double total_mass() const noexcept { return total_; }

    std::vector<Direction> directions() const {
        std::vector<Direction> out;
        out.reserve(atoms_.size());
        for (const auto& a : atoms_) out.push_back(a.direction);
        return out;
    }

    AtomicSphericalMeasure scaled(double factor) const {
        std::vector<Atom> atoms = atoms_;
        for (auto& a : atoms) a.weight *= factor;
        return AtomicSphericalMeasure(cone_, patch_, std::move(atoms));
    }

private:
    Cone cone_;
    Patch patch_;
    std::vector<Atom> atoms_;
    double total_ = 0.0;
};

/// Result of alpha*_K(u): the vertex whose support value is attained.
struct GaussAssignment {
    int index = 0;
    bool tie = false;
    std::vector<int> candidates;  // all near-maximizers, ascending
};

namespace detail {

// Near-maximizers of values[i] at relative tolerance kTieTolerance; lowest index wins.
inline GaussAssignment argmax_with_ties(const std::vector<double>& values) {
    const double best = *std::max_element(values.begin(), values.end());
    const double slack = kTieTolerance * std::abs(best);
    GaussAssignment out;
    for (int i = 0; i < static_cast<int>(values.size()); ++i) {
        if (values[i] >= best - slack) out.candidates.push_back(i);
    }
    out.index = out.candidates.front();
    out.tie = out.candidates.size() > 1;
    return out;
}

} // namespace detail

/// alpha*_K(u) = v_{i*} with i* = argmax_i <u, rho_i v_i>.
inline GaussAssignment reverse_radial_gauss(const VRepPseudoCone& k, const Direction& u) {
    if (u.dim() != k.dim() || !interior_contains(dual_cone(k.cone()), u)) {
        throw DomainViolation("normal direction is outside Omega_{C°}");
    }
    std::vector<double> values(k.size());
    for (int i = 0; i < k.size(); ++i) values[i] = u.dot(k.vertex(i));
    return detail::argmax_with_ties(values);
}

/// Forward radial Gauss map alpha_K(v): one supporting unit normal at the
/// radial point, flagged non-unique when the LP basis is degenerate.
struct GaussNormal {
    Direction normal;
    bool unique;
};

inline GaussNormal radial_gauss(const VRepPseudoCone& k, const Direction& v) {
    const auto s = radial_solve(k, v);
    return GaussNormal{Direction::normalized(s.normal), s.unique};
}

struct PushforwardReport {
    std::vector<double> masses;                   // lambda(K, {v_i}) per vertex
    std::vector<int> assignment;                  // chosen vertex per lambda atom
    std::vector<int> ties;                        // atoms with a non-unique argmax
    std::vector<std::vector<int>> tie_candidates; // parallel to `ties`
};

inline PushforwardReport pushforward(const VRepPseudoCone& k, const AtomicSphericalMeasure& lambda) {
    if (lambda.patch() != Patch::OmegaCDual) throw DomainViolation("lambda must live on Omega_{C°}");
    if (!same_cone(lambda.cone(), k.cone())) throw ConeMismatch("lambda and K have different cones");

    PushforwardReport out;
    out.masses.assign(k.size(), 0.0);
    out.assignment.resize(lambda.size());
    for (int j = 0; j < lambda.size(); ++j) {
        const auto a = reverse_radial_gauss(k, lambda.atoms()[j].direction);
        out.assignment[j] = a.index;
        if (a.tie) {
            out.ties.push_back(j);
            out.tie_candidates.push_back(a.candidates);
        }
    }
    // Accumulate in atom order so the sums do not depend on how atoms were classified.
    for (int j = 0; j < lambda.size(); ++j) out.masses[out.assignment[j]] += lambda.atoms()[j].weight;
    return out;
}

/// Left side of the transformation identity: sum_j lambda_j g(alpha*_K(u_j)).
template <class F>
double integrate(F&& g, const VRepPseudoCone& k, const AtomicSphericalMeasure& lambda) {
    double total = 0.0;
    for (const auto& atom : lambda.atoms()) {
        total += atom.weight * g(k.directions()[reverse_radial_gauss(k, atom.direction).index]);
    }
    return total;
}

/// Right side: sum_i lambda(K, {v_i}) g(v_i).
template <class F>
double integrate_pushforward(F&& g, const VRepPseudoCone& k, const PushforwardReport& report) {
    double total = 0.0;
    for (int i = 0; i < k.size(); ++i) {
        if (report.masses[i] != 0.0) total += report.masses[i] * g(k.directions()[i]);
    }
    return total;
}

} // namespace gausscone
