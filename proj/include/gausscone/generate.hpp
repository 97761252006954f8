#pragma once

// Deterministic random instances.

#include <cstdint>
#include <random>
#include <vector>

#include "gausscone/gauss_map.hpp"
#include "gausscone/solver.hpp"
#include "gausscone/spherical_cone.hpp"

namespace gausscone {

struct Instance {
    AtomicSphericalMeasure lambda;
    AtomicSphericalMeasure mu;

    GaussImageProblem problem() const { return GaussImageProblem(lambda, mu); }
};

namespace detail {

template <class Rng>
std::vector<Atom> random_atoms(const Cone& host, int count, Rng& rng, bool normalize) {
    std::uniform_real_distribution<double> weight(0.1, 1.0);
    const auto dirs = sample_interior_directions(host, count, rng());
    std::vector<Atom> atoms;
    atoms.reserve(count);
    double total = 0.0;
    for (const auto& d : dirs) {
        atoms.push_back({d, weight(rng)});
        total += atoms.back().weight;
    }
    if (normalize) {
        for (auto& a : atoms) a.weight /= total;
    }
    return atoms;
}

} // namespace detail

/// Random simplicial cone in R^n with random atoms strictly inside both patches.
/// When `balanced`, both measures are rescaled to total mass 1.
inline Instance generate_instance(int n, int m_lambda, int m_mu, std::uint64_t seed, bool balanced) {
    std::mt19937_64 rng(seed);
    const Cone cone = random_simplicial_cone(n, rng);
    const Cone dual = dual_cone(cone);
    auto lambda_atoms = detail::random_atoms(dual, m_lambda, rng, balanced);
    auto mu_atoms = detail::random_atoms(cone, m_mu, rng, balanced);
    return Instance{AtomicSphericalMeasure(cone, Patch::OmegaCDual, std::move(lambda_atoms)),
                    AtomicSphericalMeasure(cone, Patch::OmegaC, std::move(mu_atoms))};
}

/// Instance whose mu is the pushforward of lambda under a random convexification,
/// so an exact solution without tied atoms exists. Vertices receiving no mass are
/// dropped, so the returned mu may have fewer than `m_mu` atoms.
inline Instance generate_planted_instance(int n, int m_lambda, int m_mu, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const Cone cone = random_simplicial_cone(n, rng);
    auto lambda_atoms = detail::random_atoms(dual_cone(cone), m_lambda, rng, true);
    const AtomicSphericalMeasure lambda(cone, Patch::OmegaCDual, lambda_atoms);
    const auto dirs = sample_interior_directions(cone, m_mu, rng());
    std::normal_distribution<double> normal(0.0, 0.3);
    std::vector<double> radii;
    for (int i = 0; i < m_mu; ++i) radii.push_back(std::exp(normal(rng)));
    const auto report = pushforward(VRepPseudoCone(cone, dirs, radii), lambda);
    std::vector<Atom> mu_atoms;
    for (int i = 0; i < m_mu; ++i) {
        if (report.masses[i] > 0.0) mu_atoms.push_back({dirs[i], report.masses[i]});
    }
    return Instance{lambda, AtomicSphericalMeasure(cone, Patch::OmegaC, std::move(mu_atoms))};
}

} // namespace gausscone
