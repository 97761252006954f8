#pragma once

// JSON documents for cones, measures, instances, pseudo-cones and solver
// results, plus CSV plot output. Parse failures carry a JSON pointer.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gausscone/errors.hpp"
#include "gausscone/gauss_map.hpp"
#include "gausscone/generate.hpp"
#include "gausscone/pseudocone.hpp"
#include "gausscone/solver.hpp"
#include "gausscone/spherical_cone.hpp"

namespace gausscone::io {

using json = nlohmann::json;

namespace detail {

inline std::string join(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }
inline std::string join(const std::string& ptr, std::size_t index) { return ptr + "/" + std::to_string(index); }

inline const json& field(const json& j, const std::string& ptr, const std::string& key) {
    if (!j.is_object()) throw ParseError(ptr.empty() ? "/" : ptr, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(join(ptr, key), "missing field");
    return *it;
}

inline double number(const json& j, const std::string& ptr) {
    if (!j.is_number()) throw ParseError(ptr, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ParseError(ptr, "expected a finite number");
    return v;
}

inline int integer(const json& j, const std::string& ptr) {
    if (!j.is_number_integer()) throw ParseError(ptr, "expected an integer");
    return j.get<int>();
}

inline Vec vector(const json& j, const std::string& ptr, int n) {
    if (!j.is_array()) throw ParseError(ptr, "expected an array");
    if (n >= 0 && static_cast<int>(j.size()) != n) {
        throw ParseError(ptr, "expected " + std::to_string(n) + " entries, got " + std::to_string(j.size()));
    }
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k) v[static_cast<Eigen::Index>(k)] = number(j[k], join(ptr, k));
    return v;
}

// Unit vectors are kept bit-for-bit so documents round-trip; others are normalized.
inline Direction direction(const json& j, const std::string& ptr, int n) {
    const Vec v = vector(j, ptr, n);
    try {
        if (std::abs(v.norm() - 1.0) <= kUnitTolerance) return Direction(v);
        return Direction::normalized(v);
    } catch (const DomainViolation& e) {
        throw ParseError(ptr, e.what());
    }
}

inline json to_json(const Vec& v) {
    json out = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v[k]);
    return out;
}

inline json to_json(const std::vector<double>& v) { return json(v); }

inline json read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("", std::string("invalid JSON: ") + e.what());
    }
}

inline void write_file(const std::string& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw IOError("cannot write " + path);
    out << doc.dump(2) << '\n';
    if (!out) throw IOError("write failed for " + path);
}

} // namespace detail

// Cone block: {"n": int, "generators": [[...], ...]}.

inline Cone cone_from_json(const json& j, const std::string& ptr = "/cone") {
    const int n = detail::integer(detail::field(j, ptr, "n"), detail::join(ptr, "n"));
    if (n < 2) throw ParseError(detail::join(ptr, "n"), "dimension must be at least 2");
    const auto gptr = detail::join(ptr, "generators");
    const json& gens = detail::field(j, ptr, "generators");
    if (!gens.is_array() || static_cast<int>(gens.size()) != n) {
        throw ParseError(gptr, "expected " + std::to_string(n) + " generators");
    }
    std::vector<Direction> dirs;
    for (std::size_t k = 0; k < gens.size(); ++k) dirs.push_back(detail::direction(gens[k], detail::join(gptr, k), n));
    return build_simplicial_cone(dirs);
}

inline json to_json(const Cone& c) {
    json gens = json::array();
    for (const auto& g : c.generators()) gens.push_back(detail::to_json(g.coords()));
    return {{"n", c.dim()}, {"generators", gens}};
}

// Measure block: {"domain": "omega_c" | "omega_c_dual", "atoms": [{"direction": [...], "weight": w}]}.

inline const char* domain_tag(Patch p) { return p == Patch::OmegaC ? "omega_c" : "omega_c_dual"; }

inline AtomicSphericalMeasure measure_from_json(const json& j, const Cone& cone, Patch expected, const std::string& ptr) {
    const json& dom = detail::field(j, ptr, "domain");
    if (!dom.is_string() || dom.get<std::string>() != domain_tag(expected)) {
        throw ParseError(detail::join(ptr, "domain"), std::string("expected \"") + domain_tag(expected) + "\"");
    }
    const auto aptr = detail::join(ptr, "atoms");
    const json& atoms = detail::field(j, ptr, "atoms");
    if (!atoms.is_array()) throw ParseError(aptr, "expected an array");
    std::vector<Atom> out;
    for (std::size_t k = 0; k < atoms.size(); ++k) {
        const auto p = detail::join(aptr, k);
        const Direction d = detail::direction(detail::field(atoms[k], p, "direction"), detail::join(p, "direction"), cone.dim());
        const double w = detail::number(detail::field(atoms[k], p, "weight"), detail::join(p, "weight"));
        out.push_back({d, w});
    }
    return AtomicSphericalMeasure(cone, expected, std::move(out));
}

inline json to_json(const AtomicSphericalMeasure& m) {
    json atoms = json::array();
    for (const auto& a : m.atoms()) atoms.push_back({{"direction", detail::to_json(a.direction.coords())}, {"weight", a.weight}});
    return {{"domain", domain_tag(m.patch())}, {"atoms", atoms}};
}

// Optional solver block: {"tol", "max_iter", "seed", "tau"}.

inline SolveConfig config_from_json(const json& j, const std::string& ptr = "/config") {
    SolveConfig cfg;
    if (!j.is_object()) throw ParseError(ptr, "expected an object");
    if (j.contains("tol")) cfg.tol = detail::number(j["tol"], detail::join(ptr, "tol"));
    if (j.contains("max_iter")) cfg.max_iter = detail::integer(j["max_iter"], detail::join(ptr, "max_iter"));
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw ParseError(detail::join(ptr, "seed"), "expected a non-negative integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("tau")) cfg.tau = detail::number(j["tau"], detail::join(ptr, "tau"));
    return cfg;
}

inline json to_json(const SolveConfig& cfg) {
    json out = {{"tol", cfg.tol}, {"max_iter", cfg.max_iter}, {"tau", cfg.tau}};
    if (cfg.seed) out["seed"] = *cfg.seed;
    return out;
}

struct LoadedInstance {
    Instance instance;
    std::optional<SolveConfig> config;
    std::vector<std::string> warnings;

    GaussImageProblem problem() const { return instance.problem(); }
};

/// Parses and validates an instance document. Domain, transversality and mass
/// checks all run here.
inline LoadedInstance instance_from_json(const json& doc) {
    const Cone cone = cone_from_json(detail::field(doc, "", "cone"), "/cone");
    auto lambda = measure_from_json(detail::field(doc, "", "lambda"), cone, Patch::OmegaCDual, "/lambda");
    auto mu = measure_from_json(detail::field(doc, "", "mu"), cone, Patch::OmegaC, "/mu");
    LoadedInstance out{Instance{std::move(lambda), std::move(mu)}, std::nullopt, {}};
    const auto p = out.problem();  // runs the transversality checks
    if (std::abs(p.balance_ratio() - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "unbalanced masses |lambda| = " << p.lambda_mass() << ", mu(Omega_C) = " << p.mu_mass()
            << "; solving against (L/M) mu with ratio " << p.balance_ratio();
        out.warnings.push_back(msg.str());
    }
    if (doc.contains("config")) out.config = config_from_json(doc["config"]);
    return out;
}

inline LoadedInstance load_instance(const std::string& path) { return instance_from_json(detail::read_file(path)); }

inline json to_json(const Instance& inst, const std::optional<SolveConfig>& cfg = std::nullopt) {
    json out = {{"cone", to_json(inst.lambda.cone())}, {"lambda", to_json(inst.lambda)}, {"mu", to_json(inst.mu)}};
    if (cfg) out["config"] = to_json(*cfg);
    return out;
}

inline void save_instance(const std::string& path, const Instance& inst, const std::optional<SolveConfig>& cfg = std::nullopt) {
    detail::write_file(path, to_json(inst, cfg));
}

// Pseudo-cone: {"rep": "V" | "H", "cone": {...}, "dirs": [[...]], "vals": [...]}.

struct PseudoConeDoc {
    std::optional<VRepPseudoCone> v;
    std::optional<HRepPseudoCone> h;

    bool is_v() const { return v.has_value(); }
};

inline PseudoConeDoc pseudo_cone_from_json(const json& doc, const std::string& ptr = "") {
    const json& rep = detail::field(doc, ptr, "rep");
    if (!rep.is_string() || (rep != "V" && rep != "H")) throw ParseError(detail::join(ptr, "rep"), "expected \"V\" or \"H\"");
    const Cone cone = cone_from_json(detail::field(doc, ptr, "cone"), detail::join(ptr, "cone"));
    const auto dptr = detail::join(ptr, "dirs");
    const json& dirs = detail::field(doc, ptr, "dirs");
    if (!dirs.is_array()) throw ParseError(dptr, "expected an array");
    std::vector<Direction> ds;
    for (std::size_t k = 0; k < dirs.size(); ++k) ds.push_back(detail::direction(dirs[k], detail::join(dptr, k), cone.dim()));
    const json& vals_json = detail::field(doc, ptr, "vals");
    const Vec vals = detail::vector(vals_json, detail::join(ptr, "vals"), static_cast<int>(ds.size()));
    std::vector<double> vs(vals.data(), vals.data() + vals.size());
    PseudoConeDoc out;
    if (rep == "V") {
        out.v.emplace(cone, std::move(ds), std::move(vs));
    } else {
        out.h.emplace(cone, std::move(ds), std::move(vs));
    }
    return out;
}

inline json to_json(const VRepPseudoCone& k) {
    json dirs = json::array();
    for (const auto& d : k.directions()) dirs.push_back(detail::to_json(d.coords()));
    return {{"rep", "V"}, {"cone", to_json(k.cone())}, {"dirs", dirs}, {"vals", k.radii()}};
}

inline json to_json(const HRepPseudoCone& k) {
    json dirs = json::array();
    for (const auto& d : k.normals()) dirs.push_back(detail::to_json(d.coords()));
    return {{"rep", "H"}, {"cone", to_json(k.cone())}, {"dirs", dirs}, {"vals", k.offsets()}};
}

inline PseudoConeDoc load_pseudo_cone(const std::string& path) { return pseudo_cone_from_json(detail::read_file(path)); }

// Result: {"log_radii", "phi", "residual_linf", "iterations", "certified", "balance_ratio", ...}.

inline json to_json(const SolveResult& r, const std::string& gauge = "mean-zero") {
    json splits = json::array();
    for (const auto& s : r.tie_assignment) splits.push_back({{"atom", s.atom}, {"vertex", s.vertex}, {"mass", s.mass}});
    return {{"log_radii", detail::to_json(r.log_radii)},
            {"phi", r.phi},
            {"residual_linf", r.residual_linf},
            {"iterations", r.iterations},
            {"certified", r.certified},
            {"balance_ratio", r.balance_ratio},
            {"converged", r.converged},
            {"plain_residual", r.plain_residual},
            {"unique_minimizer", r.unique_minimizer},
            {"tie_assignment", splits},
            {"gauge", gauge}};
}

inline Vec log_radii_from_json(const json& doc, int m, const std::string& ptr = "") {
    return detail::vector(detail::field(doc, ptr, "log_radii"), detail::join(ptr, "log_radii"), m);
}

/// The pseudo-cone stored in `doc`, which is either a result document (log-radii
/// over the mu directions of `p`) or a V-rep pseudo-cone document.
inline VRepPseudoCone pseudo_cone_for(const json& doc, const GaussImageProblem& p) {
    if (doc.is_object() && doc.contains("log_radii")) return p.pseudo_cone(log_radii_from_json(doc, p.mu_size()));
    auto k = pseudo_cone_from_json(doc);
    if (!k.is_v()) throw ParseError("/rep", "expected a V-rep pseudo-cone");
    return *k.v;
}

inline json read_json(const std::string& path) { return detail::read_file(path); }
inline void write_json(const std::string& path, const json& doc) { detail::write_file(path, doc); }

/// CSV rows (index, direction, radius, target mass, achieved mass, residual) for
/// the solved pseudo-cone; for n = 2 also `<path>.boundary.csv`, a polyline of
/// boundary points ordered by angle. Returns the boundary path, or "".
inline std::string emit_plot_data(const SolveResult& r, const GaussImageProblem& p, const std::string& path,
                                  int boundary_samples = 200) {
    const auto k = p.pseudo_cone(r.log_radii);
    const auto cert = certify(r.log_radii, p);
    std::vector<double> achieved = cert.masses;
    if (!cert.certified) achieved = pushforward(k, p.lambda()).masses;
    const auto target = p.target_masses();

    std::ofstream out(path);
    if (!out) throw IOError("cannot write " + path);
    out.precision(17);
    out << "index";
    for (int c = 0; c < p.cone().dim(); ++c) out << ",v" << c;
    out << ",radius,target_mass,achieved_mass,residual\n";
    for (int i = 0; i < k.size(); ++i) {
        out << i;
        for (int c = 0; c < k.dim(); ++c) out << ',' << k.directions()[i][c];
        const double res = std::abs(achieved[i] / p.lambda_mass() - p.mu().atoms()[i].weight / p.mu_mass());
        out << ',' << k.radii()[i] << ',' << target[i] << ',' << achieved[i] << ',' << res << '\n';
    }
    if (!out) throw IOError("write failed for " + path);
    if (k.dim() != 2) return "";

    const auto& g = k.cone().generators();
    std::vector<Vec> pts;
    for (int s = 0; s < boundary_samples; ++s) {
        const double t = 0.02 + 0.96 * (s + 0.5) / boundary_samples;
        const auto v = Direction::normalized(((1.0 - t) * g[0].coords() + t * g[1].coords()).eval());
        pts.push_back(radial_value(k, v) * v.coords());
    }
    for (int i = 0; i < k.size(); ++i) {
        if (std::abs(radial_value(k, k.directions()[i]) - k.radii()[i]) <= 1e-9 * k.radii()[i]) pts.push_back(k.vertex(i));
    }
    std::sort(pts.begin(), pts.end(), [](const Vec& a, const Vec& b) { return std::atan2(a[1], a[0]) < std::atan2(b[1], b[0]); });
    const std::string bpath = path + ".boundary.csv";
    std::ofstream bout(bpath);
    if (!bout) throw IOError("cannot write " + bpath);
    bout.precision(17);
    bout << "x,y\n";
    for (const auto& q : pts) bout << q[0] << ',' << q[1] << '\n';
    if (!bout) throw IOError("write failed for " + bpath);
    return bpath;
}

} // namespace gausscone::io
