#pragma once

// Dense two-phase revised simplex for small standard-form programs
//
//     minimize c'x  subject to  A x = b,  x >= 0
//
// The basis matrix is refactorized at every pivot, so no round-off builds up
// across pivots. Entering columns follow Bland's rule; the pivot sequence (and
// the returned basis) is a deterministic function of the input.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace gausscone::lp {

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Solution {
    Status status = Status::Infeasible;
    Eigen::VectorXd x;       // primal point (size = columns of A)
    double objective = 0.0;  // c'x
    Eigen::VectorXd duals;   // y with A'y <= c and b'y = c'x at optimum
    std::vector<int> basis;  // basic column per row; -1 marks a redundant row
    bool degenerate = false; // some basic primal variable sits at zero
};

struct Options {
    double pivot_tol = 1e-11;
    double cost_tol = 1e-11;
    double feasibility_tol = 1e-9;
    int max_pivots = 20000;
};

namespace detail {

struct Factor {
    Eigen::MatrixXd bm;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
    Eigen::VectorXd xb;
    Eigen::VectorXd y;

    Eigen::VectorXd solve(const Eigen::VectorXd& r) const { return lu.solve(r); }
    Eigen::VectorXd solve_transposed(const Eigen::VectorXd& r) const { return lu.transpose().solve(r); }
};

// Columns of `full` are structural then artificial; cost covers all of them.
inline bool factor(const Eigen::MatrixXd& full, const Eigen::VectorXd& b, const Eigen::VectorXd& cost,
                   const std::vector<int>& basis, Factor& f) {
    const Eigen::Index m = full.rows();
    f.bm.resize(m, m);
    Eigen::VectorXd cb(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        f.bm.col(i) = full.col(basis[i]);
        cb[i] = cost[basis[i]];
    }
    f.lu.compute(f.bm);
    const Eigen::MatrixXd& lu = f.lu.matrixLU();
    const double floor = static_cast<double>(m) * std::numeric_limits<double>::epsilon() * lu.cwiseAbs().maxCoeff();
    if (!(lu.diagonal().cwiseAbs().minCoeff() > floor)) return false;
    f.xb = f.solve(b);
    f.y = f.solve_transposed(cb);
    // One step of iterative refinement for ill-conditioned degenerate bases.
    f.xb += f.solve(b - f.bm * f.xb);
    f.y += f.solve_transposed(cb - f.bm.transpose() * f.y);
    return f.xb.allFinite() && f.y.allFinite();
}

// Pivots over columns [0, enterable) until no reduced cost is negative.
inline Status run(const Eigen::MatrixXd& full, const Eigen::VectorXd& b, const Eigen::VectorXd& cost,
                  std::vector<int>& basis, Eigen::Index enterable, const Options& opt, int& pivots, Factor& f) {
    const Eigen::Index m = full.rows();
    std::vector<char> in_basis(full.cols(), 0);
    for (int bi : basis) in_basis[bi] = 1;
    Eigen::Index stalled = 0;
    for (;;) {
        if (!factor(full, b, cost, basis, f)) return Status::IterationLimit;
        const Eigen::VectorXd reduced = cost.head(enterable) - full.leftCols(enterable).transpose() * f.y;
        Eigen::Index enter = -1;
        for (Eigen::Index j = 0; j < enterable; ++j) {
            if (in_basis[j]) continue;
            if (reduced[j] < -opt.cost_tol * (1.0 + std::abs(cost[j]))) {
                enter = j;
                break;
            }
        }
        if (enter < 0) return Status::Optimal;

        const Eigen::VectorXd dir = f.solve(full.col(enter));
        const double dscale = 1.0 + dir.lpNorm<Eigen::Infinity>();
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < m; ++i) {
            if (dir[i] > opt.pivot_tol * dscale) best = std::min(best, std::max(0.0, f.xb[i]) / dir[i]);
        }
        if (!std::isfinite(best)) return Status::Unbounded;
        // Among tied rows take the largest pivot for conditioning; after a run
        // of degenerate pivots fall back to the lowest index, which cannot cycle.
        const bool bland = stalled > 2 * m;
        const double window = 1e-12 * (1.0 + best);
        Eigen::Index leave = -1;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (dir[i] <= opt.pivot_tol * dscale || std::max(0.0, f.xb[i]) / dir[i] > best + window) continue;
            if (leave < 0 || (bland ? basis[i] < basis[leave] : dir[i] > dir[leave])) leave = i;
        }
        stalled = best <= window ? stalled + 1 : 0;
        if (++pivots > opt.max_pivots) return Status::IterationLimit;
        in_basis[basis[leave]] = 0;
        in_basis[enter] = 1;
        basis[leave] = static_cast<int>(enter);
    }
}

// Degenerate pivots on an ill-conditioned basis can leave basic values
// slightly negative. The basis is dual feasible, so dual simplex steps remove
// that infeasibility without giving up optimality.
inline void restore_feasibility(const Eigen::MatrixXd& full, const Eigen::VectorXd& b, const Eigen::VectorXd& cost,
                                std::vector<int>& basis, Eigen::Index enterable, const Options& opt, Factor& f) {
    const Eigen::Index m = full.rows();
    const double tol = 1e-12 * (1.0 + b.lpNorm<Eigen::Infinity>());
    for (Eigen::Index step = 0; step < 4 * (m + enterable); ++step) {
        Eigen::Index leave = -1;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (f.xb[i] < -tol && (leave < 0 || f.xb[i] < f.xb[leave])) leave = i;
        }
        if (leave < 0) return;
        Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
        e[leave] = 1.0;
        const Eigen::VectorXd row = full.leftCols(enterable).transpose() * f.solve_transposed(e);
        const double rscale = 1.0 + row.lpNorm<Eigen::Infinity>();
        Eigen::Index enter = -1;
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < enterable; ++j) {
            if (row[j] >= -opt.pivot_tol * rscale) continue;
            if (std::find(basis.begin(), basis.end(), static_cast<int>(j)) != basis.end()) continue;
            const double ratio = std::max(0.0, cost[j] - full.col(j).dot(f.y)) / -row[j];
            if (enter < 0 || ratio < best - 1e-15 || (ratio <= best + 1e-15 && -row[j] > -row[enter])) {
                enter = j;
                best = std::min(best, ratio);
            }
        }
        if (enter < 0) return;
        std::vector<int> trial = basis;
        trial[leave] = static_cast<int>(enter);
        Factor g;
        if (!factor(full, b, cost, trial, g)) return;
        basis = std::move(trial);
        f = std::move(g);
    }
}

} // namespace detail

inline Solution solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                      const Options& opt = {}) {
    const Eigen::Index m = a.rows();
    const Eigen::Index nv = a.cols();

    // Rows are sign-adjusted so that b >= 0; the artificial block is the identity.
    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(m, nv + m);
    Eigen::VectorXd bs(m);
    std::vector<double> sign(m, 1.0);
    for (Eigen::Index i = 0; i < m; ++i) {
        if (b[i] < 0.0) sign[i] = -1.0;
        full.row(i).head(nv) = sign[i] * a.row(i);
        full(i, nv + i) = 1.0;
        bs[i] = sign[i] * b[i];
    }
    std::vector<int> basis(m);
    for (Eigen::Index i = 0; i < m; ++i) basis[i] = static_cast<int>(nv + i);

    Solution out;
    int pivots = 0;
    detail::Factor f;

    // Phase 1: minimize the sum of artificials.
    Eigen::VectorXd cost = Eigen::VectorXd::Zero(nv + m);
    cost.tail(m).setOnes();
    auto status = detail::run(full, bs, cost, basis, nv, opt, pivots, f);
    if (status == Status::IterationLimit) {
        out.status = status;
        return out;
    }
    double infeasibility = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (basis[i] >= nv) infeasibility += std::max(0.0, f.xb[i]);
    }
    if (infeasibility > opt.feasibility_tol * (1.0 + b.lpNorm<Eigen::Infinity>())) {
        out.status = Status::Infeasible;
        return out;
    }

    // Drive zero-valued artificials out of the basis where a structural column allows it.
    for (Eigen::Index i = 0; i < m; ++i) {
        if (basis[i] < nv) continue;
        Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
        e[i] = 1.0;
        const Eigen::VectorXd row = full.leftCols(nv).transpose() * f.solve_transposed(e);
        const double rscale = 1.0 + row.lpNorm<Eigen::Infinity>();
        for (Eigen::Index j = 0; j < nv; ++j) {
            if (std::find(basis.begin(), basis.end(), static_cast<int>(j)) != basis.end()) continue;
            if (std::abs(row[j]) > opt.pivot_tol * rscale) {
                basis[i] = static_cast<int>(j);
                break;
            }
        }
        if (!detail::factor(full, bs, cost, basis, f)) {
            out.status = Status::IterationLimit;
            return out;
        }
    }

    // Phase 2: original costs, artificials may not re-enter.
    cost.setZero();
    cost.head(nv) = c;
    status = detail::run(full, bs, cost, basis, nv, opt, pivots, f);
    out.status = status;
    if (status != Status::Optimal) return out;
    detail::restore_feasibility(full, bs, cost, basis, nv, opt, f);

    out.x = Eigen::VectorXd::Zero(nv);
    const double scale = 1.0 + f.xb.lpNorm<Eigen::Infinity>();
    for (Eigen::Index i = 0; i < m; ++i) {
        if (basis[i] < nv) {
            out.x[basis[i]] = std::max(0.0, f.xb[i]);
            if (f.xb[i] <= 1e-12 * scale) out.degenerate = true;
        } else {
            basis[i] = -1;
        }
    }
    out.duals.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) out.duals[i] = f.y[i] * sign[i];
    out.objective = c.dot(out.x);
    out.basis = std::move(basis);
    return out;
}

} // namespace gausscone::lp
