#pragma once

#include <cstdio>
#include <optional>
#include <string>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

#include "qcbr/errors.hpp"

namespace qcbr
{

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Conjugate-gradient settings. When `max_iterations` is unset each caller
/// applies its own default cap (a multiple of the vertex count).
struct SolverConfig {
    double tolerance = 1e-12;
    std::optional<long> max_iterations;
};

struct SolveStats {
    long iterations = 0;
    double relative_residual = 0.0;
};

/// Jacobi-preconditioned CG on a symmetric positive definite system,
/// started from `guess` when given.
inline Eigen::VectorXd solve_spd(const SparseMatrix& a, const Eigen::VectorXd& b, const SolverConfig& config,
                                 long default_cap, SolveStats* stats = nullptr, const Eigen::VectorXd* guess = nullptr)
{
    if (a.rows() == 0) return Eigen::VectorXd();
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
    cg.setTolerance(config.tolerance);
    cg.setMaxIterations(config.max_iterations.value_or(default_cap));
    cg.compute(a);
    if (cg.info() != Eigen::Success) throw SolverError("CG setup failed (matrix not SPD?)");
    if (guess && guess->size() != b.size()) throw ValidationError("initial guess has the wrong length");
    Eigen::VectorXd x = guess ? Eigen::VectorXd(cg.solveWithGuess(b, *guess)) : Eigen::VectorXd(cg.solve(b));
    const double bnorm = b.norm();
    const double residual = bnorm > 0 ? (a * x - b).norm() / bnorm : (a * x).norm();
    if (stats) {
        stats->iterations = cg.iterations();
        stats->relative_residual = residual;
    }
    if (cg.info() != Eigen::Success || !x.allFinite()) {
        char msg[128];
        std::snprintf(msg, sizeof msg, "CG did not converge: %ld iterations, relative residual %.3g (tolerance %.3g)",
                      static_cast<long>(cg.iterations()), residual, config.tolerance);
        throw SolverError(msg);
    }
    return x;
}

}  // namespace qcbr
