#pragma once

#include <functional>
#include <span>
#include <vector>

namespace poreflow {

/// out = Op(in). Must not alias.
using LinearOperator = std::function<void(std::span<const double> in, std::span<double> out)>;

/// Projection applied in place (e.g. removal of a constant null-space component).
using Projector = std::function<void(std::span<double>)>;

LinearOperator identity_operator();

enum class CgVariant {
    fletcher_reeves,  // standard PCG
    polak_ribiere,    // flexible: tolerates a preconditioner that varies between iterations
};

struct PcgOptions {
    double rtol = 1e-8;
    int max_iterations = 1000;
    CgVariant variant = CgVariant::fletcher_reeves;
    /// Every `true_residual_interval` iterations the residual is recomputed from scratch and
    /// the recurrence is restarted if it drifted by more than `drift_factor`. 0 disables.
    int true_residual_interval = 0;
    double drift_factor = 10.0;
    Projector project;  // optional, applied to residuals and preconditioned residuals
};

struct SolveStats {
    int iterations = 0;
    double relative_residual = 0.0;  // unpreconditioned ||b - A x|| / ||b||, recomputed at exit
    double wall_time_s = 0.0;
    bool converged = false;
    int restarts = 0;
    std::vector<double> history;  // relative residual per iteration, entry 0 is the initial one
};

/// Preconditioned conjugate gradients. `x` holds the initial guess on entry.
/// Stops when ||b - A x||_2 / ||b||_2 <= rtol, confirmed with a freshly computed residual.
/// Throws IndefiniteOperatorError on non-positive curvature.
SolveStats pcg(const LinearOperator& op, const LinearOperator& precond, std::span<const double> b, std::span<double> x,
               const PcgOptions& options);

}  // namespace poreflow
