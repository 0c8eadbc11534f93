#include "poreflow/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "poreflow/csr.hpp"
#include "poreflow/errors.hpp"

namespace poreflow {

double SolverConfig::preconditioner_tolerance(Model model) const {
    if (rtol_Shat) return *rtol_Shat;
    // Shat equals S for Darcy; a tighter inner solve keeps the outer loop at one step
    return model == Model::darcy ? 1e-4 * rtol_S : rtol_S;
}

void SolverConfig::validate() const {
    auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
    if (!in_unit(rtol_S)) throw ConfigError("rtol_S must lie in (0, 1)");
    if (rtol_A && !in_unit(*rtol_A)) throw ConfigError("rtol_A must lie in (0, 1)");
    if (rtol_Shat && !in_unit(*rtol_Shat)) throw ConfigError("rtol_Shat must lie in (0, 1)");
    if (maxit_outer < 1 || maxit_inner < 1) throw ConfigError("iteration limits must be positive");
    if (k_stokes_mkda && !(*k_stokes_mkda > 0.0)) throw ConfigError("K_stokes must be positive");
    if (threads < 0) throw ConfigError("thread count must be non-negative");
}

SchurSystem::SchurSystem(std::shared_ptr<const OperatorSet> ops, const SolverConfig& config)
    : ops_(std::move(ops)), config_(config) {
    if (!ops_) throw ContractViolation("SchurSystem needs operators");
    diagonal_a_ = ops_->setup.model == Model::darcy;
    shat_ = assemble_schur_approximation(*ops_);
    shat_amg_ = AmgHierarchy::build(shat_, config_.amg);
    shat_work_ = shat_amg_.make_workspace();
    scratch_u_.resize(ops_->num_velocity());
    scratch_v_.resize(ops_->num_velocity());

    const StaggeredGrid& grid = ops_->grid;
    std::int32_t count = 0;
    component_ = pressure_components(grid, &count);
    floating_.assign(static_cast<std::size_t>(count), 1);
    component_size_.assign(static_cast<std::size_t>(count), 0.0);
    for (const auto c : component_) component_size_[static_cast<std::size_t>(c)] += 1.0;
    for (std::size_t f = 0; f < grid.num_faces(); ++f) {
        const auto lo = grid.lower_cell(f);
        const auto hi = grid.upper_cell(f);
        if (lo == StaggeredGrid::kNone) floating_[static_cast<std::size_t>(component_[static_cast<std::size_t>(hi)])] = 0;
        if (hi == StaggeredGrid::kNone) floating_[static_cast<std::size_t>(component_[static_cast<std::size_t>(lo)])] = 0;
    }
    has_null_space_ = std::any_of(floating_.begin(), floating_.end(), [](char c) { return c != 0; });
}

void SchurSystem::project(std::span<double> p) const {
    if (!has_null_space_) return;
    std::vector<double> sum(floating_.size(), 0.0);
    for (std::size_t c = 0; c < p.size(); ++c) sum[static_cast<std::size_t>(component_[c])] += p[c];
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] /= component_size_[k];
    for (std::size_t c = 0; c < p.size(); ++c) {
        const auto k = static_cast<std::size_t>(component_[c]);
        if (floating_[k]) p[c] -= sum[k];
    }
}

void SchurSystem::solve_A(std::span<const double> b, std::span<double> x) {
    const OperatorSet& op = *ops_;
    if (diagonal_a_) {
        for (std::size_t f = 0; f < b.size(); ++f) x[f] = b[f] / op.diag[f];
        return;
    }
    if (!a_ready_) {
        a_amg_ = AmgHierarchy::build(op.a, config_.amg);
        a_work_ = a_amg_.make_workspace();
        a_ready_ = true;
    }
    PcgOptions options;
    options.rtol = config_.inner_tolerance();
    options.max_iterations = config_.maxit_inner;
    vec::fill(x, 0.0);
    const auto stats = pcg([&](std::span<const double> in, std::span<double> out) { op.a.multiply(in, out); },
                           [&](std::span<const double> in, std::span<double> out) { a_amg_.apply(in, out, a_work_); }, b,
                           x, options);
    inner_iterations_ += stats.iterations;
    ++inner_solves_;
    if (!stats.converged)
        throw NonConvergenceError("velocity solve did not reach rtol_A in " + std::to_string(stats.iterations) + " iterations",
                                  stats.history);
}

void SchurSystem::schur_apply(std::span<const double> p, std::span<double> out) {
    apply_BT(*ops_, p, scratch_u_);
    solve_A(scratch_u_, scratch_v_);
    apply_B(*ops_, scratch_v_, out);
}

void SchurSystem::precondition(std::span<const double> r, std::span<double> z) {
    PcgOptions options;
    options.rtol = config_.preconditioner_tolerance(ops_->setup.model);
    options.max_iterations = config_.maxit_inner;
    if (has_null_space_) options.project = [this](std::span<double> v) { project(v); };
    vec::fill(z, 0.0);
    const auto stats = pcg([&](std::span<const double> in, std::span<double> out) { shat_.multiply(in, out); },
                           [&](std::span<const double> in, std::span<double> out) { shat_amg_.apply(in, out, shat_work_); },
                           r, z, options);
    inner_iterations_ += stats.iterations;
    ++inner_solves_;
    if (!stats.converged)
        throw NonConvergenceError("preconditioner solve did not reach rtol_Shat in " + std::to_string(stats.iterations) +
                                      " iterations",
                                  stats.history);
}

std::vector<double> schur_apply(const OperatorSet& ops, const SolverConfig& config, std::span<const double> p) {
    if (p.size() != ops.num_pressure()) throw ContractViolation("schur_apply: length mismatch");
    SchurSystem system(std::make_shared<const OperatorSet>(ops), config);
    std::vector<double> out(p.size());
    system.schur_apply(p, out);
    return out;
}

LinearOperator make_shat_preconditioner(std::shared_ptr<const OperatorSet> ops, const SolverConfig& config) {
    auto system = std::make_shared<SchurSystem>(std::move(ops), config);
    return [system](std::span<const double> in, std::span<double> out) { system->precondition(in, out); };
}

FlowSolution solve(const VoxelImage& image, const FlowSetup& setup, const SolverConfig& config) {
    config.validate();
    FlowSetup effective = setup;
    if (!effective.k_stokes_mkda) effective.k_stokes_mkda = config.k_stokes_mkda;
    if (effective.model == Model::stokes || effective.model == Model::stokes_brinkman) effective.k_stokes_mkda.reset();
    if (image.count_fluid() + image.count_porous() == 0) throw NonPercolatingError("image has no fluid or porous voxels");
    return solve(std::make_shared<const OperatorSet>(build_operators(image, effective)), config);
}

FlowSolution solve(std::shared_ptr<const OperatorSet> ops, const SolverConfig& config) {
    config.validate();
    if (!ops) throw ContractViolation("solve needs operators");
#ifdef _OPENMP
    if (config.threads > 0) omp_set_num_threads(config.threads);
#endif
    const auto start = std::chrono::steady_clock::now();
    FlowSolution sol;
    sol.ops = ops;
    sol.u.assign(ops->num_velocity(), 0.0);
    sol.p.assign(ops->num_pressure(), 0.0);
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

    // Pressure drop: solve for the deviation from the linear profile between p_in and p_out.
    // The discrete solution is the same, but the forcing becomes a uniform gradient, so the
    // relative residual measures the flow rather than the boundary values. Darcy needs no lift:
    // its preconditioner is exact and the outer loop takes a single step.
    std::vector<double> lift(ops->num_pressure(), 0.0);
    std::vector<double> rhs = ops->rhs;
    if (ops->setup.bc == BoundaryKind::pressure_drop && ops->setup.model != Model::darcy) {
        const StaggeredGrid& grid = ops->grid;
        const int d = static_cast<int>(grid.direction());
        const double n_d = grid.dims()[d];
        const double dp = ops->setup.p_in - ops->setup.p_out;
        for (std::size_t c = 0; c < lift.size(); ++c) {
            const int k = grid.dims().coords(grid.voxel_of_cell(c))[static_cast<std::size_t>(d)];
            lift[c] = ops->setup.p_in - dp * (k + 0.5) / n_d;
        }
        std::vector<double> grad(ops->num_velocity());
        apply_BT(*ops, lift, grad);
        for (std::size_t f = 0; f < rhs.size(); ++f) rhs[f] -= grad[f];
    }

    if (vec::norm2(rhs) == 0.0) {
        sol.p = lift;
        sol.outer.converged = true;
        sol.outer.history.push_back(0.0);
        sol.wall_time_s = elapsed();
        return sol;
    }

    SchurSystem system(ops, config);
    std::vector<double> tmp(ops->num_velocity());
    std::vector<double> g(ops->num_pressure());
    system.solve_A(rhs, tmp);
    apply_B(*ops, tmp, g);

    PcgOptions options;
    options.rtol = config.rtol_S;
    options.max_iterations = config.maxit_outer;
    options.variant = CgVariant::polak_ribiere;
    options.true_residual_interval = 10;
    options.drift_factor = 10.0;
    if (system.has_null_space()) options.project = [&system](std::span<double> v) { system.project(v); };
    sol.outer = pcg([&](std::span<const double> in, std::span<double> out) { system.schur_apply(in, out); },
                    [&](std::span<const double> in, std::span<double> out) { system.precondition(in, out); }, g, sol.p,
                    options);
    if (!sol.outer.converged)
        throw NonConvergenceError("outer Schur iteration did not reach rtol_S in " + std::to_string(sol.outer.iterations) +
                                      " iterations",
                                  sol.outer.history);

    apply_BT(*ops, sol.p, tmp);
    for (std::size_t f = 0; f < tmp.size(); ++f) tmp[f] = rhs[f] - tmp[f];
    system.solve_A(tmp, sol.u);
    for (std::size_t c = 0; c < lift.size(); ++c) sol.p[c] += lift[c];

    sol.inner_iterations = system.inner_iterations();
    sol.inner_solves = system.inner_solves();
    sol.wall_time_s = elapsed();
    return sol;
}

}  // namespace poreflow
