#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "poreflow/amg.hpp"
#include "poreflow/classify.hpp"
#include "poreflow/grid.hpp"
#include "poreflow/pcg.hpp"
#include "poreflow/voxel.hpp"

namespace poreflow {

inline constexpr double kDefaultKStokes = 1e7;  // mkDa

struct SolverConfig {
    double rtol_S = 1e-8;
    std::optional<double> rtol_A;     // default 1e-2 * rtol_S
    std::optional<double> rtol_Shat;  // default rtol_S (1e-4 * rtol_S for Darcy)
    int maxit_outer = 2000;
    int maxit_inner = 1000;
    std::optional<double> k_stokes_mkda;
    bool deterministic = true;
    int threads = 0;  // 0 keeps the OpenMP default
    AmgOptions amg{};

    double inner_tolerance() const { return rtol_A.value_or(1e-2 * rtol_S); }
    double preconditioner_tolerance(Model model) const;
    /// Throws ConfigError on out-of-range values.
    void validate() const;
};

struct FlowSolution {
    std::shared_ptr<const OperatorSet> ops;
    std::vector<double> u;  // face velocities, ordered as ops->grid
    std::vector<double> p;  // cell pressures
    SolveStats outer;
    long inner_iterations = 0;  // A solves plus preconditioner solves
    int inner_solves = 0;
    double wall_time_s = 0.0;

    Model model() const { return ops->setup.model; }
    BoundaryKind bc() const { return ops->setup.bc; }
    Axis direction() const { return ops->setup.direction; }
};

/// Inner solvers and matrix-free Schur operator for one OperatorSet.
/// Holds scratch space, so one instance must not be used from two threads at once.
class SchurSystem {
public:
    SchurSystem(std::shared_ptr<const OperatorSet> ops, const SolverConfig& config);
    SchurSystem(const SchurSystem&) = delete;
    SchurSystem& operator=(const SchurSystem&) = delete;

    const OperatorSet& ops() const noexcept { return *ops_; }

    /// x = A^{-1} b to rtol_A (exact division for Darcy).
    void solve_A(std::span<const double> b, std::span<double> x);
    /// out = B A^{-1} B^T p.
    void schur_apply(std::span<const double> p, std::span<double> out);
    /// z = Shat^{-1} r to rtol_Shat.
    void precondition(std::span<const double> r, std::span<double> z);
    /// Removes the mean pressure on every component without a Dirichlet boundary.
    void project(std::span<double> p) const;
    bool has_null_space() const noexcept { return has_null_space_; }

    const CsrMatrix& shat() const noexcept { return shat_; }
    long inner_iterations() const noexcept { return inner_iterations_; }
    int inner_solves() const noexcept { return inner_solves_; }

private:
    std::shared_ptr<const OperatorSet> ops_;
    SolverConfig config_;
    bool diagonal_a_ = false;
    bool a_ready_ = false;  // A hierarchy is built on first use
    AmgHierarchy a_amg_;
    AmgHierarchy::Workspace a_work_;
    CsrMatrix shat_;
    AmgHierarchy shat_amg_;
    AmgHierarchy::Workspace shat_work_;
    std::vector<std::int32_t> component_;
    std::vector<char> floating_;         // per component: no Dirichlet boundary, mean is removed
    std::vector<double> component_size_;
    bool has_null_space_ = false;
    std::vector<double> scratch_u_, scratch_v_;
    long inner_iterations_ = 0;
    int inner_solves_ = 0;
};

/// Linear operator p -> B A^{-1} B^T p for the given operators.
std::vector<double> schur_apply(const OperatorSet& ops, const SolverConfig& config, std::span<const double> p);

/// Operator p -> Shat^{-1} p with Shat = B D^{-1} B^T. The returned callable keeps its own state.
LinearOperator make_shat_preconditioner(std::shared_ptr<const OperatorSet> ops, const SolverConfig& config);

/// Two-stage solve: outer flexible PCG on S p = B A^{-1} f, then u = A^{-1}(f - B^T p).
/// The image must be preprocessed; NonPercolatingError if it has no active cells.
FlowSolution solve(const VoxelImage& image, const FlowSetup& setup, const SolverConfig& config);
FlowSolution solve(std::shared_ptr<const OperatorSet> ops, const SolverConfig& config);

}  // namespace poreflow
