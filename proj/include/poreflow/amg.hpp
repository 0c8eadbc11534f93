#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "poreflow/csr.hpp"
#include "poreflow/pcg.hpp"

namespace poreflow {

/// Classical (Ruge-Stueben) algebraic multigrid.
///
/// Coarsening uses the first-pass C/F splitting driven by the strength-of-connection
/// threshold; interpolation is direct with separate scaling of negative and positive
/// couplings and optional truncation; coarse operators are Galerkin products R A P with
/// R = P^T. One application is a V-cycle with a forward Gauss-Seidel pre-sweep and a
/// backward post-sweep, which makes the preconditioner symmetric.
struct AmgOptions {
    double strength_threshold = 0.25;
    int max_levels = 25;
    std::size_t coarse_size = 64;
    double truncation = 0.2;    // relative interpolation truncation, 0 disables
    int max_interp_elements = 0;  // largest interpolation weights kept per row, 0 keeps all
    int coarse_sweeps = 8;      // symmetric GS sweeps if the last level is too large for a dense solve
};

class AmgHierarchy {
public:
    struct Level {
        CsrMatrix a;
        CsrMatrix p;  // interpolation from the next coarser level (empty on the last level)
        CsrMatrix r;  // p transposed
        std::vector<double> inv_diag;
    };

    /// Per-call scratch space. One workspace per concurrent user of a hierarchy.
    struct Workspace {
        std::vector<std::vector<double>> x, b, t;
    };

    AmgHierarchy() = default;

    /// Setup phase. Throws ContractViolation for an empty or non-square matrix.
    static AmgHierarchy build(const CsrMatrix& matrix, const AmgOptions& options = {});

    std::size_t num_levels() const noexcept { return levels_.size(); }
    const Level& level(std::size_t l) const { return levels_.at(l); }
    std::size_t size() const noexcept { return levels_.empty() ? 0 : levels_.front().a.rows(); }
    /// Sum of nnz over levels divided by fine-level nnz.
    double operator_complexity() const;
    bool coarse_direct() const noexcept { return !coarse_factor_.empty(); }

    Workspace make_workspace() const;
    /// z = M^{-1} r for one V-cycle.
    void apply(std::span<const double> r, std::span<double> z, Workspace& work) const;
    void apply(std::span<const double> r, std::span<double> z) const;

    /// Preconditioner callable that owns its workspace.
    LinearOperator as_operator() const;

private:
    void cycle(std::size_t l, Workspace& work) const;
    void coarse_solve(std::span<const double> b, std::span<double> x) const;
    void factor_coarse();

    std::vector<Level> levels_;
    AmgOptions options_{};
    // dense L D L^T of the coarsest operator; pivots below tolerance are pinned (zero inverse)
    std::vector<double> coarse_factor_;
    std::vector<double> coarse_inv_pivot_;
};

/// C/F splitting of the first Ruge-Stueben pass; true marks coarse points. Exposed for tests.
std::vector<char> ruge_stuben_splitting(const CsrMatrix& a, double strength_threshold);

}  // namespace poreflow
