#include "poreflow/pcg.hpp"

#include <algorithm>
#include <chrono>

#include "poreflow/csr.hpp"
#include "poreflow/errors.hpp"

namespace poreflow {

LinearOperator identity_operator() {
    return [](std::span<const double> in, std::span<double> out) { std::copy(in.begin(), in.end(), out.begin()); };
}

SolveStats pcg(const LinearOperator& op, const LinearOperator& precond, std::span<const double> b, std::span<double> x,
               const PcgOptions& options) {
    if (b.size() != x.size()) throw ContractViolation("pcg: rhs and solution lengths differ");
    if (!(options.rtol > 0.0)) throw ConfigError("pcg: rtol must be positive");

    const auto start = std::chrono::steady_clock::now();
    const std::size_t n = b.size();
    SolveStats stats;
    auto finish = [&] {
        stats.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return stats;
    };
    auto project = [&](std::span<double> v) {
        if (options.project) options.project(v);
    };

    std::vector<double> rhs(b.begin(), b.end());
    project(rhs);
    const double bnorm = vec::norm2(rhs);
    if (bnorm == 0.0) {
        vec::fill(x, 0.0);
        stats.converged = true;
        stats.history.push_back(0.0);
        return finish();
    }

    std::vector<double> r(n), z(n), z_old, p(n), q(n);
    if (options.variant == CgVariant::polak_ribiere) z_old.resize(n);

    auto true_residual = [&] {
        op(x, q);
        for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - q[i];
        project(r);
        return vec::norm2(r);
    };

    double rnorm = true_residual();
    stats.history.push_back(rnorm / bnorm);
    if (rnorm / bnorm <= options.rtol) {
        stats.converged = true;
        stats.relative_residual = rnorm / bnorm;
        return finish();
    }

    precond(r, z);
    project(z);
    std::copy(z.begin(), z.end(), p.begin());
    double rz = vec::dot(r, z);

    for (int it = 1; it <= options.max_iterations; ++it) {
        op(p, q);
        const double curvature = vec::dot(p, q);
        if (!(curvature > 0.0)) throw IndefiniteOperatorError(it, curvature);
        const double alpha = rz / curvature;
        vec::axpy(alpha, p, x);
        vec::axpy(-alpha, q, r);
        rnorm = vec::norm2(r);
        stats.iterations = it;

        bool restart = false;
        if (options.true_residual_interval > 0 && it % options.true_residual_interval == 0) {
            const double recurrence = rnorm;
            rnorm = true_residual();
            if (rnorm > options.drift_factor * recurrence) restart = true;
        }
        if (rnorm / bnorm <= options.rtol) {
            rnorm = true_residual();
            if (rnorm / bnorm <= options.rtol) {
                stats.history.push_back(rnorm / bnorm);
                stats.converged = true;
                break;
            }
            restart = true;
        }
        stats.history.push_back(rnorm / bnorm);

        if (options.variant == CgVariant::polak_ribiere) std::swap(z, z_old);
        precond(r, z);
        project(z);
        const double rz_new = vec::dot(r, z);
        if (restart) {
            ++stats.restarts;
            std::copy(z.begin(), z.end(), p.begin());
        } else {
            double beta = rz_new / rz;
            if (options.variant == CgVariant::polak_ribiere) {
                double rz_old = 0.0;
                for (std::size_t i = 0; i < n; ++i) rz_old += r[i] * z_old[i];
                beta = (rz_new - rz_old) / rz;
            }
            vec::xpby(z, beta, p);
        }
        rz = rz_new;
    }

    if (!stats.converged) rnorm = true_residual();
    stats.relative_residual = rnorm / bnorm;
    return finish();
}

}  // namespace poreflow
