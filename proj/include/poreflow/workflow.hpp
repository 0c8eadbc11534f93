#pragma once

#include <optional>

#include "poreflow/classify.hpp"
#include "poreflow/post.hpp"
#include "poreflow/solver.hpp"

namespace poreflow {

struct ModelRun {
    FlowSolution solution;
    PermeabilityResult permeability;
};

struct WorkflowResult {
    ConnectivityReport report;
    Model model = Model::stokes_brinkman;
    std::optional<ModelRun> run;          // empty for non-percolating samples
    PermeabilityResult permeability;      // zero when nothing was solved
    std::optional<ModelRun> cross_check;  // Stokes-Brinkman run on a Category A sample, on request
};

/// Classify, pick the model from the category and solve.
/// Category B: Stokes on binary images, Stokes-Brinkman otherwise. Category A: Darcy with
/// K_stokes (default 1e7 mkDa). Non-percolating samples report zero permeability.
/// `setup.model` is ignored.
WorkflowResult auto_workflow(const VoxelImage& image, const FlowSetup& setup, const SolverConfig& config,
                             bool cross_check = false);

/// Preprocess and solve with the model given in `setup`. NonPercolatingError if the sample
/// does not percolate along the flow direction.
WorkflowResult forced_workflow(const VoxelImage& image, const FlowSetup& setup, const SolverConfig& config);

}  // namespace poreflow
