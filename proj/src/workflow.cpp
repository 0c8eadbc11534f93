#include "poreflow/workflow.hpp"

#include "poreflow/errors.hpp"

namespace poreflow {

namespace {

ModelRun run_model(const VoxelImage& image, const FlowSetup& setup, const SolverConfig& config) {
    ModelRun run{solve(image, setup, config), {}};
    run.permeability = effective_permeability(run.solution, image.scale());
    return run;
}

double driving_force(const FlowSetup& setup) {
    return setup.bc == BoundaryKind::periodic ? setup.body_force : setup.p_in - setup.p_out;
}

}  // namespace

WorkflowResult auto_workflow(const VoxelImage& image, const FlowSetup& setup, const SolverConfig& config,
                             bool cross_check) {
    auto pre = preprocess(image, setup.direction);
    WorkflowResult result;
    result.report = pre.report;

    FlowSetup chosen = setup;
    switch (pre.report.category) {
    case Category::non_percolating:
        result.model = setup.model;
        result.permeability = zero_permeability(setup.direction, driving_force(setup));
        return result;
    case Category::b:
        chosen.model = pre.image.count_porous() == 0 ? Model::stokes : Model::stokes_brinkman;
        break;
    case Category::a:
        chosen.model = Model::darcy;
        if (!chosen.k_stokes_mkda) chosen.k_stokes_mkda = config.k_stokes_mkda.value_or(kDefaultKStokes);
        break;
    }
    result.model = chosen.model;
    result.run = run_model(pre.image, chosen, config);
    result.permeability = result.run->permeability;

    if (cross_check && pre.report.category == Category::a) {
        FlowSetup sb = setup;
        sb.model = Model::stokes_brinkman;
        result.cross_check = run_model(pre.image, sb, config);
    }
    return result;
}

WorkflowResult forced_workflow(const VoxelImage& image, const FlowSetup& setup, const SolverConfig& config) {
    auto pre = preprocess(image, setup.direction);
    if (pre.report.category == Category::non_percolating)
        throw NonPercolatingError("sample does not percolate along " + to_string(setup.direction));
    WorkflowResult result;
    result.report = pre.report;
    result.model = setup.model;
    result.run = run_model(pre.image, setup, config);
    result.permeability = result.run->permeability;
    return result;
}

}  // namespace poreflow
