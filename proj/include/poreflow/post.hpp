#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "poreflow/solver.hpp"
#include "poreflow/voxel.hpp"

namespace poreflow {

struct PermeabilityResult {
    double k_hat = 0.0;          // dimensionless
    double k_m2 = 0.0;
    double k_mkda = 0.0;
    Axis direction = Axis::z;
    double darcy_velocity = 0.0;  // volume-averaged velocity along direction
    double flux_velocity = 0.0;   // outlet-plane flux divided by the plane area
    double dp = 0.0;              // p_in - p_out, or the body force under periodic conditions
};

/// Volume average of the flow-direction velocity over the whole sample, solid included.
double darcy_velocity(const FlowSolution& sol);
/// Flux through the outlet plane divided by the full cross-section.
double outlet_flux_velocity(const FlowSolution& sol);

/// Darcy-law permeability of a solved sample. DegenerateInputError on zero driving force.
PermeabilityResult effective_permeability(const FlowSolution& sol, const PhysicalScale& scale);

/// Zero-permeability record for samples that do not percolate.
PermeabilityResult zero_permeability(Axis direction, double dp);

/// ||B u||_2 over active cells.
double divergence_norm(const FlowSolution& sol);
/// ||B^T p||_2 over velocity unknowns.
double gradient_norm(const FlowSolution& sol);

/// Legacy VTK (ASCII, structured points) with pressure, cell-centred velocity and porosity.
void export_fields(const FlowSolution& sol, const VoxelImage& image, const std::filesystem::path& path);

struct VtkHeader {
    Dims dims;
    std::vector<std::string> arrays;  // names in file order
};
VtkHeader read_vtk_header(const std::filesystem::path& path);

}  // namespace poreflow
