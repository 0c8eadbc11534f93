#include "poreflow/post.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "poreflow/csr.hpp"
#include "poreflow/errors.hpp"

namespace poreflow {

namespace {

double cross_section(const Dims& dims, Axis direction) {
    return static_cast<double>(dims.count()) / static_cast<double>(dims[direction]);
}

}  // namespace

double darcy_velocity(const FlowSolution& sol) {
    const StaggeredGrid& grid = sol.ops->grid;
    const int d = static_cast<int>(grid.direction());
    double sum = 0.0;
    for (std::size_t f = grid.component_begin(d); f < grid.component_end(d); ++f) sum += grid.weight(f) * sol.u[f];
    return sum / static_cast<double>(grid.dims().count());
}

double outlet_flux_velocity(const FlowSolution& sol) {
    const StaggeredGrid& grid = sol.ops->grid;
    const int d = static_cast<int>(grid.direction());
    const bool periodic = grid.bc() == BoundaryKind::periodic;
    double sum = 0.0;
    for (std::size_t f = grid.component_begin(d); f < grid.component_end(d); ++f) {
        const bool outlet = periodic ? grid.face_position(f)[static_cast<std::size_t>(d)] == 0
                                     : grid.upper_cell(f) == StaggeredGrid::kNone;
        if (outlet) sum += sol.u[f];
    }
    return sum / cross_section(grid.dims(), grid.direction());
}

PermeabilityResult effective_permeability(const FlowSolution& sol, const PhysicalScale& scale) {
    const OperatorSet& op = *sol.ops;
    const StaggeredGrid& grid = op.grid;
    PermeabilityResult result;
    result.direction = grid.direction();
    result.darcy_velocity = darcy_velocity(sol);
    result.flux_velocity = outlet_flux_velocity(sol);
    if (grid.bc() == BoundaryKind::periodic) {
        result.dp = op.setup.body_force;
        if (result.dp == 0.0) throw DegenerateInputError("zero body force: permeability undefined");
        result.k_hat = result.darcy_velocity / result.dp;
    } else {
        result.dp = op.setup.p_in - op.setup.p_out;
        if (result.dp == 0.0) throw DegenerateInputError("zero pressure drop: permeability undefined");
        // the pressure drop acts over the box length along the flow direction
        const double length = grid.dims()[grid.direction()] * grid.h();
        result.k_hat = result.darcy_velocity * length / result.dp;
    }
    result.k_m2 = scale.to_m2(result.k_hat);
    result.k_mkda = scale.to_micro_darcy(result.k_hat);
    return result;
}

PermeabilityResult zero_permeability(Axis direction, double dp) {
    PermeabilityResult result;
    result.direction = direction;
    result.dp = dp;
    return result;
}

double divergence_norm(const FlowSolution& sol) {
    std::vector<double> div(sol.ops->num_pressure());
    apply_B(*sol.ops, sol.u, div);
    return vec::norm2(div);
}

double gradient_norm(const FlowSolution& sol) {
    std::vector<double> grad(sol.ops->num_velocity());
    apply_BT(*sol.ops, sol.p, grad);
    return vec::norm2(grad);
}

void export_fields(const FlowSolution& sol, const VoxelImage& image, const std::filesystem::path& path) {
    const StaggeredGrid& grid = sol.ops->grid;
    const Dims& dims = image.dims();
    if (!(dims == grid.dims())) throw ContractViolation("export_fields: image does not match the solution grid");
    const bool periodic = grid.bc() == BoundaryKind::periodic;

    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out.precision(10);
    const double h = grid.h();
    out << "# vtk DataFile Version 3.0\n"
        << "poreflow fields\n"
        << "ASCII\n"
        << "DATASET STRUCTURED_POINTS\n"
        << "DIMENSIONS " << dims.nx << ' ' << dims.ny << ' ' << dims.nz << '\n'
        << "ORIGIN " << 0.5 * h << ' ' << 0.5 * h << ' ' << 0.5 * h << '\n'
        << "SPACING " << h << ' ' << h << ' ' << h << '\n'
        << "POINT_DATA " << dims.count() << '\n';

    out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
    for (std::size_t v = 0; v < image.size(); ++v) {
        const auto c = grid.cell_of_voxel(v);
        out << (c == StaggeredGrid::kNone ? 0.0 : sol.p[static_cast<std::size_t>(c)]) << '\n';
    }

    auto face_value = [&](int axis, std::array<int, 3> pos) {
        const int extent = grid.face_count(axis);
        auto& q = pos[static_cast<std::size_t>(axis)];
        if (periodic) q %= extent;
        if (q < 0 || q >= extent) return 0.0;
        const auto f = grid.face_unknown(axis, pos[0], pos[1], pos[2]);
        return f == StaggeredGrid::kNone ? 0.0 : sol.u[static_cast<std::size_t>(f)];
    };
    out << "VECTORS velocity double\n";
    for (int k = 0; k < dims.nz; ++k) {
        for (int j = 0; j < dims.ny; ++j) {
            for (int i = 0; i < dims.nx; ++i) {
                for (int a = 0; a < 3; ++a) {
                    std::array<int, 3> lo{i, j, k};
                    auto hi = lo;
                    ++hi[static_cast<std::size_t>(a)];
                    out << 0.5 * (face_value(a, lo) + face_value(a, hi)) << (a < 2 ? ' ' : '\n');
                }
            }
        }
    }

    out << "SCALARS porosity int 1\nLOOKUP_TABLE default\n";
    for (const auto phi : image.porosity()) out << static_cast<int>(phi) << '\n';
    if (!out) throw Error("failed writing " + path.string());
}

VtkHeader read_vtk_header(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    VtkHeader header;
    std::string line;
    bool have_dims = false;
    while (std::getline(in, line)) {
        std::istringstream words(line);
        std::string key;
        words >> key;
        if (key == "DIMENSIONS") {
            if (!(words >> header.dims.nx >> header.dims.ny >> header.dims.nz)) throw Error("malformed DIMENSIONS line");
            have_dims = true;
        } else if (key == "SCALARS" || key == "VECTORS") {
            std::string name;
            words >> name;
            header.arrays.push_back(name);
        }
    }
    if (!have_dims) throw Error(path.string() + " has no DIMENSIONS line");
    return header;
}

}  // namespace poreflow
