#include "poreflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "poreflow/classify.hpp"
#include "poreflow/errors.hpp"

namespace poreflow {

std::string to_string(Model model) {
    switch (model) {
    case Model::stokes: return "stokes";
    case Model::stokes_brinkman: return "stokes_brinkman";
    case Model::brinkman: return "brinkman";
    case Model::darcy: return "darcy";
    }
    return "?";
}

std::string to_string(BoundaryKind bc) { return bc == BoundaryKind::periodic ? "periodic" : "pressure_drop"; }

Model parse_model(const std::string& text) {
    if (text == "stokes") return Model::stokes;
    if (text == "stokes-brinkman" || text == "stokes_brinkman") return Model::stokes_brinkman;
    if (text == "brinkman") return Model::brinkman;
    if (text == "darcy") return Model::darcy;
    throw ConfigError("unknown model '" + text + "'");
}

BoundaryKind parse_boundary(const std::string& text) {
    if (text == "pressure-drop" || text == "pressure_drop") return BoundaryKind::pressure_drop;
    if (text == "periodic") return BoundaryKind::periodic;
    throw ConfigError("unknown boundary condition '" + text + "'");
}

StaggeredGrid::StaggeredGrid(const VoxelImage& image, BoundaryKind bc, Axis direction)
    : dims_(image.dims()), h_(image.mesh_step()), bc_(bc), direction_(direction) {
    const bool periodic = bc == BoundaryKind::periodic;
    if (periodic && (dims_.nx < 2 || dims_.ny < 2 || dims_.nz < 2))
        throw ConfigError("periodic boundary conditions need at least 2 voxels per axis");

    cell_index_.assign(image.size(), kNone);
    for (std::size_t v = 0; v < image.size(); ++v) {
        if (image.is_solid(v)) continue;
        cell_index_[v] = static_cast<std::int32_t>(cell_voxel_.size());
        cell_voxel_.push_back(v);
    }

    const int flow = static_cast<int>(direction);
    for (int a = 0; a < 3; ++a) {
        const int n_a = dims_[a];
        Dims fd = dims_;
        (a == 0 ? fd.nx : a == 1 ? fd.ny : fd.nz) = periodic ? n_a : n_a + 1;
        face_dims_[static_cast<std::size_t>(a)] = fd;
        auto& index = face_index_[static_cast<std::size_t>(a)];
        index.assign(fd.count(), kNone);
        component_offset_[static_cast<std::size_t>(a)] = face_axis_.size();

        for (int k = 0; k < fd.nz; ++k) {
            for (int j = 0; j < fd.ny; ++j) {
                for (int i = 0; i < fd.nx; ++i) {
                    std::array<int, 3> pos{i, j, k};
                    const int p = pos[static_cast<std::size_t>(a)];
                    auto lo = pos;
                    auto hi = pos;
                    lo[static_cast<std::size_t>(a)] = periodic ? (p - 1 + n_a) % n_a : p - 1;
                    auto cell_at = [&](const std::array<int, 3>& c) -> std::int32_t {
                        if (c[static_cast<std::size_t>(a)] < 0 || c[static_cast<std::size_t>(a)] >= n_a) return kNone;
                        return cell_index_[dims_.index(c[0], c[1], c[2])];
                    };
                    const bool on_boundary = !periodic && (p == 0 || p == n_a);
                    std::int32_t lo_cell = cell_at(lo);
                    std::int32_t hi_cell = cell_at(hi);
                    double weight = 1.0;
                    if (on_boundary) {
                        // tangential walls carry no unknowns; inlet/outlet faces border a ghost pressure
                        if (a != flow) continue;
                        if ((p == 0 ? hi_cell : lo_cell) == kNone) continue;
                        weight = 0.5;
                    } else if (lo_cell == kNone || hi_cell == kNone) {
                        continue;
                    }
                    index[fd.index(i, j, k)] = static_cast<std::int32_t>(face_axis_.size());
                    face_axis_.push_back(static_cast<std::uint8_t>(a));
                    face_position_.push_back(pos);
                    face_lower_.push_back(lo_cell);
                    face_upper_.push_back(hi_cell);
                    face_weight_.push_back(weight);
                }
            }
        }
    }
    component_offset_[3] = face_axis_.size();
    if (face_axis_.size() > static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max()))
        throw ConfigError("too many velocity unknowns for 32-bit indices");

    cell_faces_ptr_.assign(num_cells() + 1, 0);
    for (std::size_t f = 0; f < num_faces(); ++f) {
        if (face_lower_[f] != kNone) ++cell_faces_ptr_[static_cast<std::size_t>(face_lower_[f]) + 1];
        if (face_upper_[f] != kNone) ++cell_faces_ptr_[static_cast<std::size_t>(face_upper_[f]) + 1];
    }
    for (std::size_t c = 0; c < num_cells(); ++c) cell_faces_ptr_[c + 1] += cell_faces_ptr_[c];
    cell_faces_.resize(cell_faces_ptr_.back());
    std::vector<std::size_t> next(cell_faces_ptr_.begin(), cell_faces_ptr_.end() - 1);
    for (std::size_t f = 0; f < num_faces(); ++f) {
        if (face_lower_[f] != kNone) cell_faces_[next[static_cast<std::size_t>(face_lower_[f])]++] = static_cast<std::int32_t>(f);
        if (face_upper_[f] != kNone) cell_faces_[next[static_cast<std::size_t>(face_upper_[f])]++] = static_cast<std::int32_t>(f);
    }
}

std::int32_t StaggeredGrid::face_unknown(int axis, int i, int j, int k) const {
    return face_index_[static_cast<std::size_t>(axis)][face_dims_[static_cast<std::size_t>(axis)].index(i, j, k)];
}

double voxel_inverse_permeability(VoxelClass voxel, const PhysicalScale& scale, std::optional<double> k_stokes_mkda) {
    const double l2 = scale.length_m * scale.length_m;
    switch (voxel.kind) {
    case VoxelClass::Kind::solid: throw ContractViolation("solid voxels have no inverse permeability");
    case VoxelClass::Kind::fluid:
        if (!k_stokes_mkda) return 0.0;
        if (!(*k_stokes_mkda > 0.0)) throw ConfigError("K_stokes must be positive");
        return l2 / (*k_stokes_mkda * kMicroDarcyToM2);
    case VoxelClass::Kind::porous: return l2 / (correlation_permeability(voxel.porosity) * kMicroDarcyToM2);
    }
    return 0.0;
}

double face_inverse_permeability(VoxelClass left, VoxelClass right, const PhysicalScale& scale,
                                 std::optional<double> k_stokes_mkda) {
    if (left.is_solid() || right.is_solid()) throw ContractViolation("face inverse permeability requested on a solid face");
    return 0.5 * (voxel_inverse_permeability(left, scale, k_stokes_mkda) +
                  voxel_inverse_permeability(right, scale, k_stokes_mkda));
}

std::vector<double> cell_inverse_permeability(const VoxelImage& image, const FlowSetup& setup) {
    const bool has_fluid = image.count_fluid() > 0;
    const bool has_porous = image.count_porous() > 0;
    std::optional<double> k_stokes;
    switch (setup.model) {
    case Model::stokes:
        if (has_porous) throw ConfigError("the Stokes model needs a binary image (porous voxels present)");
        break;
    case Model::stokes_brinkman: break;
    case Model::brinkman:
    case Model::darcy:
        if (has_fluid && !setup.k_stokes_mkda)
            throw ConfigError("the " + to_string(setup.model) + " model needs K_stokes for fluid voxels");
        k_stokes = setup.k_stokes_mkda;
        break;
    }

    std::array<double, 101> table{};
    for (int phi = 0; phi < 100; ++phi)
        table[static_cast<std::size_t>(phi)] =
            voxel_inverse_permeability(VoxelClass::from_porosity(phi), image.scale(), phi == 0 ? k_stokes : std::nullopt);
    table[100] = std::numeric_limits<double>::quiet_NaN();

    std::vector<double> kinv(image.size());
    const auto values = image.porosity();
    for (std::size_t v = 0; v < kinv.size(); ++v) kinv[v] = table[values[v]];
    return kinv;
}

OperatorSet build_operators(const VoxelImage& image, const FlowSetup& setup) {
    const auto kinv = cell_inverse_permeability(image, setup);
    return build_operators(image, setup, kinv);
}

OperatorSet build_operators(const VoxelImage& image, const FlowSetup& setup, std::span<const double> voxel_kinv) {
    if (voxel_kinv.size() != image.size()) throw ContractViolation("inverse permeability field has the wrong length");

    OperatorSet op;
    op.setup = setup;
    op.grid = StaggeredGrid(image, setup.bc, setup.direction);
    const StaggeredGrid& grid = op.grid;
    if (grid.num_cells() == 0) throw ConfigError("image has no fluid or porous voxels");

    const std::size_t nu = grid.num_faces();
    const double h = grid.h();
    const double inv_h2 = 1.0 / (h * h);
    const bool periodic = setup.bc == BoundaryKind::periodic;
    const int flow = static_cast<int>(setup.direction);
    const bool viscous = setup.model != Model::darcy;
    const bool drag = setup.model != Model::stokes;

    op.kinv.assign(nu, 0.0);
    bool any_drag = false;
    for (std::size_t f = 0; f < nu; ++f) {
        const auto lo = grid.lower_cell(f);
        const auto hi = grid.upper_cell(f);
        const double k_lo = lo != StaggeredGrid::kNone ? voxel_kinv[grid.voxel_of_cell(static_cast<std::size_t>(lo))] : 0.0;
        const double k_hi = hi != StaggeredGrid::kNone ? voxel_kinv[grid.voxel_of_cell(static_cast<std::size_t>(hi))] : 0.0;
        // boundary faces see a single voxel
        const double value = lo == StaggeredGrid::kNone ? k_hi : (hi == StaggeredGrid::kNone ? k_lo : 0.5 * (k_lo + k_hi));
        if (!(value >= 0.0) || !std::isfinite(value))
            throw ConfigError("inverse permeability must be finite and non-negative");
        op.kinv[f] = drag ? value : 0.0;
        any_drag = any_drag || (drag && value > 0.0);
    }
    if (setup.model == Model::darcy) {
        for (std::size_t f = 0; f < nu; ++f)
            if (!(op.kinv[f] > 0.0)) throw ConfigError("the Darcy model needs a positive inverse permeability on every face");
    }
    if (periodic && viscous && !any_drag && image.count_solid() == 0)
        throw ConfigError("periodic Stokes flow without walls or drag is singular");

    std::vector<std::size_t> row_ptr(nu + 1, 0);
    std::vector<std::int32_t> col;
    std::vector<double> val;
    col.reserve(nu * (viscous ? 7 : 1));
    val.reserve(nu * (viscous ? 7 : 1));
    std::vector<std::pair<std::int32_t, double>> row;

    for (std::size_t f = 0; f < nu; ++f) {
        const int a = grid.face_axis(f);
        const auto pos = grid.face_position(f);
        const double w = grid.weight(f);
        double diag = w * op.kinv[f];
        row.clear();

        if (viscous) {
            for (int b = 0; b < 3; ++b) {
                const int extent = grid.face_dims(a)[b];
                for (const int step : {-1, 1}) {
                    auto nb = pos;
                    int q = pos[static_cast<std::size_t>(b)] + step;
                    if (periodic) {
                        q = (q + extent) % extent;
                    } else if (q < 0 || q >= extent) {
                        // outside the box: inlet/outlet planes are Neumann, other sides are no-slip walls
                        if (b != flow) diag += 2.0 * w * inv_h2;
                        continue;
                    }
                    nb[static_cast<std::size_t>(b)] = q;
                    const auto g = grid.face_unknown(a, nb[0], nb[1], nb[2]);
                    if (b == a) {
                        // neighbour across a cell: either an unknown or a no-slip face at distance h
                        diag += inv_h2;
                        if (g != StaggeredGrid::kNone) row.emplace_back(g, -inv_h2);
                    } else if (g != StaggeredGrid::kNone) {
                        diag += w * inv_h2;
                        row.emplace_back(g, -w * inv_h2);
                    } else {
                        // Inactive neighbour. If it lies inside a wall (solid on both sides) the wall is
                        // half a cell away and the ghost value is -u; otherwise it is a no-slip node at
                        // distance h.
                        int solid = 0, present = 0;
                        for (const int off : {-1, 0}) {
                            auto c = nb;
                            int& ca = c[static_cast<std::size_t>(a)];
                            ca += off;
                            const int n_a = grid.dims()[a];
                            if (periodic) ca = (ca + n_a) % n_a;
                            if (ca < 0 || ca >= n_a) continue;
                            ++present;
                            if (grid.cell_of_voxel(grid.dims().index(c[0], c[1], c[2])) == StaggeredGrid::kNone) ++solid;
                        }
                        diag += (solid == present ? 2.0 : 1.0) * w * inv_h2;
                    }
                }
            }
        }
        row.emplace_back(static_cast<std::int32_t>(f), diag);
        std::sort(row.begin(), row.end());
        for (std::size_t e = 0; e < row.size();) {
            double sum = 0.0;
            std::size_t e2 = e;
            for (; e2 < row.size() && row[e2].first == row[e].first; ++e2) sum += row[e2].second;
            col.push_back(row[e].first);
            val.push_back(sum);
            e = e2;
        }
        row_ptr[f + 1] = col.size();
    }
    op.a = CsrMatrix(nu, nu, std::move(row_ptr), std::move(col), std::move(val));
    op.diag = op.a.diagonal();

    op.rhs.assign(nu, 0.0);
    for (std::size_t f = 0; f < nu; ++f) {
        if (periodic) {
            if (grid.face_axis(f) == flow) op.rhs[f] = grid.weight(f) * setup.body_force;
        } else {
            if (grid.lower_cell(f) == StaggeredGrid::kNone) op.rhs[f] += setup.p_in / h;
            if (grid.upper_cell(f) == StaggeredGrid::kNone) op.rhs[f] -= setup.p_out / h;
        }
    }
    return op;
}

void apply_A(const OperatorSet& op, std::span<const double> v, std::span<double> out) {
    if (v.size() != op.num_velocity() || out.size() != op.num_velocity()) throw ContractViolation("apply_A: length mismatch");
    op.a.multiply(v, out);
}

void apply_B(const OperatorSet& op, std::span<const double> v, std::span<double> out) {
    const StaggeredGrid& grid = op.grid;
    if (v.size() != grid.num_faces() || out.size() != grid.num_cells()) throw ContractViolation("apply_B: length mismatch");
    const double inv_h = 1.0 / grid.h();
    const auto nc = static_cast<std::ptrdiff_t>(grid.num_cells());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < nc; ++c) {
        double sum = 0.0;
        for (const auto f : grid.cell_faces(static_cast<std::size_t>(c))) {
            const auto fi = static_cast<std::size_t>(f);
            sum += grid.lower_cell(fi) == c ? -v[fi] : v[fi];
        }
        out[static_cast<std::size_t>(c)] = sum * inv_h;
    }
}

void apply_BT(const OperatorSet& op, std::span<const double> p, std::span<double> out) {
    const StaggeredGrid& grid = op.grid;
    if (p.size() != grid.num_cells() || out.size() != grid.num_faces()) throw ContractViolation("apply_BT: length mismatch");
    const double inv_h = 1.0 / grid.h();
    const auto nf = static_cast<std::ptrdiff_t>(grid.num_faces());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t f = 0; f < nf; ++f) {
        const auto lo = grid.lower_cell(static_cast<std::size_t>(f));
        const auto hi = grid.upper_cell(static_cast<std::size_t>(f));
        const double p_hi = hi != StaggeredGrid::kNone ? p[static_cast<std::size_t>(hi)] : 0.0;
        const double p_lo = lo != StaggeredGrid::kNone ? p[static_cast<std::size_t>(lo)] : 0.0;
        out[static_cast<std::size_t>(f)] = (p_hi - p_lo) * inv_h;
    }
}

CsrMatrix assemble_schur_approximation(const OperatorSet& op) {
    const StaggeredGrid& grid = op.grid;
    const double inv_h2 = 1.0 / (grid.h() * grid.h());
    for (std::size_t f = 0; f < grid.num_faces(); ++f) {
        if (!(op.diag[f] > 0.0)) {
            const auto pos = grid.face_position(f);
            throw ContractViolation("zero diagonal of A at velocity unknown " + std::to_string(f) + " (axis " +
                                    to_string(static_cast<Axis>(grid.face_axis(f))) + ", face " + std::to_string(pos[0]) +
                                    "," + std::to_string(pos[1]) + "," + std::to_string(pos[2]) + ")");
        }
    }

    const std::size_t nc = grid.num_cells();
    std::vector<std::size_t> row_ptr(nc + 1, 0);
    std::vector<std::int32_t> col;
    std::vector<double> val;
    col.reserve(nc * 7);
    val.reserve(nc * 7);
    std::vector<std::pair<std::int32_t, double>> row;
    for (std::size_t c = 0; c < nc; ++c) {
        row.clear();
        double diag = 0.0;
        for (const auto f : grid.cell_faces(c)) {
            const auto fi = static_cast<std::size_t>(f);
            const double coef = inv_h2 / op.diag[fi];
            diag += coef;
            const auto lo = grid.lower_cell(fi);
            const auto other = lo == static_cast<std::int32_t>(c) ? grid.upper_cell(fi) : lo;
            if (other != StaggeredGrid::kNone) row.emplace_back(other, -coef);
        }
        row.emplace_back(static_cast<std::int32_t>(c), diag);
        std::sort(row.begin(), row.end());
        for (std::size_t e = 0; e < row.size();) {
            double sum = 0.0;
            std::size_t e2 = e;
            for (; e2 < row.size() && row[e2].first == row[e].first; ++e2) sum += row[e2].second;
            col.push_back(row[e].first);
            val.push_back(sum);
            e = e2;
        }
        row_ptr[c + 1] = col.size();
    }
    return CsrMatrix(nc, nc, std::move(row_ptr), std::move(col), std::move(val));
}

std::vector<std::int32_t> pressure_components(const StaggeredGrid& grid, std::int32_t* count) {
    DisjointSet sets(grid.num_cells());
    for (std::size_t f = 0; f < grid.num_faces(); ++f) {
        const auto lo = grid.lower_cell(f);
        const auto hi = grid.upper_cell(f);
        if (lo != StaggeredGrid::kNone && hi != StaggeredGrid::kNone)
            sets.unite(static_cast<std::size_t>(lo), static_cast<std::size_t>(hi));
    }
    std::vector<std::int32_t> labels(grid.num_cells(), -1);
    std::vector<std::int32_t> root_label(grid.num_cells(), -1);
    std::int32_t n = 0;
    for (std::size_t c = 0; c < grid.num_cells(); ++c) {
        const auto root = sets.find(c);
        if (root_label[root] < 0) root_label[root] = n++;
        labels[c] = root_label[root];
    }
    if (count) *count = n;
    return labels;
}

}  // namespace poreflow
