#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "poreflow/csr.hpp"
#include "poreflow/voxel.hpp"

namespace poreflow {

enum class Model { stokes, stokes_brinkman, brinkman, darcy };
enum class BoundaryKind { pressure_drop, periodic };

std::string to_string(Model model);
std::string to_string(BoundaryKind bc);
Model parse_model(const std::string& text);
BoundaryKind parse_boundary(const std::string& text);

/// Model and boundary description of one flow problem.
struct FlowSetup {
    Model model = Model::stokes_brinkman;
    BoundaryKind bc = BoundaryKind::pressure_drop;
    Axis direction = Axis::z;
    double p_in = 1.0;   // inlet pressure (pressure-drop BC)
    double p_out = 0.0;  // outlet pressure (pressure-drop BC)
    double body_force = 1.0;  // driving force along `direction` (periodic BC)
    std::optional<double> k_stokes_mkda;  // fictitious permeability of fluid voxels
};

/// MAC index maps: pressures at non-solid voxel centres, velocity components on faces.
///
/// Velocity unknowns are ordered by component (all x-faces, then y, then z). A face is an
/// unknown when both adjacent voxels are non-solid, or, for the pressure-drop condition, when
/// it lies on the inlet/outlet plane next to a non-solid voxel. The half control volume of
/// those boundary faces gives them weight 1/2; all other faces have weight 1.
class StaggeredGrid {
public:
    static constexpr std::int32_t kNone = -1;

    StaggeredGrid() = default;
    StaggeredGrid(const VoxelImage& image, BoundaryKind bc, Axis direction);

    const Dims& dims() const noexcept { return dims_; }
    double h() const noexcept { return h_; }
    BoundaryKind bc() const noexcept { return bc_; }
    Axis direction() const noexcept { return direction_; }

    std::size_t num_cells() const noexcept { return cell_voxel_.size(); }
    std::size_t num_faces() const noexcept { return face_axis_.size(); }

    /// Active cell index of a voxel or kNone for solid.
    std::int32_t cell_of_voxel(std::size_t voxel) const { return cell_index_[voxel]; }
    std::size_t voxel_of_cell(std::size_t cell) const { return cell_voxel_[cell]; }

    /// Faces normal to `axis` are indexed by (i, j, k) with the `axis` coordinate in [0, face_count(axis)).
    int face_count(int axis) const noexcept { return face_dims_[static_cast<std::size_t>(axis)][axis]; }
    const Dims& face_dims(int axis) const noexcept { return face_dims_[static_cast<std::size_t>(axis)]; }
    /// Unknown index of a face or kNone if the face is not an unknown.
    std::int32_t face_unknown(int axis, int i, int j, int k) const;

    int face_axis(std::size_t f) const { return face_axis_[f]; }
    std::array<int, 3> face_position(std::size_t f) const { return face_position_[f]; }
    /// Cell below/above the face along its axis; kNone marks a Dirichlet pressure ghost.
    std::int32_t lower_cell(std::size_t f) const { return face_lower_[f]; }
    std::int32_t upper_cell(std::size_t f) const { return face_upper_[f]; }
    /// Control-volume weight (1 or 1/2).
    double weight(std::size_t f) const { return face_weight_[f]; }
    std::size_t component_begin(int axis) const { return component_offset_[static_cast<std::size_t>(axis)]; }
    std::size_t component_end(int axis) const { return component_offset_[static_cast<std::size_t>(axis) + 1]; }

    /// Faces touching a cell (at most six).
    std::span<const std::int32_t> cell_faces(std::size_t cell) const {
        return {cell_faces_.data() + cell_faces_ptr_[cell], cell_faces_.data() + cell_faces_ptr_[cell + 1]};
    }

private:
    Dims dims_{};
    double h_ = 1.0;
    BoundaryKind bc_ = BoundaryKind::pressure_drop;
    Axis direction_ = Axis::z;

    std::vector<std::int32_t> cell_index_;
    std::vector<std::size_t> cell_voxel_;

    std::array<Dims, 3> face_dims_{};
    std::array<std::vector<std::int32_t>, 3> face_index_;
    std::array<std::size_t, 4> component_offset_{};

    std::vector<std::uint8_t> face_axis_;
    std::vector<std::array<int, 3>> face_position_;
    std::vector<std::int32_t> face_lower_;
    std::vector<std::int32_t> face_upper_;
    std::vector<double> face_weight_;

    std::vector<std::size_t> cell_faces_ptr_;
    std::vector<std::int32_t> cell_faces_;
};

/// Discrete block system [A B^T; B 0][u; p] = [f; 0] on a staggered grid.
struct OperatorSet {
    StaggeredGrid grid;
    FlowSetup setup;
    CsrMatrix a;                     // velocity operator
    std::vector<double> kinv;        // face inverse permeability (dimensionless, unweighted)
    std::vector<double> diag;        // D = diag(A)
    std::vector<double> rhs;         // f

    std::size_t num_velocity() const noexcept { return grid.num_faces(); }
    std::size_t num_pressure() const noexcept { return grid.num_cells(); }
};

/// Dimensionless inverse permeability L^2 / K of one voxel; 0 for fluid without K_stokes.
/// Solid voxels are a contract violation.
double voxel_inverse_permeability(VoxelClass voxel, const PhysicalScale& scale, std::optional<double> k_stokes_mkda);

/// Face value of the inverse permeability: arithmetic mean of the two neighbours.
double face_inverse_permeability(VoxelClass left, VoxelClass right, const PhysicalScale& scale,
                                 std::optional<double> k_stokes_mkda);

/// Per-voxel inverse permeability for a model (NaN on solid voxels). Throws ConfigError
/// when the model does not fit the image.
std::vector<double> cell_inverse_permeability(const VoxelImage& image, const FlowSetup& setup);

OperatorSet build_operators(const VoxelImage& image, const FlowSetup& setup);
/// Same, with a caller-supplied dimensionless inverse permeability per voxel.
OperatorSet build_operators(const VoxelImage& image, const FlowSetup& setup, std::span<const double> voxel_kinv);

void apply_A(const OperatorSet& op, std::span<const double> v, std::span<double> out);
/// Negative divergence: velocity -> pressure.
void apply_B(const OperatorSet& op, std::span<const double> v, std::span<double> out);
/// Gradient: pressure -> velocity. Exact transpose of apply_B.
void apply_BT(const OperatorSet& op, std::span<const double> p, std::span<double> out);

/// Assembled B D^{-1} B^T. Throws ContractViolation naming the face if some D entry is not positive.
CsrMatrix assemble_schur_approximation(const OperatorSet& op);

/// Connected components of active cells through velocity unknowns (dense labels).
std::vector<std::int32_t> pressure_components(const StaggeredGrid& grid, std::int32_t* count = nullptr);

}  // namespace poreflow
