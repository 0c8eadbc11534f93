#pragma once

#include <utility>
#include <vector>

#include "poreflow/voxel.hpp"

namespace poreflow {

/// Description of a synthetic validation geometry.
struct GeometrySpec {
    enum class Kind { sphere_array, channel, blocked_channel, layered, homogeneous };

    Kind kind = Kind::homogeneous;
    Dims dims{32, 32, 32};
    PhysicalScale scale{};
    Axis axis = Axis::z;  // channel direction or layering axis

    double diameter = 0.5;          // sphere_array, relative to the unit cube
    int width = 8;                  // channel / blocked_channel duct width in voxels
    std::uint8_t background = kSolid;  // channel / blocked_channel matrix
    std::uint8_t slab_porosity = 60;   // blocked_channel
    int slab_thickness = 4;            // blocked_channel, voxels along the channel axis
    std::vector<std::pair<int, std::uint8_t>> layers;  // layered: (thickness in voxels, porosity)
    std::uint8_t porosity = 0;         // homogeneous

    static GeometrySpec sphere_array(double diameter, int n);
    static GeometrySpec channel(int n, int width, Axis axis = Axis::z);
    static GeometrySpec blocked_channel(int n, int width, std::uint8_t slab_porosity, int slab_thickness,
                                        Axis axis = Axis::z);
    static GeometrySpec layered(int n, Axis axis, std::vector<std::pair<int, std::uint8_t>> layers);
    static GeometrySpec homogeneous(int n, std::uint8_t porosity);
};

std::string to_string(GeometrySpec::Kind kind);
GeometrySpec::Kind parse_geometry_kind(const std::string& text);

/// Deterministic voxelization. Throws DomainError for specs that do not fit the box.
///
/// sphere_array: one sphere centred in the box, solid where the voxel centre lies within D/2.
/// channel: square fluid duct along `axis`, centred in the cross-section.
/// blocked_channel: channel with a cross-sectional slab of `slab_porosity` at mid-length.
/// layered: constant-porosity slabs stacked along `axis`, thicknesses summing to the box size.
VoxelImage generate(const GeometrySpec& spec);

struct Table1Case {
    double diameter;
    int n;
    double k_hat;  // published dimensionless permeability
};

/// Periodic sphere-array reference values for N = 40, 80 and 160.
std::vector<Table1Case> table1_suite();

}  // namespace poreflow
