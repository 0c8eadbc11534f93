#include "poreflow/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "poreflow/errors.hpp"

namespace poreflow {

GeometrySpec GeometrySpec::sphere_array(double diameter, int n) {
    GeometrySpec spec;
    spec.kind = Kind::sphere_array;
    spec.dims = {n, n, n};
    spec.diameter = diameter;
    return spec;
}

GeometrySpec GeometrySpec::channel(int n, int width, Axis axis) {
    GeometrySpec spec;
    spec.kind = Kind::channel;
    spec.dims = {n, n, n};
    spec.width = width;
    spec.axis = axis;
    return spec;
}

GeometrySpec GeometrySpec::blocked_channel(int n, int width, std::uint8_t slab_porosity, int slab_thickness, Axis axis) {
    GeometrySpec spec = channel(n, width, axis);
    spec.kind = Kind::blocked_channel;
    spec.slab_porosity = slab_porosity;
    spec.slab_thickness = slab_thickness;
    return spec;
}

GeometrySpec GeometrySpec::layered(int n, Axis axis, std::vector<std::pair<int, std::uint8_t>> layers) {
    GeometrySpec spec;
    spec.kind = Kind::layered;
    spec.dims = {n, n, n};
    spec.axis = axis;
    spec.layers = std::move(layers);
    return spec;
}

GeometrySpec GeometrySpec::homogeneous(int n, std::uint8_t porosity) {
    GeometrySpec spec;
    spec.kind = Kind::homogeneous;
    spec.dims = {n, n, n};
    spec.porosity = porosity;
    return spec;
}

std::string to_string(GeometrySpec::Kind kind) {
    switch (kind) {
    case GeometrySpec::Kind::sphere_array: return "sphere_array";
    case GeometrySpec::Kind::channel: return "channel";
    case GeometrySpec::Kind::blocked_channel: return "blocked_channel";
    case GeometrySpec::Kind::layered: return "layered";
    case GeometrySpec::Kind::homogeneous: return "homogeneous";
    }
    return "?";
}

GeometrySpec::Kind parse_geometry_kind(const std::string& text) {
    for (auto kind : {GeometrySpec::Kind::sphere_array, GeometrySpec::Kind::channel, GeometrySpec::Kind::blocked_channel,
                      GeometrySpec::Kind::layered, GeometrySpec::Kind::homogeneous})
        if (text == to_string(kind)) return kind;
    throw ConfigError("unknown geometry '" + text + "'");
}

namespace {

void check_porosity(int phi, const char* what) {
    if (phi < 0 || phi > 100) throw DomainError(std::string(what) + " must lie in [0, 100]");
}

// transverse axes of `axis` in cyclic order
std::pair<int, int> transverse(Axis axis) {
    const int a = static_cast<int>(axis);
    return {(a + 1) % 3, (a + 2) % 3};
}

}  // namespace

VoxelImage generate(const GeometrySpec& spec) {
    const Dims& dims = spec.dims;
    if (dims.nx < 1 || dims.ny < 1 || dims.nz < 1) throw DomainError("box dimensions must be positive");
    std::vector<std::uint8_t> data(dims.count(), kFluid);
    const double n_max = dims.max();
    const int along = static_cast<int>(spec.axis);
    const auto [t1, t2] = transverse(spec.axis);

    auto fill = [&](auto&& value_at) {
        for (int k = 0; k < dims.nz; ++k)
            for (int j = 0; j < dims.ny; ++j)
                for (int i = 0; i < dims.nx; ++i) data[dims.index(i, j, k)] = value_at(std::array<int, 3>{i, j, k});
    };

    switch (spec.kind) {
    case GeometrySpec::Kind::sphere_array: {
        if (!(spec.diameter > 0.0 && spec.diameter <= 1.0)) throw DomainError("sphere diameter must lie in (0, 1]");
        const double r2 = 0.25 * spec.diameter * spec.diameter;
        fill([&](std::array<int, 3> c) {
            double d2 = 0.0;
            for (int a = 0; a < 3; ++a) {
                const double x = (c[static_cast<std::size_t>(a)] + 0.5) / n_max - 0.5 * dims[a] / n_max;
                d2 += x * x;
            }
            return d2 <= r2 ? kSolid : kFluid;
        });
        break;
    }
    case GeometrySpec::Kind::channel:
    case GeometrySpec::Kind::blocked_channel: {
        check_porosity(spec.background, "background porosity");
        check_porosity(spec.slab_porosity, "slab porosity");
        if (spec.width < 1 || spec.width > dims[t1] || spec.width > dims[t2])
            throw DomainError("channel width must lie in [1, cross-section size]");
        const bool blocked = spec.kind == GeometrySpec::Kind::blocked_channel;
        if (blocked && (spec.slab_thickness < 1 || spec.slab_thickness > dims[along]))
            throw DomainError("slab thickness must lie in [1, channel length]");
        const int lo1 = (dims[t1] - spec.width) / 2;
        const int lo2 = (dims[t2] - spec.width) / 2;
        const int slab_lo = (dims[along] - spec.slab_thickness) / 2;
        fill([&](std::array<int, 3> c) -> std::uint8_t {
            const int x1 = c[static_cast<std::size_t>(t1)] - lo1;
            const int x2 = c[static_cast<std::size_t>(t2)] - lo2;
            if (x1 < 0 || x1 >= spec.width || x2 < 0 || x2 >= spec.width) return spec.background;
            const int s = c[static_cast<std::size_t>(along)] - slab_lo;
            if (blocked && s >= 0 && s < spec.slab_thickness) return spec.slab_porosity;
            return kFluid;
        });
        break;
    }
    case GeometrySpec::Kind::layered: {
        int total = 0;
        std::vector<std::uint8_t> profile;
        for (const auto& [thickness, phi] : spec.layers) {
            if (thickness < 1) throw DomainError("layer thickness must be positive");
            check_porosity(phi, "layer porosity");
            total += thickness;
            profile.insert(profile.end(), static_cast<std::size_t>(thickness), phi);
        }
        if (total != dims[along]) throw DomainError("layer thicknesses must add up to the box size along the axis");
        fill([&](std::array<int, 3> c) { return profile[static_cast<std::size_t>(c[static_cast<std::size_t>(along)])]; });
        break;
    }
    case GeometrySpec::Kind::homogeneous:
        check_porosity(spec.porosity, "porosity");
        std::fill(data.begin(), data.end(), spec.porosity);
        break;
    }
    return VoxelImage(dims, std::move(data), spec.scale);
}

std::vector<Table1Case> table1_suite() {
    return {
        {0.1, 40, 9.74e-1}, {0.1, 80, 9.01e-1}, {0.1, 160, 9.02e-1},
        {0.2, 40, 3.77e-1}, {0.2, 80, 3.78e-1}, {0.2, 160, 3.80e-1},
        {0.4, 40, 1.21e-1}, {0.4, 80, 1.22e-1}, {0.4, 160, 1.23e-1},
        {0.6, 40, 4.44e-2}, {0.6, 80, 4.43e-2}, {0.6, 160, 4.43e-2},
        {0.8, 40, 1.29e-2}, {0.8, 80, 1.31e-2}, {0.8, 160, 1.31e-2},
        {1.0, 40, 2.48e-3}, {1.0, 80, 2.51e-3}, {1.0, 160, 2.51e-3},
    };
}

}  // namespace poreflow
