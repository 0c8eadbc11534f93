#include <doctest.h>

#include <fstream>

#include "poreflow/errors.hpp"
#include "poreflow/post.hpp"
#include "poreflow/solver.hpp"
#include "poreflow/synth.hpp"
#include "support.hpp"

using namespace poreflow;

namespace {

// A solution object carrying a hand-made velocity field.
FlowSolution with_velocity(const VoxelImage& img, Model model, double uz_value) {
    FlowSetup setup;
    setup.model = model;
    if (model == Model::darcy) setup.k_stokes_mkda = kDefaultKStokes;
    FlowSolution sol;
    sol.ops = std::make_shared<const OperatorSet>(build_operators(img, setup));
    const auto& g = sol.ops->grid;
    sol.u.assign(g.num_faces(), 0.0);
    sol.p.assign(g.num_cells(), 0.0);
    for (std::size_t f = g.component_begin(2); f < g.component_end(2); ++f) sol.u[f] = uz_value;
    return sol;
}

}  // namespace

TEST_CASE("volume-averaged velocity") {
    const auto cube = VoxelImage(Dims{4, 4, 4}, kFluid);
    CHECK(darcy_velocity(with_velocity(cube, Model::stokes, 2.5)) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(darcy_velocity(with_velocity(cube, Model::stokes, 0.0)) == 0.0);
    // a 2x2 duct in a 4x4 section holds a quarter of the area
    const auto duct = generate(GeometrySpec::channel(4, 2));
    CHECK(darcy_velocity(with_velocity(duct, Model::stokes, 2.0)) == doctest::Approx(0.25 * 2.0).epsilon(1e-15));
    CHECK(outlet_flux_velocity(with_velocity(duct, Model::stokes, 2.0)) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("permeability record and unit conversions") {
    auto img = generate(GeometrySpec::homogeneous(8, 52));
    img.set_scale(PhysicalScale{2e-4});
    FlowSetup setup;
    setup.model = Model::darcy;
    const auto sol = solve(img, setup, SolverConfig{});
    const auto r = effective_permeability(sol, img.scale());
    CHECK(r.dp == 1.0);
    CHECK(r.direction == Axis::z);
    CHECK(r.k_m2 == doctest::Approx(r.k_hat * 4e-8).epsilon(1e-14));
    CHECK(r.k_mkda * kMicroDarcyToM2 == doctest::Approx(r.k_m2).epsilon(1e-12));
    // the porous correlation value comes back out
    CHECK(r.k_mkda == doctest::Approx(correlation_permeability(52)).epsilon(1e-10));
    CHECK(r.k_hat >= 0.0);
    CHECK(r.flux_velocity == doctest::Approx(r.darcy_velocity).epsilon(1e-10));

    const auto z = zero_permeability(Axis::y, 1.0);
    CHECK(z.k_hat == 0.0);
    CHECK(z.k_mkda == 0.0);
    CHECK(z.direction == Axis::y);
}

TEST_CASE("flux and volume averages agree on a converged flow") {
    auto img = generate(GeometrySpec::sphere_array(0.6, 12));
    FlowSetup setup;
    setup.model = Model::stokes;
    SolverConfig cfg;
    cfg.rtol_S = 1e-9;
    const auto r = effective_permeability(solve(img, setup, cfg), img.scale());
    CHECK(std::abs(r.flux_velocity / r.darcy_velocity - 1.0) <= 10.0 * cfg.rtol_S);

    setup.bc = BoundaryKind::periodic;
    const auto sol = solve(img, setup, cfg);
    const auto rp = effective_permeability(sol, img.scale());
    CHECK(std::abs(rp.flux_velocity / rp.darcy_velocity - 1.0) <= 10.0 * cfg.rtol_S);
    CHECK(rp.k_hat == doctest::Approx(rp.darcy_velocity));
    CHECK(divergence_norm(sol) <= 1e-2 * gradient_norm(sol));
}

TEST_CASE("degenerate pressure drop") {
    FlowSolution sol = with_velocity(VoxelImage(Dims{2, 2, 2}, kFluid), Model::stokes, 1.0);
    auto ops = std::make_shared<OperatorSet>(*sol.ops);
    ops->setup.p_in = ops->setup.p_out = 0.4;
    sol.ops = ops;
    CHECK_THROWS_AS(effective_permeability(sol, PhysicalScale{}), DegenerateInputError);
}

TEST_CASE("divergence of the zero field") {
    const auto sol = with_velocity(VoxelImage(Dims{3, 3, 3}, kFluid), Model::stokes, 0.0);
    CHECK(divergence_norm(sol) == 0.0);
    CHECK(gradient_norm(sol) == 0.0);
}

TEST_CASE("VTK export") {
    const auto dir = testing::temp_dir();
    SUBCASE("2x2x2 header and arrays") {
        const VoxelImage img(Dims{2, 2, 2}, kFluid);
        FlowSetup setup;
        setup.model = Model::stokes;
        const auto sol = solve(img, setup, SolverConfig{});
        const auto path = dir / "small.vtk";
        export_fields(sol, img, path);
        const auto header = read_vtk_header(path);
        CHECK(header.dims == Dims{2, 2, 2});
        REQUIRE(header.arrays.size() == 3);
        CHECK(header.arrays[0] == "pressure");
        CHECK(header.arrays[1] == "velocity");
        CHECK(header.arrays[2] == "porosity");
        std::ifstream in(path);
        std::string first;
        std::getline(in, first);
        CHECK(first == "# vtk DataFile Version 3.0");
    }
    SUBCASE("homogeneous Darcy velocity is constant") {
        auto img = generate(GeometrySpec::homogeneous(4, 50));
        FlowSetup setup;
        setup.model = Model::darcy;
        const auto sol = solve(img, setup, SolverConfig{});
        const auto path = dir / "darcy.vtk";
        export_fields(sol, img, path);
        std::ifstream in(path);
        std::string line;
        while (std::getline(in, line) && line.rfind("VECTORS", 0) != 0) {
        }
        double first_z = -1.0;
        for (int v = 0; v < 64; ++v) {
            double x = 0, y = 0, z = 0;
            in >> x >> y >> z;
            CHECK(std::abs(x) <= 1e-12 * std::abs(z));
            CHECK(std::abs(y) <= 1e-12 * std::abs(z));
            if (v == 0) first_z = z;
            CHECK(z == doctest::Approx(first_z).epsilon(1e-9));
        }
        CHECK(first_z > 0.0);
    }
    CHECK_THROWS_AS(read_vtk_header(dir / "absent.vtk"), Error);
}
