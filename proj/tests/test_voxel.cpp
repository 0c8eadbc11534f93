#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>

#include "poreflow/errors.hpp"
#include "poreflow/synth.hpp"
#include "poreflow/voxel.hpp"
#include "support.hpp"

using namespace poreflow;

namespace {

std::filesystem::path write_bytes(const std::string& name, const std::vector<std::uint8_t>& bytes) {
    const auto path = testing::temp_dir() / name;
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    return path;
}

}  // namespace

TEST_CASE("voxel class follows porosity") {
    CHECK(VoxelClass::from_porosity(0).is_fluid());
    CHECK(VoxelClass::from_porosity(100).is_solid());
    const auto p = VoxelClass::from_porosity(37);
    CHECK(p.is_porous());
    CHECK(p.porosity == 37);
    CHECK_THROWS_AS(VoxelClass::from_porosity(101), DomainError);
    CHECK_THROWS_AS(VoxelClass::from_porosity(-1), DomainError);
}

TEST_CASE("image construction validates input") {
    CHECK_THROWS_AS(VoxelImage(Dims{2, 2, 2}, std::vector<std::uint8_t>(7, 0)), DimensionError);
    CHECK_THROWS_AS(VoxelImage(Dims{0, 2, 2}, std::vector<std::uint8_t>{}), DimensionError);
    CHECK_THROWS_AS(VoxelImage(Dims{1, 1, 2}, std::vector<std::uint8_t>{0, 101}), InvalidPorosityError);
    VoxelImage img(Dims{3, 2, 1}, std::uint8_t{50});
    CHECK(img.count_porous() == 6);
    CHECK_THROWS_AS(img.set_scale(PhysicalScale{0.0}), ConfigError);
}

TEST_CASE("linear order is x-fastest") {
    const Dims d{3, 4, 5};
    CHECK(d.index(1, 0, 0) == 1);
    CHECK(d.index(0, 1, 0) == 3);
    CHECK(d.index(0, 0, 1) == 12);
    const auto c = d.coords(d.index(2, 3, 4));
    CHECK(c[0] == 2);
    CHECK(c[1] == 3);
    CHECK(c[2] == 4);
    CHECK(d.max() == 5);
}

TEST_CASE("load_raw maps bytes to classes") {
    const auto path = write_bytes("eight.raw", {0, 100, 50, 0, 100, 50, 0, 0});
    const auto img = load_raw(path, Dims{2, 2, 2});
    CHECK(img.count_fluid() == 4);
    CHECK(img.count_porous() == 2);
    CHECK(img.count_solid() == 2);
    CHECK(img.at(1, 0, 0) == 100);
    CHECK(img.at(0, 1, 0) == 50);
}

TEST_CASE("load_raw rejects wrong size and bad bytes") {
    const auto short_path = write_bytes("short.raw", {0, 0, 0, 0, 0, 0, 0});
    CHECK_THROWS_WITH_AS(load_raw(short_path, Dims{2, 2, 2}), doctest::Contains("dimension error"), DimensionError);

    const auto bad_path = write_bytes("bad.raw", {0, 0, 0, 0, 0, 101, 0, 0});
    try {
        load_raw(bad_path, Dims{2, 2, 2});
        FAIL("expected InvalidPorosityError");
    } catch (const InvalidPorosityError& e) {
        CHECK(e.index() == 5);
        CHECK(std::string(e.what()).find("invalid porosity value 101 at linear index 5") != std::string::npos);
    }
    CHECK_THROWS_AS(load_raw(testing::temp_dir() / "missing.raw", Dims{1, 1, 1}), Error);
}

TEST_CASE("save_raw round trips byte-exactly") {
    const VoxelImage small(Dims{2, 2, 2}, std::vector<std::uint8_t>{0, 100, 50, 0, 100, 50, 0, 0});
    const auto path = testing::temp_dir() / "roundtrip.raw";
    save_raw(small, path);
    CHECK(load_raw(path, small.dims()) == small);

    const auto sphere = generate(GeometrySpec::sphere_array(0.7, 40));
    save_raw(sphere, path);
    CHECK(load_raw(path, sphere.dims()) == sphere);

    CHECK_THROWS_AS(save_raw(small, "/nonexistent-dir/x.raw"), Error);
}

TEST_CASE("sidecar metadata") {
    const auto raw = testing::temp_dir() / "sample.raw";
    const auto meta = sidecar_path(raw);
    CHECK(meta.filename() == "sample.meta");
    std::filesystem::remove(meta);
    CHECK_FALSE(read_sidecar(meta).dims.has_value());

    write_sidecar(meta, {Dims{4, 5, 6}, 0.0009});
    const auto back = read_sidecar(meta);
    REQUIRE(back.dims.has_value());
    CHECK(*back.dims == Dims{4, 5, 6});
    CHECK(*back.length_m == doctest::Approx(0.0009));

    {
        std::ofstream out(meta);
        out << "# comment\nnx = 3\nny=3\nnz=3\nvendor=ignored\n";
    }
    CHECK(*read_sidecar(meta).dims == Dims{3, 3, 3});
    {
        std::ofstream out(meta);
        out << "nx=three\n";
    }
    CHECK_THROWS_AS(read_sidecar(meta), ConfigError);
    {
        std::ofstream out(meta);
        out << "just some text\n";
    }
    CHECK_THROWS_AS(read_sidecar(meta), ConfigError);
}

TEST_CASE("segment_ternary thresholds then averages") {
    SUBCASE("two-step rule") {
        const VoxelImage img(Dims{5, 1, 1}, std::vector<std::uint8_t>{30, 90, 70, 100, 0});
        const auto r = segment_ternary(img, 80);
        CHECK_FALSE(r.binary);
        CHECK(r.averaged_porosity == 50);
        const std::vector<std::uint8_t> expected{50, 0, 50, 100, 0};
        CHECK(std::equal(expected.begin(), expected.end(), r.image.porosity().begin()));
    }
    SUBCASE("T=100 only averages") {
        const VoxelImage img(Dims{2, 1, 1}, std::vector<std::uint8_t>{55, 65});
        const auto r = segment_ternary(img, 100);
        CHECK(r.averaged_porosity == 60);
        CHECK(r.image.at(0, 0, 0) == 60);
        CHECK(r.image.at(1, 0, 0) == 60);
    }
    SUBCASE("ties round half up") {
        const VoxelImage img(Dims{2, 1, 1}, std::vector<std::uint8_t>{60, 61});
        CHECK(segment_ternary(img, 100).averaged_porosity == 61);
    }
    SUBCASE("all porous above threshold gives a binary image") {
        const VoxelImage img(Dims{3, 1, 1}, std::vector<std::uint8_t>{85, 100, 95});
        const auto r = segment_ternary(img, 80);
        CHECK(r.binary);
        CHECK(r.averaged_porosity == 0);
        CHECK(r.image.count_porous() == 0);
        CHECK(r.image.count_fluid() == 2);
    }
    CHECK_THROWS_AS(segment_ternary(VoxelImage(Dims{1, 1, 1}, std::uint8_t{0}), 0), DomainError);
    CHECK_THROWS_AS(segment_ternary(VoxelImage(Dims{1, 1, 1}, std::uint8_t{0}), 101), DomainError);
}

TEST_CASE("segment_ternary properties on random images") {
    for (std::uint32_t seed = 0; seed < 30; ++seed) {
        const auto img = testing::random_image(Dims{6, 5, 4}, seed, 0.3, 0.4);
        const int threshold = 20 + static_cast<int>(seed * 7 % 81);
        const auto once = segment_ternary(img, threshold).image;
        const auto twice = segment_ternary(once, threshold).image;
        CHECK(once == twice);
        CHECK(once.count_fluid() >= img.count_fluid());
        for (std::size_t v = 0; v < img.size(); ++v) CHECK(img.is_solid(v) == once.is_solid(v));
    }
}

TEST_CASE("correlation reproduces the published porous-voxel permeabilities") {
    const std::pair<double, double> cases[] = {{60, 493.0}, {61, 571.2}, {50, 113.3}, {58, 367.4}, {49, 97.8}};
    for (const auto& [phi, k] : cases) CHECK(std::abs(correlation_permeability(phi) / k - 1.0) <= 1e-3);
    CHECK(correlation_permeability(60) == doctest::Approx(7.251e-2 * std::exp(0.147076689 * 60)).epsilon(1e-15));
    CHECK_THROWS_AS(correlation_permeability(0), DomainError);
    CHECK_THROWS_AS(correlation_permeability(100), DomainError);
    for (int phi = 1; phi < 99; ++phi) CHECK(correlation_permeability(phi + 1) > correlation_permeability(phi));
}

TEST_CASE("porosity statistics") {
    const auto solid = porosity_stats(VoxelImage(Dims{2, 2, 2}, std::uint8_t{100}));
    CHECK(solid.total == 0.0);
    CHECK(solid.resolved == 0.0);
    CHECK(solid.unresolved == 0.0);

    const VoxelImage img(Dims{2, 2, 2}, std::vector<std::uint8_t>{0, 0, 50, 50, 100, 100, 100, 100});
    const auto s = porosity_stats(img);
    CHECK(s.total == doctest::Approx(0.375).epsilon(1e-12));
    CHECK(s.resolved == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(s.unresolved == doctest::Approx(0.125).epsilon(1e-12));

    for (std::uint32_t seed = 0; seed < 20; ++seed) {
        const auto r = porosity_stats(testing::random_image(Dims{5, 5, 5}, seed, 0.3, 0.3));
        CHECK(r.resolved >= 0.0);
        CHECK(r.resolved <= 1.0);
        CHECK(r.unresolved >= 0.0);
        CHECK(r.unresolved <= 1.0);
        CHECK(std::abs(r.total - r.resolved - r.unresolved) <= 1e-12);
    }
}

TEST_CASE("sphere image porosity matches the analytic volume") {
    const int n = 40;
    const auto s = porosity_stats(generate(GeometrySpec::sphere_array(1.0, n)));
    // one voxel shell of the unit-diameter sphere: 4 pi r^2 h with r = 1/2
    const double shell = std::numbers::pi / n;
    CHECK(std::abs(s.resolved - (1.0 - std::numbers::pi / 6.0)) <= shell);
}

TEST_CASE("physical scale conversions") {
    const PhysicalScale scale{0.0009};
    const double k_hat = 3.7e-4;
    CHECK(scale.to_m2(k_hat) == doctest::Approx(k_hat * 0.0009 * 0.0009).epsilon(1e-15));
    CHECK(scale.to_micro_darcy(k_hat) * 9.869233e-19 == doctest::Approx(scale.to_m2(k_hat)).epsilon(1e-12));
}
