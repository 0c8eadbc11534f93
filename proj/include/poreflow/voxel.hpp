#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace poreflow {

enum class Axis : int { x = 0, y = 1, z = 2 };

std::string to_string(Axis axis);
Axis parse_axis(const std::string& text);

/// Voxel counts per axis. Linear order is x-fastest: i + nx*(j + ny*k).
struct Dims {
    int nx = 0;
    int ny = 0;
    int nz = 0;

    std::size_t count() const noexcept {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
    }
    int operator[](Axis a) const noexcept { return a == Axis::x ? nx : (a == Axis::y ? ny : nz); }
    int operator[](int a) const noexcept { return (*this)[static_cast<Axis>(a)]; }
    int max() const noexcept;
    std::size_t index(int i, int j, int k) const noexcept {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(nx) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(ny) * static_cast<std::size_t>(k));
    }
    std::array<int, 3> coords(std::size_t linear) const noexcept;

    bool operator==(const Dims&) const = default;
};

/// Physical conversion constants.
inline constexpr double kDarcyToM2 = 9.869233e-13;
inline constexpr double kMicroDarcyToM2 = kDarcyToM2 * 1e-6;

/// Characteristic sample length. Dimensionless permeability k_hat maps to k = k_hat * L^2.
struct PhysicalScale {
    double length_m = 1.0;

    double to_m2(double k_hat) const noexcept { return k_hat * length_m * length_m; }
    double to_micro_darcy(double k_hat) const noexcept { return to_m2(k_hat) / kMicroDarcyToM2; }
};

struct VoxelClass {
    enum class Kind { fluid, porous, solid };

    Kind kind = Kind::fluid;
    int porosity = 0;  // only meaningful for porous voxels, strictly inside (0, 100)

    static VoxelClass from_porosity(int phi);
    bool is_fluid() const noexcept { return kind == Kind::fluid; }
    bool is_porous() const noexcept { return kind == Kind::porous; }
    bool is_solid() const noexcept { return kind == Kind::solid; }
};

inline constexpr std::uint8_t kFluid = 0;
inline constexpr std::uint8_t kSolid = 100;

/// Segmented CT model: one porosity percentage per voxel.
class VoxelImage {
public:
    VoxelImage() = default;
    VoxelImage(Dims dims, std::vector<std::uint8_t> porosity, PhysicalScale scale = {});
    /// Image of the given size filled with a single porosity value.
    VoxelImage(Dims dims, std::uint8_t fill, PhysicalScale scale = {});

    const Dims& dims() const noexcept { return dims_; }
    const PhysicalScale& scale() const noexcept { return scale_; }
    void set_scale(PhysicalScale scale);
    std::span<const std::uint8_t> porosity() const noexcept { return porosity_; }

    std::size_t size() const noexcept { return porosity_.size(); }
    std::uint8_t operator[](std::size_t linear) const noexcept { return porosity_[linear]; }
    std::uint8_t at(int i, int j, int k) const noexcept { return porosity_[dims_.index(i, j, k)]; }
    void set(std::size_t linear, std::uint8_t phi);
    void set(int i, int j, int k, std::uint8_t phi) { set(dims_.index(i, j, k), phi); }

    VoxelClass voxel_class(std::size_t linear) const { return VoxelClass::from_porosity(porosity_[linear]); }
    bool is_solid(std::size_t linear) const noexcept { return porosity_[linear] == kSolid; }
    bool is_fluid(std::size_t linear) const noexcept { return porosity_[linear] == kFluid; }
    bool is_porous(std::size_t linear) const noexcept {
        return porosity_[linear] != kFluid && porosity_[linear] != kSolid;
    }

    std::size_t count_fluid() const noexcept;
    std::size_t count_porous() const noexcept;
    std::size_t count_solid() const noexcept;

    /// Mesh step: 1/N for cubes, 1/max(N) for boxes.
    double mesh_step() const noexcept { return 1.0 / dims_.max(); }

    bool operator==(const VoxelImage& other) const {
        return dims_ == other.dims_ && porosity_ == other.porosity_;
    }

private:
    Dims dims_{};
    std::vector<std::uint8_t> porosity_;
    PhysicalScale scale_{};
};

/// Reads an unsigned 8-bit raw volume (x-fastest, one porosity percent per byte).
VoxelImage load_raw(const std::filesystem::path& path, Dims dims, PhysicalScale scale = {});
void save_raw(const VoxelImage& image, const std::filesystem::path& path);

/// Flat key=value metadata stored next to a raw file (nx, ny, nz, L_meters).
struct Sidecar {
    std::optional<Dims> dims;
    std::optional<double> length_m;
};

std::filesystem::path sidecar_path(const std::filesystem::path& raw_path);
/// Returns an empty Sidecar if the file does not exist. Throws ConfigError on malformed content.
Sidecar read_sidecar(const std::filesystem::path& path);
void write_sidecar(const std::filesystem::path& path, const Sidecar& meta);

struct TernaryResult {
    VoxelImage image;
    int averaged_porosity = 0;  // 0 when the result is binary
    bool binary = false;        // no porous voxels survived thresholding
};

/// Porous voxels with phi >= threshold become fluid; the rest share their rounded mean porosity.
TernaryResult segment_ternary(const VoxelImage& image, int threshold);

/// Empirical porosity -> permeability correlation, result in micro-Darcy.
double correlation_permeability(double phi);

struct PorosityStats {
    double total = 0.0;
    double resolved = 0.0;    // pure-fluid volume fraction
    double unresolved = 0.0;  // sum of phi/100 over porous voxels per total voxel count
};

PorosityStats porosity_stats(const VoxelImage& image);

}  // namespace poreflow
