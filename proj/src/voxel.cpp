#include "poreflow/voxel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "poreflow/errors.hpp"

namespace poreflow {

std::string to_string(Axis axis) {
    switch (axis) {
    case Axis::x: return "x";
    case Axis::y: return "y";
    case Axis::z: return "z";
    }
    return "?";
}

Axis parse_axis(const std::string& text) {
    if (text == "x" || text == "X") return Axis::x;
    if (text == "y" || text == "Y") return Axis::y;
    if (text == "z" || text == "Z") return Axis::z;
    throw ConfigError("unknown axis '" + text + "' (expected x, y or z)");
}

int Dims::max() const noexcept { return std::max({nx, ny, nz}); }

std::array<int, 3> Dims::coords(std::size_t linear) const noexcept {
    const auto sx = static_cast<std::size_t>(nx);
    const auto sy = static_cast<std::size_t>(ny);
    return {static_cast<int>(linear % sx), static_cast<int>((linear / sx) % sy),
            static_cast<int>(linear / (sx * sy))};
}

VoxelClass VoxelClass::from_porosity(int phi) {
    if (phi < 0 || phi > 100) throw DomainError("porosity " + std::to_string(phi) + " outside [0, 100]");
    if (phi == 0) return {Kind::fluid, 0};
    if (phi == 100) return {Kind::solid, 100};
    return {Kind::porous, phi};
}

namespace {

void check_dims(const Dims& dims) {
    if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0)
        throw DimensionError("dimension error: dimensions must be positive");
}

void check_values(std::span<const std::uint8_t> values) {
    const auto bad = std::find_if(values.begin(), values.end(), [](std::uint8_t v) { return v > 100; });
    if (bad != values.end())
        throw InvalidPorosityError(static_cast<std::size_t>(bad - values.begin()), *bad);
}

void check_scale(const PhysicalScale& scale) {
    if (!(scale.length_m > 0.0)) throw ConfigError("sample length L must be positive");
}

}  // namespace

VoxelImage::VoxelImage(Dims dims, std::vector<std::uint8_t> porosity, PhysicalScale scale)
    : dims_(dims), porosity_(std::move(porosity)), scale_(scale) {
    check_dims(dims_);
    if (porosity_.size() != dims_.count())
        throw DimensionError("dimension error: " + std::to_string(porosity_.size()) + " values for " +
                             std::to_string(dims_.count()) + " voxels");
    check_values(porosity_);
    check_scale(scale_);
}

VoxelImage::VoxelImage(Dims dims, std::uint8_t fill, PhysicalScale scale)
    : VoxelImage(dims, std::vector<std::uint8_t>(dims.nx > 0 && dims.ny > 0 && dims.nz > 0 ? dims.count() : 0, fill),
                 scale) {}

void VoxelImage::set_scale(PhysicalScale scale) {
    check_scale(scale);
    scale_ = scale;
}

void VoxelImage::set(std::size_t linear, std::uint8_t phi) {
    if (phi > 100) throw InvalidPorosityError(linear, phi);
    porosity_.at(linear) = phi;
}

std::size_t VoxelImage::count_fluid() const noexcept {
    return static_cast<std::size_t>(std::count(porosity_.begin(), porosity_.end(), kFluid));
}

std::size_t VoxelImage::count_solid() const noexcept {
    return static_cast<std::size_t>(std::count(porosity_.begin(), porosity_.end(), kSolid));
}

std::size_t VoxelImage::count_porous() const noexcept { return size() - count_fluid() - count_solid(); }

VoxelImage load_raw(const std::filesystem::path& path, Dims dims, PhysicalScale scale) {
    check_dims(dims);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "' for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() != dims.count())
        throw DimensionError("dimension error: file '" + path.string() + "' has " + std::to_string(bytes.size()) +
                             " bytes, expected " + std::to_string(dims.count()));
    return VoxelImage(dims, std::move(bytes), scale);
}

void save_raw(const VoxelImage& image, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    const auto values = image.porosity();
    out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size()));
    if (!out) throw Error("write to '" + path.string() + "' failed");
}

std::filesystem::path sidecar_path(const std::filesystem::path& raw_path) {
    auto meta = raw_path;
    meta.replace_extension(".meta");
    return meta;
}

Sidecar read_sidecar(const std::filesystem::path& path) {
    Sidecar meta;
    std::ifstream in(path);
    if (!in) return meta;

    Dims dims{};
    int seen_dims = 0;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected key=value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            std::size_t used = 0;
            if (key == "nx" || key == "ny" || key == "nz") {
                const int n = std::stoi(value, &used);
                if (used != value.size() || n <= 0) throw std::invalid_argument(value);
                (key == "nx" ? dims.nx : key == "ny" ? dims.ny : dims.nz) = n;
                ++seen_dims;
            } else if (key == "L_meters") {
                const double length = std::stod(value, &used);
                if (used != value.size() || !(length > 0.0)) throw std::invalid_argument(value);
                meta.length_m = length;
            }
            // unknown keys are ignored so other tools can annotate the file
        } catch (const std::logic_error&) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": bad value for '" + key + "'");
        }
    }
    if (seen_dims == 3) {
        meta.dims = dims;
    } else if (seen_dims != 0) {
        throw ConfigError(path.string() + ": nx, ny and nz must be given together");
    }
    return meta;
}

void write_sidecar(const std::filesystem::path& path, const Sidecar& meta) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    if (meta.dims) out << "nx=" << meta.dims->nx << "\nny=" << meta.dims->ny << "\nnz=" << meta.dims->nz << '\n';
    if (meta.length_m) {
        std::ostringstream value;
        value.precision(17);
        value << *meta.length_m;
        out << "L_meters=" << value.str() << '\n';
    }
    if (!out) throw Error("write to '" + path.string() + "' failed");
}

TernaryResult segment_ternary(const VoxelImage& image, int threshold) {
    if (threshold <= 0 || threshold > 100)
        throw DomainError("threshold " + std::to_string(threshold) + " outside (0, 100]");

    std::vector<std::uint8_t> values(image.porosity().begin(), image.porosity().end());
    std::uint64_t sum = 0;
    std::uint64_t count = 0;
    for (auto& v : values) {
        if (v == kFluid || v == kSolid) continue;
        if (v >= threshold) {
            v = kFluid;
        } else {
            sum += v;
            ++count;
        }
    }

    TernaryResult result;
    if (count == 0) {
        result.binary = true;
    } else {
        // round half up: floor(sum/count + 1/2)
        const auto averaged = static_cast<std::uint8_t>((2 * sum + count) / (2 * count));
        for (auto& v : values)
            if (v != kFluid && v != kSolid) v = averaged;
        result.averaged_porosity = averaged;
    }
    result.image = VoxelImage(image.dims(), std::move(values), image.scale());
    return result;
}

double correlation_permeability(double phi) {
    if (!(phi > 0.0 && phi < 100.0))
        throw DomainError("correlation is defined for porosity in (0, 100), got " + std::to_string(phi));
    return 7.251e-2 * std::exp(0.147076689 * phi);
}

PorosityStats porosity_stats(const VoxelImage& image) {
    PorosityStats stats;
    if (image.size() == 0) return stats;
    std::uint64_t fluid = 0;
    std::uint64_t porous_percent = 0;
    for (const auto v : image.porosity()) {
        if (v == kFluid) {
            ++fluid;
        } else if (v != kSolid) {
            porous_percent += v;
        }
    }
    const auto n = static_cast<double>(image.size());
    stats.resolved = static_cast<double>(fluid) / n;
    stats.unresolved = static_cast<double>(porous_percent) / (100.0 * n);
    stats.total = stats.resolved + stats.unresolved;
    return stats;
}

}  // namespace poreflow
