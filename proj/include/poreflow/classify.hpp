#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "poreflow/voxel.hpp"

namespace poreflow {

/// Union-find over dense indices with union by size and path halving.
class DisjointSet {
public:
    explicit DisjointSet(std::size_t n = 0);

    std::size_t size() const noexcept { return parent_.size(); }
    std::size_t find(std::size_t x) noexcept;
    /// Returns the root of the merged set.
    std::size_t unite(std::size_t a, std::size_t b) noexcept;
    bool same(std::size_t a, std::size_t b) noexcept { return find(a) == find(b); }

private:
    // 32-bit storage keeps labeling of 1000^3+ images within memory
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint32_t> size_;
};

using PhasePredicate = std::function<bool(std::uint8_t)>;

/// Common phase selectors.
bool is_fluid_phase(std::uint8_t phi);
bool is_nonsolid_phase(std::uint8_t phi);

struct Labeling {
    static constexpr std::int32_t kBackground = -1;

    std::vector<std::int32_t> labels;  // kBackground where the predicate fails
    std::int32_t count = 0;
};

/// 6-connected components of voxels satisfying `phase`. Labels are dense, assigned in
/// order of the first voxel of each component in linear (x-fastest) order.
Labeling label_components(const VoxelImage& image, const PhasePredicate& phase);

/// True if some 6-connected component of `phase` touches both the first and last layer along `direction`.
bool percolates(const VoxelImage& image, const PhasePredicate& phase, Axis direction);

struct IsolatedRemoval {
    VoxelImage image;
    std::size_t removed_count = 0;
};

/// Converts every non-solid component that does not reach both the inlet and the outlet
/// layer along `direction` into solid.
IsolatedRemoval remove_isolated(const VoxelImage& image, Axis direction);

enum class Category { non_percolating, a, b };

std::string to_string(Category category);

struct ConnectivityReport {
    Category category = Category::non_percolating;
    std::size_t removed_voxels = 0;
    std::int32_t component_count = 0;  // percolating non-solid components left after cleanup
    Axis direction = Axis::z;
};

struct Preprocessed {
    VoxelImage image;  // isolated regions removed
    ConnectivityReport report;
};

/// Removes isolated regions and classifies the cleaned image.
Preprocessed preprocess(const VoxelImage& image, Axis direction);

ConnectivityReport classify(const VoxelImage& image, Axis direction);

}  // namespace poreflow
