#include "poreflow/classify.hpp"

#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace poreflow {

DisjointSet::DisjointSet(std::size_t n) {
    if (n > std::numeric_limits<std::uint32_t>::max())
        throw std::length_error("DisjointSet supports at most 2^32-1 elements");
    parent_.resize(n);
    size_.assign(n, 1);
    std::iota(parent_.begin(), parent_.end(), std::uint32_t{0});
}

std::size_t DisjointSet::find(std::size_t x) noexcept {
    while (parent_[x] != x) {
        parent_[x] = parent_[parent_[x]];
        x = parent_[x];
    }
    return x;
}

std::size_t DisjointSet::unite(std::size_t a, std::size_t b) noexcept {
    a = find(a);
    b = find(b);
    if (a == b) return a;
    // ties keep the smaller index as root so the partition is independent of call order
    if (size_[a] < size_[b] || (size_[a] == size_[b] && b < a)) std::swap(a, b);
    parent_[b] = static_cast<std::uint32_t>(a);
    size_[a] += size_[b];
    return a;
}

bool is_fluid_phase(std::uint8_t phi) { return phi == kFluid; }
bool is_nonsolid_phase(std::uint8_t phi) { return phi != kSolid; }

Labeling label_components(const VoxelImage& image, const PhasePredicate& phase) {
    const Dims& d = image.dims();
    const std::size_t n = image.size();
    const auto values = image.porosity();

    std::vector<char> member(n);
    for (std::size_t v = 0; v < n; ++v) member[v] = phase(values[v]) ? 1 : 0;

    DisjointSet sets(n);
    const std::size_t sx = 1;
    const auto sy = static_cast<std::size_t>(d.nx);
    const auto sz = static_cast<std::size_t>(d.nx) * static_cast<std::size_t>(d.ny);
    for (int k = 0; k < d.nz; ++k) {
        for (int j = 0; j < d.ny; ++j) {
            for (int i = 0; i < d.nx; ++i) {
                const std::size_t v = d.index(i, j, k);
                if (!member[v]) continue;
                if (i > 0 && member[v - sx]) sets.unite(v, v - sx);
                if (j > 0 && member[v - sy]) sets.unite(v, v - sy);
                if (k > 0 && member[v - sz]) sets.unite(v, v - sz);
            }
        }
    }

    Labeling out;
    out.labels.assign(n, Labeling::kBackground);
    std::vector<std::int32_t> root_label(n, Labeling::kBackground);
    for (std::size_t v = 0; v < n; ++v) {
        if (!member[v]) continue;
        const std::size_t root = sets.find(v);
        if (root_label[root] == Labeling::kBackground) root_label[root] = out.count++;
        out.labels[v] = root_label[root];
    }
    return out;
}

namespace {

/// Marks labels present in the first and in the last layer along `direction`.
std::vector<char> spanning_labels(const Dims& d, const Labeling& labeling, Axis direction) {
    std::vector<char> at_inlet(static_cast<std::size_t>(labeling.count), 0);
    std::vector<char> at_outlet(static_cast<std::size_t>(labeling.count), 0);
    const int last = d[direction] - 1;
    for (int k = 0; k < d.nz; ++k) {
        for (int j = 0; j < d.ny; ++j) {
            for (int i = 0; i < d.nx; ++i) {
                const int along = direction == Axis::x ? i : (direction == Axis::y ? j : k);
                if (along != 0 && along != last) continue;
                const auto label = labeling.labels[d.index(i, j, k)];
                if (label == Labeling::kBackground) continue;
                if (along == 0) at_inlet[static_cast<std::size_t>(label)] = 1;
                if (along == last) at_outlet[static_cast<std::size_t>(label)] = 1;
            }
        }
    }
    std::vector<char> spanning(at_inlet.size());
    for (std::size_t l = 0; l < spanning.size(); ++l) spanning[l] = at_inlet[l] && at_outlet[l];
    return spanning;
}

}  // namespace

bool percolates(const VoxelImage& image, const PhasePredicate& phase, Axis direction) {
    const auto labeling = label_components(image, phase);
    const auto spanning = spanning_labels(image.dims(), labeling, direction);
    for (const char s : spanning)
        if (s) return true;
    return false;
}

IsolatedRemoval remove_isolated(const VoxelImage& image, Axis direction) {
    const auto labeling = label_components(image, is_nonsolid_phase);
    const auto spanning = spanning_labels(image.dims(), labeling, direction);

    std::vector<std::uint8_t> values(image.porosity().begin(), image.porosity().end());
    std::size_t removed = 0;
    for (std::size_t v = 0; v < values.size(); ++v) {
        const auto label = labeling.labels[v];
        if (label == Labeling::kBackground || spanning[static_cast<std::size_t>(label)]) continue;
        values[v] = kSolid;
        ++removed;
    }
    return {VoxelImage(image.dims(), std::move(values), image.scale()), removed};
}

std::string to_string(Category category) {
    switch (category) {
    case Category::non_percolating: return "non_percolating";
    case Category::a: return "A";
    case Category::b: return "B";
    }
    return "?";
}

Preprocessed preprocess(const VoxelImage& image, Axis direction) {
    auto removal = remove_isolated(image, direction);

    ConnectivityReport report;
    report.direction = direction;
    report.removed_voxels = removal.removed_count;
    report.component_count = label_components(removal.image, is_nonsolid_phase).count;
    if (report.component_count == 0) {
        report.category = Category::non_percolating;
    } else if (percolates(removal.image, is_fluid_phase, direction)) {
        report.category = Category::b;
    } else {
        report.category = Category::a;
    }
    return {std::move(removal.image), report};
}

ConnectivityReport classify(const VoxelImage& image, Axis direction) { return preprocess(image, direction).report; }

}  // namespace poreflow
