#pragma once

// Shared fixtures and independent oracles for the test suites.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "poreflow/csr.hpp"
#include "poreflow/voxel.hpp"

namespace testing {

using poreflow::Dims;
using poreflow::VoxelImage;

inline std::filesystem::path temp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "poreflow_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

/// Random image with each voxel fluid, porous or solid with the given probabilities.
inline VoxelImage random_image(Dims dims, std::uint32_t seed, double p_fluid, double p_porous) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> phi(1, 99);
    std::vector<std::uint8_t> data(dims.count());
    for (auto& v : data) {
        const double r = u(rng);
        v = r < p_fluid ? 0 : (r < p_fluid + p_porous ? static_cast<std::uint8_t>(phi(rng)) : 100);
    }
    return VoxelImage(dims, std::move(data));
}

inline std::vector<double> random_vector(std::size_t n, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
    return static_cast<double>(s);
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// Breadth-first 6-connected labeling, labels in order of first voxel.
inline std::vector<int> bfs_labels(const VoxelImage& image, bool (*phase)(std::uint8_t), int& count) {
    const Dims d = image.dims();
    std::vector<int> label(image.size(), -1);
    count = 0;
    for (std::size_t start = 0; start < image.size(); ++start) {
        if (label[start] >= 0 || !phase(image[start])) continue;
        std::deque<std::size_t> queue{start};
        label[start] = count;
        while (!queue.empty()) {
            const auto v = queue.front();
            queue.pop_front();
            const auto c = d.coords(v);
            for (int a = 0; a < 3; ++a) {
                for (int s : {-1, 1}) {
                    auto n = c;
                    n[static_cast<std::size_t>(a)] += s;
                    if (n[0] < 0 || n[1] < 0 || n[2] < 0 || n[0] >= d.nx || n[1] >= d.ny || n[2] >= d.nz) continue;
                    const auto w = d.index(n[0], n[1], n[2]);
                    if (label[w] < 0 && phase(image[w])) {
                        label[w] = count;
                        queue.push_back(w);
                    }
                }
            }
        }
        ++count;
    }
    return label;
}

/// 7-point Dirichlet Laplacian on an n^3 grid.
inline poreflow::CsrMatrix poisson3d(int n) {
    std::vector<poreflow::Triplet> t;
    auto id = [n](int i, int j, int k) { return static_cast<std::int32_t>(i + n * (j + n * k)); };
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const auto r = id(i, j, k);
                t.push_back({r, r, 6.0});
                const int c[3] = {i, j, k};
                for (int a = 0; a < 3; ++a)
                    for (int s : {-1, 1}) {
                        int m[3] = {c[0], c[1], c[2]};
                        m[a] += s;
                        if (m[a] < 0 || m[a] >= n) continue;
                        t.push_back({r, id(m[0], m[1], m[2]), -1.0});
                    }
            }
    const auto size = static_cast<std::size_t>(n) * static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    return poreflow::CsrMatrix::from_triplets(size, size, std::move(t));
}

inline Eigen::MatrixXd dense(const poreflow::CsrMatrix& m) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
    const auto rp = m.row_ptr();
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t e = rp[i]; e < rp[i + 1]; ++e)
            out(static_cast<Eigen::Index>(i), m.col()[e]) += m.val()[e];
    return out;
}

/// Dense matrix of a linear map given by its action.
template <class Apply>
Eigen::MatrixXd dense_from_action(std::size_t rows, std::size_t cols, Apply&& apply) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    std::vector<double> e(cols, 0.0), y(rows);
    for (std::size_t j = 0; j < cols; ++j) {
        e[j] = 1.0;
        apply(std::span<const double>(e), std::span<double>(y));
        for (std::size_t i = 0; i < rows; ++i) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = y[i];
        e[j] = 0.0;
    }
    return out;
}

}  // namespace testing
