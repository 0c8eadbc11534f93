#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace poreflow {

struct Triplet {
    std::int32_t row;
    std::int32_t col;
    double value;
};

/// Compressed sparse row matrix with sorted column indices per row.
class CsrMatrix {
public:
    CsrMatrix() = default;
    CsrMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr, std::vector<std::int32_t> col,
              std::vector<double> val);

    /// Duplicate entries are summed; explicit zeros are kept.
    static CsrMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries);
    static CsrMatrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t nnz() const noexcept { return val_.size(); }
    bool empty() const noexcept { return rows_ == 0; }

    std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
    std::span<const std::int32_t> col() const noexcept { return col_; }
    std::span<const double> val() const noexcept { return val_; }

    /// y = A x
    void multiply(std::span<const double> x, std::span<double> y) const;
    /// r = b - A x
    void residual(std::span<const double> b, std::span<const double> x, std::span<double> r) const;

    std::vector<double> diagonal() const;
    double at(std::size_t i, std::size_t j) const;

    CsrMatrix transpose() const;

    void write_matrix_market(const std::filesystem::path& path) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::int32_t> col_;
    std::vector<double> val_;
};

/// C = A * B (Gustavson row-by-row product).
CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b);

namespace vec {

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
/// y = x + beta * y
void xpby(std::span<const double> x, double beta, std::span<double> y);
void scale(double alpha, std::span<double> x);
void fill(std::span<double> x, double value);

}  // namespace vec

}  // namespace poreflow
