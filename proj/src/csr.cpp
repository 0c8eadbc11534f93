#include "poreflow/csr.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "poreflow/errors.hpp"

namespace poreflow {

CsrMatrix::CsrMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                     std::vector<std::int32_t> col, std::vector<double> val)
    : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_(std::move(col)), val_(std::move(val)) {
    if (row_ptr_.size() != rows_ + 1 || row_ptr_.front() != 0 || row_ptr_.back() != col_.size() ||
        col_.size() != val_.size())
        throw ContractViolation("inconsistent CSR arrays");
}

CsrMatrix CsrMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries) {
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<std::size_t> row_ptr(rows + 1, 0);
    std::vector<std::int32_t> col;
    std::vector<double> val;
    col.reserve(entries.size());
    val.reserve(entries.size());
    for (std::size_t e = 0; e < entries.size();) {
        const auto& t = entries[e];
        if (t.row < 0 || static_cast<std::size_t>(t.row) >= rows || t.col < 0 || static_cast<std::size_t>(t.col) >= cols)
            throw ContractViolation("triplet index out of range");
        double sum = 0.0;
        std::size_t f = e;
        for (; f < entries.size() && entries[f].row == t.row && entries[f].col == t.col; ++f) sum += entries[f].value;
        col.push_back(t.col);
        val.push_back(sum);
        ++row_ptr[static_cast<std::size_t>(t.row) + 1];
        e = f;
    }
    std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
    return CsrMatrix(rows, cols, std::move(row_ptr), std::move(col), std::move(val));
}

CsrMatrix CsrMatrix::identity(std::size_t n) {
    std::vector<std::size_t> row_ptr(n + 1);
    std::iota(row_ptr.begin(), row_ptr.end(), std::size_t{0});
    std::vector<std::int32_t> col(n);
    std::iota(col.begin(), col.end(), 0);
    return CsrMatrix(n, n, std::move(row_ptr), std::move(col), std::vector<double>(n, 1.0));
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != cols_ || y.size() != rows_) throw ContractViolation("CSR multiply: length mismatch");
    const auto n = static_cast<std::ptrdiff_t>(rows_);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t e = row_ptr_[static_cast<std::size_t>(i)]; e < row_ptr_[static_cast<std::size_t>(i) + 1]; ++e)
            sum += val_[e] * x[static_cast<std::size_t>(col_[e])];
        y[static_cast<std::size_t>(i)] = sum;
    }
}

void CsrMatrix::residual(std::span<const double> b, std::span<const double> x, std::span<double> r) const {
    if (x.size() != cols_ || b.size() != rows_ || r.size() != rows_) throw ContractViolation("CSR residual: length mismatch");
    const auto n = static_cast<std::ptrdiff_t>(rows_);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double sum = b[static_cast<std::size_t>(i)];
        for (std::size_t e = row_ptr_[static_cast<std::size_t>(i)]; e < row_ptr_[static_cast<std::size_t>(i) + 1]; ++e)
            sum -= val_[e] * x[static_cast<std::size_t>(col_[e])];
        r[static_cast<std::size_t>(i)] = sum;
    }
}

std::vector<double> CsrMatrix::diagonal() const {
    std::vector<double> d(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e) {
            if (static_cast<std::size_t>(col_[e]) == i) {
                d[i] = val_[e];
                break;
            }
        }
    }
    return d;
}

double CsrMatrix::at(std::size_t i, std::size_t j) const {
    const auto first = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    const auto last = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    const auto it = std::lower_bound(first, last, static_cast<std::int32_t>(j));
    return (it != last && *it == static_cast<std::int32_t>(j)) ? val_[static_cast<std::size_t>(it - col_.begin())] : 0.0;
}

CsrMatrix CsrMatrix::transpose() const {
    std::vector<std::size_t> row_ptr(cols_ + 1, 0);
    for (const auto c : col_) ++row_ptr[static_cast<std::size_t>(c) + 1];
    std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
    std::vector<std::size_t> next(row_ptr.begin(), row_ptr.end() - 1);
    std::vector<std::int32_t> col(col_.size());
    std::vector<double> val(val_.size());
    // rows visited in increasing order, so each transposed row comes out sorted
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e) {
            const auto dst = next[static_cast<std::size_t>(col_[e])]++;
            col[dst] = static_cast<std::int32_t>(i);
            val[dst] = val_[e];
        }
    }
    return CsrMatrix(cols_, rows_, std::move(row_ptr), std::move(col), std::move(val));
}

void CsrMatrix::write_matrix_market(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out.precision(17);
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << rows_ << ' ' << cols_ << ' ' << nnz() << '\n';
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e)
            out << i + 1 << ' ' << col_[e] + 1 << ' ' << val_[e] << '\n';
    if (!out) throw Error("write to '" + path.string() + "' failed");
}

CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b) {
    if (a.cols() != b.rows()) throw ContractViolation("sparse product: inner dimension mismatch");
    const auto arp = a.row_ptr();
    const auto acol = a.col();
    const auto aval = a.val();
    const auto brp = b.row_ptr();
    const auto bcol = b.col();
    const auto bval = b.val();

    std::vector<std::size_t> row_ptr(a.rows() + 1, 0);
    std::vector<std::int32_t> col;
    std::vector<double> val;
    std::vector<std::ptrdiff_t> marker(b.cols(), -1);
    std::vector<std::int32_t> row_cols;
    std::vector<double> acc(b.cols(), 0.0);

    for (std::size_t i = 0; i < a.rows(); ++i) {
        row_cols.clear();
        for (std::size_t ea = arp[i]; ea < arp[i + 1]; ++ea) {
            const auto k = static_cast<std::size_t>(acol[ea]);
            const double aik = aval[ea];
            for (std::size_t eb = brp[k]; eb < brp[k + 1]; ++eb) {
                const auto j = static_cast<std::size_t>(bcol[eb]);
                if (marker[j] != static_cast<std::ptrdiff_t>(i)) {
                    marker[j] = static_cast<std::ptrdiff_t>(i);
                    acc[j] = 0.0;
                    row_cols.push_back(static_cast<std::int32_t>(j));
                }
                acc[j] += aik * bval[eb];
            }
        }
        std::sort(row_cols.begin(), row_cols.end());
        for (const auto j : row_cols) {
            col.push_back(j);
            val.push_back(acc[static_cast<std::size_t>(j)]);
        }
        row_ptr[i + 1] = col.size();
    }
    return CsrMatrix(a.rows(), b.cols(), std::move(row_ptr), std::move(col), std::move(val));
}

namespace vec {

// Reductions stay sequential so results are bit-reproducible for any thread count.
double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ContractViolation("dot: length mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size()) throw ContractViolation("axpy: length mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void xpby(std::span<const double> x, double beta, std::span<double> y) {
    if (x.size() != y.size()) throw ContractViolation("xpby: length mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + beta * y[i];
}

void scale(double alpha, std::span<double> x) {
    for (auto& v : x) v *= alpha;
}

void fill(std::span<double> x, double value) { std::fill(x.begin(), x.end(), value); }

}  // namespace vec

}  // namespace poreflow
