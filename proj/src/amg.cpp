#include "poreflow/amg.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <queue>
#include <utility>

#include "poreflow/errors.hpp"

namespace poreflow {

namespace {

constexpr std::size_t kMaxDenseCoarse = 1024;
constexpr double kPinTolerance = 1e-12;

enum : char { kUndecided = 0, kCoarse = 1, kFine = 2 };

/// Strong dependencies of each row: j with -a_ij >= theta * max_k(-a_ik).
struct Strength {
    std::vector<std::size_t> ptr;
    std::vector<std::int32_t> col;
};

Strength strong_connections(const CsrMatrix& a, double theta) {
    const auto rp = a.row_ptr();
    const auto col = a.col();
    const auto val = a.val();
    Strength s;
    s.ptr.assign(a.rows() + 1, 0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double max_neg = 0.0;
        for (std::size_t e = rp[i]; e < rp[i + 1]; ++e)
            if (static_cast<std::size_t>(col[e]) != i) max_neg = std::max(max_neg, -val[e]);
        if (max_neg > 0.0) {
            const double cut = theta * max_neg;
            for (std::size_t e = rp[i]; e < rp[i + 1]; ++e)
                if (static_cast<std::size_t>(col[e]) != i && -val[e] >= cut) s.col.push_back(col[e]);
        }
        s.ptr[i + 1] = s.col.size();
    }
    return s;
}

Strength transpose(const Strength& s, std::size_t n) {
    Strength t;
    t.ptr.assign(n + 1, 0);
    for (const auto j : s.col) ++t.ptr[static_cast<std::size_t>(j) + 1];
    for (std::size_t i = 0; i < n; ++i) t.ptr[i + 1] += t.ptr[i];
    t.col.resize(s.col.size());
    std::vector<std::size_t> next(t.ptr.begin(), t.ptr.end() - 1);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t e = s.ptr[i]; e < s.ptr[i + 1]; ++e)
            t.col[next[static_cast<std::size_t>(s.col[e])]++] = static_cast<std::int32_t>(i);
    return t;
}

std::vector<char> split(const Strength& s, const Strength& st, std::size_t n) {
    std::vector<char> state(n, kUndecided);
    std::vector<long> lambda(n);
    using Entry = std::pair<long, long>;  // (measure, -index): ties go to the lower index
    std::priority_queue<Entry> heap;
    for (std::size_t i = 0; i < n; ++i) {
        lambda[i] = static_cast<long>(st.ptr[i + 1] - st.ptr[i]);
        if (s.ptr[i + 1] == s.ptr[i] && lambda[i] == 0) {
            state[i] = kFine;
        } else {
            heap.emplace(lambda[i], -static_cast<long>(i));
        }
    }
    while (!heap.empty()) {
        const auto [measure, neg_i] = heap.top();
        heap.pop();
        const auto i = static_cast<std::size_t>(-neg_i);
        if (state[i] != kUndecided || measure != lambda[i]) continue;
        state[i] = kCoarse;
        for (std::size_t e = st.ptr[i]; e < st.ptr[i + 1]; ++e) {
            const auto j = static_cast<std::size_t>(st.col[e]);
            if (state[j] != kUndecided) continue;
            state[j] = kFine;
            for (std::size_t f = s.ptr[j]; f < s.ptr[j + 1]; ++f) {
                const auto k = static_cast<std::size_t>(s.col[f]);
                if (state[k] != kUndecided) continue;
                heap.emplace(++lambda[k], -static_cast<long>(k));
            }
        }
        for (std::size_t e = s.ptr[i]; e < s.ptr[i + 1]; ++e) {
            const auto k = static_cast<std::size_t>(s.col[e]);
            if (state[k] != kUndecided) continue;
            heap.emplace(--lambda[k], -static_cast<long>(k));
        }
    }
    return state;
}

CsrMatrix direct_interpolation(const CsrMatrix& a, const Strength& s, const std::vector<char>& state, double truncation,
                               int max_elements) {
    const std::size_t n = a.rows();
    std::vector<std::int32_t> coarse_index(n, -1);
    std::int32_t nc = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (state[i] == kCoarse) coarse_index[i] = nc++;

    const auto rp = a.row_ptr();
    const auto col = a.col();
    const auto val = a.val();
    std::vector<std::size_t> row_ptr(n + 1, 0);
    std::vector<std::int32_t> pcol;
    std::vector<double> pval;
    std::vector<std::size_t> strong_mark(n, static_cast<std::size_t>(-1));
    std::vector<std::pair<std::int32_t, double>> row;

    for (std::size_t i = 0; i < n; ++i) {
        if (state[i] == kCoarse) {
            pcol.push_back(coarse_index[i]);
            pval.push_back(1.0);
            row_ptr[i + 1] = pcol.size();
            continue;
        }
        for (std::size_t e = s.ptr[i]; e < s.ptr[i + 1]; ++e) strong_mark[static_cast<std::size_t>(s.col[e])] = i;

        double diag = 0.0, neg_all = 0.0, pos_all = 0.0, neg_c = 0.0, pos_c = 0.0;
        for (std::size_t e = rp[i]; e < rp[i + 1]; ++e) {
            const auto j = static_cast<std::size_t>(col[e]);
            const double v = val[e];
            if (j == i) {
                diag += v;
                continue;
            }
            (v < 0.0 ? neg_all : pos_all) += v;
            if (state[j] == kCoarse && strong_mark[j] == i) (v < 0.0 ? neg_c : pos_c) += v;
        }
        if (pos_c == 0.0) diag += pos_all;
        const double alpha = neg_c != 0.0 ? neg_all / neg_c : 0.0;
        const double beta = pos_c != 0.0 ? pos_all / pos_c : 0.0;

        row.clear();
        if (diag != 0.0) {
            for (std::size_t e = rp[i]; e < rp[i + 1]; ++e) {
                const auto j = static_cast<std::size_t>(col[e]);
                if (j == i || state[j] != kCoarse || strong_mark[j] != i) continue;
                const double v = val[e];
                const double w = -(v < 0.0 ? alpha : beta) * v / diag;
                if (w != 0.0) row.emplace_back(coarse_index[j], w);
            }
        }

        if ((truncation > 0.0 || max_elements > 0) && row.size() > 1) {
            double max_w = 0.0, sum_neg = 0.0, sum_pos = 0.0;
            for (const auto& [c, w] : row) {
                max_w = std::max(max_w, std::abs(w));
                (w < 0.0 ? sum_neg : sum_pos) += w;
            }
            std::erase_if(row, [&](const auto& entry) { return std::abs(entry.second) < truncation * max_w; });
            if (max_elements > 0 && row.size() > static_cast<std::size_t>(max_elements)) {
                std::stable_sort(row.begin(), row.end(),
                                 [](const auto& x, const auto& y) { return std::abs(x.second) > std::abs(y.second); });
                row.resize(static_cast<std::size_t>(max_elements));
                std::sort(row.begin(), row.end());
            }
            double kept_neg = 0.0, kept_pos = 0.0;
            for (const auto& [c, w] : row) (w < 0.0 ? kept_neg : kept_pos) += w;
            for (auto& [c, w] : row) {
                if (w < 0.0 && kept_neg != 0.0) w *= sum_neg / kept_neg;
                if (w > 0.0 && kept_pos != 0.0) w *= sum_pos / kept_pos;
            }
        }
        for (const auto& [c, w] : row) {
            pcol.push_back(c);
            pval.push_back(w);
        }
        row_ptr[i + 1] = pcol.size();
    }
    return CsrMatrix(n, static_cast<std::size_t>(nc), std::move(row_ptr), std::move(pcol), std::move(pval));
}

std::vector<double> inverse_diagonal(const CsrMatrix& a) {
    auto d = a.diagonal();
    for (auto& v : d) v = v > 0.0 ? 1.0 / v : 0.0;
    return d;
}

void gauss_seidel(const CsrMatrix& a, std::span<const double> inv_diag, std::span<const double> b, std::span<double> x,
                  bool forward, bool zero_guess = false) {
    const auto rp = a.row_ptr();
    const auto col = a.col();
    const auto val = a.val();
    const std::size_t n = a.rows();
    auto relax = [&](std::size_t i) {
        double sum = b[i];
        for (std::size_t e = rp[i]; e < rp[i + 1]; ++e) sum -= val[e] * x[static_cast<std::size_t>(col[e])];
        x[i] += inv_diag[i] * sum;
    };
    if (forward && zero_guess) {
        // x starts at zero: only the already relaxed lower part contributes
        for (std::size_t i = 0; i < n; ++i) {
            double sum = b[i];
            for (std::size_t e = rp[i]; e < rp[i + 1] && static_cast<std::size_t>(col[e]) < i; ++e)
                sum -= val[e] * x[static_cast<std::size_t>(col[e])];
            x[i] = inv_diag[i] * sum;
        }
    } else if (forward) {
        for (std::size_t i = 0; i < n; ++i) relax(i);
    } else {
        for (std::size_t i = n; i-- > 0;) relax(i);
    }
}

}  // namespace

std::vector<char> ruge_stuben_splitting(const CsrMatrix& a, double strength_threshold) {
    const auto s = strong_connections(a, strength_threshold);
    const auto st = transpose(s, a.rows());
    auto state = split(s, st, a.rows());
    for (auto& c : state) c = c == kCoarse ? 1 : 0;
    return state;
}

AmgHierarchy AmgHierarchy::build(const CsrMatrix& matrix, const AmgOptions& options) {
    if (matrix.empty()) throw ContractViolation("AMG setup on an empty matrix");
    if (matrix.rows() != matrix.cols()) throw ContractViolation("AMG setup needs a square matrix");

    AmgHierarchy h;
    h.options_ = options;
    h.levels_.push_back(Level{matrix, {}, {}, {}});
    while (true) {
        const CsrMatrix& a = h.levels_.back().a;
        const std::size_t n = a.rows();
        if (n <= options.coarse_size || static_cast<int>(h.levels_.size()) >= options.max_levels) break;

        const auto s = strong_connections(a, options.strength_threshold);
        const auto st = transpose(s, n);
        const auto state = split(s, st, n);
        const auto nc = static_cast<std::size_t>(std::count(state.begin(), state.end(), kCoarse));
        if (nc == 0 || nc == n) break;

        CsrMatrix p = direct_interpolation(a, s, state, options.truncation, options.max_interp_elements);
        CsrMatrix r = p.transpose();
        CsrMatrix coarse = multiply(r, multiply(a, p));
        h.levels_.back().p = std::move(p);
        h.levels_.back().r = std::move(r);
        h.levels_.push_back(Level{std::move(coarse), {}, {}, {}});
    }
    for (auto& level : h.levels_) level.inv_diag = inverse_diagonal(level.a);
    h.factor_coarse();
    return h;
}

void AmgHierarchy::factor_coarse() {
    const CsrMatrix& a = levels_.back().a;
    const std::size_t n = a.rows();
    coarse_factor_.clear();
    coarse_inv_pivot_.clear();
    if (n > std::max(options_.coarse_size, kMaxDenseCoarse)) return;

    std::vector<double> m(n * n, 0.0);
    const auto rp = a.row_ptr();
    const auto col = a.col();
    const auto val = a.val();
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t e = rp[i]; e < rp[i + 1]; ++e) m[i * n + static_cast<std::size_t>(col[e])] = val[e];
        max_diag = std::max(max_diag, std::abs(m[i * n + i]));
    }
    // in-place L D L^T on the lower triangle; L has unit diagonal
    std::vector<double> pivot(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double d = m[k * n + k];
        for (std::size_t j = 0; j < k; ++j) d -= m[k * n + j] * m[k * n + j] * pivot[j];
        if (d <= kPinTolerance * max_diag) {
            pivot[k] = 0.0;
            for (std::size_t i = k + 1; i < n; ++i) m[i * n + k] = 0.0;
            continue;
        }
        pivot[k] = d;
        for (std::size_t i = k + 1; i < n; ++i) {
            double v = m[i * n + k];
            for (std::size_t j = 0; j < k; ++j) v -= m[i * n + j] * m[k * n + j] * pivot[j];
            m[i * n + k] = v / d;
        }
    }
    coarse_inv_pivot_.resize(n);
    for (std::size_t k = 0; k < n; ++k) coarse_inv_pivot_[k] = pivot[k] > 0.0 ? 1.0 / pivot[k] : 0.0;
    coarse_factor_ = std::move(m);
}

void AmgHierarchy::coarse_solve(std::span<const double> b, std::span<double> x) const {
    const Level& last = levels_.back();
    const std::size_t n = last.a.rows();
    if (coarse_factor_.empty()) {
        vec::fill(x, 0.0);
        for (int s = 0; s < options_.coarse_sweeps; ++s) {
            gauss_seidel(last.a, last.inv_diag, b, x, true);
            gauss_seidel(last.a, last.inv_diag, b, x, false);
        }
        return;
    }
    const auto& l = coarse_factor_;
    std::copy(b.begin(), b.end(), x.begin());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) x[i] -= l[i * n + j] * x[j];
    for (std::size_t i = 0; i < n; ++i) x[i] *= coarse_inv_pivot_[i];
    for (std::size_t i = n; i-- > 0;)
        for (std::size_t j = i + 1; j < n; ++j) x[i] -= l[j * n + i] * x[j];
}

double AmgHierarchy::operator_complexity() const {
    if (levels_.empty()) return 0.0;
    double total = 0.0;
    for (const auto& level : levels_) total += static_cast<double>(level.a.nnz());
    return total / static_cast<double>(levels_.front().a.nnz());
}

AmgHierarchy::Workspace AmgHierarchy::make_workspace() const {
    Workspace w;
    for (const auto& level : levels_) {
        w.x.emplace_back(level.a.rows());
        w.b.emplace_back(level.a.rows());
        w.t.emplace_back(level.a.rows());
    }
    return w;
}

void AmgHierarchy::cycle(std::size_t l, Workspace& work) const {
    auto& x = work.x[l];
    auto& b = work.b[l];
    if (l + 1 == levels_.size()) {
        coarse_solve(b, x);
        return;
    }
    const Level& level = levels_[l];
    gauss_seidel(level.a, level.inv_diag, b, x, true, true);
    auto& t = work.t[l];
    level.a.residual(b, x, t);
    level.r.multiply(t, work.b[l + 1]);
    cycle(l + 1, work);
    level.p.multiply(work.x[l + 1], t);
    vec::axpy(1.0, t, x);
    gauss_seidel(level.a, level.inv_diag, b, x, false);
}

void AmgHierarchy::apply(std::span<const double> r, std::span<double> z, Workspace& work) const {
    if (r.size() != size() || z.size() != size()) throw ContractViolation("AMG apply: length mismatch");
    std::copy(r.begin(), r.end(), work.b[0].begin());
    cycle(0, work);
    std::copy(work.x[0].begin(), work.x[0].end(), z.begin());
}

void AmgHierarchy::apply(std::span<const double> r, std::span<double> z) const {
    auto work = make_workspace();
    apply(r, z, work);
}

LinearOperator AmgHierarchy::as_operator() const {
    auto work = std::make_shared<Workspace>(make_workspace());
    return [this, work](std::span<const double> in, std::span<double> out) { apply(in, out, *work); };
}

}  // namespace poreflow
