#include "shapefilt/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "shapefilt/error.hpp"
#include "shapefilt/simd/kernels.hpp"

namespace shapefilt {

void TripletBuffer::append(const TripletBuffer& other) {
    entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
}

CsrMatrix::CsrMatrix(Index rows, Index cols, std::vector<Index> offsets, std::vector<Index> columns,
                     std::vector<double> values)
    : rows_(rows), cols_(cols), offsets_(std::move(offsets)), columns_(std::move(columns)), values_(std::move(values)) {
    if (static_cast<Index>(offsets_.size()) != rows_ + 1 || columns_.size() != values_.size() ||
        static_cast<std::size_t>(offsets_.back()) != values_.size())
        throw DimensionError("CsrMatrix: inconsistent CSR arrays");
    symmetric_ = compute_symmetry();
}

CsrMatrix CsrMatrix::identity(Index n) {
    std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
    return diagonal(ones);
}

CsrMatrix CsrMatrix::diagonal(std::span<const double> d) {
    const auto n = static_cast<Index>(d.size());
    std::vector<Index> offsets(d.size() + 1);
    std::iota(offsets.begin(), offsets.end(), 0);
    std::vector<Index> cols(d.size());
    std::iota(cols.begin(), cols.end(), 0);
    return CsrMatrix(n, n, std::move(offsets), std::move(cols), std::vector<double>(d.begin(), d.end()));
}

CsrMatrix CsrMatrix::zero(Index n) {
    return CsrMatrix(n, n, std::vector<Index>(static_cast<std::size_t>(n) + 1, 0), {}, {});
}

bool CsrMatrix::compute_symmetry() const {
    if (rows_ != cols_) return false;
    const double scale = max_abs();
    for (Index i = 0; i < rows_; ++i) {
        for (Index k = offsets_[i]; k < offsets_[i + 1]; ++k) {
            const Index j = columns_[k];
            if (j <= i) continue;
            const auto* begin = columns_.data() + offsets_[j];
            const auto* end = columns_.data() + offsets_[j + 1];
            const auto* it = std::lower_bound(begin, end, i);
            if (it == end || *it != i) return false;
            const double other = values_[static_cast<std::size_t>(it - columns_.data())];
            if (std::abs(other - values_[k]) > 1e-14 * scale) return false;
        }
    }
    return true;
}

double CsrMatrix::coeff(Index i, Index j) const {
    const auto* begin = columns_.data() + offsets_[i];
    const auto* end = columns_.data() + offsets_[i + 1];
    const auto* it = std::lower_bound(begin, end, j);
    if (it == end || *it != j) return 0.0;
    return values_[static_cast<std::size_t>(it - columns_.data())];
}

std::vector<double> CsrMatrix::diagonal() const {
    std::vector<double> d(static_cast<std::size_t>(std::min(rows_, cols_)), 0.0);
    for (Index i = 0; i < static_cast<Index>(d.size()); ++i) d[i] = coeff(i, i);
    return d;
}

std::vector<double> CsrMatrix::row_sums() const {
    std::vector<double> s(static_cast<std::size_t>(rows_), 0.0);
    for (Index i = 0; i < rows_; ++i)
        for (Index k = offsets_[i]; k < offsets_[i + 1]; ++k) s[i] += values_[k];
    return s;
}

double CsrMatrix::frobenius_norm() const {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return std::sqrt(s);
}

double CsrMatrix::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    if (static_cast<Index>(x.size()) != cols_ || static_cast<Index>(y.size()) != rows_)
        throw DimensionError("spmv: dimension mismatch");
    simd::csr_multiply(offsets_, columns_, values_, x, y);
}

std::vector<double> CsrMatrix::multiply(std::span<const double> x) const {
    std::vector<double> y(static_cast<std::size_t>(rows_));
    multiply(x, y);
    return y;
}

std::vector<double> CsrMatrix::multiply_transpose(std::span<const double> x) const {
    if (static_cast<Index>(x.size()) != rows_) throw DimensionError("spmv transpose: dimension mismatch");
    std::vector<double> y(static_cast<std::size_t>(cols_), 0.0);
    for (Index i = 0; i < rows_; ++i)
        for (Index k = offsets_[i]; k < offsets_[i + 1]; ++k) y[columns_[k]] += values_[k] * x[i];
    return y;
}

CsrMatrix CsrMatrix::transpose() const {
    std::vector<Index> counts(static_cast<std::size_t>(cols_) + 1, 0);
    for (Index c : columns_) ++counts[c + 1];
    std::partial_sum(counts.begin(), counts.end(), counts.begin());
    std::vector<Index> cols(values_.size());
    std::vector<double> vals(values_.size());
    std::vector<Index> fill(counts.begin(), counts.end() - 1);
    for (Index i = 0; i < rows_; ++i) {
        for (Index k = offsets_[i]; k < offsets_[i + 1]; ++k) {
            const Index dst = fill[columns_[k]]++;
            cols[dst] = i;
            vals[dst] = values_[k];
        }
    }
    return CsrMatrix(cols_, rows_, std::move(counts), std::move(cols), std::move(vals));
}

CsrMatrix CsrMatrix::scaled(double s) const {
    std::vector<double> vals(values_);
    for (double& v : vals) v *= s;
    return CsrMatrix(rows_, cols_, offsets_, columns_, std::move(vals));
}

CsrMatrix CsrMatrix::row_scaled(std::span<const double> d) const {
    if (static_cast<Index>(d.size()) != rows_) throw DimensionError("row_scaled: dimension mismatch");
    std::vector<double> vals(values_);
    for (Index i = 0; i < rows_; ++i)
        for (Index k = offsets_[i]; k < offsets_[i + 1]; ++k) vals[k] *= d[i];
    return CsrMatrix(rows_, cols_, offsets_, columns_, std::move(vals));
}

CsrMatrix CsrMatrix::block_expand(int components) const {
    const Index nc = components;
    std::vector<Index> offsets;
    offsets.reserve(static_cast<std::size_t>(rows_ * nc) + 1);
    offsets.push_back(0);
    std::vector<Index> cols;
    std::vector<double> vals;
    cols.reserve(values_.size() * nc);
    vals.reserve(values_.size() * nc);
    for (Index i = 0; i < rows_; ++i) {
        for (Index c = 0; c < nc; ++c) {
            for (Index k = offsets_[i]; k < offsets_[i + 1]; ++k) {
                cols.push_back(columns_[k] * nc + c);
                vals.push_back(values_[k]);
            }
            offsets.push_back(static_cast<Index>(cols.size()));
        }
    }
    return CsrMatrix(rows_ * nc, cols_ * nc, std::move(offsets), std::move(cols), std::move(vals));
}

CsrMatrix CsrMatrix::submatrix(std::span<const Index> keep_rows, std::span<const Index> keep_cols) const {
    std::vector<Index> col_map(static_cast<std::size_t>(cols_), -1);
    for (std::size_t k = 0; k < keep_cols.size(); ++k) col_map[keep_cols[k]] = static_cast<Index>(k);
    std::vector<Index> offsets{0};
    std::vector<Index> cols;
    std::vector<double> vals;
    for (Index i : keep_rows) {
        for (Index k = offsets_[i]; k < offsets_[i + 1]; ++k) {
            const Index c = col_map[columns_[k]];
            if (c < 0) continue;
            cols.push_back(c);
            vals.push_back(values_[k]);
        }
        offsets.push_back(static_cast<Index>(cols.size()));
    }
    return CsrMatrix(static_cast<Index>(keep_rows.size()), static_cast<Index>(keep_cols.size()), std::move(offsets),
                     std::move(cols), std::move(vals));
}

CsrMatrix assemble(const TripletBuffer& triplets, Index n) { return assemble(triplets, n, n); }

CsrMatrix assemble(const TripletBuffer& triplets, Index rows, Index cols) {
    const auto entries = triplets.entries();
    for (const auto& t : entries) {
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
            throw DimensionError("assemble: triplet index out of range");
    }
    // Counting sort by row keeps the insertion order inside each row, so
    // duplicate sums are accumulated in element order.
    std::vector<Index> row_count(static_cast<std::size_t>(rows) + 1, 0);
    for (const auto& t : entries) ++row_count[t.row + 1];
    std::partial_sum(row_count.begin(), row_count.end(), row_count.begin());
    std::vector<std::size_t> order(entries.size());
    {
        std::vector<Index> fill(row_count.begin(), row_count.end() - 1);
        for (std::size_t k = 0; k < entries.size(); ++k) order[fill[entries[k].row]++] = k;
    }
    std::vector<Index> offsets{0};
    offsets.reserve(static_cast<std::size_t>(rows) + 1);
    std::vector<Index> out_cols;
    std::vector<double> out_vals;
    out_cols.reserve(entries.size());
    out_vals.reserve(entries.size());
    std::vector<std::size_t> row_items;
    for (Index r = 0; r < rows; ++r) {
        row_items.assign(order.begin() + row_count[r], order.begin() + row_count[r + 1]);
        std::stable_sort(row_items.begin(), row_items.end(),
                         [&](std::size_t a, std::size_t b) { return entries[a].col < entries[b].col; });
        for (std::size_t k : row_items) {
            const auto& t = entries[k];
            if (!out_cols.empty() && static_cast<Index>(out_cols.size()) > offsets.back() && out_cols.back() == t.col) {
                out_vals.back() += t.value;
            } else {
                out_cols.push_back(t.col);
                out_vals.push_back(t.value);
            }
        }
        offsets.push_back(static_cast<Index>(out_cols.size()));
    }
    return CsrMatrix(rows, cols, std::move(offsets), std::move(out_cols), std::move(out_vals));
}

std::vector<double> spmv(const CsrMatrix& a, std::span<const double> v) { return a.multiply(v); }

CsrMatrix add(const CsrMatrix& a, const CsrMatrix& b, double alpha, double beta) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("add: shape mismatch");
    std::vector<Index> offsets{0};
    std::vector<Index> cols;
    std::vector<double> vals;
    cols.reserve(a.nonzeros() + b.nonzeros());
    vals.reserve(a.nonzeros() + b.nonzeros());
    const auto ao = a.offsets(), bo = b.offsets();
    const auto ac = a.columns(), bc = b.columns();
    const auto av = a.values(), bv = b.values();
    for (Index i = 0; i < a.rows(); ++i) {
        Index p = ao[i], q = bo[i];
        while (p < ao[i + 1] || q < bo[i + 1]) {
            if (q >= bo[i + 1] || (p < ao[i + 1] && ac[p] < bc[q])) {
                cols.push_back(ac[p]);
                vals.push_back(alpha * av[p]);
                ++p;
            } else if (p >= ao[i + 1] || bc[q] < ac[p]) {
                cols.push_back(bc[q]);
                vals.push_back(beta * bv[q]);
                ++q;
            } else {
                cols.push_back(ac[p]);
                vals.push_back(alpha * av[p] + beta * bv[q]);
                ++p;
                ++q;
            }
        }
        offsets.push_back(static_cast<Index>(cols.size()));
    }
    return CsrMatrix(a.rows(), a.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b) {
    if (a.cols() != b.rows()) throw DimensionError("multiply: inner dimension mismatch");
    std::vector<Index> offsets{0};
    std::vector<Index> cols;
    std::vector<double> vals;
    std::vector<double> acc(static_cast<std::size_t>(b.cols()), 0.0);
    std::vector<char> used(static_cast<std::size_t>(b.cols()), 0);
    std::vector<Index> touched;
    const auto ao = a.offsets(), bo = b.offsets();
    const auto ac = a.columns(), bc = b.columns();
    const auto av = a.values(), bv = b.values();
    for (Index i = 0; i < a.rows(); ++i) {
        touched.clear();
        for (Index p = ao[i]; p < ao[i + 1]; ++p) {
            const Index k = ac[p];
            for (Index q = bo[k]; q < bo[k + 1]; ++q) {
                const Index j = bc[q];
                if (!used[j]) {
                    used[j] = 1;
                    touched.push_back(j);
                }
                acc[j] += av[p] * bv[q];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (Index j : touched) {
            cols.push_back(j);
            vals.push_back(acc[j]);
            acc[j] = 0.0;
            used[j] = 0;
        }
        offsets.push_back(static_cast<Index>(cols.size()));
    }
    return CsrMatrix(a.rows(), b.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

void write_matrix_market(const CsrMatrix& a, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string());
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << a.rows() << ' ' << a.cols() << ' ' << a.nonzeros() << '\n';
    char buf[64];
    const auto o = a.offsets();
    const auto c = a.columns();
    const auto v = a.values();
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index k = o[i]; k < o[i + 1]; ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", v[k]);
            out << i + 1 << ' ' << c[k] + 1 << ' ' << buf << '\n';
        }
    }
    if (!out) throw IoError("write failed: " + path.string());
}

} // namespace shapefilt
