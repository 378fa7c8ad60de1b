#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "shapefilt/types.hpp"

namespace shapefilt {

struct Triplet {
    Index row;
    Index col;
    double value;
};

/// Staging area for element contributions before compression to CSR.
class TripletBuffer {
public:
    TripletBuffer() = default;

    void add(Index row, Index col, double value) { entries_.push_back({row, col, value}); }
    void reserve(std::size_t n) { entries_.reserve(n); }
    void append(const TripletBuffer& other);

    std::span<const Triplet> entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

private:
    std::vector<Triplet> entries_;
};

/// Compressed sparse row matrix. Column indices are sorted within each row.
/// The symmetry flag is computed on construction (structural symmetry plus
/// values equal to 1e-14 relative).
class CsrMatrix {
public:
    CsrMatrix() = default;
    CsrMatrix(Index rows, Index cols, std::vector<Index> offsets, std::vector<Index> columns,
              std::vector<double> values);

    static CsrMatrix identity(Index n);
    static CsrMatrix diagonal(std::span<const double> d);
    static CsrMatrix zero(Index n);

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }
    std::size_t nonzeros() const { return values_.size(); }
    bool is_symmetric() const { return symmetric_; }

    std::span<const Index> offsets() const { return offsets_; }
    std::span<const Index> columns() const { return columns_; }
    std::span<const double> values() const { return values_; }

    double coeff(Index i, Index j) const;
    std::vector<double> diagonal() const;
    std::vector<double> row_sums() const;
    double frobenius_norm() const;
    double max_abs() const;

    void multiply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> multiply(std::span<const double> x) const;
    /// y = A^T x
    std::vector<double> multiply_transpose(std::span<const double> x) const;

    CsrMatrix transpose() const;
    CsrMatrix scaled(double s) const;
    /// Scales row i by d[i].
    CsrMatrix row_scaled(std::span<const double> d) const;

    /// Copies a scalar n x n operator onto each Cartesian component of a
    /// node-major 3n x 3n layout: entry (3i+c, 3j+c) = A(i, j).
    CsrMatrix block_expand(int components = 3) const;

    /// Keeps rows/cols listed in `keep` (ascending), renumbered consecutively.
    CsrMatrix submatrix(std::span<const Index> keep_rows, std::span<const Index> keep_cols) const;

private:
    Index rows_ = 0;
    Index cols_ = 0;
    std::vector<Index> offsets_{0};
    std::vector<Index> columns_;
    std::vector<double> values_;
    bool symmetric_ = true;

    bool compute_symmetry() const;
};

using SparseSymMatrix = CsrMatrix;

/// Sums duplicate (row, col) entries in element order. Throws DimensionError
/// on out-of-range indices.
CsrMatrix assemble(const TripletBuffer& triplets, Index n);
CsrMatrix assemble(const TripletBuffer& triplets, Index rows, Index cols);

std::vector<double> spmv(const CsrMatrix& a, std::span<const double> v);

/// alpha * A + beta * B (same shape).
CsrMatrix add(const CsrMatrix& a, const CsrMatrix& b, double alpha = 1.0, double beta = 1.0);
CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b);

void write_matrix_market(const CsrMatrix& a, const std::filesystem::path& path);

} // namespace shapefilt
