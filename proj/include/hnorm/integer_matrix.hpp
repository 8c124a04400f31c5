#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <utility>
#include <vector>

namespace hnorm {

using BigInt = boost::multiprecision::cpp_int;

class IntMatrix {
public:
    IntMatrix() = default;
    IntMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols) {}
    static IntMatrix identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    BigInt& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
    const BigInt& operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

    IntMatrix operator*(const IntMatrix& o) const;
    IntMatrix transpose() const;
    bool is_zero() const;
    std::vector<BigInt> column(int c) const;
    bool operator==(const IntMatrix& o) const = default;

private:
    int rows_ = 0, cols_ = 0;
    std::vector<BigInt> data_;
};

// U * A * V = D with D diagonal, d_1 | d_2 | ..., all d_i > 0 for i < rank.
struct SmithForm {
    std::vector<BigInt> diagonal;  // nonzero invariant factors
    IntMatrix U, Uinv, V;
    int rank() const { return static_cast<int>(diagonal.size()); }
};

SmithForm smith_normal_form(const IntMatrix& A);

// Rows in reduced echelon form: positive pivots, entries above each pivot reduced into [0, pivot).
IntMatrix hermite_rows(const IntMatrix& rows);

// Basis of {x in Z^n : A x = 0} as the rows of a canonical reduced echelon matrix.
IntMatrix integer_kernel_rows(const IntMatrix& A);

// Integer solution x of A x = b when one exists.
bool solve_integer(const IntMatrix& A, const std::vector<BigInt>& b, std::vector<BigInt>& x);

// Sparse integer matrix stored by rows; used for large boundary operators.
struct SparseIntMatrix {
    int rows = 0, cols = 0;
    std::vector<std::vector<std::pair<int, long long>>> row_entries;
    SparseIntMatrix() = default;
    SparseIntMatrix(int r, int c) : rows(r), cols(c), row_entries(r) {}
    void add(int r, int c, long long v);
    IntMatrix to_dense() const;
};

// Nonzero invariant factors of a sparse matrix (unit pivots eliminated sparsely, remainder reduced densely).
std::vector<BigInt> sparse_invariant_factors(const SparseIntMatrix& A);
int sparse_rank(const SparseIntMatrix& A);

}  // namespace hnorm
