#include "hnorm/integer_matrix.hpp"

#include <algorithm>
#include <map>

#include "hnorm/errors.hpp"

namespace hnorm {

IntMatrix IntMatrix::identity(int n) {
    IntMatrix I(n, n);
    for (int i = 0; i < n; ++i) I(i, i) = 1;
    return I;
}

IntMatrix IntMatrix::operator*(const IntMatrix& o) const {
    IntMatrix R(rows_, o.cols_);
    for (int i = 0; i < rows_; ++i)
        for (int k = 0; k < cols_; ++k) {
            const BigInt& a = (*this)(i, k);
            if (a == 0) continue;
            for (int j = 0; j < o.cols_; ++j)
                if (o(k, j) != 0) R(i, j) += a * o(k, j);
        }
    return R;
}

IntMatrix IntMatrix::transpose() const {
    IntMatrix T(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) T(j, i) = (*this)(i, j);
    return T;
}

bool IntMatrix::is_zero() const {
    return std::all_of(data_.begin(), data_.end(), [](const BigInt& v) { return v == 0; });
}

std::vector<BigInt> IntMatrix::column(int c) const {
    std::vector<BigInt> v(rows_);
    for (int i = 0; i < rows_; ++i) v[i] = (*this)(i, c);
    return v;
}

namespace {

BigInt babs(const BigInt& v) { return v < 0 ? BigInt(-v) : v; }

// Floor-free quotient rounding toward zero keeps remainders smaller than the pivot.
BigInt quot(const BigInt& a, const BigInt& b) { return a / b; }

struct SnfWork {
    IntMatrix D, U, Uinv, V;
    int m, n;

    void swap_rows(int a, int b) {
        if (a == b) return;
        for (int j = 0; j < n; ++j) std::swap(D(a, j), D(b, j));
        for (int j = 0; j < m; ++j) std::swap(U(a, j), U(b, j));
        for (int i = 0; i < m; ++i) std::swap(Uinv(i, a), Uinv(i, b));
    }
    void swap_cols(int a, int b) {
        if (a == b) return;
        for (int i = 0; i < m; ++i) std::swap(D(i, a), D(i, b));
        for (int i = 0; i < n; ++i) std::swap(V(i, a), V(i, b));
    }
    // row_i -= q * row_t
    void row_axpy(int i, int t, const BigInt& q) {
        if (q == 0) return;
        for (int j = 0; j < n; ++j)
            if (D(t, j) != 0) D(i, j) -= q * D(t, j);
        for (int j = 0; j < m; ++j)
            if (U(t, j) != 0) U(i, j) -= q * U(t, j);
        for (int r = 0; r < m; ++r)
            if (Uinv(r, i) != 0) Uinv(r, t) += q * Uinv(r, i);
    }
    // col_j -= q * col_t
    void col_axpy(int j, int t, const BigInt& q) {
        if (q == 0) return;
        for (int i = 0; i < m; ++i)
            if (D(i, t) != 0) D(i, j) -= q * D(i, t);
        for (int i = 0; i < n; ++i)
            if (V(i, t) != 0) V(i, j) -= q * V(i, t);
    }
    void negate_row(int i) {
        for (int j = 0; j < n; ++j) D(i, j) = -D(i, j);
        for (int j = 0; j < m; ++j) U(i, j) = -U(i, j);
        for (int r = 0; r < m; ++r) Uinv(r, i) = -Uinv(r, i);
    }
};

}  // namespace

SmithForm smith_normal_form(const IntMatrix& A) {
    SnfWork w{A, IntMatrix::identity(A.rows()), IntMatrix::identity(A.rows()), IntMatrix::identity(A.cols()), A.rows(),
              A.cols()};
    int t = 0;
    const int lim = std::min(w.m, w.n);
    while (t < lim) {
        // Smallest nonzero entry of the trailing block becomes the pivot.
        int pi = -1, pj = -1;
        BigInt best = 0;
        for (int i = t; i < w.m; ++i)
            for (int j = t; j < w.n; ++j) {
                const BigInt& v = w.D(i, j);
                if (v != 0 && (pi < 0 || babs(v) < best)) {
                    best = babs(v);
                    pi = i;
                    pj = j;
                    if (best == 1) goto found;
                }
            }
    found:
        if (pi < 0) break;
        w.swap_rows(t, pi);
        w.swap_cols(t, pj);
        for (;;) {
            bool clean = true;
            for (int i = t + 1; i < w.m; ++i)
                if (w.D(i, t) != 0) {
                    w.row_axpy(i, t, quot(w.D(i, t), w.D(t, t)));
                    if (w.D(i, t) != 0) clean = false;
                }
            for (int j = t + 1; j < w.n; ++j)
                if (w.D(t, j) != 0) {
                    w.col_axpy(j, t, quot(w.D(t, j), w.D(t, t)));
                    if (w.D(t, j) != 0) clean = false;
                }
            if (!clean) {
                int bi = -1, bj = -1;
                BigInt b = babs(w.D(t, t));
                for (int i = t + 1; i < w.m; ++i)
                    if (w.D(i, t) != 0 && babs(w.D(i, t)) < b) b = babs(w.D(i, t)), bi = i, bj = -1;
                for (int j = t + 1; j < w.n; ++j)
                    if (w.D(t, j) != 0 && babs(w.D(t, j)) < b) b = babs(w.D(t, j)), bj = j, bi = -1;
                if (bi >= 0) w.swap_rows(t, bi);
                if (bj >= 0) w.swap_cols(t, bj);
                continue;
            }
            // Divisibility of the trailing block by the pivot.
            int bad = -1;
            for (int i = t + 1; i < w.m && bad < 0; ++i)
                for (int j = t + 1; j < w.n; ++j)
                    if (w.D(i, j) % w.D(t, t) != 0) {
                        bad = i;
                        break;
                    }
            if (bad < 0) break;
            w.row_axpy(t, bad, BigInt(-1));
        }
        if (w.D(t, t) < 0) w.negate_row(t);
        ++t;
    }
    SmithForm S;
    for (int i = 0; i < t; ++i) S.diagonal.push_back(w.D(i, i));
    S.U = std::move(w.U);
    S.Uinv = std::move(w.Uinv);
    S.V = std::move(w.V);
    return S;
}

IntMatrix hermite_rows(const IntMatrix& in) {
    IntMatrix H = in;
    const int m = H.rows(), n = H.cols();
    auto row_axpy = [&](int i, int t, const BigInt& q) {
        for (int j = 0; j < n; ++j)
            if (H(t, j) != 0) H(i, j) -= q * H(t, j);
    };
    auto swap_rows = [&](int a, int b) {
        for (int j = 0; j < n; ++j) std::swap(H(a, j), H(b, j));
    };
    int r = 0;
    std::vector<int> pivots;
    for (int c = 0; c < n && r < m; ++c) {
        for (;;) {
            int best = -1;
            for (int i = r; i < m; ++i)
                if (H(i, c) != 0 && (best < 0 || babs(H(i, c)) < babs(H(best, c)))) best = i;
            if (best < 0) break;
            swap_rows(r, best);
            bool done = true;
            for (int i = r + 1; i < m; ++i)
                if (H(i, c) != 0) {
                    row_axpy(i, r, quot(H(i, c), H(r, c)));
                    if (H(i, c) != 0) done = false;
                }
            if (done) break;
        }
        if (r < m && H(r, c) != 0) {
            if (H(r, c) < 0)
                for (int j = 0; j < n; ++j) H(r, j) = -H(r, j);
            for (int i = 0; i < r; ++i) {
                BigInt q = H(i, c) / H(r, c);
                if (H(i, c) - q * H(r, c) < 0) q -= 1;
                row_axpy(i, r, q);
            }
            pivots.push_back(c);
            ++r;
        }
    }
    IntMatrix out(r, n);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = H(i, j);
    return out;
}

IntMatrix integer_kernel_rows(const IntMatrix& A) {
    const int n = A.cols();
    if (A.rows() == 0) return hermite_rows(IntMatrix::identity(n));
    SmithForm S = smith_normal_form(A);
    int r = S.rank();
    IntMatrix K(n - r, n);
    for (int k = r; k < n; ++k)
        for (int i = 0; i < n; ++i) K(k - r, i) = S.V(i, k);
    return hermite_rows(K);
}

bool solve_integer(const IntMatrix& A, const std::vector<BigInt>& b, std::vector<BigInt>& x) {
    SmithForm S = smith_normal_form(A);
    const int m = A.rows(), n = A.cols();
    std::vector<BigInt> c(m, 0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (S.U(i, j) != 0) c[i] += S.U(i, j) * b[j];
    std::vector<BigInt> y(n, 0);
    for (int i = 0; i < m; ++i) {
        if (i < S.rank()) {
            if (c[i] % S.diagonal[i] != 0) return false;
            y[i] = c[i] / S.diagonal[i];
        } else if (c[i] != 0) {
            return false;
        }
    }
    x.assign(n, 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (S.V(i, j) != 0) x[i] += S.V(i, j) * y[j];
    return true;
}

void SparseIntMatrix::add(int r, int c, long long v) {
    if (v == 0) return;
    auto& row = row_entries[r];
    for (auto& e : row)
        if (e.first == c) {
            e.second += v;
            return;
        }
    row.emplace_back(c, v);
}

IntMatrix SparseIntMatrix::to_dense() const {
    IntMatrix D(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (auto& [c, v] : row_entries[r]) D(r, c) += v;
    return D;
}

std::vector<BigInt> sparse_invariant_factors(const SparseIntMatrix& A) {
    // Rows as sorted maps; eliminate +-1 pivots with the sparsest row/column first.
    std::vector<std::map<int, BigInt>> rows(A.rows);
    std::vector<std::map<int, int>> col_rows(A.cols);  // column -> set of rows (value unused)
    for (int r = 0; r < A.rows; ++r)
        for (auto& [c, v] : A.row_entries[r])
            if (v != 0) {
                rows[r][c] += v;
            }
    for (int r = 0; r < A.rows; ++r) {
        for (auto it = rows[r].begin(); it != rows[r].end();) {
            if (it->second == 0) it = rows[r].erase(it);
            else {
                col_rows[it->first][r] = 1;
                ++it;
            }
        }
    }
    std::vector<char> row_alive(A.rows, 1), col_alive(A.cols, 1);
    int units = 0;
    for (;;) {
        int best_r = -1, best_c = -1;
        long long best_cost = -1;
        for (int r = 0; r < A.rows; ++r) {
            if (!row_alive[r] || rows[r].empty()) continue;
            for (auto& [c, v] : rows[r]) {
                if (v != 1 && v != -1) continue;
                long long cost = static_cast<long long>(rows[r].size() - 1) * (col_rows[c].size() - 1);
                if (best_r < 0 || cost < best_cost) {
                    best_cost = cost;
                    best_r = r;
                    best_c = c;
                    if (cost == 0) break;
                }
            }
            if (best_cost == 0) break;
        }
        if (best_r < 0) break;
        ++units;
        BigInt pv = rows[best_r][best_c];
        std::vector<int> others;
        for (auto& [r, _] : col_rows[best_c])
            if (r != best_r) others.push_back(r);
        for (int r : others) {
            BigInt q = rows[r][best_c] * pv;  // pv = +-1 so this is the exact quotient
            for (auto& [c, v] : rows[best_r]) {
                BigInt nv = rows[r][c] - q * v;
                if (nv == 0) {
                    rows[r].erase(c);
                    col_rows[c].erase(r);
                } else {
                    rows[r][c] = nv;
                    col_rows[c][r] = 1;
                }
            }
        }
        for (auto& [c, v] : rows[best_r]) col_rows[c].erase(best_r);
        rows[best_r].clear();
        row_alive[best_r] = 0;
        col_alive[best_c] = 0;
    }
    // Dense Smith form on what remains.
    std::vector<int> rr, cc;
    std::map<int, int> cidx;
    for (int r = 0; r < A.rows; ++r)
        if (row_alive[r] && !rows[r].empty()) rr.push_back(r);
    for (int r : rr)
        for (auto& [c, v] : rows[r])
            if (!cidx.count(c)) cidx[c] = 0;
    int k = 0;
    for (auto& [c, i] : cidx) i = k++;
    std::vector<BigInt> out(units, BigInt(1));
    if (!rr.empty()) {
        IntMatrix D(static_cast<int>(rr.size()), k);
        for (size_t i = 0; i < rr.size(); ++i)
            for (auto& [c, v] : rows[rr[i]]) D(static_cast<int>(i), cidx[c]) = v;
        auto S = smith_normal_form(D);
        for (auto& d : S.diagonal) out.push_back(d);
    }
    std::sort(out.begin(), out.end());
    return out;
}

int sparse_rank(const SparseIntMatrix& A) { return static_cast<int>(sparse_invariant_factors(A).size()); }

}  // namespace hnorm
