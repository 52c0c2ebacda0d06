#include "jgeo/matrix.hpp"

#include "jgeo/errors.hpp"

namespace jgeo {

RingMat RingMat::zero(const PatchPtr& p, int r, int c) {
    RingMat m;
    m.patch = p;
    m.rows = r;
    m.cols = c;
    m.a.assign((size_t)r * c, ExpPoly::zero(p));
    return m;
}

RingMat RingMat::identity(const PatchPtr& p, int n) {
    RingMat m = zero(p, n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = ExpPoly::constant(p, 1);
    return m;
}

RingMat RingMat::from_rows(const PatchPtr& p, const std::vector<std::vector<ExpPoly>>& rows) {
    RingMat m;
    m.patch = p;
    m.rows = (int)rows.size();
    m.cols = rows.empty() ? 0 : (int)rows[0].size();
    for (const auto& r : rows) {
        if ((int)r.size() != m.cols) throw structural_error("ragged matrix rows");
        for (const auto& e : r) {
            require_same_patch(p, e.patch(), "matrix entry");
            m.a.push_back(e);
        }
    }
    return m;
}

RingMat RingMat::operator*(const RingMat& o) const {
    if (cols != o.rows) throw structural_error("matrix product shape mismatch");
    require_same_patch(patch, o.patch, "matrix product");
    RingMat r = zero(patch, rows, o.cols);
    for (int i = 0; i < rows; ++i)
        for (int k = 0; k < cols; ++k) {
            if (at(i, k).is_zero()) continue;
            for (int j = 0; j < o.cols; ++j) r.at(i, j) += at(i, k) * o.at(k, j);
        }
    return r;
}

RingMat RingMat::operator+(const RingMat& o) const {
    if (rows != o.rows || cols != o.cols) throw structural_error("matrix sum shape mismatch");
    RingMat r = *this;
    for (size_t i = 0; i < a.size(); ++i) r.a[i] += o.a[i];
    return r;
}

RingMat RingMat::operator-(const RingMat& o) const {
    if (rows != o.rows || cols != o.cols) throw structural_error("matrix sum shape mismatch");
    RingMat r = *this;
    for (size_t i = 0; i < a.size(); ++i) r.a[i] -= o.a[i];
    return r;
}

RingMat RingMat::transposed() const {
    RingMat r = zero(patch, cols, rows);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) r.at(j, i) = at(i, j);
    return r;
}

std::vector<ExpPoly> RingMat::apply(const std::vector<ExpPoly>& v) const {
    if ((int)v.size() != cols) throw structural_error("matrix-vector shape mismatch");
    std::vector<ExpPoly> r(rows, ExpPoly::zero(patch));
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            if (!at(i, j).is_zero()) r[i] += at(i, j) * v[j];
    return r;
}

bool RingMat::operator==(const RingMat& o) const {
    return rows == o.rows && cols == o.cols && a == o.a;
}

namespace {

// det of the submatrix taken from the first popcount(mask) rows of `m`
// (rows remapped through row_of) and the column set `mask`, over all masks
// drawn from `num_cols` columns. Classic subset dynamic program: expand
// along the last used row. Masks needing more rows than available stay zero.
std::vector<ExpPoly> det_dp(const RingMat& m, const std::vector<int>& row_of, int num_cols) {
    const int n = num_cols;
    std::vector<ExpPoly> f((size_t)1 << n, ExpPoly::zero(m.patch));
    f[0] = ExpPoly::constant(m.patch, 1);
    for (unsigned mask = 1; mask < f.size(); ++mask) {
        int r = __builtin_popcount(mask);
        if (r > (int)row_of.size()) continue;
        int row = row_of[r - 1];
        int pos = 0; // index of column j within mask, in increasing order
        ExpPoly acc = ExpPoly::zero(m.patch);
        for (int j = 0; j < n; ++j) {
            if (!(mask & (1u << j))) continue;
            const ExpPoly& entry = m.at(row, j);
            if (!entry.is_zero()) {
                ExpPoly contrib = entry * f[mask & ~(1u << j)];
                if (((r - 1) + pos) % 2 == 0)
                    acc += contrib;
                else
                    acc -= contrib;
            }
            ++pos;
        }
        f[mask] = std::move(acc);
    }
    return f;
}

} // namespace

ExpPoly det(const RingMat& m) {
    if (m.rows != m.cols) throw structural_error("determinant of non-square matrix");
    const int n = m.rows;
    if (n == 0) return ExpPoly::constant(m.patch, 1);
    std::vector<int> row_of(n);
    for (int i = 0; i < n; ++i) row_of[i] = i;
    return det_dp(m, row_of, n)[((size_t)1 << n) - 1];
}

RingMat adjugate(const RingMat& m) {
    if (m.rows != m.cols) throw structural_error("adjugate of non-square matrix");
    const int n = m.rows;
    if (n == 0) return RingMat::zero(m.patch, 0, 0);
    if (n == 1) return RingMat::identity(m.patch, 1);
    RingMat adj = RingMat::zero(m.patch, n, n);
    const unsigned full = ((unsigned)1 << n) - 1;
    for (int dropped = 0; dropped < n; ++dropped) {
        std::vector<int> row_of;
        for (int i = 0; i < n; ++i)
            if (i != dropped) row_of.push_back(i);
        std::vector<ExpPoly> f = det_dp(m, row_of, n);
        for (int col = 0; col < n; ++col) {
            // adj_{col,dropped} = (-1)^{dropped+col} * minor with row `dropped`
            // and column `col` removed
            ExpPoly minor = f[full & ~(1u << col)];
            adj.at(col, dropped) = (dropped + col) % 2 == 0 ? minor : -minor;
        }
    }
    return adj;
}

LinearSolution solve_linear(const RingMat& m, const std::vector<ExpPoly>& rhs) {
    if (m.rows != m.cols) throw structural_error("linear solve needs a square matrix");
    if ((int)rhs.size() != m.rows) throw structural_error("linear solve shape mismatch");
    LinearSolution s{adjugate(m).apply(rhs), det(m)};
    return s;
}

std::vector<ExpPoly> solve_unit_det(const RingMat& m, const std::vector<ExpPoly>& rhs) {
    LinearSolution s = solve_linear(m, rhs);
    if (s.det.is_zero()) throw singular_matrix_error("matrix is singular over the ring");
    if (!s.det.is_unit())
        throw singular_matrix_error("determinant is not a unit: " + s.det.text());
    ExpPoly inv = s.det.unit_inverse();
    for (ExpPoly& x : s.scaled_x) x = x * inv;
    return s.scaled_x;
}

RingMat inverse_unit_det(const RingMat& m) {
    ExpPoly d = det(m);
    if (d.is_zero()) throw singular_matrix_error("matrix is singular over the ring");
    if (!d.is_unit()) throw singular_matrix_error("determinant is not a unit: " + d.text());
    ExpPoly inv = d.unit_inverse();
    RingMat adj = adjugate(m);
    for (ExpPoly& e : adj.a) e = e * inv;
    return adj;
}

} // namespace jgeo
