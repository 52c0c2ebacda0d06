#pragma once

#include "jgeo/exppoly.hpp"

namespace jgeo {

// Dense matrix over the exp-polynomial ring.
struct RingMat {
    PatchPtr patch = make_patch({});
    int rows = 0, cols = 0;
    std::vector<ExpPoly> a; // row-major

    static RingMat zero(const PatchPtr& p, int r, int c);
    static RingMat identity(const PatchPtr& p, int n);
    static RingMat from_rows(const PatchPtr& p, const std::vector<std::vector<ExpPoly>>& rows);

    ExpPoly& at(int i, int j) { return a[(size_t)i * cols + j]; }
    const ExpPoly& at(int i, int j) const { return a[(size_t)i * cols + j]; }

    RingMat operator*(const RingMat& o) const;
    RingMat operator+(const RingMat& o) const;
    RingMat operator-(const RingMat& o) const;
    RingMat transposed() const;
    std::vector<ExpPoly> apply(const std::vector<ExpPoly>& v) const; // M v
    bool operator==(const RingMat& o) const;
};

ExpPoly det(const RingMat& m);
RingMat adjugate(const RingMat& m);

// Exact solution of M x = det(M) * rhs via the adjugate; the caller divides
// by det(M) when (and only when) it is a unit of the ring.
struct LinearSolution {
    std::vector<ExpPoly> scaled_x; // adj(M) * rhs
    ExpPoly det;
};
LinearSolution solve_linear(const RingMat& m, const std::vector<ExpPoly>& rhs);

// Division performed: requires det(M) to be a unit.
std::vector<ExpPoly> solve_unit_det(const RingMat& m, const std::vector<ExpPoly>& rhs);
RingMat inverse_unit_det(const RingMat& m);

} // namespace jgeo
