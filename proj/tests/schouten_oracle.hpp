#pragma once

// Test-suite-only reference implementation of the multivector bracket: the
// double-sum expansion over decomposable factors,
//   [A1∧..∧Ap, B1∧..∧Bq]_alt = Σ_{u,v} (-1)^{u+v} [Au,Bv] ∧ A..û.. ∧ B..v̂..,
// with the function cases [P,f]_alt = (-1)^{p+1} Σ_u (-1)^{u-1} Au(f) A..û..
// and [f,Q]_alt = -Σ_v (-1)^{v-1} Bv(f) B..v̂.. , followed by the grading
// change (-1)^{p+1} to land in the library's convention. Everything here is
// written against components directly and never calls the library bracket.

#include "jgeo/multivec.hpp"

namespace oracle {

using namespace jgeo;

// one decomposable summand c * ∂_{i1} ∧ ... ∧ ∂_{ik} as a factor list
struct Factors {
    std::vector<Multivector> f; // grade-1 fields; coefficient carried on f[0]
};

inline Multivector single(const PatchPtr& p, int index, const ExpPoly& c) {
    Tensor t = Tensor::zero(p, 1, Variance::multivector);
    t.add_term({index}, c);
    return t;
}

inline ExpPoly apply_vec(const Multivector& x, const ExpPoly& f) {
    ExpPoly r = ExpPoly::zero(f.patch());
    for (int i = 0; i < f.patch()->dim(); ++i) r += x.component({i}) * f.derivative(i);
    return r;
}

inline Multivector vec_bracket(const Multivector& x, const Multivector& y) {
    const PatchPtr& p = x.patch();
    std::vector<ExpPoly> z;
    for (int j = 0; j < p->dim(); ++j)
        z.push_back(apply_vec(x, y.component({j})) - apply_vec(y, x.component({j})));
    return Tensor::vector_field(p, std::move(z));
}

inline Multivector wedge_all(const PatchPtr& p, const std::vector<Multivector>& fs) {
    Tensor acc = Tensor::scalar(p, ExpPoly::constant(p, 1));
    for (const auto& f : fs) acc = wedge(acc, f);
    return acc;
}

inline Multivector wedge_without(const PatchPtr& p, const std::vector<Multivector>& fs,
                                 size_t skip) {
    Tensor acc = Tensor::scalar(p, ExpPoly::constant(p, 1));
    for (size_t i = 0; i < fs.size(); ++i)
        if (i != skip) acc = wedge(acc, fs[i]);
    return acc;
}

// [P_factors, Q_factors]_alt for one pair of decomposable summands
inline Multivector alt_bracket_pieces(const PatchPtr& p, const Factors& a, const Factors& b,
                                      const ExpPoly* fa, const ExpPoly* fb) {
    const int pg = (int)a.f.size(), qg = (int)b.f.size();
    if (pg == 0 && qg == 0) return Tensor::zero(p, 0, Variance::multivector);
    if (pg == 0) { // [f, Q]
        Tensor out = Tensor::zero(p, qg - 1, Variance::multivector);
        for (size_t v = 0; v < b.f.size(); ++v) {
            Rat s = (v % 2 == 0 ? -1 : 1); // -(-1)^{v-1}, v one-based
            out = out + wedge_without(p, b.f, v).scale(apply_vec(b.f[v], *fa)).scale(s);
        }
        return out;
    }
    if (qg == 0) { // [P, f]
        Tensor out = Tensor::zero(p, pg - 1, Variance::multivector);
        for (size_t u = 0; u < a.f.size(); ++u) {
            Rat s = ((pg + 1 + u) % 2 == 0 ? 1 : -1); // (-1)^{p+1} (-1)^{u-1}
            out = out + wedge_without(p, a.f, u).scale(apply_vec(a.f[u], *fb)).scale(s);
        }
        return out;
    }
    Tensor out = Tensor::zero(p, pg + qg - 1, Variance::multivector);
    for (size_t u = 0; u < a.f.size(); ++u)
        for (size_t v = 0; v < b.f.size(); ++v) {
            Rat s = ((u + v) % 2 == 0 ? 1 : -1); // (-1)^{(u+1)+(v+1)} one-based
            Tensor piece = vec_bracket(a.f[u], b.f[v]);
            piece = wedge(piece, wedge_without(p, a.f, u));
            piece = wedge(piece, wedge_without(p, b.f, v));
            out = out + piece.scale(s);
        }
    return out;
}

inline std::vector<std::pair<Factors, ExpPoly>> decompose(const Multivector& t) {
    std::vector<std::pair<Factors, ExpPoly>> out;
    for (const auto& [idx, c] : t.components()) {
        Factors fs;
        for (size_t k = 0; k < idx.size(); ++k)
            fs.f.push_back(single(t.patch(), idx[k],
                                  k == 0 ? c : ExpPoly::constant(t.patch(), 1)));
        out.emplace_back(std::move(fs), c);
    }
    return out;
}

// reference bracket in the library grading: (-1)^{p+1} times the double sum
inline Multivector bracket_reference(const Multivector& P, const Multivector& Q) {
    const PatchPtr& p = P.patch();
    const int pg = P.grade(), qg = Q.grade();
    int out_grade = pg + qg - 1 < 0 ? 0 : pg + qg - 1;
    Tensor alt = Tensor::zero(p, out_grade, Variance::multivector);
    for (const auto& [af, ac] : decompose(P))
        for (const auto& [bf, bc] : decompose(Q)) {
            const ExpPoly* fa = pg == 0 ? &ac : nullptr;
            const ExpPoly* fb = qg == 0 ? &bc : nullptr;
            alt = alt + alt_bracket_pieces(p, af, bf, fa, fb);
        }
    return (pg + 1) % 2 == 0 ? alt : -alt;
}

} // namespace oracle
