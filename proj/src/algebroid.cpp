#include "jgeo/algebroid.hpp"

#include "jgeo/errors.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace jgeo {

// ---------------------------------------------------------------------------
// structure container

const ExpPoly& AlgebroidStructure::bracket_coeff(int i, int j, int k) const {
    if (i < 0 || i >= rank || j < 0 || j >= rank || k < 0 || k >= rank)
        throw structural_error("frame index out of range");
    return c[((size_t)i * rank + j) * rank + k];
}

Multivector AlgebroidStructure::bracket_of_basis(int i, int j) const {
    Tensor t = Tensor::frame_zero(base, rank, 1, Variance::multivector);
    for (int k = 0; k < rank; ++k) t.add_term({k}, bracket_coeff(i, j, k));
    return t;
}

AlgebroidStructure make_algebroid(const PatchPtr& base, int rank, RingMat anchor,
                                  const std::vector<StructureEntry>& entries,
                                  std::string name, std::vector<std::string> frame) {
    if (rank < 0) throw structural_error("negative rank");
    if (anchor.rows != rank || anchor.cols != base->dim())
        throw structural_error("anchor shape: one row per frame section, one column per base variable");
    require_same_patch(anchor.patch, base, "anchor");
    if (frame.empty())
        for (int i = 0; i < rank; ++i) frame.push_back("e" + std::to_string(i + 1));
    if ((int)frame.size() != rank) throw structural_error("frame: one name per section");
    for (size_t i = 0; i < frame.size(); ++i)
        for (size_t j = i + 1; j < frame.size(); ++j)
            if (frame[i] == frame[j])
                throw structural_error("duplicate frame name '" + frame[i] + "'");
    AlgebroidStructure a;
    a.base = base;
    a.rank = rank;
    a.frame = std::move(frame);
    a.anchor = std::move(anchor);
    a.name = std::move(name);
    a.c.assign((size_t)rank * rank * rank, ExpPoly::zero(base));
    for (const auto& e : entries) {
        if (e.i < 0 || e.j >= rank || e.i >= e.j || e.k < 0 || e.k >= rank)
            throw structural_error("structure entries are indexed i < j with k in range");
        require_same_patch(e.coeff.patch(), base, "structure function");
        a.c[((size_t)e.i * rank + e.j) * rank + e.k] += e.coeff;
        a.c[((size_t)e.j * rank + e.i) * rank + e.k] -= e.coeff;
    }
    return a;
}

Multivector section_zero(const AlgebroidStructure& a, int grade) {
    return Tensor::frame_zero(a.base, a.rank, grade, Variance::multivector);
}

DifferentialForm dual_zero(const AlgebroidStructure& a, int grade) {
    return Tensor::frame_zero(a.base, a.rank, grade, Variance::form);
}

Multivector section_basis(const AlgebroidStructure& a, const std::vector<int>& indices) {
    return Tensor::frame_basis(a.base, a.rank, Variance::multivector, indices);
}

DifferentialForm dual_basis(const AlgebroidStructure& a, const std::vector<int>& indices) {
    return Tensor::frame_basis(a.base, a.rank, Variance::form, indices);
}

namespace {

Tensor grade_one_of(const AlgebroidStructure& a, std::vector<ExpPoly> comps, Variance v) {
    if ((int)comps.size() != a.rank)
        throw structural_error("section needs one component per frame section");
    Tensor t = Tensor::frame_zero(a.base, a.rank, 1, v);
    for (int i = 0; i < a.rank; ++i) t.add_term({i}, comps[i]);
    return t;
}

void require_section(const AlgebroidStructure& a, const Tensor& t, Variance v, const char* what) {
    require_same_patch(a.base, t.patch(), what);
    if (t.index_dim() != a.rank)
        throw structural_error(std::string(what) + ": tensor is not indexed by the frame");
    if (t.variance() != v)
        throw structural_error(std::string(what) + ": wrong variance");
}

void require_host(const AlgebroidStructure& a, const Cocycle& phi, const char* what) {
    require_same_patch(a.base, phi.host.base, what);
    if (phi.host.rank != a.rank || !(phi.host.anchor == a.anchor) || phi.host.c != a.c)
        throw structural_error(std::string(what) + ": cocycle lives on a different algebroid");
}

// all strictly increasing k-tuples from {0..n-1}
std::vector<std::vector<int>> increasing_tuples(int n, int k) {
    std::vector<std::vector<int>> out;
    if (k < 0 || k > n) return out;
    std::vector<int> cur;
    std::function<void(int)> rec = [&](int start) {
        if ((int)cur.size() == k) {
            out.push_back(cur);
            return;
        }
        for (int i = start; i <= n - (k - (int)cur.size()); ++i) {
            cur.push_back(i);
            rec(i + 1);
            cur.pop_back();
        }
    };
    rec(0);
    return out;
}

} // namespace

Multivector section_of(const AlgebroidStructure& a, std::vector<ExpPoly> comps) {
    return grade_one_of(a, std::move(comps), Variance::multivector);
}

DifferentialForm dual_of(const AlgebroidStructure& a, std::vector<ExpPoly> comps) {
    return grade_one_of(a, std::move(comps), Variance::form);
}

// ---------------------------------------------------------------------------
// anchor

ExpPoly anchor_apply(const AlgebroidStructure& a, int i, const ExpPoly& f) {
    ExpPoly r = ExpPoly::zero(a.base);
    for (int l = 0; l < a.base->dim(); ++l) {
        const ExpPoly& rho = a.anchor.at(i, l);
        if (!rho.is_zero()) r += rho * f.derivative(l);
    }
    return r;
}

Multivector anchor_field(const AlgebroidStructure& a, const Multivector& x) {
    require_section(a, x, Variance::multivector, "anchor");
    if (x.grade() != 1) throw structural_error("anchor applies to grade-1 sections");
    std::vector<ExpPoly> comps(a.base->dim(), ExpPoly::zero(a.base));
    for (int i = 0; i < a.rank; ++i) {
        ExpPoly xi = x.component({i});
        if (xi.is_zero()) continue;
        for (int l = 0; l < a.base->dim(); ++l) comps[l] += xi * a.anchor.at(i, l);
    }
    return Tensor::vector_field(a.base, std::move(comps));
}

ExpPoly anchor_derivation(const AlgebroidStructure& a, const Multivector& x, const ExpPoly& f) {
    require_section(a, x, Variance::multivector, "anchor");
    if (x.grade() != 1) throw structural_error("anchor applies to grade-1 sections");
    ExpPoly r = ExpPoly::zero(a.base);
    for (int i = 0; i < a.rank; ++i) {
        ExpPoly xi = x.component({i});
        if (!xi.is_zero()) r += xi * anchor_apply(a, i, f);
    }
    return r;
}

// ---------------------------------------------------------------------------
// differential

DifferentialForm differential(const AlgebroidStructure& a, const ExpPoly& f) {
    require_same_patch(a.base, f.patch(), "differential");
    Tensor r = dual_zero(a, 1);
    for (int i = 0; i < a.rank; ++i) r.add_term({i}, anchor_apply(a, i, f));
    return r;
}

DifferentialForm differential(const AlgebroidStructure& a, const DifferentialForm& w) {
    require_section(a, w, Variance::form, "differential");
    if (w.grade() == 0) return differential(a, w.component({}));
    const int g = w.grade();
    Tensor r = dual_zero(a, g + 1);
    for (const auto& tup : increasing_tuples(a.rank, g + 1)) {
        ExpPoly val = ExpPoly::zero(a.base);
        for (int pos = 0; pos <= g; ++pos) {
            std::vector<int> rest;
            rest.reserve(g);
            for (int q = 0; q <= g; ++q)
                if (q != pos) rest.push_back(tup[q]);
            ExpPoly wc = w.component(rest);
            if (wc.is_zero()) continue;
            ExpPoly d = anchor_apply(a, tup[pos], wc);
            val += pos % 2 == 0 ? d : -d;
        }
        for (int p1 = 0; p1 <= g; ++p1)
            for (int p2 = p1 + 1; p2 <= g; ++p2) {
                std::vector<int> rest;
                rest.reserve(g);
                rest.push_back(0); // placeholder for the bracket index
                for (int q = 0; q <= g; ++q)
                    if (q != p1 && q != p2) rest.push_back(tup[q]);
                for (int k = 0; k < a.rank; ++k) {
                    const ExpPoly& ck = a.bracket_coeff(tup[p1], tup[p2], k);
                    if (ck.is_zero()) continue;
                    rest[0] = k;
                    ExpPoly wc = w.component(rest);
                    if (wc.is_zero()) continue;
                    ExpPoly d = ck * wc;
                    val += (p1 + p2) % 2 == 0 ? d : -d;
                }
            }
        r.add_term(tup, val);
    }
    return r;
}

// ---------------------------------------------------------------------------
// cocycles

Cocycle make_cocycle(const AlgebroidStructure& a, std::vector<ExpPoly> comps) {
    if ((int)comps.size() != a.rank)
        throw structural_error("cocycle needs one component per frame section");
    for (const auto& f : comps) require_same_patch(f.patch(), a.base, "cocycle component");
    Cocycle phi;
    phi.host = a;
    phi.comps = std::move(comps);
    return phi;
}

DifferentialForm cocycle_form(const Cocycle& phi) {
    Tensor t = Tensor::frame_zero(phi.host.base, phi.host.rank, 1, Variance::form);
    for (int i = 0; i < phi.host.rank; ++i) t.add_term({i}, phi.comps[i]);
    return t;
}

Verdict verify_cocycle(Cocycle& phi) {
    const AlgebroidStructure& a = phi.host;
    Verdict v;
    for (int i = 0; i < a.rank; ++i)
        for (int j = i + 1; j < a.rank; ++j) {
            ExpPoly lhs = ExpPoly::zero(a.base);
            for (int k = 0; k < a.rank; ++k) {
                const ExpPoly& ck = a.bracket_coeff(i, j, k);
                if (!ck.is_zero()) lhs += ck * phi.comps[k];
            }
            ExpPoly rhs = anchor_apply(a, i, phi.comps[j]) - anchor_apply(a, j, phi.comps[i]);
            v.check_zero("cocycle identity on (" + a.frame[i] + ", " + a.frame[j] + ")", lhs - rhs);
        }
    phi.verified = v.pass;
    return v;
}

DifferentialForm differential_with_cocycle(const AlgebroidStructure& a, const Cocycle& phi,
                                           const ExpPoly& f) {
    require_host(a, phi, "differential");
    return differential(a, f) + cocycle_form(phi).scale(f);
}

DifferentialForm differential_with_cocycle(const AlgebroidStructure& a, const Cocycle& phi,
                                           const DifferentialForm& w) {
    require_host(a, phi, "differential");
    return differential(a, w) + wedge(cocycle_form(phi), w);
}

// ---------------------------------------------------------------------------
// Schouten calculus

namespace {

Multivector alg_lie_bracket(const AlgebroidStructure& a, const Multivector& x,
                            const Multivector& y) {
    Tensor out = section_zero(a, 1);
    for (int k = 0; k < a.rank; ++k) {
        ExpPoly z = ExpPoly::zero(a.base);
        for (int i = 0; i < a.rank; ++i) {
            ExpPoly xi = x.component({i}), yi = y.component({i});
            if (!xi.is_zero()) z += xi * anchor_apply(a, i, y.component({k}));
            if (!yi.is_zero()) z -= yi * anchor_apply(a, i, x.component({k}));
        }
        for (int i = 0; i < a.rank; ++i)
            for (int j = i + 1; j < a.rank; ++j) {
                const ExpPoly& ck = a.bracket_coeff(i, j, k);
                if (ck.is_zero()) continue;
                z += (x.component({i}) * y.component({j}) - x.component({j}) * y.component({i})) * ck;
            }
        out.add_term({k}, z);
    }
    return out;
}

Multivector alg_lie_derive(const AlgebroidStructure& a, const Multivector& x,
                           const Multivector& q) {
    if (q.grade() == 0) {
        Tensor out = section_zero(a, 0);
        out.add_term({}, anchor_derivation(a, x, q.component({})));
        return out;
    }
    if (q.grade() == 1) return alg_lie_bracket(a, x, q);
    Tensor out = section_zero(a, q.grade());
    for (const auto& [idx, c] : q.components()) {
        // ρ(X)(c) e_I  +  c Σ e_.. ∧ [X, e_j] ∧ ..
        out.add_term(idx, anchor_derivation(a, x, c));
        for (size_t pos = 0; pos < idx.size(); ++pos) {
            const int j = idx[pos];
            for (int k = 0; k < a.rank; ++k) {
                ExpPoly d = -anchor_apply(a, j, x.component({k}));
                for (int i = 0; i < a.rank; ++i) {
                    ExpPoly xi = x.component({i});
                    if (!xi.is_zero()) d += xi * a.bracket_coeff(i, j, k);
                }
                if (d.is_zero()) continue;
                std::vector<int> nidx = idx;
                nidx[pos] = k;
                out.add_term(std::move(nidx), c * d);
            }
        }
    }
    return out;
}

} // namespace

Multivector algebroid_schouten(const AlgebroidStructure& a, const Multivector& pp,
                               const Multivector& qq) {
    require_section(a, pp, Variance::multivector, "bracket");
    require_section(a, qq, Variance::multivector, "bracket");
    const int p = pp.grade(), q = qq.grade();
    if (p == 0 && q == 0) return section_zero(a, 0);
    if (p == 0) return interior_product(differential(a, pp.component({})), qq);
    if (q == 0) return interior_product(differential(a, qq.component({})), pp);
    if (p == 1) return alg_lie_derive(a, pp, qq);
    // peel the first factor of each term of pp:
    // [X∧P', Q] = (-1)^{pq} ( [Q,X]∧P' + (-1)^{q+1} X∧[Q,P'] )
    Tensor out = section_zero(a, p + q - 1);
    const Rat spq = (p * q) % 2 == 0 ? 1 : -1;
    const Rat sq1 = (q + 1) % 2 == 0 ? 1 : -1;
    for (const auto& [idx, c] : pp.components()) {
        Tensor x = section_zero(a, 1);
        x.add_term({idx[0]}, c);
        Tensor rest = section_basis(a, std::vector<int>(idx.begin() + 1, idx.end()));
        Tensor qx = algebroid_schouten(a, qq, x);
        Tensor qrest = algebroid_schouten(a, qq, rest);
        out = out + (wedge(qx, rest) + wedge(x, qrest).scale(sq1)).scale(spq);
    }
    return out;
}

Multivector phi0_schouten(const AlgebroidStructure& a, const Cocycle& phi,
                          const Multivector& pp, const Multivector& qq) {
    require_host(a, phi, "deformed bracket");
    const int p = pp.grade(), q = qq.grade();
    Tensor out = algebroid_schouten(a, pp, qq);
    Tensor pf = cocycle_form(phi);
    if (q >= 1 && p != 1) {
        const Rat coef = (p + 1) % 2 == 0 ? Rat(p - 1) : Rat(1 - p);
        out = out + wedge(pp, interior_product(pf, qq)).scale(coef);
    }
    if (p >= 1 && q != 1)
        out = out + wedge(interior_product(pf, pp), qq).scale(Rat(1 - q));
    return out;
}

Multivector phi0_lie_derivative(const AlgebroidStructure& a, const Cocycle& phi,
                                const Multivector& x, const Multivector& p) {
    if (x.grade() != 1 || x.variance() != Variance::multivector)
        throw structural_error("deformed Lie derivative needs a grade-1 section");
    return phi0_schouten(a, phi, x, p);
}

// ---------------------------------------------------------------------------
// structure checks

Verdict verify_algebroid(AlgebroidStructure& a) {
    Verdict v;
    for (int i = 0; i < a.rank; ++i)
        for (int j = i + 1; j < a.rank; ++j) {
            Tensor lhs = anchor_field(a, a.bracket_of_basis(i, j));
            Tensor rhs = schouten(anchor_field(a, section_basis(a, {i})),
                                  anchor_field(a, section_basis(a, {j})));
            v.check_zero("anchor compatibility on (" + a.frame[i] + ", " + a.frame[j] + ")",
                         lhs - rhs);
        }
    for (int i = 0; i < a.rank; ++i)
        for (int j = i + 1; j < a.rank; ++j)
            for (int k = j + 1; k < a.rank; ++k) {
                Tensor ei = section_basis(a, {i}), ej = section_basis(a, {j}),
                       ek = section_basis(a, {k});
                Tensor jac = algebroid_schouten(a, ei, algebroid_schouten(a, ej, ek)) +
                             algebroid_schouten(a, ej, algebroid_schouten(a, ek, ei)) +
                             algebroid_schouten(a, ek, algebroid_schouten(a, ei, ej));
                v.check_zero("Jacobi identity on (" + a.frame[i] + ", " + a.frame[j] + ", " +
                                 a.frame[k] + ")",
                             jac);
            }
    a.verified = v.pass;
    return v;
}

Verdict algebroid_morphism_check(const AlgebroidStructure& src, const AlgebroidStructure& dst,
                                 const RingMat& m) {
    require_same_patch(src.base, dst.base, "morphism");
    if (m.rows != dst.rank || m.cols != src.rank)
        throw structural_error("frame map shape: target rank x source rank");
    require_same_patch(m.patch, src.base, "frame map");
    auto image = [&](int i) {
        Tensor t = section_zero(dst, 1);
        for (int k = 0; k < dst.rank; ++k) t.add_term({k}, m.at(k, i));
        return t;
    };
    Verdict v;
    for (int i = 0; i < src.rank; ++i)
        v.check_zero("anchor match on " + src.frame[i],
                     anchor_field(dst, image(i)) - anchor_field(src, section_basis(src, {i})));
    for (int i = 0; i < src.rank; ++i)
        for (int j = i + 1; j < src.rank; ++j) {
            Tensor lhs = section_zero(dst, 1);
            for (int k = 0; k < src.rank; ++k) {
                const ExpPoly& ck = src.bracket_coeff(i, j, k);
                if (!ck.is_zero()) lhs = lhs + image(k).scale(ck);
            }
            Tensor rhs = algebroid_schouten(dst, image(i), image(j));
            v.check_zero("bracket match on (" + src.frame[i] + ", " + src.frame[j] + ")",
                         lhs - rhs);
        }
    return v;
}

// ---------------------------------------------------------------------------
// product with the tangent line and the graded embedding

AlgebroidStructure product_with_tangent_line(const AlgebroidStructure& a,
                                             const std::string& time_var) {
    PatchPtr ext = extend_patch(a.base, {time_var});
    const int n = a.base->dim(), r = a.rank;
    std::vector<std::string> frame = a.frame;
    frame.push_back("et");
    RingMat rho = RingMat::zero(ext, r + 1, n + 1);
    for (int i = 0; i < r; ++i)
        for (int l = 0; l < n; ++l) rho.at(i, l) = a.anchor.at(i, l).transported(ext);
    rho.at(r, n) = ExpPoly::constant(ext, 1);
    std::vector<StructureEntry> entries;
    for (int i = 0; i < r; ++i)
        for (int j = i + 1; j < r; ++j)
            for (int k = 0; k < r; ++k) {
                const ExpPoly& ck = a.bracket_coeff(i, j, k);
                if (!ck.is_zero()) entries.push_back({i, j, k, ck.transported(ext)});
            }
    AlgebroidStructure out = make_algebroid(
        ext, r + 1, std::move(rho), entries,
        a.name.empty() ? "product with the tangent line" : a.name + " x tangent line",
        std::move(frame));
    verify_algebroid(out);
    return out;
}

Multivector u_lift(const AlgebroidStructure& product, const Cocycle& phi, const Multivector& p) {
    const AlgebroidStructure& a = phi.host;
    require_section(a, p, Variance::multivector, "lift");
    if (product.rank != a.rank + 1 || product.base->dim() != a.base->dim() + 1 ||
        !std::equal(a.base->names.begin(), a.base->names.end(), product.base->names.begin()))
        throw structural_error("lift target is not the product with the tangent line");
    const PatchPtr& ext = product.base;
    const int g = p.grade();
    Tensor up = p.coeffs_transported(ext).widened(a.rank + 1);
    if (g >= 1) {
        Tensor ip = interior_product(cocycle_form(phi), p);
        Tensor et = Tensor::frame_basis(ext, a.rank + 1, Variance::multivector, {a.rank});
        up = up + wedge(ip.coeffs_transported(ext).widened(a.rank + 1), et);
    }
    std::vector<Rat> lin(ext->dim(), Rat(0));
    lin.back() = Rat(1 - g); // e^{-(g-1)t} on the appended time coordinate
    return up.scale(ExpPoly::exponential(ext, Rat(0), std::move(lin)));
}

Verdict u_embedding_check(const AlgebroidStructure& a, const Cocycle& phi, const Multivector& p,
                          const Multivector& q) {
    require_host(a, phi, "embedding check");
    AlgebroidStructure prod = product_with_tangent_line(a);
    Tensor lhs = u_lift(prod, phi, phi0_schouten(a, phi, p, q));
    Tensor rhs = algebroid_schouten(prod, u_lift(prod, phi, p), u_lift(prod, phi, q));
    Verdict v;
    v.check_zero("lift of the deformed bracket minus bracket of the lifts", lhs - rhs);
    return v;
}

// ---------------------------------------------------------------------------
// standard constructions

AlgebroidStructure build_tm_times_r(const PatchPtr& base) {
    const int n = base->dim();
    RingMat rho = RingMat::zero(base, n + 1, n);
    for (int i = 0; i < n; ++i) rho.at(i, i) = ExpPoly::constant(base, 1);
    AlgebroidStructure a =
        make_algebroid(base, n + 1, std::move(rho), {}, "first-order operators");
    verify_algebroid(a);
    return a;
}

Cocycle tm_times_r_cocycle(const AlgebroidStructure& a) {
    if (a.rank != a.base->dim() + 1)
        throw structural_error("expects the first-order operator algebroid");
    std::vector<ExpPoly> comps(a.rank, ExpPoly::zero(a.base));
    comps.back() = ExpPoly::constant(a.base, 1);
    Cocycle phi = make_cocycle(a, std::move(comps));
    verify_cocycle(phi);
    return phi;
}

namespace {

ExpPoly apply_field(const Multivector& x, const ExpPoly& f) {
    ExpPoly r = ExpPoly::zero(f.patch());
    for (int i = 0; i < f.patch()->dim(); ++i) {
        ExpPoly xi = x.component({i});
        if (!xi.is_zero()) r += xi * f.derivative(i);
    }
    return r;
}

} // namespace

CosectionPair cotangent_bracket(const JacobiStructure& j, const CosectionPair& x,
                                const CosectionPair& y) {
    require_same_patch(j.patch, x.form.patch(), "pair bracket");
    require_same_patch(j.patch, y.form.patch(), "pair bracket");
    if (x.form.grade() != 1 || y.form.grade() != 1 || x.form.variance() != Variance::form ||
        y.form.variance() != Variance::form)
        throw structural_error("pair bracket takes (1-form, function) pairs");
    Multivector sx = sharp_map(j.lambda, x.form);
    Multivector sy = sharp_map(j.lambda, y.form);
    ExpPoly lxy = bivector_eval(j.lambda, x.form, y.form);
    Tensor form = lie_derivative(sx, y.form) - lie_derivative(sy, x.form) - de_rham(lxy) +
                  lie_derivative(j.e, y.form).scale(x.fn) -
                  lie_derivative(j.e, x.form).scale(y.fn) -
                  interior_product(j.e, wedge(x.form, y.form));
    ExpPoly fn = -lxy + apply_field(sx, y.fn) - apply_field(sy, x.fn) +
                 x.fn * apply_field(j.e, y.fn) - y.fn * apply_field(j.e, x.fn);
    return {form, fn};
}

AlgebroidStructure build_jacobi_cotangent(const JacobiStructure& j) {
    if (!j.verified)
        throw precondition_error("cotangent construction needs a verified Jacobi structure");
    const PatchPtr& p = j.patch;
    const int n = p->dim();
    RingMat rho = RingMat::zero(p, n + 1, n);
    for (int i = 0; i < n; ++i) {
        Multivector s = sharp_map(j.lambda, Tensor::basis(p, Variance::form, {i}));
        for (int l = 0; l < n; ++l) rho.at(i, l) = s.component({l});
    }
    for (int l = 0; l < n; ++l) rho.at(n, l) = j.e.component({l});
    auto frame_pair = [&](int i) -> CosectionPair {
        if (i < n) return {Tensor::basis(p, Variance::form, {i}), ExpPoly::zero(p)};
        return {Tensor::zero(p, 1, Variance::form), ExpPoly::constant(p, 1)};
    };
    std::vector<StructureEntry> entries;
    for (int i = 0; i <= n; ++i)
        for (int jj = i + 1; jj <= n; ++jj) {
            CosectionPair br = cotangent_bracket(j, frame_pair(i), frame_pair(jj));
            for (int k = 0; k < n; ++k) {
                ExpPoly ck = br.form.component({k});
                if (!ck.is_zero()) entries.push_back({i, jj, k, std::move(ck)});
            }
            if (!br.fn.is_zero()) entries.push_back({i, jj, n, std::move(br.fn)});
        }
    AlgebroidStructure a = make_algebroid(p, n + 1, std::move(rho), entries,
                                          "cotangent algebroid of a Jacobi structure");
    Verdict v = verify_algebroid(a);
    if (!v.pass)
        throw structural_error("cotangent algebroid fails verification:\n" + v.summary());
    return a;
}

Cocycle jacobi_cotangent_cocycle(const AlgebroidStructure& a, const JacobiStructure& j) {
    require_same_patch(a.base, j.patch, "cotangent cocycle");
    const int n = j.patch->dim();
    if (a.rank != n + 1) throw structural_error("expects the cotangent algebroid");
    std::vector<ExpPoly> comps;
    for (int i = 0; i < n; ++i) comps.push_back(-j.e.component({i}));
    comps.push_back(ExpPoly::zero(j.patch));
    Cocycle phi = make_cocycle(a, std::move(comps));
    Verdict v = verify_cocycle(phi);
    if (!v.pass)
        throw structural_error("cotangent cocycle fails verification:\n" + v.summary());
    return phi;
}

AlgebroidStructure build_bar(const AlgebroidStructure& a, const Cocycle& phi,
                             const std::string& time_var) {
    if (!a.verified)
        throw precondition_error("time-dependent extension needs a verified algebroid");
    if (!phi.verified)
        throw precondition_error("time-dependent extension needs a verified cocycle");
    require_host(a, phi, "time-dependent extension");
    PatchPtr ext = extend_patch(a.base, {time_var});
    const int n = a.base->dim(), r = a.rank;
    RingMat rho = RingMat::zero(ext, r, n + 1);
    for (int i = 0; i < r; ++i) {
        for (int l = 0; l < n; ++l) rho.at(i, l) = a.anchor.at(i, l).transported(ext);
        rho.at(i, n) = phi.comps[i].transported(ext);
    }
    std::vector<StructureEntry> entries;
    for (int i = 0; i < r; ++i)
        for (int jj = i + 1; jj < r; ++jj)
            for (int k = 0; k < r; ++k) {
                const ExpPoly& ck = a.bracket_coeff(i, jj, k);
                if (!ck.is_zero()) entries.push_back({i, jj, k, ck.transported(ext)});
            }
    AlgebroidStructure out = make_algebroid(ext, r, std::move(rho), entries,
                                            "time-dependent sections (flat extension)", a.frame);
    Verdict v = verify_algebroid(out);
    if (!v.pass)
        throw structural_error("flat time extension fails verification:\n" + v.summary());
    return out;
}

AlgebroidStructure build_hat(const AlgebroidStructure& a, const Cocycle& phi,
                             const std::string& time_var) {
    if (!a.verified)
        throw precondition_error("time-dependent extension needs a verified algebroid");
    if (!phi.verified)
        throw precondition_error("time-dependent extension needs a verified cocycle");
    require_host(a, phi, "time-dependent extension");
    PatchPtr ext = extend_patch(a.base, {time_var});
    const int n = a.base->dim(), r = a.rank;
    std::vector<Rat> lin(ext->dim(), Rat(0));
    lin.back() = Rat(-1);
    ExpPoly emt = ExpPoly::exponential(ext, Rat(0), std::move(lin));
    RingMat rho = RingMat::zero(ext, r, n + 1);
    for (int i = 0; i < r; ++i) {
        for (int l = 0; l < n; ++l) rho.at(i, l) = emt * a.anchor.at(i, l).transported(ext);
        rho.at(i, n) = emt * phi.comps[i].transported(ext);
    }
    std::vector<StructureEntry> entries;
    for (int i = 0; i < r; ++i)
        for (int jj = i + 1; jj < r; ++jj)
            for (int k = 0; k < r; ++k) {
                // e^{-t}( c^k_{ij} - φ_i δ_{jk} + φ_j δ_{ik} )
                ExpPoly val = a.bracket_coeff(i, jj, k).transported(ext);
                if (k == jj) val -= phi.comps[i].transported(ext);
                if (k == i) val += phi.comps[jj].transported(ext);
                if (!val.is_zero()) entries.push_back({i, jj, k, emt * val});
            }
    AlgebroidStructure out =
        make_algebroid(ext, r, std::move(rho), entries,
                       "time-dependent sections (rescaled extension)", a.frame);
    Verdict v = verify_algebroid(out);
    if (!v.pass)
        throw structural_error("rescaled time extension fails verification:\n" + v.summary());
    return out;
}

RingMat bar_to_hat_frame_map(const AlgebroidStructure& bar) {
    const PatchPtr& p = bar.base;
    if (p->dim() == 0) throw structural_error("expects a time-extended algebroid");
    std::vector<Rat> lin(p->dim(), Rat(0));
    lin.back() = Rat(1);
    ExpPoly et = ExpPoly::exponential(p, Rat(0), std::move(lin));
    RingMat m = RingMat::zero(p, bar.rank, bar.rank);
    for (int i = 0; i < bar.rank; ++i) m.at(i, i) = et;
    return m;
}

// ---------------------------------------------------------------------------
// linear structures on the dual patch

JacobiStructure linear_structures_on_dual(const AlgebroidStructure& a, const Cocycle* w0) {
    if (!a.verified) throw precondition_error("dual structures need a verified algebroid");
    if (w0) {
        require_host(a, *w0, "dual structures");
        if (!w0->verified) throw precondition_error("dual structures need a verified cocycle");
    }
    const int n = a.base->dim(), r = a.rank;
    std::vector<std::string> fiber;
    for (int i = 0; i < r; ++i) fiber.push_back("mu" + std::to_string(i + 1));
    PatchPtr d = extend_patch(a.base, fiber);
    Tensor lam = Tensor::zero(d, 2, Variance::multivector);
    for (int i = 0; i < r; ++i)
        for (int j = i + 1; j < r; ++j) {
            ExpPoly val = ExpPoly::zero(d);
            for (int k = 0; k < r; ++k) {
                const ExpPoly& ck = a.bracket_coeff(i, j, k);
                if (!ck.is_zero()) val += ck.transported(d) * ExpPoly::variable(d, n + k);
            }
            lam.add_term({n + i, n + j}, val);
        }
    for (int i = 0; i < r; ++i)
        for (int l = 0; l < n; ++l) {
            const ExpPoly& rho = a.anchor.at(i, l);
            if (!rho.is_zero()) lam.add_term({n + i, l}, rho.transported(d));
        }
    Tensor evec = Tensor::zero(d, 1, Variance::multivector);
    if (w0) {
        Tensor liouville = Tensor::zero(d, 1, Variance::multivector);
        Tensor vlift = Tensor::zero(d, 1, Variance::multivector);
        for (int i = 0; i < r; ++i) {
            liouville.add_term({n + i}, ExpPoly::variable(d, n + i));
            vlift.add_term({n + i}, w0->comps[i].transported(d));
        }
        lam = lam + wedge(liouville, vlift);
        evec = -vlift;
    }
    JacobiStructure out = jacobi_candidate(lam, evec);
    Verdict v = verify_jacobi(out);
    if (!v.pass)
        throw structural_error("linear structure on the dual fails the Jacobi conditions:\n" +
                               v.summary());
    return out;
}

// ---------------------------------------------------------------------------
// conormal algebroid of a coisotropic subspace

ConormalAlgebroid conormal_algebroid(const JacobiStructure& j, const CoisotropicSubpatch& s) {
    if (!j.verified)
        throw precondition_error("conormal construction needs a verified Jacobi structure");
    require_same_patch(j.patch, s.ambient, "conormal construction");
    Verdict coi = coisotropy_check(j.lambda, s);
    if (!coi.pass)
        throw precondition_error("the subspace is not coisotropic:\n" + coi.summary());
    const PatchPtr& amb = s.ambient;
    const int m = amb->dim();
    const std::vector<int>& kk = s.vanishing;
    const int r = (int)kk.size();
    std::vector<int> surviving;
    std::vector<std::string> names;
    for (int l = 0; l < m; ++l)
        if (!std::binary_search(kk.begin(), kk.end(), l)) {
            surviving.push_back(l);
            names.push_back(amb->names[l]);
        }
    PatchPtr sub = make_patch(names);
    std::vector<ExpPoly> images(m, ExpPoly::zero(sub));
    for (size_t t = 0; t < surviving.size(); ++t)
        images[surviving[t]] = ExpPoly::variable(sub, (int)t);
    auto restricted = [&](const ExpPoly& f) { return f.substitute(images); };

    RingMat rho = RingMat::zero(sub, r, (int)surviving.size());
    for (int aidx = 0; aidx < r; ++aidx) {
        Multivector sh = sharp_map(j.lambda, Tensor::basis(amb, Variance::form, {kk[aidx]}));
        for (size_t t = 0; t < surviving.size(); ++t)
            rho.at(aidx, (int)t) = restricted(sh.component({surviving[t]}));
    }
    std::vector<StructureEntry> entries;
    std::vector<std::string> frame;
    for (int aidx = 0; aidx < r; ++aidx) frame.push_back("d" + amb->names[kk[aidx]]);
    for (int aidx = 0; aidx < r; ++aidx)
        for (int bidx = aidx + 1; bidx < r; ++bidx) {
            CosectionPair br = cotangent_bracket(
                j, {Tensor::basis(amb, Variance::form, {kk[aidx]}), ExpPoly::zero(amb)},
                {Tensor::basis(amb, Variance::form, {kk[bidx]}), ExpPoly::zero(amb)});
            if (!restricted(br.fn).is_zero())
                throw structural_error(
                    "conormal bracket acquires a function part on the subspace; "
                    "coisotropy was violated upstream");
            for (int l : surviving)
                if (!restricted(br.form.component({l})).is_zero())
                    throw structural_error(
                        "conormal bracket leaves the conormal space; "
                        "coisotropy was violated upstream");
            for (int k = 0; k < r; ++k) {
                ExpPoly ck = restricted(br.form.component({kk[k]}));
                if (!ck.is_zero()) entries.push_back({aidx, bidx, k, std::move(ck)});
            }
        }
    AlgebroidStructure alg =
        make_algebroid(sub, r, std::move(rho), entries, "conormal algebroid", std::move(frame));
    Verdict va = verify_algebroid(alg);
    if (!va.pass)
        throw structural_error("conormal algebroid fails verification:\n" + va.summary());
    std::vector<ExpPoly> comps;
    for (int aidx = 0; aidx < r; ++aidx)
        comps.push_back(-restricted(j.e.component({kk[aidx]})));
    Cocycle co = make_cocycle(alg, std::move(comps));
    Verdict vc = verify_cocycle(co);
    if (!vc.pass)
        throw structural_error("conormal cocycle fails verification:\n" + vc.summary());
    return {std::move(alg), std::move(co), kk};
}

// ---------------------------------------------------------------------------
// rendering

std::string section_text(const AlgebroidStructure& a, const Tensor& t) {
    std::vector<std::string> names = a.frame;
    if (t.variance() == Variance::form)
        for (auto& nm : names) nm += "*";
    return t.text(names);
}

std::string algebroid_text(const AlgebroidStructure& a) {
    std::ostringstream os;
    os << (a.name.empty() ? "algebroid" : a.name) << "\n";
    os << "base:";
    if (a.base->dim() == 0) os << " (point)";
    for (const auto& nm : a.base->names) os << " " << nm;
    os << "\nrank: " << a.rank << "\n";
    for (int i = 0; i < a.rank; ++i) {
        std::vector<ExpPoly> row;
        for (int l = 0; l < a.base->dim(); ++l) row.push_back(a.anchor.at(i, l));
        os << "anchor(" << a.frame[i]
           << ") = " << Tensor::vector_field(a.base, std::move(row)).text() << "\n";
    }
    for (int i = 0; i < a.rank; ++i)
        for (int j = i + 1; j < a.rank; ++j) {
            Tensor br = a.bracket_of_basis(i, j);
            if (!br.is_zero())
                os << "[" << a.frame[i] << "," << a.frame[j]
                   << "] = " << section_text(a, br) << "\n";
        }
    return os.str();
}

} // namespace jgeo
