#include "jgeo/bialgebroid.hpp"

#include <random>

namespace jgeo {

namespace {

// reinterpret a frame tensor under the opposite variance, components kept
Tensor reindexed(const Tensor& t, Variance v) {
    Tensor out = Tensor::frame_zero(t.patch(), t.index_dim(), t.grade(), v);
    for (const auto& [idx, f] : t.components()) out.add_term(idx, f);
    return out;
}

bool same_structure(const AlgebroidStructure& a, const AlgebroidStructure& b) {
    return same_patch(a.base, b.base) && a.rank == b.rank && a.anchor == b.anchor && a.c == b.c;
}

Multivector x0_section(const GenLieBialgebroid& b) { return section_of(b.a, b.x0.comps); }

// deterministic probe sections: frame elements, coordinate-coefficient and
// low-degree pseudo-random-coefficient sections. Function coefficients are
// essential: constant probes alone cannot separate the anchors.
struct Probes {
    std::vector<ExpPoly> scalars;
    std::vector<Multivector> ones;
    std::vector<Multivector> twos;
};

Probes make_probes(const AlgebroidStructure& a) {
    const PatchPtr& p = a.base;
    std::mt19937 eng(9176);
    auto rnd_scalar = [&]() {
        static const Rat table[] = {Rat(1), Rat(-1), Rat(2), Rat(1, 2), Rat(-1, 2)};
        ExpPoly out = ExpPoly::zero(p);
        int n_terms = 1 + (int)(eng() % 2u);
        for (int n = 0; n < n_terms; ++n) {
            std::vector<int> mono(p->dim(), 0);
            int deg = p->dim() > 0 ? (int)(eng() % 3u) : 0;
            for (int k = 0; k < deg; ++k) mono[eng() % (unsigned)p->dim()] += 1;
            out += ExpPoly::term(p, table[eng() % 5u], std::move(mono), Rat(0),
                                 std::vector<Rat>(p->dim(), Rat(0)));
        }
        return out;
    };

    Probes pr;
    pr.scalars.push_back(ExpPoly::constant(p, 1));
    for (int l = 0; l < p->dim(); ++l) pr.scalars.push_back(ExpPoly::variable(p, l));
    pr.scalars.push_back(rnd_scalar());

    for (int i = 0; i < a.rank; ++i) pr.ones.push_back(section_basis(a, {i}));
    for (int l = 0; l < p->dim(); ++l) {
        Multivector s = section_zero(a, 1);
        s.add_term({l % a.rank}, ExpPoly::variable(p, l));
        pr.ones.push_back(s);
    }
    {
        Multivector s = section_zero(a, 1);
        for (int i = 0; i < a.rank; ++i) s.add_term({i}, rnd_scalar());
        pr.ones.push_back(s);
    }

    int kept = 0;
    for (int i = 0; i < a.rank; ++i)
        for (int j = i + 1; j < a.rank; ++j)
            if (kept < 4) {
                pr.twos.push_back(section_basis(a, {i, j}));
                ++kept;
            }
    if (a.rank >= 2) {
        Multivector s = section_zero(a, 2);
        for (int i = 0; i < a.rank; ++i)
            for (int j = i + 1; j < a.rank; ++j) s.add_term({i, j}, rnd_scalar());
        pr.twos.push_back(s);
    }
    return pr;
}

Multivector scalar_section(const AlgebroidStructure& a, const ExpPoly& f) {
    Multivector s = section_zero(a, 0);
    s.add_term({}, f);
    return s;
}

// [P,Q]'_phi = (-1)^{p+1} [P,Q]_phi
Multivector primed_bracket(const GenLieBialgebroid& b, const Multivector& p,
                           const Multivector& q) {
    Multivector out = phi0_schouten(b.a, b.phi0, p, q);
    return p.grade() % 2 == 0 ? -out : out;
}

Verdict check_condcomp(const GenLieBialgebroid& b, const Probes& pr) {
    Verdict v;
    for (size_t i = 0; i < pr.ones.size(); ++i)
        for (size_t j = i; j < pr.ones.size(); ++j) {
            const Multivector& x = pr.ones[i];
            const Multivector& y = pr.ones[j];
            Tensor lhs = star_differential(b, algebroid_schouten(b.a, x, y));
            Tensor rhs = phi0_schouten(b.a, b.phi0, x, star_differential(b, y)) -
                         phi0_schouten(b.a, b.phi0, y, star_differential(b, x));
            v.check_zero("bracket differential on grade-1 probes (" + std::to_string(i) +
                             "," + std::to_string(j) + ")",
                         lhs - rhs);
        }
    Multivector x0s = x0_section(b);
    int k = 0;
    auto balance = [&](const Multivector& p) {
        v.check_zero("twisted derivative balance on probe " + std::to_string(k++),
                     star_lie_derivative(b, p) + phi0_schouten(b.a, b.phi0, x0s, p));
    };
    for (const ExpPoly& f : pr.scalars) balance(scalar_section(b.a, f));
    for (const Multivector& s : pr.ones) balance(s);
    for (const Multivector& s : pr.twos) balance(s);
    return v;
}

Verdict check_condcomp2(const GenLieBialgebroid& b) {
    Verdict v;
    Multivector x0s = x0_section(b);
    v.check_zero("cocycle pairing vanishes", pairing(cocycle_form(b.phi0), x0s));
    Multivector phis = section_of(b.astar, b.phi0.comps);
    v.check_zero("anchors are opposed",
                 anchor_field(b.a, x0s) + anchor_field(b.astar, phis));
    for (int i = 0; i < b.a.rank; ++i) {
        Multivector ei = section_basis(b.a, {i});
        v.check_zero("frame balance on " + b.a.frame[i],
                     star_lie_derivative(b, ei) + algebroid_schouten(b.a, x0s, ei));
    }
    return v;
}

Verdict check_gm(const GenLieBialgebroid& b, const Probes& pr) {
    Verdict v;
    auto rule = [&](const Multivector& p, const Multivector& q, const std::string& label) {
        Tensor lhs = star_differential(b, primed_bracket(b, p, q));
        Tensor rhs = primed_bracket(b, star_differential(b, p), q);
        Tensor second = primed_bracket(b, p, star_differential(b, q));
        rhs = p.grade() % 2 == 0 ? rhs - second : rhs + second;
        v.check_zero(label, lhs - rhs);
    };
    for (size_t i = 0; i < pr.scalars.size(); ++i) {
        Multivector s = scalar_section(b.a, pr.scalars[i]);
        for (size_t j = 0; j < pr.ones.size(); ++j)
            rule(s, pr.ones[j],
                 "derivation rule on scalar " + std::to_string(i) + " against grade 1 #" +
                     std::to_string(j));
        for (size_t j = 0; j < pr.twos.size(); ++j)
            rule(s, pr.twos[j],
                 "derivation rule on scalar " + std::to_string(i) + " against grade 2 #" +
                     std::to_string(j));
    }
    for (size_t i = 0; i < pr.ones.size(); ++i)
        for (size_t j = i; j < pr.ones.size(); ++j)
            rule(pr.ones[i], pr.ones[j],
                 "derivation rule on grade-1 pair (" + std::to_string(i) + "," +
                     std::to_string(j) + ")");
    for (size_t i = 0; i < pr.ones.size(); ++i)
        for (size_t j = 0; j < pr.twos.size(); ++j)
            rule(pr.ones[i], pr.twos[j],
                 "derivation rule on grade 1 #" + std::to_string(i) + " against grade 2 #" +
                     std::to_string(j));
    for (size_t i = 0; i < pr.twos.size(); ++i)
        for (size_t j = i; j < pr.twos.size(); ++j)
            rule(pr.twos[i], pr.twos[j],
                 "derivation rule on grade-2 pair (" + std::to_string(i) + "," +
                     std::to_string(j) + ")");
    return v;
}

} // namespace

GenLieBialgebroid make_gen_bialgebroid(AlgebroidStructure a, Cocycle phi0,
                                       AlgebroidStructure astar, Cocycle x0) {
    if (!same_patch(a.base, astar.base))
        throw structural_error("the two sides must live over one base patch");
    if (a.rank != astar.rank) throw structural_error("dual frames must have equal rank");
    if (!a.verified || !astar.verified)
        throw precondition_error("both algebroid structures must be verified");
    if (!phi0.verified || !x0.verified)
        throw precondition_error("both cocycles must be verified");
    if (!same_structure(phi0.host, a))
        throw structural_error("the first cocycle is hosted on a different structure");
    if (!same_structure(x0.host, astar))
        throw structural_error("the second cocycle is hosted on a different structure");
    return {std::move(a), std::move(phi0), std::move(astar), std::move(x0)};
}

GenLieBialgebroid canonical_pair(const JacobiStructure& j) {
    AlgebroidStructure a = build_tm_times_r(j.patch);
    Cocycle phi0 = tm_times_r_cocycle(a);
    AlgebroidStructure astar = build_jacobi_cotangent(j);
    Cocycle x0 = jacobi_cotangent_cocycle(astar, j);
    return make_gen_bialgebroid(std::move(a), std::move(phi0), std::move(astar),
                                std::move(x0));
}

GenLieBialgebroid swapped_pair(const GenLieBialgebroid& b) {
    return {b.astar, b.x0, b.a, b.phi0};
}

Multivector star_differential(const GenLieBialgebroid& b, const Multivector& p) {
    return reindexed(differential_with_cocycle(b.astar, b.x0,
                                               reindexed(p, Variance::form)),
                     Variance::multivector);
}

Multivector star_differential(const GenLieBialgebroid& b, const ExpPoly& f) {
    return reindexed(differential_with_cocycle(b.astar, b.x0, f), Variance::multivector);
}

Multivector star_lie_derivative(const GenLieBialgebroid& b, const Multivector& p) {
    DifferentialForm phif = cocycle_form(b.phi0);
    Multivector out = interior_product(phif, star_differential(b, p));
    if (p.grade() >= 1) out = out + star_differential(b, interior_product(phif, p));
    return out;
}

CompatReport verify_compatibility(const GenLieBialgebroid& b, CompatMode mode) {
    Probes pr = make_probes(b.a);
    CompatReport r;
    r.condcomp = check_condcomp(b, pr);
    r.condcomp2 = check_condcomp2(b);
    r.gm_derivation = check_gm(b, pr);
    r.agreement = r.condcomp.pass == r.condcomp2.pass &&
                  r.condcomp2.pass == r.gm_derivation.pass;
    switch (mode) {
    case CompatMode::condcomp: r.pass = r.condcomp.pass; break;
    case CompatMode::condcomp2: r.pass = r.condcomp2.pass; break;
    case CompatMode::gm_derivation: r.pass = r.gm_derivation.pass; break;
    case CompatMode::all:
        r.pass = r.condcomp.pass && r.condcomp2.pass && r.gm_derivation.pass;
        break;
    }
    return r;
}

JacobiStructure induced_base_jacobi(const GenLieBialgebroid& b) {
    if (!verify_compatibility(b, CompatMode::all).pass)
        throw precondition_error("compatibility must hold before inducing a base structure");
    const PatchPtr& p = b.a.base;
    RingMat s = b.a.anchor.transposed() * b.astar.anchor;
    for (int l = 0; l < p->dim(); ++l)
        for (int m = l; m < p->dim(); ++m)
            if (!(s.at(l, m) + s.at(m, l)).is_zero())
                throw structural_error("induced bivector is not alternating");
    Multivector lam = Tensor::zero(p, 2, Variance::multivector);
    for (int l = 0; l < p->dim(); ++l)
        for (int m = l + 1; m < p->dim(); ++m) lam.add_term({l, m}, s.at(l, m));
    Multivector e0 = anchor_field(b.astar, section_of(b.astar, b.phi0.comps));
    JacobiStructure j = jacobi_candidate(lam, e0);
    if (!verify_jacobi(j).pass)
        throw structural_error("induced base structure failed verification");

    // the pair bracket <d_phi0 f, d_star g> is first order in each slot, so
    // agreement on 1, the coordinates, and their products pins it completely
    std::vector<ExpPoly> fam;
    fam.push_back(ExpPoly::constant(p, 1));
    for (int l = 0; l < p->dim(); ++l) fam.push_back(ExpPoly::variable(p, l));
    for (int l = 0; l < p->dim(); ++l)
        for (int m = l; m < p->dim(); ++m)
            fam.push_back(ExpPoly::variable(p, l) * ExpPoly::variable(p, m));
    for (const ExpPoly& f : fam)
        for (const ExpPoly& g : fam) {
            ExpPoly via_pair =
                pairing(differential_with_cocycle(b.a, b.phi0, f), star_differential(b, g));
            if (!(via_pair - jacobi_bracket(f, g, j)).is_zero())
                throw structural_error(
                    "pair bracket does not match the induced structure");
        }
    return j;
}

Bialgebroidization bialgebroidize(const GenLieBialgebroid& b, const std::string& time_var) {
    if (!verify_compatibility(b, CompatMode::all).pass)
        throw precondition_error("compatibility must hold before extending");
    Bialgebroidization out;
    out.tilde_a = build_bar(b.a, b.phi0, time_var);
    out.tilde_astar = build_hat(b.astar, b.x0, time_var);
    const PatchPtr& ext = out.tilde_a.base;
    std::vector<ExpPoly> zeros(b.a.rank, ExpPoly::zero(ext));
    Cocycle zf = make_cocycle(out.tilde_a, zeros);
    verify_cocycle(zf);
    Cocycle zx = make_cocycle(out.tilde_astar, zeros);
    verify_cocycle(zx);
    GenLieBialgebroid extended =
        make_gen_bialgebroid(out.tilde_a, std::move(zf), out.tilde_astar, std::move(zx));
    out.compat = verify_compatibility(extended, CompatMode::all);
    out.base_jacobi = induced_base_jacobi(b);
    out.poissonized = poissonize(out.base_jacobi, time_var);
    if (out.compat.pass) {
        out.product_poisson = induced_base_jacobi(extended);
        out.poisson_match.check_zero(
            "extended pair reproduces the time-extended bivector",
            out.product_poisson.lambda - out.poissonized.lambda_tilde);
        out.poisson_match.check_zero("vector part of the extended structure",
                                     out.product_poisson.e);
    } else {
        out.poisson_match.check("extended pair is compatible", false,
                                "compatibility failed upstream");
    }
    out.pass = out.compat.pass && out.poisson_match.pass;
    return out;
}

} // namespace jgeo
