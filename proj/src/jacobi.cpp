#include "jgeo/jacobi.hpp"

#include <algorithm>

namespace jgeo {

namespace {

void require_pair_shape(const Multivector& lambda, const Multivector& e) {
    if (lambda.grade() != 2 || lambda.variance() != Variance::multivector)
        throw precondition_error("expected a grade-2 multivector");
    if (e.grade() != 1 || e.variance() != Variance::multivector)
        throw precondition_error("expected a grade-1 vector field");
    require_same_patch(lambda.patch(), e.patch(), "bivector/vector pair");
}

// Deterministic rational grid: all-zero point first, then mixed-radix tuples
// over a small symmetric value set, capped.
std::vector<Point> default_grid(int dim, size_t cap = 100) {
    const std::vector<Rat> vals = {Rat(0),  Rat(1),      Rat(-1),    Rat(2),
                                   Rat(-2), Rat(1) / 2, Rat(-1) / 2};
    size_t total = 1;
    for (int i = 0; i < dim && total <= cap; ++i) total *= vals.size();
    size_t count = std::min(total, cap);
    std::vector<Point> pts;
    pts.reserve(count);
    for (size_t idx = 0; idx < count; ++idx) {
        Point p(dim);
        size_t rem = idx;
        for (int k = 0; k < dim; ++k) {
            p[k] = vals[rem % vals.size()];
            rem /= vals.size();
        }
        pts.push_back(std::move(p));
    }
    return pts;
}

} // namespace

JacobiStructure jacobi_candidate(const Multivector& lambda, const Multivector& e) {
    require_pair_shape(lambda, e);
    return JacobiStructure{lambda.patch(), lambda, e, false};
}

Verdict verify_jacobi(const Multivector& lambda, const Multivector& e) {
    require_pair_shape(lambda, e);
    Verdict v;
    v.check_zero("schouten(lambda,lambda) - 2 e^lambda",
                 schouten(lambda, lambda) - wedge(e, lambda).scale(Rat(2)));
    v.check_zero("schouten(e,lambda)", schouten(e, lambda));
    return v;
}

Verdict verify_jacobi(JacobiStructure& j) {
    Verdict v = verify_jacobi(j.lambda, j.e);
    j.verified = v.pass;
    return v;
}

ExpPoly bivector_eval(const Multivector& lambda, const DifferentialForm& omega,
                      const DifferentialForm& nu) {
    return pairing(wedge(omega, nu), lambda);
}

Multivector sharp_map(const Multivector& lambda, const DifferentialForm& omega) {
    return interior_product(omega, lambda);
}

ExpPoly jacobi_bracket(const ExpPoly& f, const ExpPoly& g, const JacobiStructure& j) {
    require_same_patch(f.patch(), j.patch, "jacobi_bracket");
    require_same_patch(g.patch(), j.patch, "jacobi_bracket");
    DifferentialForm df = de_rham(f), dg = de_rham(g);
    ExpPoly ef = pairing(df, j.e);
    ExpPoly eg = pairing(dg, j.e);
    return bivector_eval(j.lambda, df, dg) + f * eg - g * ef;
}

Multivector hamiltonian_field(const ExpPoly& f, const JacobiStructure& j) {
    require_same_patch(f.patch(), j.patch, "hamiltonian_field");
    return sharp_map(j.lambda, de_rham(f)) + j.e.scale(f);
}

ContactToJacobi contact_to_jacobi(const DifferentialForm& eta,
                                  const std::vector<Point>& sample_grid) {
    if (eta.grade() != 1 || eta.variance() != Variance::form)
        throw precondition_error("contact structure needs a 1-form");
    const PatchPtr& p = eta.patch();
    int n = p->dim();
    if (n % 2 == 0)
        throw precondition_error("contact structure needs an odd-dimensional patch");

    DifferentialForm deta = de_rham(eta);
    std::vector<ExpPoly> etac(n, ExpPoly::zero(p));
    for (int i = 0; i < n; ++i) etac[i] = eta.component({i});

    // (♭X)_i = Σ_j B_ij X^j with B_ij = δη(∂_j, ∂_i) + η_i η_j
    RingMat flat = RingMat::zero(p, n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            flat.at(i, j) = deta.component({j, i}) + etac[i] * etac[j];

    ExpPoly d = det(flat);
    if (d.is_zero())
        throw non_contact_error("the flat map of the 1-form is identically singular");

    ContactStructure cs{p, eta, flat, false, {}};
    std::vector<ExpPoly> evec;
    Multivector lam = Tensor::zero(p, 2, Variance::multivector);

    if (d.is_unit()) {
        cs.unit_certified = true;
        RingMat inv = inverse_unit_det(flat);
        evec = inv.apply(etac);
        std::vector<Multivector> cols; // ♭⁻¹(δx_i)
        for (int i = 0; i < n; ++i) {
            std::vector<ExpPoly> c(n, ExpPoly::zero(p));
            for (int r = 0; r < n; ++r) c[r] = inv.at(r, i);
            cols.push_back(Tensor::vector_field(p, std::move(c)));
        }
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                lam.add_term({i, j}, pairing(deta, wedge(cols[i], cols[j])));
    } else {
        const std::vector<Point> grid = sample_grid.empty() ? default_grid(n) : sample_grid;
        PatchPtr empty = make_patch({});
        for (const Point& pt : grid) {
            if ((int)pt.size() != n)
                throw precondition_error("sample point dimension mismatch");
            if (d.at_point(pt, empty).is_zero())
                throw non_contact_error("the flat map determinant vanishes at a sample point");
            cs.certified_points.push_back(pt);
        }
        // determinant certified nonzero pointwise only; the inverse exists in
        // the ring just when the adjugate expressions divide exactly
        RingMat adj = adjugate(flat);
        std::vector<ExpPoly> w = adj.apply(etac);
        for (int k = 0; k < n; ++k) {
            auto q = w[k].divided_exactly_by(d);
            if (!q)
                throw precondition_error(
                    "the flat-map inverse leaves the coefficient ring (determinant is not a unit)");
            evec.push_back(*q);
        }
        std::vector<Multivector> cols; // det · ♭⁻¹(δx_i)
        for (int i = 0; i < n; ++i) {
            std::vector<ExpPoly> c(n, ExpPoly::zero(p));
            for (int r = 0; r < n; ++r) c[r] = adj.at(r, i);
            cols.push_back(Tensor::vector_field(p, std::move(c)));
        }
        ExpPoly d2 = d * d;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                auto q = pairing(deta, wedge(cols[i], cols[j])).divided_exactly_by(d2);
                if (!q)
                    throw precondition_error(
                        "the flat-map inverse leaves the coefficient ring (determinant is not a unit)");
                lam.add_term({i, j}, *q);
            }
    }

    Multivector evf = Tensor::vector_field(p, evec);
    if (pairing(eta, evf) != ExpPoly::constant(p, Rat(1)))
        throw structural_error("contact construction broke i(E)η = 1");
    if (!interior_product(evf, deta).is_zero())
        throw structural_error("contact construction broke i(E)δη = 0");

    JacobiStructure js = jacobi_candidate(lam, evf);
    Verdict v = verify_jacobi(js);
    if (!v.pass)
        throw structural_error("contact construction broke the compatibility identities");
    return ContactToJacobi{std::move(cs), std::move(js)};
}

SectionPair sharp_pair(const JacobiStructure& j, const CosectionPair& in) {
    if (in.form.grade() != 1 || in.form.variance() != Variance::form)
        throw precondition_error("sharp_pair needs a 1-form");
    require_same_patch(in.form.patch(), j.patch, "sharp_pair");
    require_same_patch(in.fn.patch(), j.patch, "sharp_pair");
    Multivector field = sharp_map(j.lambda, in.form) + j.e.scale(in.fn);
    ExpPoly fn = -pairing(in.form, j.e);
    return SectionPair{std::move(field), std::move(fn)};
}

CosectionPair flat_pair(const ContactStructure& c, const SectionPair& in) {
    if (in.field.grade() != 1 || in.field.variance() != Variance::multivector)
        throw precondition_error("flat_pair needs a vector field");
    require_same_patch(in.field.patch(), c.patch, "flat_pair");
    require_same_patch(in.fn.patch(), c.patch, "flat_pair");
    DifferentialForm deta = de_rham(c.eta);
    DifferentialForm form = -interior_product(in.field, deta) - c.eta.scale(in.fn);
    ExpPoly fn = pairing(c.eta, in.field);
    return CosectionPair{std::move(form), std::move(fn)};
}

Poissonization poissonize(const JacobiStructure& j, const std::string& time_var) {
    if (j.patch->index_of(time_var) >= 0)
        throw precondition_error("time variable '" + time_var + "' already names a coordinate");
    PatchPtr ext = extend_patch(j.patch, {time_var});
    int tidx = ext->dim() - 1;
    Multivector lam = j.lambda.transported(ext);
    Multivector ev = j.e.transported(ext);
    Multivector dt = Tensor::basis(ext, Variance::multivector, {tidx});
    std::vector<Rat> lin(ext->dim(), Rat(0));
    lin[tidx] = Rat(-1);
    ExpPoly damp = ExpPoly::exponential(ext, Rat(0), std::move(lin));
    Multivector lt = (lam + wedge(dt, ev)).scale(damp);

    Poissonization out{ext, lt, {}, {}};
    out.homogeneity.check_zero("lie_derivative along the time direction plus the bivector",
                               lie_derivative(dt, lt) + lt);
    out.poisson.check_zero("schouten square of the extended bivector", schouten(lt, lt));
    return out;
}

Verdict poissonization_inverts_contact(const ContactStructure& c, const Poissonization& p) {
    const PatchPtr& ext = p.extended;
    int nn = ext->dim();
    int tidx = nn - 1;
    if (c.patch->dim() + 1 != nn)
        throw precondition_error("extended patch does not extend the contact patch by one variable");

    DifferentialForm deta = de_rham(c.eta).transported(ext);
    DifferentialForm etaup = c.eta.transported(ext);
    DifferentialForm dtf = Tensor::basis(ext, Variance::form, {tidx});
    std::vector<Rat> lin(nn, Rat(0));
    lin[tidx] = Rat(1);
    ExpPoly grow = ExpPoly::exponential(ext, Rat(0), std::move(lin));
    DifferentialForm omega = (deta + wedge(dtf, etaup)).scale(grow);

    Verdict v;
    for (int k = 0; k < nn; ++k) {
        Multivector x = Tensor::basis(ext, Variance::multivector, {k});
        DifferentialForm w = -interior_product(x, omega); // Ω̃(·, X)
        Multivector y = interior_product(w, p.lambda_tilde);
        v.check_zero("sharp after flat at ∂" + ext->names[k], y - x);

        DifferentialForm xi = Tensor::basis(ext, Variance::form, {k});
        Multivector z = interior_product(xi, p.lambda_tilde);
        DifferentialForm back = -interior_product(z, omega);
        v.check_zero("flat after sharp at d" + ext->names[k], back - xi);
    }
    return v;
}

CoisotropicSubpatch coisotropic_subpatch(const PatchPtr& ambient, std::vector<int> vanishing) {
    if (vanishing.empty())
        throw precondition_error("coisotropic subpatch needs a nonempty vanishing set");
    std::sort(vanishing.begin(), vanishing.end());
    vanishing.erase(std::unique(vanishing.begin(), vanishing.end()), vanishing.end());
    for (int k : vanishing)
        if (k < 0 || k >= ambient->dim())
            throw precondition_error("vanishing coordinate index out of range");
    return CoisotropicSubpatch{ambient, std::move(vanishing)};
}

ExpPoly restrict_to_subpatch(const ExpPoly& f, const CoisotropicSubpatch& s) {
    require_same_patch(f.patch(), s.ambient, "restrict_to_subpatch");
    ExpPoly r = f;
    for (int k : s.vanishing)
        r = r.substitute_one(s.ambient->names[k], ExpPoly::zero(s.ambient));
    return r;
}

Verdict coisotropy_check(const Multivector& lambda, const CoisotropicSubpatch& s) {
    if (lambda.grade() != 2 || lambda.variance() != Variance::multivector)
        throw precondition_error("coisotropy_check needs a grade-2 multivector");
    require_same_patch(lambda.patch(), s.ambient, "coisotropy_check");
    Verdict v;
    for (int k : s.vanishing) {
        DifferentialForm dk = Tensor::basis(s.ambient, Variance::form, {k});
        Multivector y = sharp_map(lambda, dk);
        for (int l : s.vanishing)
            v.check_zero("sharp(d" + s.ambient->names[k] + ")·∂" + s.ambient->names[l] +
                             " on the subspace",
                         restrict_to_subpatch(y.component({l}), s));
    }
    return v;
}

} // namespace jgeo
