#include "groupoid_internal.hpp"

#include "jgeo/errors.hpp"

#include <algorithm>

namespace jgeo {

using namespace gdetail;

namespace {

std::string clip(std::string s) {
    if (s.size() > 200) s = s.substr(0, 200) + "...";
    return s;
}

GroupoidCheck from_verdict(const std::string& label, const Verdict& v) {
    GroupoidCheck c;
    c.label = label;
    c.pass = v.pass;
    if (!v.pass && !v.residuals.empty())
        c.residual = v.residuals.front().first + ": " + clip(v.residuals.front().second);
    return c;
}

GroupoidCheck plain_check(const std::string& label, bool pass, const std::string& residual = "") {
    GroupoidCheck c;
    c.label = label;
    c.pass = pass;
    if (!pass) c.residual = clip(residual);
    return c;
}

// components of the twisted bundle map (omega, gamma) -> sharp(omega) + gamma E
// at generic covector slots p_off.., gamma at gamma_idx (-1 for none)
std::vector<ExpPoly> sharp_image(const PatchPtr& host, const RingMat& l_host,
                                 const std::vector<ExpPoly>& e_host, int p_off, int gamma_idx) {
    int n = l_host.rows;
    std::vector<ExpPoly> out;
    for (int k = 0; k < n; ++k) {
        ExpPoly s = ExpPoly::zero(host);
        for (int j = 0; j < n; ++j) s += ExpPoly::variable(host, p_off + j) * l_host.at(j, k);
        if (gamma_idx >= 0) s += ExpPoly::variable(host, gamma_idx) * e_host[k];
        out.push_back(s);
    }
    return out;
}

// inverse-unit-derivative coefficients of the field: the frame coefficients
// of iota_* E along units, read off through the retraction slots
std::vector<ExpPoly> inverted_field_coeffs(const ConcreteGroupoid& g, const Multivector& e,
                                           const std::vector<int>& slots,
                                           std::vector<ExpPoly>* u_out = nullptr) {
    const PatchPtr& M = g.m_patch;
    int n = g.g_patch->dim();
    RingMat di = subst_mat(g.iota.jacobian(), g.epsilon.comp, M);
    std::vector<ExpPoly> ee = subst_all(field_comps(e), g.epsilon.comp, M);
    std::vector<ExpPoly> u(n, ExpPoly::zero(M));
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) u[i] += di.at(i, k) * ee[k];
    std::vector<ExpPoly> xi;
    for (int s : slots) xi.push_back(u[s]);
    if (u_out) *u_out = u;
    return xi;
}

// unit pairing of the rate of the multiplicative function with the frame
std::vector<ExpPoly> unit_rate_pairing(const ConcreteGroupoid& g, const ExpPoly& sigma,
                                       const RingMat& unit_frame) {
    const PatchPtr& M = g.m_patch;
    int n = g.g_patch->dim(), r = unit_frame.cols;
    std::vector<ExpPoly> phi;
    for (int i = 0; i < r; ++i) {
        ExpPoly s = ExpPoly::zero(M);
        for (int k = 0; k < n; ++k)
            s += sigma.derivative(k).substitute(g.epsilon.comp) * unit_frame.at(k, i);
        phi.push_back(s);
    }
    return phi;
}

PatchMap invertible_copy(const PatchMap& inv_side, const PatchMap& fwd_side) {
    PatchMap m = inv_side;
    m.inverse = std::make_shared<const PatchMap>(
        PatchMap::make(fwd_side.source, fwd_side.target, fwd_side.comp));
    return m;
}

} // namespace

// ---------------------------------------------------------------------------
// jacobi groupoid verification

JacobiGroupoidReport verify_jacobi_groupoid(JacobiGroupoidInstance& inst,
                                            const SampleSpec& spec) {
    ConcreteGroupoid& g = inst.groupoid;
    const PatchPtr& G = g.g_patch;
    const PatchPtr& M = g.m_patch;
    if (!same_patch(inst.j.patch, G))
        throw structural_error("the bivector and field must live on the arrow patch");
    int n = G->dim(), m = M->dim(), r = g.fiber_dim();

    JacobiGroupoidReport rep;

    GroupoidReport base = verify_groupoid(g, &inst.sigma, spec);
    {
        GroupoidCheck c;
        c.label = "underlying groupoid with multiplicative function";
        c.pass = base.pass && inst.sigma.verified;
        for (const auto& bc : base.checks)
            if (!bc.pass) {
                c.residual = bc.label + ": " + clip(bc.residual);
                break;
            }
        rep.checks.add(std::move(c));
    }
    rep.checks.add(from_verdict("bivector and field satisfy the bracket identities",
                                verify_jacobi(inst.j)));

    FrameWork fw = frame_work(g);
    RingMat l = bivector_matrix(inst.j.lambda);
    std::vector<ExpPoly> e = field_comps(inst.j.e);

    DoubledGroupoid tgr = tangent_cotangent(g, &inst.sigma, DoubleKind::tangent_r);
    DoubledGroupoid tsr = tangent_cotangent(g, &inst.sigma, DoubleKind::cotangent_r);
    const PatchPtr& tg = tgr.groupoid.g_patch;
    const PatchPtr& ts = tsr.groupoid.g_patch;
    const PatchPtr& ast = tsr.groupoid.m_patch;
    const PatchPtr& tmr = tgr.groupoid.m_patch;
    rep.astar_patch = ast;
    rep.tmr_patch = tmr;

    // the bundle map on covector-line pairs
    PatchMap smap;
    {
        RingMat lt = transport_mat(l, ts);
        std::vector<ExpPoly> et = transport_all(e, ts);
        std::vector<ExpPoly> sc = patch_vars(ts, 0, n);
        for (const auto& x : sharp_image(ts, lt, et, n, 2 * n)) sc.push_back(x);
        ExpPoly f = ExpPoly::zero(ts);
        for (int k = 0; k < n; ++k) f -= ExpPoly::variable(ts, n + k) * et[k];
        sc.push_back(f);
        smap = PatchMap::make(ts, tg, sc);
    }

    // the covered base map on the dual chart
    {
        RingMat dau = subst_mat(g.alpha.jacobian(), g.epsilon.comp, M);
        RingMat leps = subst_mat(l, g.epsilon.comp, M);
        RingMat uc = fw.f.unit_coframe;
        RingMat dbe = subst_mat(g.beta.jacobian(), g.epsilon.comp, M);
        RingMat de = g.epsilon.jacobian();
        std::vector<ExpPoly> eeps = subst_all(e, g.epsilon.comp, M);

        // d(l,i): base velocity of sharp applied to the i-th dual frame covector
        RingMat d = RingMat::zero(M, m, r);
        for (int lidx = 0; lidx < m; ++lidx)
            for (int i = 0; i < r; ++i) {
                ExpPoly s = ExpPoly::zero(M);
                for (int k = 0; k < n; ++k)
                    for (int j = 0; j < n; ++j)
                        s += dau.at(lidx, k) * leps.at(j, k) * uc.at(i, j);
                d.at(lidx, i) = s;
            }
        // wu: field along units minus its unit-tangent projection
        std::vector<ExpPoly> bproj(m, ExpPoly::zero(M));
        for (int lidx = 0; lidx < m; ++lidx)
            for (int k = 0; k < n; ++k) bproj[lidx] += dbe.at(lidx, k) * eeps[k];
        std::vector<ExpPoly> wu = eeps;
        for (int k = 0; k < n; ++k)
            for (int lidx = 0; lidx < m; ++lidx) wu[k] -= de.at(k, lidx) * bproj[lidx];

        std::vector<ExpPoly> pc = patch_vars(ast, 0, m);
        RingMat dt = transport_mat(d, ast);
        for (int lidx = 0; lidx < m; ++lidx) {
            ExpPoly s = ExpPoly::zero(ast);
            for (int i = 0; i < r; ++i) s += ExpPoly::variable(ast, m + i) * dt.at(lidx, i);
            pc.push_back(s);
        }
        ExpPoly last = ExpPoly::zero(ast);
        for (int i = 0; i < r; ++i) {
            ExpPoly pair_i = ExpPoly::zero(M);
            for (int k = 0; k < n; ++k) pair_i += uc.at(i, k) * wu[k];
            last -= ExpPoly::variable(ast, m + i) * pair_i.transported(ast);
        }
        pc.push_back(last);
        rep.phi0 = PatchMap::make(ast, tmr, pc);
    }

    rep.checks.add(compare_sides("sharp covers the base map on sources", ts,
                                 side_chain({smap, tgr.groupoid.alpha}),
                                 side_chain({tsr.groupoid.alpha, rep.phi0}), spec));
    rep.checks.add(compare_sides("sharp covers the base map on targets", ts,
                                 side_chain({smap, tgr.groupoid.beta}),
                                 side_chain({tsr.groupoid.beta, rep.phi0}), spec));

    // multiplicativity on composable covector pairs
    {
        const PatchPtr& cs = tsr.groupoid.composable_patch();
        const std::vector<ExpPoly>& pc = tsr.groupoid.composable_parametrization.comp;
        int tdim = 2 * n + 1;
        std::vector<ExpPoly> h(pc.begin() + tdim, pc.begin() + tdim + n);
        std::vector<ExpPoly> nu(pc.begin() + tdim + n, pc.begin() + tdim + 2 * n);
        ExpPoly zeta = pc[tdim + 2 * n];

        RingMat lcs = transport_mat(l, cs);
        std::vector<ExpPoly> ecs = transport_all(e, cs);
        std::vector<int> slots = g.retraction_slots();

        SideVal pair_side;
        pair_side.dom = cs;
        {
            std::vector<ExpPoly> head = patch_vars(cs, 0, n);
            for (const auto& x : sharp_image(cs, lcs, ecs, n, 2 * n)) head.push_back(x);
            ExpPoly f = ExpPoly::zero(cs);
            for (int k = 0; k < n; ++k) f -= ExpPoly::variable(cs, n + k) * ecs[k];
            head.push_back(f);
            for (int j = 0; j < r; ++j) head.push_back(ExpPoly::variable(cs, tdim + j));

            try {
                RingMat lh = subst_mat(l, h, cs);
                std::vector<ExpPoly> eh = subst_all(e, h, cs);
                std::vector<ExpPoly> x2(n, ExpPoly::zero(cs));
                for (int k = 0; k < n; ++k) {
                    ExpPoly s = ExpPoly::zero(cs);
                    for (int j = 0; j < n; ++j) s += nu[j] * lh.at(j, k);
                    s += zeta * eh[k];
                    x2[k] = s;
                }
                std::vector<ExpPoly> full = head;
                for (int j = 0; j < r; ++j) full.push_back(x2[slots[j]]);
                pair_side.sym = std::move(full);
            } catch (const unsupported_substitution&) {
            }

            pair_side.pt = [head, h, nu, zeta, l, e, slots, n, r](const Point& p) {
                std::vector<SVal> vals = point_vals(p);
                std::vector<SVal> out;
                for (const auto& c : head) out.push_back(sval_eval(c, vals));
                std::vector<SVal> hv = apply_comps(h, vals);
                std::vector<SVal> nv = apply_comps(nu, vals);
                SVal zv = sval_eval(zeta, vals);
                for (int j = 0; j < r; ++j) {
                    SVal s = sval_rat(0);
                    for (int k = 0; k < n; ++k)
                        s = sval_add(s, sval_mul(nv[k], sval_eval(l.at(k, slots[j]), hv)));
                    s = sval_add(s, sval_mul(zv, sval_eval(e[slots[j]], hv)));
                    out.push_back(s);
                }
                return out;
            };
        }
        rep.checks.add(compare_sides("sharp respects multiplication of composable covectors", cs,
                                     side_chain({tsr.groupoid.mult, smap}),
                                     side_then(pair_side, tgr.groupoid.mult), spec));
    }

    rep.pass = rep.checks.pass;
    inst.verified = rep.pass;
    return rep;
}

// ---------------------------------------------------------------------------
// structural consequences

GroupoidReport structural_properties(const JacobiGroupoidInstance& inst, const SampleSpec& spec) {
    if (!inst.verified)
        throw precondition_error("structural consequences need a verified instance");
    const ConcreteGroupoid& g = inst.groupoid;
    const PatchPtr& G = g.g_patch;
    const PatchPtr& M = g.m_patch;
    const PatchPtr& c = g.composable_patch();
    int n = G->dim(), m = M->dim(), r = g.fiber_dim();
    const ExpPoly& sigma = inst.sigma.sigma;

    GroupoidReport rep;
    FrameWork fw = frame_work(g);
    RingMat l = bivector_matrix(inst.j.lambda);
    std::vector<ExpPoly> e = field_comps(inst.j.e);
    std::vector<int> slots = g.retraction_slots();

    // units of the straightened chart span a coisotropic subspace
    PatchMap psi = unit_straightening(g);
    PatchMap psi_inv = invertible_copy(*psi.inverse, psi);
    {
        Multivector ls = pushforward(inst.j.lambda, psi_inv);
        std::vector<int> vanish;
        for (int j = 0; j < r; ++j) vanish.push_back(m + j);
        CoisotropicSubpatch sub = coisotropic_subpatch(psi.source, vanish);
        rep.add(from_verdict("units form a coisotropic submanifold",
                             coisotropy_check(ls, sub)));
    }

    // translation of the field through right multiplication
    {
        RingMat jm = g.mult.jacobian();
        std::vector<ExpPoly> ec = transport_all(e, c);
        std::vector<ExpPoly> lc;
        for (int i = 0; i < n; ++i) {
            ExpPoly s = ExpPoly::zero(c);
            for (int k = 0; k < n; ++k) s += jm.at(i, k) * ec[k];
            lc.push_back(s);
        }
        SideVal efield;
        efield.dom = c;
        efield.sym = try_subst(e, g.mult.comp, c);
        std::vector<ExpPoly> mult_comps = g.mult.comp;
        std::vector<ExpPoly> ecopy = e;
        efield.pt = [mult_comps, ecopy](const Point& p) {
            std::vector<SVal> mv = apply_comps(mult_comps, point_vals(p));
            std::vector<SVal> out;
            for (const auto& f : ecopy) out.push_back(sval_eval(f, mv));
            return out;
        };
        rep.add(compare_sides("field is right invariant", c, side_comps(lc), efield, spec));
    }

    // the field kills the multiplicative function
    {
        ExpPoly s = ExpPoly::zero(G);
        for (int k = 0; k < n; ++k) s += e[k] * sigma.derivative(k);
        rep.add(plain_check("field annihilates the multiplicative function", s.is_zero(),
                            s.text()));
    }

    // sharp of the multiplicative differential against the invariant fields
    std::vector<ExpPoly> xi0 = inverted_field_coeffs(g, inst.j.e, slots);
    {
        std::vector<ExpPoly> lc;
        for (int k = 0; k < n; ++k) {
            ExpPoly s = ExpPoly::zero(G);
            for (int j = 0; j < n; ++j) s += sigma.derivative(j) * l.at(j, k);
            lc.push_back(s);
        }
        std::vector<ExpPoly> xia = subst_all(xi0, g.alpha.comp, G);
        std::vector<ExpPoly> w;
        for (int k = 0; k < n; ++k) {
            ExpPoly s = ExpPoly::zero(G);
            for (int j = 0; j < r; ++j) s += fw.f.left_frame.at(k, j) * xia[j];
            w.push_back(s);
        }
        SideVal rhs = side_sub(side_neg(side_comps(e)),
                               side_scale_from(side_comps(w), 0, sigma, -1));
        rep.add(compare_sides("sharp of the multiplicative differential splits into the "
                              "invariant fields",
                              G, side_comps(lc), rhs, spec));
    }

    // conjugation of the unit retractions through sharp
    {
        DoubledGroupoid tgp = tangent_cotangent(g, nullptr, DoubleKind::tangent);
        DoubledGroupoid tsp = tangent_cotangent(g, nullptr, DoubleKind::cotangent);
        const PatchPtr& ts = tsp.groupoid.g_patch;
        RingMat lt = transport_mat(l, ts);
        std::vector<ExpPoly> sc = patch_vars(ts, 0, n);
        for (const auto& x : sharp_image(ts, lt, {}, n, -1)) sc.push_back(x);
        PatchMap sharp = PatchMap::make(ts, tgp.groupoid.g_patch, sc);
        ExpPoly sigma_ts = sigma.transported(ts);

        SideVal lhs = side_scale_from(
            side_chain({tsp.groupoid.alpha, tsp.groupoid.epsilon, sharp}), n, sigma_ts, -1);
        SideVal rhs = side_chain({sharp, tgp.groupoid.alpha, tgp.groupoid.epsilon});
        rep.add(compare_sides("sharp conjugates the source retraction up to the multiplicative "
                              "twist",
                              ts, lhs, rhs, spec));
        rep.add(compare_sides("sharp conjugates the target retraction", ts,
                              side_chain({tsp.groupoid.beta, tsp.groupoid.epsilon, sharp}),
                              side_chain({sharp, tgp.groupoid.beta, tgp.groupoid.epsilon}),
                              spec));
    }

    // translation of the bivector along coordinate bisections, and left
    // invariance of the scaled frame derivatives, at sampled pairs
    {
        std::vector<Multivector> lie;
        for (int i = 0; i < r; ++i)
            lie.push_back(lie_derivative(
                Tensor::vector_field(G, [&] {
                    std::vector<ExpPoly> col;
                    for (int k = 0; k < n; ++k) col.push_back(fw.f.left_frame.at(k, i));
                    return col;
                }()),
                inst.j.lambda));
        std::vector<RingMat> lie_mat;
        for (const auto& t : lie) lie_mat.push_back(bivector_matrix(t));

        GroupoidCheck trans;
        trans.label = "bivector translates multiplicatively along bisections";
        trans.certificate = "pointwise";
        GroupoidCheck invar;
        invar.label = "scaled frame derivatives of the bivector are left invariant";
        invar.certificate = "pointwise";

        PatchMap second = g.second_of_pair();
        auto eval_mat = [&](const RingMat& mat, const std::vector<SVal>& at) {
            std::vector<std::vector<SVal>> out(mat.rows, std::vector<SVal>(mat.cols));
            for (int i = 0; i < mat.rows; ++i)
                for (int j = 0; j < mat.cols; ++j) out[i][j] = sval_eval(mat.at(i, j), at);
            return out;
        };
        auto conj = [&](const std::vector<std::vector<SVal>>& d,
                        const std::vector<std::vector<SVal>>& mid) {
            int nn = (int)d.size();
            std::vector<std::vector<SVal>> out(nn, std::vector<SVal>(nn, sval_rat(0)));
            for (int i = 0; i < nn; ++i)
                for (int j = 0; j < nn; ++j) {
                    SVal s = sval_rat(0);
                    for (int a = 0; a < nn; ++a)
                        for (int b = 0; b < nn; ++b)
                            s = sval_add(s, sval_mul(d[i][a],
                                                     sval_mul(mid[a][b], d[j][b])));
                    out[i][j] = s;
                }
            return out;
        };

        int used = 0;
        for (const Point& cp : sample_points(c, spec)) {
            if (used >= 12) break;
            Point gp(cp.begin(), cp.begin() + n);
            std::vector<SVal> vals_c = point_vals(cp);
            std::vector<SVal> vals_g = point_vals(gp);
            try {
                // right translation by the constant-fiber bisection through h
                std::vector<ExpPoly> ry_imgs = patch_vars(G, 0, n);
                for (int j = 0; j < r; ++j)
                    ry_imgs.push_back(ExpPoly::constant(G, cp[n + j]));
                PatchMap ry = PatchMap::make(G, G, subst_all(g.mult.comp, ry_imgs, G));

                // left translation by the inverted bisection through g
                std::vector<SVal> ig = apply_comps(g.iota.comp, vals_g);
                std::vector<ExpPoly> chi_imgs = g.epsilon.comp;
                bool usable = true;
                for (int j = 0; j < r; ++j) {
                    if (!ig[slots[j]].ring) {
                        usable = false;
                        break;
                    }
                    chi_imgs.push_back(ig[slots[j]].c.transported(M));
                }
                if (!usable) continue;
                PatchMap chi = PatchMap::make(M, G, subst_all(second.comp, chi_imgs, M));
                PatchMap x = chi.then(g.iota);
                PatchMap xb = g.beta.then(x);
                std::vector<ExpPoly> lx_imgs = xb.comp;
                for (int j = 0; j < r; ++j) lx_imgs.push_back(ExpPoly::variable(G, slots[j]));
                PatchMap lx = PatchMap::make(G, G, subst_all(g.mult.comp, lx_imgs, G));
                PatchMap lxry = ry.then(lx);

                std::vector<SVal> vals_h = apply_comps(second.comp, vals_c);
                std::vector<SVal> vals_m = apply_comps(g.mult.comp, vals_c);
                std::vector<SVal> vals_u = apply_comps(fw.eps_alpha.comp, vals_g);

                auto dry = eval_mat(ry.jacobian(), vals_g);
                auto dlx = eval_mat(lx.jacobian(), vals_h);
                auto dlxry = eval_mat(lxry.jacobian(), vals_u);
                auto lg = eval_mat(l, vals_g);
                auto lh = eval_mat(l, vals_h);
                auto lm = eval_mat(l, vals_m);
                auto lu = eval_mat(l, vals_u);
                SVal esg = sval_exp(sval_sub(sval_rat(0), sval_eval(sigma, vals_g)));

                auto s1 = conj(dry, lg);
                auto s2 = conj(dlx, lh);
                auto s3 = conj(dlxry, lu);
                for (int i = 0; i < n && trans.pass; ++i)
                    for (int j = i + 1; j < n; ++j) {
                        SVal diff = sval_sub(lm[i][j], s1[i][j]);
                        diff = sval_sub(diff, sval_mul(esg, s2[i][j]));
                        diff = sval_add(diff, sval_mul(esg, s3[i][j]));
                        if (auto bad = sval_nonzero(diff)) {
                            trans.pass = false;
                            trans.residual = "components (" + std::to_string(i) + "," +
                                             std::to_string(j) + "): " + *bad;
                            break;
                        }
                    }

                SVal esh = sval_exp(sval_eval(sigma, vals_h));
                SVal esm = sval_exp(sval_eval(sigma, vals_m));
                for (int f = 0; f < r && invar.pass; ++f) {
                    auto lf_h = conj(dlx, eval_mat(lie_mat[f], vals_h));
                    auto lf_m = eval_mat(lie_mat[f], vals_m);
                    for (int i = 0; i < n && invar.pass; ++i)
                        for (int j = i + 1; j < n; ++j) {
                            SVal diff = sval_sub(sval_mul(esh, lf_h[i][j]),
                                                 sval_mul(esm, lf_m[i][j]));
                            if (auto bad = sval_nonzero(diff)) {
                                invar.pass = false;
                                invar.residual = "frame " + std::to_string(f) + " components (" +
                                                 std::to_string(i) + "," + std::to_string(j) +
                                                 "): " + *bad;
                                break;
                            }
                        }
                }

                trans.points.push_back(cp);
                invar.points.push_back(cp);
                ++used;
                if (!trans.pass && !invar.pass) break;
            } catch (const unsupported_substitution&) {
                continue;
            }
        }
        if (used == 0) {
            trans.pass = false;
            invar.pass = false;
            trans.residual = invar.residual = "no usable sample points for the bisection "
                                              "construction";
        }
        rep.add(std::move(trans));
        rep.add(std::move(invar));
    }

    return rep;
}

// ---------------------------------------------------------------------------
// contact groupoids

GroupoidReport contact_groupoid_check(const ConcreteGroupoid& g, const DifferentialForm& eta,
                                      const MultiplicativeFunction& sigma,
                                      const SampleSpec& spec) {
    const PatchPtr& G = g.g_patch;
    if (!same_patch(eta.patch(), G))
        throw structural_error("the form must live on the arrow patch");
    int n = G->dim(), r = g.fiber_dim();

    GroupoidReport rep;
    try {
        contact_to_jacobi(eta);
        rep.add(plain_check("form is a contact structure", true));
    } catch (const non_contact_error& ex) {
        rep.add(plain_check("form is a contact structure", false, ex.what()));
        return rep;
    }

    DoubledGroupoid tgp = tangent_cotangent(g, nullptr, DoubleKind::tangent);
    const PatchPtr& tg = tgp.groupoid.g_patch;
    const PatchPtr& ct = tgp.groupoid.composable_patch();
    std::vector<ExpPoly> etac = form_comps(eta);

    PatchMap etamap;
    {
        ExpPoly s = ExpPoly::zero(tg);
        for (int k = 0; k < n; ++k)
            s += etac[k].transported(tg) * ExpPoly::variable(tg, n + k);
        etamap = PatchMap::make(tg, make_patch({"value"}), {s});
    }
    ExpPoly sigma_ct = sigma.sigma.transported(ct);

    rep.add(compare_sides(
        "contact pairing adds along products with the twist", ct,
        side_chain({tgp.groupoid.mult, etamap}),
        side_sum(side_chain({tgp.groupoid.first_of_pair(), etamap}),
                 side_scale_from(side_chain({tgp.groupoid.second_of_pair(), etamap}), 0,
                                 sigma_ct, 1)),
        spec));

    // the induced identity for the exterior derivative on two composable pairs
    {
        std::vector<std::string> extra;
        for (int k = 0; k < n; ++k) extra.push_back("d" + G->names[k]);
        for (const auto& f : g.fiber_names()) extra.push_back("d" + f);
        extra = fresh_names(extra, ct->names);
        std::vector<std::string> names = ct->names;
        names.insert(names.end(), extra.begin(), extra.end());
        PatchPtr c2 = make_patch(names);

        DifferentialForm deta = de_rham(eta);
        PatchMap second = g.second_of_pair();
        RingMat dsec = transport_mat(second.jacobian(), c2);
        RingMat dmul = transport_mat(g.mult.jacobian(), c2);

        auto vel = [&](int which) { // 0: first pair, 1: second pair
            std::vector<ExpPoly> v;
            for (int i = 0; i < n; ++i)
                v.push_back(ExpPoly::variable(c2, which == 0 ? n + i : 2 * n + 2 * r + i));
            for (int j = 0; j < r; ++j)
                v.push_back(
                    ExpPoly::variable(c2, which == 0 ? 2 * n + r + j : 3 * n + 2 * r + j));
            return v;
        };
        auto push = [&](const RingMat& dmap, const std::vector<ExpPoly>& v) {
            std::vector<ExpPoly> out;
            for (int i = 0; i < dmap.rows; ++i) {
                ExpPoly s = ExpPoly::zero(c2);
                for (int j = 0; j < dmap.cols; ++j) s += dmap.at(i, j) * v[j];
                out.push_back(s);
            }
            return out;
        };
        std::vector<ExpPoly> v1 = vel(0), v2 = vel(1);
        std::vector<ExpPoly> x1(v1.begin(), v1.begin() + n);
        std::vector<ExpPoly> x2(v2.begin(), v2.begin() + n);
        std::vector<ExpPoly> y1 = push(dsec, v1), y2 = push(dsec, v2);
        std::vector<ExpPoly> xm1 = push(dmul, v1), xm2 = push(dmul, v2);

        std::vector<ExpPoly> at_g = patch_vars(c2, 0, n);
        std::vector<ExpPoly> at_h = transport_all(second.comp, c2);
        std::vector<ExpPoly> at_m = transport_all(g.mult.comp, c2);

        auto two_form = [&](const std::vector<ExpPoly>& at, const std::vector<ExpPoly>& u,
                            const std::vector<ExpPoly>& w) {
            SideVal acc = side_comps({ExpPoly::zero(c2)});
            for (int k = 0; k < n; ++k)
                for (int lidx = k + 1; lidx < n; ++lidx) {
                    const ExpPoly& cterm = deta.component({k, lidx});
                    if (cterm.is_zero()) continue;
                    ExpPoly anti = u[k] * w[lidx] - u[lidx] * w[k];
                    acc = side_sum(acc, side_mul(side_fn_at(cterm, at, c2),
                                                 side_comps({anti})));
                }
            return acc;
        };
        auto eta_on = [&](const std::vector<ExpPoly>& at, const std::vector<ExpPoly>& v) {
            SideVal acc = side_comps({ExpPoly::zero(c2)});
            for (int k = 0; k < n; ++k) {
                if (etac[k].is_zero()) continue;
                acc = side_sum(acc,
                               side_mul(side_fn_at(etac[k], at, c2), side_comps({v[k]})));
            }
            return acc;
        };
        auto rate = [&](const std::vector<ExpPoly>& v) {
            ExpPoly s = ExpPoly::zero(c2);
            for (int k = 0; k < n; ++k)
                s += sigma.sigma.derivative(k).transported(c2) * v[k];
            return side_comps({s});
        };

        SideVal esg = side_exp_sigma(c2, sigma.sigma.transported(c2), 1);
        SideVal lhs = two_form(at_m, xm1, xm2);
        SideVal cross = side_sub(side_mul(rate(x1), eta_on(at_h, y2)),
                                 side_mul(rate(x2), eta_on(at_h, y1)));
        SideVal rhs = side_sum(two_form(at_g, x1, x2),
                               side_mul(esg, side_sum(two_form(at_h, y1, y2), cross)));
        rep.add(compare_sides("differential pairing of products expands with the twist", c2,
                              lhs, rhs, spec));
    }

    {
        DifferentialForm pulled = pullback(eta, g.epsilon);
        Verdict v;
        v.check_zero("unit pullback", pulled);
        rep.add(from_verdict("form vanishes along units", v));
    }
    {
        std::vector<ExpPoly> pulled = form_comps(pullback(eta, g.iota));
        SideVal lhs = side_sum(side_comps(pulled),
                               side_scale_from(side_comps(etac), 0, sigma.sigma, -1));
        rep.add(compare_sides("inversion reverses the form up to the twist", G, lhs,
                              side_comps(std::vector<ExpPoly>(n, ExpPoly::zero(G))), spec));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// derived generalized bialgebroid

DerivedBialgebroid derive_gen_bialgebroid(const JacobiGroupoidInstance& inst) {
    if (!inst.verified)
        throw precondition_error("the derivation needs a verified instance");
    const ConcreteGroupoid& g = inst.groupoid;
    const PatchPtr& G = g.g_patch;
    const PatchPtr& M = g.m_patch;
    int n = G->dim(), m = M->dim(), r = g.fiber_dim();
    std::vector<int> slots = g.retraction_slots();

    DerivedBialgebroid out;
    GroupoidReport& rep = out.construction;
    FrameWork fw = frame_work(g);

    std::vector<Multivector> frame_fields;
    for (int i = 0; i < r; ++i) {
        std::vector<ExpPoly> col;
        for (int k = 0; k < n; ++k) col.push_back(fw.f.left_frame.at(k, i));
        frame_fields.push_back(Tensor::vector_field(G, col));
    }

    // structure functions from the frame brackets along units, plus the
    // closure of those brackets over the whole arrow space
    std::vector<StructureEntry> entries;
    {
        GroupoidCheck closure;
        closure.label = "frame brackets close on the invariant frame";
        for (int i = 0; i < r; ++i)
            for (int j = i + 1; j < r; ++j) {
                Multivector br = schouten(frame_fields[i], frame_fields[j]);
                std::vector<ExpPoly> ck;
                for (int k = 0; k < r; ++k) {
                    ExpPoly v = br.component({slots[k]}).substitute(g.epsilon.comp);
                    if (!v.is_zero()) entries.push_back({i, j, k, v});
                    ck.push_back(v);
                }
                std::vector<ExpPoly> cka;
                for (const auto& v : ck) cka.push_back(v.substitute(g.alpha.comp));
                for (int lidx = 0; lidx < n && closure.pass; ++lidx) {
                    ExpPoly diff = br.component({lidx});
                    for (int k = 0; k < r; ++k)
                        diff -= cka[k] * fw.f.left_frame.at(lidx, k);
                    if (!diff.is_zero()) {
                        closure.pass = false;
                        closure.residual = "bracket (" + std::to_string(i) + "," +
                                           std::to_string(j) + ") component " +
                                           std::to_string(lidx) + ": " + clip(diff.text());
                    }
                }
            }
        rep.add(std::move(closure));
    }

    AlgebroidStructure alg =
        make_algebroid(M, r, fw.f.anchor_rows, entries, g.name + " invariant sections");
    rep.add(from_verdict("algebroid axioms hold", verify_algebroid(alg)));

    Cocycle phi0 = make_cocycle(alg, unit_rate_pairing(g, inst.sigma.sigma, fw.f.unit_frame));
    rep.add(from_verdict("unit pairing of the multiplicative rate is a cocycle",
                         verify_cocycle(phi0)));

    // the inverted field along units, expressed in the frame
    std::vector<ExpPoly> u;
    std::vector<ExpPoly> xi0 = inverted_field_coeffs(g, inst.j.e, slots, &u);
    {
        GroupoidCheck span;
        span.label = "inverted field lies in the unit frame span";
        for (int i = 0; i < n && span.pass; ++i) {
            ExpPoly diff = u[i];
            for (int j = 0; j < r; ++j) diff -= fw.f.unit_frame.at(i, j) * xi0[j];
            if (!diff.is_zero()) {
                span.pass = false;
                span.residual = "component " + std::to_string(i) + ": " + clip(diff.text());
            }
        }
        rep.add(std::move(span));
    }

    // dual side through the unit conormal spaces in the straightened chart
    PatchMap psi = unit_straightening(g);
    PatchMap psi_inv = invertible_copy(*psi.inverse, psi);
    JacobiStructure js = jacobi_candidate(pushforward(inst.j.lambda, psi_inv),
                                          pushforward(inst.j.e, psi_inv));
    rep.add(from_verdict("straightened structure remains Jacobi", verify_jacobi(js)));

    std::vector<int> vanish;
    for (int j = 0; j < r; ++j) vanish.push_back(m + j);
    ConormalAlgebroid con;
    bool have_con = false;
    try {
        con = conormal_algebroid(js, coisotropic_subpatch(psi.source, vanish));
        have_con = true;
        rep.add(plain_check("conormal algebroid of the unit submanifold", true));
    } catch (const error& ex) {
        rep.add(plain_check("conormal algebroid of the unit submanifold", false, ex.what()));
    }
    if (!have_con) {
        out.pass = false;
        return out;
    }

    {
        GroupoidCheck match;
        match.label = "conormal cocycle equals the inverted field coefficients";
        for (int j = 0; j < r && match.pass; ++j) {
            ExpPoly diff = con.cocycle.comps[j] - xi0[j];
            if (!diff.is_zero()) {
                match.pass = false;
                match.residual = "frame " + std::to_string(j) + ": " + clip(diff.text());
            }
        }
        rep.add(std::move(match));
    }

    Cocycle x0 = make_cocycle(con.algebroid, xi0);
    rep.add(from_verdict("dual cocycle is closed", verify_cocycle(x0)));

    try {
        out.pair = make_gen_bialgebroid(alg, phi0, con.algebroid, x0);
        rep.add(plain_check("bialgebroid assembly", true));
    } catch (const error& ex) {
        rep.add(plain_check("bialgebroid assembly", false, ex.what()));
        out.pass = false;
        return out;
    }

    out.compatibility = verify_compatibility(out.pair, CompatMode::all);
    out.pass = rep.pass && out.compatibility.pass;
    return out;
}

// ---------------------------------------------------------------------------
// the time-extended product picture

ProductEquivalenceReport verify_p38(const JacobiGroupoidInstance& inst, const SampleSpec& spec) {
    ProductEquivalenceReport rep;
    JacobiGroupoidInstance work = inst;
    rep.direct = verify_jacobi_groupoid(work, spec);

    DoubledGroupoid sd = tangent_cotangent(work.groupoid, &work.sigma, DoubleKind::semidirect);
    const std::string& t = sd.extra_name;
    Poissonization pz = poissonize(work.j, t);

    JacobiGroupoidInstance prod;
    prod.groupoid = sd.groupoid;
    prod.j = jacobi_candidate(pz.lambda_tilde,
                              Tensor::zero(pz.extended, 1, Variance::multivector));
    prod.sigma.sigma = ExpPoly::zero(sd.groupoid.g_patch);
    prod.name = work.name + " time product";
    rep.product = verify_jacobi_groupoid(prod, spec);

    rep.verdicts_agree = rep.direct.pass == rep.product.pass;
    if (!(rep.direct.pass && rep.product.pass)) {
        rep.pass = rep.verdicts_agree;
        return rep;
    }

    DerivedBialgebroid d1 = derive_gen_bialgebroid(work);
    DerivedBialgebroid d2 = derive_gen_bialgebroid(prod);
    {
        std::string why;
        if (!d1.pass) why = "direct derivation failed";
        if (!d2.pass) why += std::string(why.empty() ? "" : "; ") + "product derivation failed";
        rep.isomorphism.add(plain_check("derived pairs assemble on both routes",
                                        d1.pass && d2.pass, why));
    }
    if (d1.pass && d2.pass) {
        try {
            AlgebroidStructure bar = build_bar(d1.pair.a, d1.pair.phi0, t);
            RingMat ident = RingMat::identity(d2.pair.a.base, d2.pair.a.rank);
            rep.isomorphism.add(from_verdict("algebroid of the product is the flat time "
                                             "extension",
                                             algebroid_morphism_check(d2.pair.a, bar, ident)));
        } catch (const error& ex) {
            rep.isomorphism.add(
                plain_check("algebroid of the product is the flat time extension", false,
                            ex.what()));
        }
        try {
            AlgebroidStructure hat = build_hat(d1.pair.astar, d1.pair.x0, t);
            RingMat ident = RingMat::identity(d2.pair.astar.base, d2.pair.astar.rank);
            rep.isomorphism.add(
                from_verdict("dual algebroid of the product is the rescaled time extension",
                             algebroid_morphism_check(d2.pair.astar, hat, ident)));
        } catch (const error& ex) {
            rep.isomorphism.add(
                plain_check("dual algebroid of the product is the rescaled time extension",
                            false, ex.what()));
        }
        try {
            int n = work.groupoid.g_patch->dim();
            AlgebroidStructure jc1 = build_jacobi_cotangent(work.j);
            verify_algebroid(jc1);
            Cocycle coc1 = jacobi_cotangent_cocycle(jc1, work.j);
            verify_cocycle(coc1);
            AlgebroidStructure hatjc = build_hat(jc1, coc1, t);
            AlgebroidStructure jc2 = build_jacobi_cotangent(prod.j);
            verify_algebroid(jc2);
            RingMat m3 = RingMat::zero(hatjc.base, n + 2, n + 1);
            for (int i = 0; i < n; ++i) m3.at(i, i) = ExpPoly::constant(hatjc.base, 1);
            m3.at(n, n) = ExpPoly::constant(hatjc.base, 1);
            rep.isomorphism.add(
                from_verdict("product cotangent brackets extend the twisted cotangent "
                             "brackets",
                             algebroid_morphism_check(hatjc, jc2, m3)));
        } catch (const error& ex) {
            rep.isomorphism.add(
                plain_check("product cotangent brackets extend the twisted cotangent brackets",
                            false, ex.what()));
        }
    }
    rep.pass = rep.verdicts_agree && rep.isomorphism.pass;
    return rep;
}

// ---------------------------------------------------------------------------
// stock instances

JacobiGroupoidInstance banal_example(const PatchPtr& m, const Multivector& lambda,
                                     const Multivector& e) {
    if (lambda.grade() != 2 || lambda.variance() != Variance::multivector ||
        !same_patch(lambda.patch(), m))
        throw precondition_error("the bivector must have grade 2 over the base patch");
    if (e.grade() != 1 || e.variance() != Variance::multivector || !same_patch(e.patch(), m))
        throw precondition_error("the field must have grade 1 over the base patch");
    int md = m->dim();

    std::vector<std::string> gn = m->names;
    std::string t = fresh_name("t", gn);
    gn.push_back(t);
    for (const auto& nm : fresh_names(m->names, gn)) gn.push_back(nm);
    PatchPtr G = make_patch(gn);

    std::vector<std::string> cn = gn;
    std::string s = fresh_name("s", cn);
    cn.push_back(s);
    for (const auto& nm : fresh_names(m->names, cn)) cn.push_back(nm);
    PatchPtr C = make_patch(cn);

    PatchMap alpha = PatchMap::make(G, m, patch_vars(G, md + 1, md));
    PatchMap beta = PatchMap::make(G, m, patch_vars(G, 0, md));
    std::vector<ExpPoly> ec = patch_vars(m, 0, md);
    ec.push_back(ExpPoly::zero(m));
    for (const auto& v : patch_vars(m, 0, md)) ec.push_back(v);
    PatchMap eps = PatchMap::make(m, G, ec);
    std::vector<ExpPoly> ic = patch_vars(G, md + 1, md);
    ic.push_back(-ExpPoly::variable(G, md));
    for (const auto& v : patch_vars(G, 0, md)) ic.push_back(v);
    PatchMap iota = PatchMap::make(G, G, ic);

    std::vector<ExpPoly> sc = patch_vars(C, md + 1, md);
    sc.push_back(ExpPoly::variable(C, 2 * md + 1));
    for (const auto& v : patch_vars(C, 2 * md + 2, md)) sc.push_back(v);
    std::vector<ExpPoly> pc = patch_vars(C, 0, 2 * md + 1);
    pc.insert(pc.end(), sc.begin(), sc.end());
    PatchMap param = PatchMap::make(C, doubled_target(G), pc);
    std::vector<ExpPoly> mc = patch_vars(C, 0, md);
    mc.push_back(ExpPoly::variable(C, md) + ExpPoly::variable(C, 2 * md + 1));
    for (const auto& v : patch_vars(C, 2 * md + 2, md)) mc.push_back(v);
    PatchMap mult = PatchMap::make(C, G, mc);

    JacobiGroupoidInstance inst;
    inst.groupoid = make_groupoid(G, m, alpha, beta, eps, iota, param, mult,
                                  "two-sided product of " + std::string("the base"));
    inst.name = "banal";
    inst.sigma.sigma = ExpPoly::variable(G, md);
    verify_groupoid(inst.groupoid, &inst.sigma);

    std::vector<Rat> lin(G->dim(), Rat(0));
    lin[md] = Rat(-1);
    ExpPoly emt = ExpPoly::exponential(G, Rat(0), lin);
    std::vector<ExpPoly> to_y;
    for (int i = 0; i < md; ++i) to_y.push_back(ExpPoly::variable(G, md + 1 + i));

    Multivector big = Tensor::zero(G, 2, Variance::multivector);
    for (const auto& [idx, c] : lambda.components()) {
        ExpPoly cg = c.transported(G);
        big.add_term(idx, -cg);
        big.add_term({md + 1 + idx[0], md + 1 + idx[1]}, emt * c.substitute(to_y));
    }
    for (int i = 0; i < md; ++i) {
        ExpPoly ei = e.component({i});
        if (ei.is_zero()) continue;
        big.add_term({md, i}, ei.transported(G));
        big.add_term({md, md + 1 + i}, emt * ei.substitute(to_y));
    }
    std::vector<ExpPoly> field(G->dim(), ExpPoly::zero(G));
    for (int i = 0; i < md; ++i) field[i] = -e.component({i}).transported(G);

    inst.j = jacobi_candidate(big, Tensor::vector_field(G, field));
    verify_jacobi(inst.j);
    return inst;
}

JacobiGroupoidInstance dual_bundle_abelian_example(const AlgebroidStructure& a,
                                                   const Cocycle& w0) {
    AlgebroidStructure host = a;
    if (!host.verified) verify_algebroid(host);
    Cocycle phi = make_cocycle(host, w0.comps);
    if (!verify_cocycle(phi).pass)
        throw precondition_error("the translation example needs a genuine cocycle");
    JacobiStructure lin = linear_structures_on_dual(host, &phi);

    const PatchPtr& G = lin.patch;
    const PatchPtr& M = host.base;
    int m = M->dim(), r = host.rank;

    PatchMap alpha = PatchMap::make(G, M, patch_vars(G, 0, m));
    PatchMap beta = PatchMap::make(G, M, patch_vars(G, 0, m));
    std::vector<ExpPoly> ec = patch_vars(M, 0, m);
    for (int i = 0; i < r; ++i) ec.push_back(ExpPoly::zero(M));
    PatchMap eps = PatchMap::make(M, G, ec);
    std::vector<ExpPoly> ic = patch_vars(G, 0, m);
    for (int i = 0; i < r; ++i) ic.push_back(-ExpPoly::variable(G, m + i));
    PatchMap iota = PatchMap::make(G, G, ic);

    std::vector<std::string> want;
    for (int i = 1; i <= r; ++i) want.push_back("nu" + std::to_string(i));
    PatchPtr C = extend_patch(G, fresh_names(want, G->names));
    std::vector<ExpPoly> sc = patch_vars(C, 0, m);
    for (int i = 0; i < r; ++i) sc.push_back(ExpPoly::variable(C, m + r + i));
    std::vector<ExpPoly> pc = patch_vars(C, 0, m + r);
    pc.insert(pc.end(), sc.begin(), sc.end());
    PatchMap param = PatchMap::make(C, doubled_target(G), pc);
    std::vector<ExpPoly> mc = patch_vars(C, 0, m);
    for (int i = 0; i < r; ++i)
        mc.push_back(ExpPoly::variable(C, m + i) + ExpPoly::variable(C, m + r + i));
    PatchMap mult = PatchMap::make(C, G, mc);

    JacobiGroupoidInstance inst;
    inst.groupoid = make_groupoid(G, M, alpha, beta, eps, iota, param, mult,
                                  host.name + " dual translations");
    inst.name = "dual_bundle_abelian";
    inst.sigma.sigma = ExpPoly::zero(G);
    verify_groupoid(inst.groupoid, &inst.sigma);
    inst.j = jacobi_candidate(lin.lambda, lin.e);
    verify_jacobi(inst.j);
    return inst;
}

JacobiGroupoidInstance jacobi_lie_group_example() {
    PatchPtr G = make_patch({"a", "b"});
    PatchPtr M = make_patch({});
    PatchMap alpha = PatchMap::make(G, M, {});
    PatchMap beta = PatchMap::make(G, M, {});
    PatchMap eps = PatchMap::make(M, G, {ExpPoly::zero(M), ExpPoly::zero(M)});
    ExpPoly ema = ExpPoly::exponential(G, Rat(0), {Rat(-1), Rat(0)});
    PatchMap iota = PatchMap::make(
        G, G, {-ExpPoly::variable(G, 0), -(ema * ExpPoly::variable(G, 1))});
    PatchPtr C = make_patch({"a", "b", "a'", "b'"});
    ExpPoly ea = ExpPoly::exponential(C, Rat(0), {Rat(1), Rat(0), Rat(0), Rat(0)});
    PatchMap param = PatchMap::make(C, doubled_target(G), patch_vars(C, 0, 4));
    PatchMap mult = PatchMap::make(
        C, G,
        {ExpPoly::variable(C, 0) + ExpPoly::variable(C, 2),
         ExpPoly::variable(C, 1) + ea * ExpPoly::variable(C, 3)});

    JacobiGroupoidInstance inst;
    inst.groupoid = make_groupoid(G, M, alpha, beta, eps, iota, param, mult,
                                  "affine exponential group");
    inst.name = "jacobi_lie_group";
    inst.sigma.sigma = ExpPoly::variable(G, 0);
    verify_groupoid(inst.groupoid, &inst.sigma);
    inst.j = jacobi_candidate(Tensor::zero(G, 2, Variance::multivector),
                              Tensor::vector_field(G, {ExpPoly::zero(G),
                                                       ExpPoly::constant(G, 1)}));
    verify_jacobi(inst.j);
    return inst;
}

JacobiGroupoidInstance builtin_example(const std::string& name) {
    if (name == "banal") {
        PatchPtr m = make_patch({"x"});
        return banal_example(m, Tensor::zero(m, 2, Variance::multivector),
                             Tensor::vector_field(m, {ExpPoly::constant(m, 1)}));
    }
    if (name == "dual_bundle_abelian") {
        PatchPtr pt = make_patch({});
        AlgebroidStructure aff = make_algebroid(
            pt, 2, RingMat::zero(pt, 2, 0), {{0, 1, 1, ExpPoly::constant(pt, 1)}},
            "affine line algebra");
        verify_algebroid(aff);
        Cocycle w0 = make_cocycle(aff, {ExpPoly::constant(pt, 1), ExpPoly::zero(pt)});
        verify_cocycle(w0);
        return dual_bundle_abelian_example(aff, w0);
    }
    if (name == "jacobi_lie_group") return jacobi_lie_group_example();
    throw precondition_error("unknown example '" + name +
                             "'; available: banal, dual_bundle_abelian, jacobi_lie_group");
}

} // namespace jgeo
