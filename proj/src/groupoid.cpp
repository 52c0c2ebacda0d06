#include "groupoid_internal.hpp"

#include "jgeo/errors.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

namespace jgeo {
namespace gdetail {

std::string fresh_name(const std::string& want, const std::vector<std::string>& taken) {
    std::string n = want;
    while (std::find(taken.begin(), taken.end(), n) != taken.end()) n += "'";
    return n;
}

std::vector<std::string> fresh_names(const std::vector<std::string>& want,
                                     std::vector<std::string> taken) {
    std::vector<std::string> out;
    for (const auto& w : want) {
        std::string n = fresh_name(w, taken);
        taken.push_back(n);
        out.push_back(n);
    }
    return out;
}

RatInterval iv_exact(const Rat& r) { return {r, r}; }
RatInterval iv_add(const RatInterval& a, const RatInterval& b) { return {a.lo + b.lo, a.hi + b.hi}; }
RatInterval iv_sub(const RatInterval& a, const RatInterval& b) { return {a.lo - b.hi, a.hi - b.lo}; }

RatInterval iv_mul(const RatInterval& a, const RatInterval& b) {
    Rat c1 = a.lo * b.lo, c2 = a.lo * b.hi, c3 = a.hi * b.lo, c4 = a.hi * b.hi;
    return {std::min(std::min(c1, c2), std::min(c3, c4)),
            std::max(std::max(c1, c2), std::max(c3, c4))};
}

RatInterval iv_pow(const RatInterval& a, int n) {
    if (n == 0) return iv_exact(1);
    RatInterval r = a;
    for (int i = 1; i < n; ++i) r = iv_mul(r, a);
    return r;
}

RatInterval iv_exp(const RatInterval& x, const Rat& w) {
    RatInterval lo = enclose_exp(x.lo, w), hi = enclose_exp(x.hi, w);
    return {lo.lo, hi.hi};
}

namespace {
const Rat& fine_width() {
    static const Rat w = default_enclosure_width() / Rat(10000);
    return w;
}
} // namespace

RatInterval interval_eval(const ExpPoly& f, const std::vector<RatInterval>& box, const Rat& w) {
    RatInterval acc = iv_exact(0);
    for (const auto& [key, coeff] : f.terms()) {
        RatInterval t = iv_exact(coeff);
        for (size_t i = 0; i < key.mono.size(); ++i)
            if (key.mono[i] != 0) t = iv_mul(t, iv_pow(box[i], key.mono[i]));
        bool has_exp = key.cst != 0;
        RatInterval e = iv_exact(key.cst);
        for (size_t i = 0; i < key.lin.size(); ++i)
            if (key.lin[i] != 0) {
                has_exp = true;
                e = iv_add(e, iv_mul(iv_exact(key.lin[i]), box[i]));
            }
        if (has_exp) t = iv_mul(t, iv_exp(e, w));
        acc = iv_add(acc, t);
    }
    return acc;
}

RatInterval SVal::to_box(const Rat& w) const {
    if (!ring) return box;
    EvalResult r = c.evaluate({}, w);
    if (r.exact) return iv_exact(r.value);
    return r.box;
}

SVal sval_rat(const Rat& r) {
    SVal v;
    v.c = ExpPoly::constant(make_patch({}), r);
    return v;
}

SVal sval_const(const ExpPoly& c) {
    SVal v;
    v.c = c;
    return v;
}

SVal sval_add(const SVal& a, const SVal& b) {
    if (a.ring && b.ring) return sval_const(a.c + b.c);
    SVal v;
    v.ring = false;
    v.box = iv_add(a.to_box(fine_width()), b.to_box(fine_width()));
    return v;
}

SVal sval_sub(const SVal& a, const SVal& b) {
    if (a.ring && b.ring) return sval_const(a.c - b.c);
    SVal v;
    v.ring = false;
    v.box = iv_sub(a.to_box(fine_width()), b.to_box(fine_width()));
    return v;
}

SVal sval_mul(const SVal& a, const SVal& b) {
    if (a.ring && b.ring) return sval_const(a.c * b.c);
    SVal v;
    v.ring = false;
    v.box = iv_mul(a.to_box(fine_width()), b.to_box(fine_width()));
    return v;
}

SVal sval_exp(const SVal& a) {
    if (a.ring) {
        if (auto q = a.c.as_rational())
            return sval_const(ExpPoly::exponential(make_patch({}), *q, {}));
    }
    SVal v;
    v.ring = false;
    v.box = iv_exp(a.to_box(fine_width()), fine_width());
    return v;
}

SVal sval_eval(const ExpPoly& f, const std::vector<SVal>& at) {
    bool all_ring = true;
    for (const auto& a : at) all_ring = all_ring && a.ring;
    if (all_ring) {
        std::vector<ExpPoly> imgs;
        for (const auto& a : at) imgs.push_back(a.c);
        try {
            return sval_const(f.substitute(imgs));
        } catch (const unsupported_substitution&) {
        }
    }
    std::vector<RatInterval> box;
    for (const auto& a : at) box.push_back(a.to_box(fine_width()));
    SVal v;
    v.ring = false;
    v.box = interval_eval(f, box, fine_width());
    return v;
}

namespace {
std::string clip(std::string s) {
    if (s.size() > 200) s = s.substr(0, 200) + "...";
    return s;
}
} // namespace

std::optional<std::string> sval_nonzero(const SVal& v) {
    if (v.ring) {
        if (v.c.is_zero()) return std::nullopt;
        return clip(v.c.text());
    }
    bool contains0 = v.box.lo <= 0 && 0 <= v.box.hi;
    if (contains0 && v.box.width() <= default_enclosure_width()) return std::nullopt;
    return "[" + rat_text(v.box.lo) + ", " + rat_text(v.box.hi) + "]";
}

std::vector<ExpPoly> patch_vars(const PatchPtr& p, int from, int count) {
    std::vector<ExpPoly> out;
    for (int i = 0; i < count; ++i) out.push_back(ExpPoly::variable(p, from + i));
    return out;
}

std::vector<ExpPoly> transport_all(const std::vector<ExpPoly>& v, const PatchPtr& big) {
    std::vector<ExpPoly> out;
    for (const auto& f : v) out.push_back(f.transported(big));
    return out;
}

RingMat transport_mat(const RingMat& m, const PatchPtr& big) {
    RingMat out = RingMat::zero(big, m.rows, m.cols);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) out.at(i, j) = m.at(i, j).transported(big);
    return out;
}

namespace {
ExpPoly subst_or_transport(const ExpPoly& f, const std::vector<ExpPoly>& images,
                           const PatchPtr& rp) {
    if (f.patch()->dim() == 0) return f.transported(rp);
    return f.substitute(images);
}
} // namespace

std::vector<ExpPoly> subst_all(const std::vector<ExpPoly>& v, const std::vector<ExpPoly>& images,
                               const PatchPtr& rp) {
    std::vector<ExpPoly> out;
    for (const auto& f : v) out.push_back(subst_or_transport(f, images, rp));
    return out;
}

RingMat subst_mat(const RingMat& m, const std::vector<ExpPoly>& images, const PatchPtr& rp) {
    RingMat out = RingMat::zero(rp, m.rows, m.cols);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) out.at(i, j) = subst_or_transport(m.at(i, j), images, rp);
    return out;
}

std::optional<RingMat> try_ring_inverse(const RingMat& m) {
    if (m.rows != m.cols) return std::nullopt;
    if (m.rows == 0) return m;
    ExpPoly d = det(m);
    if (d.is_zero()) return std::nullopt;
    if (d.is_unit()) return inverse_unit_det(m);
    RingMat adj = adjugate(m);
    RingMat out = adj;
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) {
            auto q = adj.at(i, j).divided_exactly_by(d);
            if (!q) return std::nullopt;
            out.at(i, j) = *q;
        }
    return out;
}

namespace {
bool next_subset(std::vector<int>& s, int n) {
    int k = (int)s.size();
    for (int i = k - 1; i >= 0; --i) {
        if (s[i] < n - (k - i)) {
            ++s[i];
            for (int j = i + 1; j < k; ++j) s[j] = s[j - 1] + 1;
            return true;
        }
    }
    return false;
}
} // namespace

std::optional<std::vector<int>> pick_invertible_columns(const RingMat& wide, RingMat* inv) {
    int k = wide.rows, n = wide.cols;
    if (k > n) return std::nullopt;
    std::vector<int> s;
    for (int i = 0; i < k; ++i) s.push_back(i);
    while (true) {
        RingMat q = RingMat::zero(wide.patch, k, k);
        for (int i = 0; i < k; ++i)
            for (int b = 0; b < k; ++b) q.at(i, b) = wide.at(i, s[b]);
        if (auto qi = try_ring_inverse(q)) {
            if (inv) *inv = *qi;
            return s;
        }
        if (!next_subset(s, n)) return std::nullopt;
    }
}

std::vector<SVal> point_vals(const Point& p) {
    std::vector<SVal> v;
    for (const auto& x : p) v.push_back(sval_rat(x));
    return v;
}

std::vector<SVal> apply_comps(const std::vector<ExpPoly>& comps, const std::vector<SVal>& v) {
    std::vector<SVal> out;
    for (const auto& c : comps) out.push_back(sval_eval(c, v));
    return out;
}

std::vector<SVal> apply_map(const PatchMap& m, const std::vector<SVal>& v) {
    return apply_comps(m.comp, v);
}

std::optional<std::vector<ExpPoly>> try_subst(const std::vector<ExpPoly>& comps,
                                              const std::vector<ExpPoly>& images,
                                              const PatchPtr& result_patch) {
    try {
        std::vector<ExpPoly> out;
        for (const auto& f : comps) {
            if (f.patch()->dim() == 0)
                out.push_back(f.transported(result_patch));
            else
                out.push_back(f.substitute(images));
        }
        return out;
    } catch (const unsupported_substitution&) {
        return std::nullopt;
    }
}

} // namespace gdetail

using namespace gdetail;

// ---------------------------------------------------------------------------
// sampling and reports

const std::vector<Rat>& default_sample_grid() {
    static const std::vector<Rat> g = {Rat(-2), Rat(-1), Rat(-1) / 2, Rat(1) / 2, Rat(1), Rat(2)};
    return g;
}

std::vector<Point> sample_points(const PatchPtr& p, const SampleSpec& spec) {
    int d = p->dim();
    std::vector<Point> pts;
    if (d == 0) {
        pts.push_back({});
        return pts;
    }
    const std::vector<Rat>& grid = spec.grid.empty() ? default_sample_grid() : spec.grid;
    int count = std::max(spec.count, 1);
    unsigned long long total = 1;
    for (int i = 0; i < d && total <= (unsigned long long)count; ++i) total *= grid.size();
    if (total <= (unsigned long long)count) {
        std::vector<int> idx(d, 0);
        while (true) {
            Point q;
            for (int i = 0; i < d; ++i) q.push_back(grid[idx[i]]);
            pts.push_back(q);
            int i = d - 1;
            while (i >= 0 && idx[i] + 1 == (int)grid.size()) idx[i--] = 0;
            if (i < 0) break;
            ++idx[i];
        }
        return pts;
    }
    std::mt19937 eng(spec.seed);
    std::set<Point> seen;
    int tries = 0;
    while ((int)pts.size() < count && tries < 60 * count) {
        ++tries;
        Point q;
        for (int i = 0; i < d; ++i) q.push_back(grid[eng() % grid.size()]);
        if (seen.insert(q).second) pts.push_back(q);
    }
    return pts;
}

void GroupoidReport::add(GroupoidCheck c) {
    pass = pass && c.pass;
    checks.push_back(std::move(c));
}

const GroupoidCheck* GroupoidReport::find(const std::string& label) const {
    for (const auto& c : checks)
        if (c.label == label) return &c;
    return nullptr;
}

std::string GroupoidReport::summary() const {
    std::ostringstream os;
    int ok = 0;
    for (const auto& c : checks) {
        os << (c.pass ? "pass" : "FAIL") << "  " << c.label << "  [" << c.certificate << "]";
        if (!c.pass && !c.residual.empty()) os << "  residual " << c.residual;
        os << "\n";
        if (c.pass) ++ok;
    }
    os << ok << "/" << checks.size() << " identities hold";
    return os.str();
}

namespace gdetail {

// ---------------------------------------------------------------------------
// identity sides

SideVal side_comps(std::vector<ExpPoly> comps) {
    SideVal s;
    if (!comps.empty()) s.dom = comps.front().patch();
    s.pt = [comps](const Point& p) { return apply_comps(comps, point_vals(p)); };
    s.sym = std::move(comps);
    return s;
}

SideVal side_vars(const PatchPtr& p, const std::vector<int>& idx) {
    std::vector<ExpPoly> comps;
    for (int i : idx) comps.push_back(ExpPoly::variable(p, i));
    return side_comps(std::move(comps));
}

SideVal side_identity(const PatchPtr& p) {
    return side_comps(patch_vars(p, 0, p->dim()));
}

SideVal side_chain(std::vector<PatchMap> maps) {
    SideVal s;
    s.dom = maps.front().source;
    s.pt = [maps](const Point& p) {
        std::vector<SVal> v = point_vals(p);
        for (const auto& m : maps) v = apply_map(m, v);
        return v;
    };
    std::optional<std::vector<ExpPoly>> sym = maps.front().comp;
    for (size_t i = 1; i < maps.size() && sym; ++i) sym = try_subst(maps[i].comp, *sym, s.dom);
    s.sym = std::move(sym);
    return s;
}

SideVal side_then(const SideVal& s, const PatchMap& next) {
    SideVal out;
    out.dom = s.dom;
    out.pt = [s, next](const Point& p) { return apply_map(next, s.pt(p)); };
    if (s.sym) out.sym = try_subst(next.comp, *s.sym, s.dom);
    return out;
}

SideVal side_select(const SideVal& s, const std::vector<int>& idx) {
    SideVal out;
    out.dom = s.dom;
    out.pt = [s, idx](const Point& p) {
        auto v = s.pt(p);
        std::vector<SVal> w;
        for (int i : idx) w.push_back(v[i]);
        return w;
    };
    if (s.sym) {
        std::vector<ExpPoly> comps;
        for (int i : idx) comps.push_back((*s.sym)[i]);
        out.sym = std::move(comps);
    }
    return out;
}

SideVal side_concat(const std::vector<SideVal>& parts) {
    SideVal out;
    if (!parts.empty()) out.dom = parts.front().dom;
    out.pt = [parts](const Point& p) {
        std::vector<SVal> v;
        for (const auto& s : parts) {
            auto w = s.pt(p);
            v.insert(v.end(), w.begin(), w.end());
        }
        return v;
    };
    std::vector<ExpPoly> comps;
    bool all = true;
    for (const auto& s : parts) {
        if (!s.sym) {
            all = false;
            break;
        }
        comps.insert(comps.end(), s.sym->begin(), s.sym->end());
    }
    if (all) out.sym = std::move(comps);
    return out;
}

SideVal side_sum(const SideVal& a, const SideVal& b) {
    SideVal out;
    out.dom = a.dom;
    out.pt = [a, b](const Point& p) {
        auto va = a.pt(p), vb = b.pt(p);
        std::vector<SVal> v;
        for (size_t i = 0; i < va.size(); ++i) v.push_back(sval_add(va[i], vb[i]));
        return v;
    };
    if (a.sym && b.sym) {
        std::vector<ExpPoly> comps;
        for (size_t i = 0; i < a.sym->size(); ++i) comps.push_back((*a.sym)[i] + (*b.sym)[i]);
        out.sym = std::move(comps);
    }
    return out;
}

SideVal side_sub(const SideVal& a, const SideVal& b) {
    SideVal out;
    out.dom = a.dom;
    out.pt = [a, b](const Point& p) {
        auto va = a.pt(p), vb = b.pt(p);
        std::vector<SVal> v;
        for (size_t i = 0; i < va.size(); ++i) v.push_back(sval_sub(va[i], vb[i]));
        return v;
    };
    if (a.sym && b.sym) {
        std::vector<ExpPoly> comps;
        for (size_t i = 0; i < a.sym->size(); ++i) comps.push_back((*a.sym)[i] - (*b.sym)[i]);
        out.sym = std::move(comps);
    }
    return out;
}

SideVal side_neg(const SideVal& a) {
    SideVal out;
    out.dom = a.dom;
    out.pt = [a](const Point& p) {
        auto va = a.pt(p);
        std::vector<SVal> v;
        for (const auto& x : va) v.push_back(sval_sub(sval_rat(0), x));
        return v;
    };
    if (a.sym) {
        std::vector<ExpPoly> comps;
        for (const auto& c : *a.sym) comps.push_back(-c);
        out.sym = std::move(comps);
    }
    return out;
}

SideVal side_mul(const SideVal& a, const SideVal& b) {
    SideVal out;
    out.dom = a.dom;
    out.pt = [a, b](const Point& p) {
        auto va = a.pt(p), vb = b.pt(p);
        return std::vector<SVal>{sval_mul(va[0], vb[0])};
    };
    if (a.sym && b.sym) out.sym = std::vector<ExpPoly>{(*a.sym)[0] * (*b.sym)[0]};
    return out;
}

SideVal side_fn_at(const ExpPoly& f, const std::vector<ExpPoly>& at, const PatchPtr& dom) {
    SideVal out;
    out.dom = dom;
    out.pt = [f, at](const Point& p) {
        return std::vector<SVal>{sval_eval(f, apply_comps(at, point_vals(p)))};
    };
    out.sym = try_subst({f}, at, dom);
    return out;
}

SideVal side_exp_sigma(const PatchPtr& dom, const ExpPoly& sigma_on_dom, int sign) {
    SideVal out;
    out.dom = dom;
    out.pt = [sigma_on_dom, sign](const Point& p) {
        SVal s = sval_eval(sigma_on_dom, point_vals(p));
        if (sign < 0) s = sval_sub(sval_rat(0), s);
        return std::vector<SVal>{sval_exp(s)};
    };
    if (auto aff = sigma_on_dom.as_affine()) {
        Rat c0 = aff->first;
        std::vector<Rat> lin = aff->second;
        if (sign < 0) {
            c0 = -c0;
            for (auto& l : lin) l = -l;
        }
        out.sym = std::vector<ExpPoly>{ExpPoly::exponential(dom, c0, lin)};
    }
    return out;
}

SideVal side_scale_from(const SideVal& s, int from, const ExpPoly& sigma_on_dom, int sign) {
    SideVal fac = side_exp_sigma(s.dom, sigma_on_dom, sign);
    SideVal out;
    out.dom = s.dom;
    out.pt = [s, fac, from](const Point& p) {
        auto v = s.pt(p);
        SVal f = fac.pt(p)[0];
        for (size_t i = (size_t)from; i < v.size(); ++i) v[i] = sval_mul(f, v[i]);
        return v;
    };
    if (s.sym && fac.sym) {
        std::vector<ExpPoly> comps = *s.sym;
        for (size_t i = (size_t)from; i < comps.size(); ++i)
            comps[i] = comps[i] * (*fac.sym)[0];
        out.sym = std::move(comps);
    }
    return out;
}

GroupoidCheck compare_sides(const std::string& label, const PatchPtr& domain, const SideVal& a,
                            const SideVal& b, const SampleSpec& spec) {
    GroupoidCheck c;
    c.label = label;
    if (a.sym && b.sym) {
        for (size_t i = 0; i < a.sym->size(); ++i) {
            ExpPoly diff = (*a.sym)[i] - (*b.sym)[i];
            if (!diff.is_zero()) {
                c.pass = false;
                c.residual = "component " + std::to_string(i) + ": " + clip(diff.text());
                return c;
            }
        }
        return c;
    }
    c.certificate = "pointwise";
    c.points = sample_points(domain, spec);
    for (const auto& p : c.points) {
        auto va = a.pt(p), vb = b.pt(p);
        for (size_t i = 0; i < va.size(); ++i) {
            if (auto bad = sval_nonzero(sval_sub(va[i], vb[i]))) {
                c.pass = false;
                std::string where;
                for (const auto& x : p) where += (where.empty() ? "" : ",") + rat_text(x);
                c.residual = "component " + std::to_string(i) + " at (" + where + "): " + *bad;
                return c;
            }
        }
    }
    return c;
}

} // namespace gdetail

// ---------------------------------------------------------------------------
// groupoid structure

int ConcreteGroupoid::fiber_dim() const {
    return composable_patch()->dim() - g_patch->dim();
}

std::vector<std::string> ConcreteGroupoid::fiber_names() const {
    std::vector<std::string> out;
    const auto& names = composable_patch()->names;
    for (int i = g_patch->dim(); i < (int)names.size(); ++i) out.push_back(names[i]);
    return out;
}

std::vector<int> ConcreteGroupoid::retraction_slots() const {
    int n = g_patch->dim(), r = fiber_dim();
    const PatchPtr& c = composable_patch();
    std::vector<int> slots;
    for (int j = 0; j < r; ++j) {
        ExpPoly fv = ExpPoly::variable(c, n + j);
        int found = -1;
        for (int k = 0; k < n && found < 0; ++k)
            if (composable_parametrization.comp[n + k] == fv) found = k;
        if (found < 0)
            throw structural_error("fiber coordinate '" + c->names[n + j] +
                                   "' has no verbatim slot in the second factor");
        slots.push_back(found);
    }
    return slots;
}

PatchMap ConcreteGroupoid::first_of_pair() const {
    return PatchMap::make(composable_patch(), g_patch,
                          patch_vars(composable_patch(), 0, g_patch->dim()));
}

PatchMap ConcreteGroupoid::second_of_pair() const {
    int n = g_patch->dim();
    std::vector<ExpPoly> comps(composable_parametrization.comp.begin() + n,
                               composable_parametrization.comp.begin() + 2 * n);
    return PatchMap::make(composable_patch(), g_patch, std::move(comps));
}

std::vector<ExpPoly> ConcreteGroupoid::fiber_coords_of(const PatchMap& arrow) const {
    std::vector<ExpPoly> out;
    for (int s : retraction_slots()) out.push_back(arrow.comp[s]);
    return out;
}

ConcreteGroupoid make_groupoid(const PatchPtr& g_patch, const PatchPtr& m_patch, PatchMap alpha,
                               PatchMap beta, PatchMap epsilon, PatchMap iota,
                               PatchMap composable_parametrization, PatchMap mult,
                               std::string name) {
    auto expect = [](const PatchMap& m, const PatchPtr& src, const PatchPtr& dst,
                     const char* what) {
        if (!same_patch(m.source, src) || !same_patch(m.target, dst))
            throw structural_error(std::string(what) + ": unexpected source or target patch");
    };
    expect(alpha, g_patch, m_patch, "source projection");
    expect(beta, g_patch, m_patch, "target projection");
    expect(epsilon, m_patch, g_patch, "unit section");
    expect(iota, g_patch, g_patch, "inversion");
    int n = g_patch->dim();
    const PatchPtr& c = mult.source;
    if (!same_patch(c, composable_parametrization.source))
        throw structural_error("multiplication and parametrization disagree on the pair patch");
    if (!same_patch(mult.target, g_patch))
        throw structural_error("multiplication must land in the arrow patch");
    if ((int)composable_parametrization.comp.size() != 2 * n)
        throw structural_error("pair parametrization needs two arrows of components");
    if (c->dim() < n) throw structural_error("pair patch smaller than the arrow patch");
    for (int i = 0; i < n; ++i) {
        if (c->names[i] != g_patch->names[i])
            throw structural_error("pair patch must start with the arrow coordinates");
        if (composable_parametrization.comp[i] != ExpPoly::variable(c, i))
            throw structural_error("first factor must be the leading coordinate projection");
    }
    for (int j = n; j < c->dim(); ++j)
        for (const auto& mn : m_patch->names)
            if (c->names[j] == mn)
                throw structural_error("fiber coordinate '" + c->names[j] +
                                       "' collides with a base coordinate");
    ConcreteGroupoid g;
    g.g_patch = g_patch;
    g.m_patch = m_patch;
    g.alpha = std::move(alpha);
    g.beta = std::move(beta);
    g.epsilon = std::move(epsilon);
    g.iota = std::move(iota);
    g.composable_parametrization = std::move(composable_parametrization);
    g.mult = std::move(mult);
    g.name = std::move(name);
    g.retraction_slots(); // validates the verbatim-slot normal form
    return g;
}

// ---------------------------------------------------------------------------
// axiom verification

GroupoidReport verify_groupoid(ConcreteGroupoid& g, MultiplicativeFunction* sigma,
                               const SampleSpec& spec) {
    GroupoidReport rep;
    const PatchPtr& G = g.g_patch;
    const PatchPtr& C = g.composable_patch();
    int n = G->dim(), r = g.fiber_dim();
    PatchMap first = g.first_of_pair(), second = g.second_of_pair();
    std::vector<int> slots = g.retraction_slots();
    std::vector<int> all_g, fiber_idx;
    for (int i = 0; i < n; ++i) all_g.push_back(i);
    for (int j = 0; j < r; ++j) fiber_idx.push_back(n + j);

    rep.add(compare_sides("parametrized pairs are composable", C,
                          side_chain({first, g.alpha}), side_chain({second, g.beta}), spec));

    // the second factor may depend on the first only through the matching point
    SideVal dep_pair = side_concat({side_chain({first, g.alpha, g.epsilon}),
                                    side_vars(C, fiber_idx)});
    rep.add(compare_sides("second factor depends on the matching point only", C,
                          side_then(dep_pair, second), side_comps(second.comp), spec));

    rep.add(compare_sides("source of a product", C, side_chain({g.mult, g.alpha}),
                          side_chain({second, g.alpha}), spec));
    rep.add(compare_sides("target of a product", C, side_chain({g.mult, g.beta}),
                          side_chain({first, g.beta}), spec));

    // triple patch: pair coordinates plus a second copy of the fiber block
    std::vector<std::string> f2 = fresh_names(g.fiber_names(), C->names);
    std::vector<std::string> tnames = C->names;
    tnames.insert(tnames.end(), f2.begin(), f2.end());
    PatchPtr T = make_patch(tnames);
    std::vector<int> f2_idx;
    for (int j = 0; j < r; ++j) f2_idx.push_back(n + r + j);
    std::vector<ExpPoly> h_on_t = transport_all(second.comp, T);
    std::vector<ExpPoly> pair23_comps = h_on_t;
    for (int j : f2_idx) pair23_comps.push_back(ExpPoly::variable(T, j));
    PatchMap pair23 = PatchMap::make(T, C, pair23_comps);
    SideVal m23 = side_chain({pair23, g.mult});
    std::vector<ExpPoly> m12 = transport_all(g.mult.comp, T);
    std::vector<ExpPoly> outer_comps = m12;
    for (int j : f2_idx) outer_comps.push_back(ExpPoly::variable(T, j));
    PatchMap outer_pair = PatchMap::make(T, C, outer_comps);
    rep.add(compare_sides("products re-enter the pair parametrization", T,
                          side_chain({outer_pair, second}), side_chain({pair23, second}), spec));
    SideVal inner_pair =
        side_concat({side_vars(T, all_g), side_select(m23, slots)});
    rep.add(compare_sides("triple tails re-enter the pair parametrization", T,
                          side_then(inner_pair, second), m23, spec));
    rep.add(compare_sides("associativity", T, side_then(inner_pair, g.mult),
                          side_chain({outer_pair, g.mult}), spec));

    rep.add(compare_sides("source retracts the unit section", g.m_patch,
                          side_chain({g.epsilon, g.alpha}), side_identity(g.m_patch), spec));
    rep.add(compare_sides("target retracts the unit section", g.m_patch,
                          side_chain({g.epsilon, g.beta}), side_identity(g.m_patch), spec));

    SideVal eps_alpha = side_chain({g.alpha, g.epsilon});
    SideVal eps_beta = side_chain({g.beta, g.epsilon});
    SideVal ru_pair = side_concat({side_identity(G), side_select(eps_alpha, slots)});
    rep.add(compare_sides("unit pairs re-enter the pair parametrization", G,
                          side_then(ru_pair, second), eps_alpha, spec));
    rep.add(compare_sides("right unit law", G, side_then(ru_pair, g.mult), side_identity(G),
                          spec));
    SideVal lu_pair = side_concat({eps_beta, side_vars(G, slots)});
    rep.add(compare_sides("unit copairs re-enter the pair parametrization", G,
                          side_then(lu_pair, second), side_identity(G), spec));
    rep.add(compare_sides("left unit law", G, side_then(lu_pair, g.mult), side_identity(G),
                          spec));

    SideVal iota_side = side_comps(g.iota.comp);
    SideVal ri_pair = side_concat({side_identity(G), side_select(iota_side, slots)});
    rep.add(compare_sides("inverse pairs re-enter the pair parametrization", G,
                          side_then(ri_pair, second), iota_side, spec));
    rep.add(compare_sides("right inverse law", G, side_then(ri_pair, g.mult), eps_beta, spec));
    SideVal li_pair = side_concat({iota_side, side_vars(G, slots)});
    rep.add(compare_sides("inverse copairs re-enter the pair parametrization", G,
                          side_then(li_pair, second), side_identity(G), spec));
    rep.add(compare_sides("left inverse law", G, side_then(li_pair, g.mult), eps_alpha, spec));

    GroupoidCheck invol = compare_sides("inversion is involutive", G,
                                        side_chain({g.iota, g.iota}), side_identity(G), spec);
    bool invol_ok = invol.pass;
    rep.add(std::move(invol));
    if (invol_ok && !g.iota.inverse) {
        try {
            PatchMap bare = PatchMap::make(g.iota.source, g.iota.target, g.iota.comp);
            g.iota = PatchMap::with_inverse(bare, bare);
        } catch (const error&) {
        }
    }

    g.verified = rep.pass;

    if (sigma) {
        PatchPtr val = make_patch({"value"});
        PatchMap smap = PatchMap::make(G, val, {sigma->sigma});
        GroupoidReport srep;
        srep.add(compare_sides("additive over products", C, side_chain({g.mult, smap}),
                               side_sum(side_chain({first, smap}), side_chain({second, smap})),
                               spec));
        srep.add(compare_sides("vanishes on units", g.m_patch, side_chain({g.epsilon, smap}),
                               side_comps({ExpPoly::zero(g.m_patch)}), spec));
        sigma->verified = srep.pass;
        for (auto& c : srep.checks) rep.add(std::move(c));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// invariant frames

namespace gdetail {

FrameWork frame_work(const ConcreteGroupoid& g) {
    const PatchPtr& G = g.g_patch;
    const PatchPtr& M = g.m_patch;
    int n = G->dim(), m = M->dim(), r = g.fiber_dim();
    FrameWork fw;
    fw.slots = g.retraction_slots();
    fw.eps_alpha = g.alpha.then(g.epsilon);
    fw.eps_beta = g.beta.then(g.epsilon);
    for (int j = 0; j < r; ++j) fw.r_eps_alpha.push_back(fw.eps_alpha.comp[fw.slots[j]]);

    RingMat jm = g.mult.jacobian(); // n x (n + r) over C
    // left-invariant frame: fiber derivative of mult at the unit of alpha(g)
    std::vector<ExpPoly> to_unit_fiber = patch_vars(G, 0, n);
    to_unit_fiber.insert(to_unit_fiber.end(), fw.r_eps_alpha.begin(), fw.r_eps_alpha.end());
    fw.f.rank = r;
    fw.f.left_frame = RingMat::zero(G, n, r);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < r; ++j)
            fw.f.left_frame.at(i, j) = jm.at(i, n + j).substitute(to_unit_fiber);

    // frame and anchor along the units
    fw.f.unit_frame = subst_mat(fw.f.left_frame, g.epsilon.comp, M);
    RingMat dau = subst_mat(g.alpha.jacobian(), g.epsilon.comp, M); // m x n over M
    RingMat anchor_cols = dau * fw.f.unit_frame;                 // m x r over M
    fw.f.anchor_rows = anchor_cols.transposed();

    // dual coframe: last r rows of the inverse of [unit tangents | frame]
    RingMat de_beta = subst_mat(g.epsilon.jacobian(), g.beta.comp, G); // n x m over G
    RingMat b = RingMat::zero(G, n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) b.at(i, j) = de_beta.at(i, j);
        for (int j = 0; j < r; ++j) b.at(i, m + j) = fw.f.left_frame.at(i, j);
    }
    auto binv = try_ring_inverse(b);
    if (!binv)
        throw structural_error("unit tangents and the invariant frame do not invert over the ring");
    fw.f.coframe_ext = RingMat::zero(G, r, n);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < n; ++j) fw.f.coframe_ext.at(i, j) = binv->at(m + i, j);
    fw.f.unit_coframe = subst_mat(fw.f.coframe_ext, g.epsilon.comp, M);

    // right-translation derivative at (eps(beta(h)), r(h))
    std::vector<ExpPoly> at_right = fw.eps_beta.comp;
    for (int j = 0; j < r; ++j) at_right.push_back(ExpPoly::variable(G, fw.slots[j]));
    fw.right_jac = RingMat::zero(G, n, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) fw.right_jac.at(i, k) = jm.at(i, k).substitute(at_right);

    // target projection of covectors: columns U * (a_i - unit part of a_i)
    RingMat de = g.epsilon.jacobian(); // n x m over M
    fw.beta_tilde = RingMat::zero(G, n, r);
    for (int i = 0; i < r; ++i) {
        std::vector<ExpPoly> w(n, ExpPoly::zero(M));
        for (int k = 0; k < n; ++k) {
            w[k] = fw.f.unit_frame.at(k, i);
            for (int l = 0; l < m; ++l)
                w[k] -= de.at(k, l) * fw.f.anchor_rows.at(i, l);
        }
        std::vector<ExpPoly> wg = subst_all(w, g.beta.comp, G);
        for (int k = 0; k < n; ++k) {
            ExpPoly acc = ExpPoly::zero(G);
            for (int l = 0; l < n; ++l) acc += fw.right_jac.at(k, l) * wg[l];
            fw.beta_tilde.at(k, i) = acc;
        }
    }
    return fw;
}

PatchMap unit_straightening(const ConcreteGroupoid& g) {
    const PatchPtr& G = g.g_patch;
    const PatchPtr& M = g.m_patch;
    int n = G->dim(), m = M->dim(), r = g.fiber_dim();
    std::vector<int> slots = g.retraction_slots();
    std::vector<std::string> names = M->names;
    for (const auto& f : g.fiber_names()) names.push_back(f);
    PatchPtr s = make_patch(names);

    std::vector<ExpPoly> r_eps; // fiber coordinates of eps(x), over M
    for (int j = 0; j < r; ++j) r_eps.push_back(g.epsilon.comp[slots[j]]);
    std::vector<ExpPoly> imgs = transport_all(g.epsilon.comp, s);
    // the chart sends (x, f) to the arrow with target x and fiber f + r(eps(x))
    std::vector<ExpPoly> c_imgs = patch_vars(s, 0, 0);
    for (int i = 0; i < n; ++i) c_imgs.push_back(imgs[i]);
    for (int j = 0; j < r; ++j)
        c_imgs.push_back(ExpPoly::variable(s, m + j) + r_eps[j].transported(s));
    PatchMap second = g.second_of_pair();
    PatchMap fwd = PatchMap::make(s, G, subst_all(second.comp, c_imgs, s));

    std::vector<ExpPoly> back = g.beta.comp;
    std::vector<ExpPoly> r_eps_beta = subst_all(r_eps, g.beta.comp, G);
    for (int j = 0; j < r; ++j)
        back.push_back(ExpPoly::variable(G, slots[j]) - r_eps_beta[j]);
    PatchMap bwd = PatchMap::make(G, s, back);
    return PatchMap::with_inverse(fwd, bwd);
}

RingMat bivector_matrix(const Multivector& lambda) {
    int n = lambda.index_dim();
    RingMat m = RingMat::zero(lambda.patch(), n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) m.at(i, j) = lambda.component({i, j});
    return m;
}

std::vector<ExpPoly> field_comps(const Multivector& x) {
    std::vector<ExpPoly> out;
    for (int i = 0; i < x.index_dim(); ++i) out.push_back(x.component({i}));
    return out;
}

std::vector<ExpPoly> form_comps(const DifferentialForm& w) {
    return field_comps(w);
}

} // namespace gdetail

InvariantFrame invariant_frame(const ConcreteGroupoid& g) {
    return frame_work(g).f;
}

// ---------------------------------------------------------------------------
// doubled groupoids

namespace {

std::vector<std::string> prefixed(const std::string& pre, const std::vector<std::string>& names,
                                  std::vector<std::string> taken) {
    std::vector<std::string> want;
    for (const auto& n : names) want.push_back(pre + n);
    return fresh_names(want, std::move(taken));
}

// chain-rule prolongation of f into big source s; dvar_index[i] = velocity
// slot of source variable i
std::vector<ExpPoly> tangent_comps(const PatchMap& f, const PatchPtr& s,
                                   const std::vector<int>& dvar_index) {
    std::vector<ExpPoly> out = transport_all(f.comp, s);
    RingMat j = f.jacobian();
    for (int a = 0; a < f.target->dim(); ++a) {
        ExpPoly d = ExpPoly::zero(s);
        for (int i = 0; i < f.source->dim(); ++i)
            d += j.at(a, i).transported(s) * ExpPoly::variable(s, dvar_index[i]);
        out.push_back(d);
    }
    return out;
}

} // namespace

namespace gdetail {
PatchPtr doubled_target(const PatchPtr& arrow) {
    std::vector<std::string> names = arrow->names;
    for (const auto& n : fresh_names(arrow->names, names)) names.push_back(n);
    return make_patch(names);
}
} // namespace gdetail

namespace {

DoubledGroupoid build_tangent(const ConcreteGroupoid& g, const MultiplicativeFunction* sigma,
                              bool with_r) {
    const PatchPtr& G = g.g_patch;
    const PatchPtr& M = g.m_patch;
    int n = G->dim(), m = M->dim(), r = g.fiber_dim();
    if (with_r && !sigma)
        throw precondition_error("line-twisted doubles need a multiplicative function");

    std::vector<std::string> dg = prefixed("d", G->names, G->names);
    std::vector<std::string> tg_names = G->names;
    tg_names.insert(tg_names.end(), dg.begin(), dg.end());
    std::string lam;
    if (with_r) {
        lam = fresh_name("lam", tg_names);
        tg_names.push_back(lam);
    }
    PatchPtr TG = make_patch(tg_names);

    std::vector<std::string> dm = prefixed("d", M->names, M->names);
    std::vector<std::string> tm_names = M->names;
    tm_names.insert(tm_names.end(), dm.begin(), dm.end());
    if (with_r) tm_names.push_back(fresh_name("lam", tm_names));
    PatchPtr TM = make_patch(tm_names);

    std::vector<int> didx;
    for (int i = 0; i < n; ++i) didx.push_back(n + i);
    std::vector<int> didx_m;
    for (int i = 0; i < m; ++i) didx_m.push_back(m + i);

    auto sigma_rate = [&](const PatchPtr& host) {
        ExpPoly x = ExpPoly::zero(host);
        for (int i = 0; i < n; ++i)
            x += sigma->sigma.derivative(i).transported(host) * ExpPoly::variable(host, n + i);
        return x;
    };

    std::vector<ExpPoly> ac = tangent_comps(g.alpha, TG, didx);
    std::vector<ExpPoly> bc = tangent_comps(g.beta, TG, didx);
    std::vector<ExpPoly> ic = tangent_comps(g.iota, TG, didx);
    std::vector<ExpPoly> ec = tangent_comps(g.epsilon, TM, didx_m);
    if (with_r) {
        ExpPoly lv = ExpPoly::variable(TG, 2 * n);
        ac.push_back(sigma_rate(TG) + lv);
        bc.push_back(lv);
        ic.push_back(sigma_rate(TG) + lv);
        ec.push_back(ExpPoly::variable(TM, 2 * m));
    }
    PatchMap alpha_t = PatchMap::make(TG, TM, ac);
    PatchMap beta_t = PatchMap::make(TG, TM, bc);
    PatchMap iota_t = PatchMap::make(TG, TG, ic);
    PatchMap eps_t = PatchMap::make(TM, TG, ec);

    // pair patch: arrow block, then fiber block with its velocities
    std::vector<std::string> df = prefixed("d", g.fiber_names(), tg_names);
    std::vector<std::string> ct_names = tg_names;
    for (const auto& f : g.fiber_names()) ct_names.push_back(f);
    for (const auto& f : df) ct_names.push_back(f);
    PatchPtr CT = make_patch(ct_names);
    int base = n + n + (with_r ? 1 : 0);
    std::vector<int> cidx; // velocity slots of the pair-patch variables
    for (int i = 0; i < n; ++i) cidx.push_back(n + i);
    for (int j = 0; j < r; ++j) cidx.push_back(base + r + j);

    PatchMap second = g.second_of_pair();
    std::vector<ExpPoly> sc = tangent_comps(second, CT, cidx);
    std::vector<ExpPoly> mc = tangent_comps(g.mult, CT, cidx);
    if (with_r) {
        ExpPoly lv = ExpPoly::variable(CT, 2 * n);
        ExpPoly rate = ExpPoly::zero(CT);
        for (int i = 0; i < n; ++i)
            rate += sigma->sigma.derivative(i).transported(CT) * ExpPoly::variable(CT, n + i);
        sc.push_back(rate + lv);
        mc.push_back(lv);
    }
    std::vector<ExpPoly> pc = patch_vars(CT, 0, TG->dim());
    pc.insert(pc.end(), sc.begin(), sc.end());
    PatchPtr TG2 = doubled_target(TG);
    PatchMap param = PatchMap::make(CT, TG2, pc);
    PatchMap mult_t = PatchMap::make(CT, TG, mc);

    DoubledGroupoid out;
    out.groupoid = make_groupoid(TG, TM, alpha_t, beta_t, eps_t, iota_t, param, mult_t,
                                 g.name + (with_r ? " tangent-line" : " tangent"));
    out.to_base = PatchMap::make(TG, G, patch_vars(TG, 0, n));
    out.extra_name = lam;
    return out;
}

DoubledGroupoid build_cotangent(const ConcreteGroupoid& g, const MultiplicativeFunction* sigma,
                                bool with_r) {
    const PatchPtr& G = g.g_patch;
    const PatchPtr& M = g.m_patch;
    const PatchPtr& C = g.composable_patch();
    int n = G->dim(), m = M->dim(), r = g.fiber_dim();
    if (with_r && !sigma)
        throw precondition_error("line-twisted doubles need a multiplicative function");
    FrameWork fw = frame_work(g);

    ExpPoly es = ExpPoly::zero(G), em = ExpPoly::zero(G);
    if (with_r) {
        auto aff = sigma->sigma.as_affine();
        if (!aff)
            throw structural_error(
                "twisted covector translations need an affine multiplicative function");
        std::vector<Rat> neg;
        for (const auto& b : aff->second) neg.push_back(-b);
        es = ExpPoly::exponential(G, aff->first, aff->second);
        em = ExpPoly::exponential(G, -aff->first, neg);
    }

    std::vector<std::string> pn = prefixed("p", G->names, G->names);
    std::vector<std::string> tsg_names = G->names;
    tsg_names.insert(tsg_names.end(), pn.begin(), pn.end());
    std::string gam;
    if (with_r) {
        gam = fresh_name("gam", tsg_names);
        tsg_names.push_back(gam);
    }
    PatchPtr TsG = make_patch(tsg_names);

    std::vector<std::string> mu;
    {
        std::vector<std::string> want;
        for (int i = 1; i <= r; ++i) want.push_back("mu" + std::to_string(i));
        mu = fresh_names(want, M->names);
    }
    PatchPtr AST = extend_patch(M, mu);

    auto pvar = [&](int k) { return ExpPoly::variable(TsG, n + k); };
    ExpPoly gam_v = with_r ? ExpPoly::variable(TsG, 2 * n) : ExpPoly::zero(TsG);

    // source covector projection: pairing with the left-invariant frame
    RingMat vt = transport_mat(fw.f.left_frame, TsG);
    std::vector<ExpPoly> ac = transport_all(g.alpha.comp, TsG);
    for (int i = 0; i < r; ++i) {
        ExpPoly s = ExpPoly::zero(TsG);
        for (int j = 0; j < n; ++j) s += pvar(j) * vt.at(j, i);
        if (with_r) s = s * em.transported(TsG);
        ac.push_back(s);
    }
    PatchMap alpha_s = PatchMap::make(TsG, AST, ac);

    // unit pairing of the multiplicative rate with the frame, over M
    std::vector<ExpPoly> phi_u(r, ExpPoly::zero(M));
    if (sigma)
        for (int i = 0; i < r; ++i) {
            ExpPoly s = ExpPoly::zero(M);
            for (int k = 0; k < n; ++k)
                s += sigma->sigma.derivative(k).substitute(g.epsilon.comp) *
                     fw.f.unit_frame.at(k, i);
            phi_u[i] = s;
        }

    RingMat wt = transport_mat(fw.beta_tilde, TsG);
    std::vector<ExpPoly> bc = transport_all(g.beta.comp, TsG);
    for (int i = 0; i < r; ++i) {
        ExpPoly s = ExpPoly::zero(TsG);
        for (int j = 0; j < n; ++j) s += pvar(j) * wt.at(j, i);
        if (with_r) s -= gam_v * phi_u[i].substitute(g.beta.comp).transported(TsG);
        bc.push_back(s);
    }
    PatchMap beta_s = PatchMap::make(TsG, AST, bc);

    std::vector<ExpPoly> ec = transport_all(g.epsilon.comp, AST);
    RingMat cu = transport_mat(fw.f.unit_coframe, AST);
    for (int j = 0; j < n; ++j) {
        ExpPoly s = ExpPoly::zero(AST);
        for (int i = 0; i < r; ++i) s += ExpPoly::variable(AST, m + i) * cu.at(i, j);
        ec.push_back(s);
    }
    if (with_r) ec.push_back(ExpPoly::zero(AST));
    PatchMap eps_s = PatchMap::make(AST, TsG, ec);

    RingMat dii = subst_mat(g.iota.jacobian(), g.iota.comp, G); // over G, at iota(g)
    std::vector<ExpPoly> dsi;                                // d sigma at iota(g)
    if (sigma)
        for (int k = 0; k < n; ++k)
            dsi.push_back(sigma->sigma.derivative(k).substitute(g.iota.comp));
    std::vector<ExpPoly> ic = transport_all(g.iota.comp, TsG);
    for (int k = 0; k < n; ++k) {
        ExpPoly s = ExpPoly::zero(TsG);
        for (int j = 0; j < n; ++j) s -= pvar(j) * dii.at(j, k).transported(TsG);
        if (with_r)
            s = em.transported(TsG) * (s - gam_v * dsi[k].transported(TsG));
        ic.push_back(s);
    }
    if (with_r) ic.push_back(-em.transported(TsG) * gam_v);
    PatchMap iota_s = PatchMap::make(TsG, TsG, ic);

    // covector pair patch: solve the matching constraint for the second
    // covector over a ring-invertible row block, leaving the rest free
    RingMat binv = RingMat::zero(G, 0, 0);
    auto rows = pick_invertible_columns(fw.beta_tilde.transposed(), &binv);
    if (!rows)
        throw structural_error("no ring-invertible covector block in the target projection");
    std::vector<int> rset = *rows, fset;
    for (int k = 0; k < n; ++k)
        if (std::find(rset.begin(), rset.end(), k) == rset.end()) fset.push_back(k);

    std::vector<std::string> cs_names = tsg_names;
    for (const auto& f : g.fiber_names()) cs_names.push_back(f);
    std::vector<std::string> qn;
    for (int b : fset) qn.push_back("q" + G->names[b]);
    qn = fresh_names(qn, cs_names);
    cs_names.insert(cs_names.end(), qn.begin(), qn.end());
    std::string zeta;
    if (with_r) {
        zeta = fresh_name("zet", cs_names);
        cs_names.push_back(zeta);
    }
    PatchPtr CS = make_patch(cs_names);
    int tdim = TsG->dim();
    int q_off = tdim + r;
    ExpPoly zeta_v = with_r ? ExpPoly::variable(CS, CS->dim() - 1) : ExpPoly::zero(CS);

    PatchMap second = g.second_of_pair();
    std::vector<ExpPoly> h_cs = transport_all(second.comp, CS);
    RingMat w2h = subst_mat(fw.beta_tilde, h_cs, CS);    // n x r over CS
    RingMat binv_h = subst_mat(binv, h_cs, CS);          // r x r over CS
    RingMat vcs = transport_mat(fw.f.left_frame, CS);
    // matching constraint: nu.W2(h) = em(g) p.V(g) + zeta phi(alpha g)
    std::vector<ExpPoly> rhs;
    for (int i = 0; i < r; ++i) {
        ExpPoly s = ExpPoly::zero(CS);
        for (int j = 0; j < n; ++j) s += ExpPoly::variable(CS, n + j) * vcs.at(j, i);
        if (with_r) {
            s = s * em.transported(CS);
            s += zeta_v * phi_u[i].substitute(g.alpha.comp).transported(CS);
        }
        rhs.push_back(s);
    }
    // free covector entries subtract off
    for (int i = 0; i < r; ++i)
        for (size_t b = 0; b < fset.size(); ++b)
            rhs[i] -= ExpPoly::variable(CS, q_off + (int)b) * w2h.at(fset[b], i);
    std::vector<ExpPoly> nu(n, ExpPoly::zero(CS));
    for (size_t b = 0; b < fset.size(); ++b) nu[fset[b]] = ExpPoly::variable(CS, q_off + (int)b);
    for (int a = 0; a < r; ++a) {
        ExpPoly s = ExpPoly::zero(CS);
        for (int i = 0; i < r; ++i) s += binv_h.at(a, i) * rhs[i];
        nu[rset[a]] = s;
    }

    std::vector<ExpPoly> param_comps = patch_vars(CS, 0, tdim);
    for (const auto& hc : h_cs) param_comps.push_back(hc);
    for (const auto& nc : nu) param_comps.push_back(nc);
    if (with_r) param_comps.push_back(zeta_v);
    PatchPtr TsG2 = doubled_target(TsG);
    PatchMap param = PatchMap::make(CS, TsG2, param_comps);

    // product covector: pair the sum against the product tangent lift
    RingMat jm = g.mult.jacobian();
    RingMat jinv = RingMat::zero(C, 0, 0);
    auto cols = pick_invertible_columns(jm, &jinv);
    if (!cols)
        throw structural_error("no ring-invertible block in the multiplication derivative");
    RingMat ds = second.jacobian(); // n x (n + r) over C
    std::vector<ExpPoly> omega1; // first covector, twisted
    for (int k = 0; k < n; ++k) {
        ExpPoly s = ExpPoly::variable(CS, n + k);
        if (with_r)
            s += es.transported(CS) * zeta_v *
                 sigma->sigma.derivative(k).transported(CS);
        omega1.push_back(s);
    }
    std::vector<ExpPoly> nu2 = nu;
    if (with_r)
        for (auto& x : nu2) x = es.transported(CS) * x;
    std::vector<ExpPoly> rhs_s;
    for (int b = 0; b < n; ++b) {
        int l = (*cols)[b];
        ExpPoly s = ExpPoly::zero(CS);
        if (l < n) s += omega1[l];
        for (int j = 0; j < n; ++j) s += nu2[j] * ds.at(j, l).transported(CS);
        rhs_s.push_back(s);
    }
    RingMat jinv_cs = transport_mat(jinv, CS);
    std::vector<ExpPoly> mc = transport_all(g.mult.comp, CS);
    for (int i = 0; i < n; ++i) {
        ExpPoly s = ExpPoly::zero(CS);
        for (int b = 0; b < n; ++b) s += jinv_cs.at(b, i) * rhs_s[b];
        mc.push_back(s);
    }
    if (with_r) mc.push_back(gam_v.transported(CS) + es.transported(CS) * zeta_v);
    PatchMap mult_s = PatchMap::make(CS, TsG, mc);

    DoubledGroupoid out;
    out.groupoid = make_groupoid(TsG, AST, alpha_s, beta_s, eps_s, iota_s, param, mult_s,
                                 g.name + (with_r ? " cotangent-line" : " cotangent"));
    out.to_base = PatchMap::make(TsG, G, patch_vars(TsG, 0, n));
    out.extra_name = gam;
    return out;
}

DoubledGroupoid build_semidirect(const ConcreteGroupoid& g, const MultiplicativeFunction* sigma) {
    if (!sigma) throw precondition_error("the time-shifted product needs a multiplicative function");
    const PatchPtr& G = g.g_patch;
    const PatchPtr& M = g.m_patch;
    int n = G->dim(), m = M->dim();

    std::vector<std::string> taken = G->names;
    taken.insert(taken.end(), M->names.begin(), M->names.end());
    std::string t = fresh_name("t", taken);
    PatchPtr GS = extend_patch(G, {t});
    PatchPtr MS = extend_patch(M, {t});
    ExpPoly tg = ExpPoly::variable(GS, n);
    ExpPoly sig = sigma->sigma.transported(GS);

    std::vector<ExpPoly> ac = transport_all(g.alpha.comp, GS);
    ac.push_back(sig + tg);
    std::vector<ExpPoly> bc = transport_all(g.beta.comp, GS);
    bc.push_back(tg);
    std::vector<ExpPoly> ic = transport_all(g.iota.comp, GS);
    ic.push_back(sig + tg);
    std::vector<ExpPoly> ec = transport_all(g.epsilon.comp, MS);
    ec.push_back(ExpPoly::variable(MS, m));
    PatchMap alpha_s = PatchMap::make(GS, MS, ac);
    PatchMap beta_s = PatchMap::make(GS, MS, bc);
    PatchMap iota_s = PatchMap::make(GS, GS, ic);
    PatchMap eps_s = PatchMap::make(MS, GS, ec);

    std::vector<std::string> cs_names = GS->names;
    for (const auto& f : g.fiber_names()) cs_names.push_back(f);
    PatchPtr CS = make_patch(cs_names);
    PatchMap second = g.second_of_pair();
    std::vector<ExpPoly> sc = transport_all(second.comp, CS);
    sc.push_back(sigma->sigma.transported(CS) + ExpPoly::variable(CS, n));
    std::vector<ExpPoly> mc = transport_all(g.mult.comp, CS);
    mc.push_back(ExpPoly::variable(CS, n));
    std::vector<ExpPoly> pc = patch_vars(CS, 0, n + 1);
    pc.insert(pc.end(), sc.begin(), sc.end());
    PatchPtr GS2 = doubled_target(GS);
    PatchMap param = PatchMap::make(CS, GS2, pc);
    PatchMap mult_s = PatchMap::make(CS, GS, mc);

    DoubledGroupoid out;
    out.groupoid = make_groupoid(GS, MS, alpha_s, beta_s, eps_s, iota_s, param, mult_s,
                                 g.name + " time-product");
    out.to_base = PatchMap::make(GS, G, patch_vars(GS, 0, n));
    out.extra_name = t;
    return out;
}

} // namespace

DoubledGroupoid tangent_cotangent(const ConcreteGroupoid& g, const MultiplicativeFunction* sigma,
                                  DoubleKind which) {
    switch (which) {
    case DoubleKind::tangent: return build_tangent(g, sigma, false);
    case DoubleKind::tangent_r: return build_tangent(g, sigma, true);
    case DoubleKind::cotangent: return build_cotangent(g, sigma, false);
    case DoubleKind::cotangent_r: return build_cotangent(g, sigma, true);
    case DoubleKind::semidirect: return build_semidirect(g, sigma);
    }
    throw structural_error("unknown double kind");
}

// ---------------------------------------------------------------------------
// pair groupoid

ConcreteGroupoid pair_groupoid(const PatchPtr& m) {
    int d = m->dim();
    std::vector<std::string> left = m->names;
    std::vector<std::string> right = fresh_names(m->names, left);
    std::vector<std::string> gn = left;
    gn.insert(gn.end(), right.begin(), right.end());
    PatchPtr G = make_patch(gn);
    std::vector<std::string> right2 = fresh_names(m->names, gn);
    std::vector<std::string> cn = gn;
    cn.insert(cn.end(), right2.begin(), right2.end());
    PatchPtr C = make_patch(cn);

    PatchMap alpha = PatchMap::make(G, m, patch_vars(G, d, d));
    PatchMap beta = PatchMap::make(G, m, patch_vars(G, 0, d));
    std::vector<ExpPoly> ec = patch_vars(m, 0, d);
    auto ec2 = ec;
    ec.insert(ec.end(), ec2.begin(), ec2.end());
    PatchMap eps = PatchMap::make(m, G, ec);
    std::vector<ExpPoly> ic = patch_vars(G, d, d);
    auto ic2 = patch_vars(G, 0, d);
    ic.insert(ic.end(), ic2.begin(), ic2.end());
    PatchMap iota = PatchMap::make(G, G, ic);
    std::vector<ExpPoly> pc = patch_vars(C, 0, 2 * d);
    auto sc = patch_vars(C, d, d);
    auto sc2 = patch_vars(C, 2 * d, d);
    sc.insert(sc.end(), sc2.begin(), sc2.end());
    pc.insert(pc.end(), sc.begin(), sc.end());
    PatchPtr G2 = doubled_target(G);
    PatchMap param = PatchMap::make(C, G2, pc);
    std::vector<ExpPoly> mc = patch_vars(C, 0, d);
    auto mc2 = patch_vars(C, 2 * d, d);
    mc.insert(mc.end(), mc2.begin(), mc2.end());
    PatchMap mult = PatchMap::make(C, G, mc);
    return make_groupoid(G, m, alpha, beta, eps, iota, param, mult, "pair");
}

} // namespace jgeo
