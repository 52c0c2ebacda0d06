#include "jgeo/exppoly.hpp"

#include "jgeo/errors.hpp"

#include <algorithm>
#include <sstream>

namespace jgeo {

namespace {

Rat rat_pow(const Rat& base, int k) {
    Rat r = 1;
    for (int i = 0; i < k; ++i) r *= base;
    return r;
}

bool all_zero(const std::vector<Rat>& v) {
    return std::all_of(v.begin(), v.end(), [](const Rat& r) { return r == 0; });
}

bool all_zero(const std::vector<int>& v) {
    return std::all_of(v.begin(), v.end(), [](int m) { return m == 0; });
}

} // namespace

// ---------------------------------------------------------------------------
// rigorous enclosure of e^x

const Rat& default_enclosure_width() {
    static const Rat w = [] {
        Int d = 1;
        for (int i = 0; i < 30; ++i) d *= 10;
        return Rat(Int(1), d);
    }();
    return w;
}

namespace {

// Enclosure of e^y for 0 < y <= 1/2 using N series terms:
// [S_N, S_N + 2 y^{N+1}/(N+1)!]  (geometric tail bound, ratio <= 1/2).
RatInterval exp_series_small(const Rat& y, int n_terms) {
    Rat sum = 1, term = 1;
    for (int n = 1; n <= n_terms; ++n) {
        term = term * y / n;
        sum += term;
    }
    Rat tail = 2 * term * y / (n_terms + 1);
    return {sum, sum + tail};
}

} // namespace

RatInterval enclose_exp(const Rat& x, const Rat& max_width) {
    if (max_width <= 0) throw precondition_error("enclosure width must be positive");
    if (x == 0) return {Rat(1), Rat(1)};
    if (x < 0) {
        // e^x = 1/e^{-x}; for -x > 0 the enclosure has lo >= 1, so the
        // reciprocal interval is at most as wide as the direct one.
        RatInterval pos = enclose_exp(-x, max_width);
        return {1 / pos.hi, 1 / pos.lo};
    }
    // halve until the argument is <= 1/2, square back afterwards
    int halvings = 0;
    Rat y = x;
    while (y > Rat(1, 2)) {
        y /= 2;
        ++halvings;
    }
    for (int n_terms = 8;; n_terms *= 2) {
        RatInterval box = exp_series_small(y, n_terms);
        for (int i = 0; i < halvings; ++i) box = {box.lo * box.lo, box.hi * box.hi};
        if (box.width() <= max_width) return box;
    }
}

// ---------------------------------------------------------------------------
// construction and normal form

void ExpPoly::add_term(const ExpKey& k, const Rat& c) {
    if (c == 0) return;
    auto it = terms_.find(k);
    if (it == terms_.end()) {
        terms_.emplace(k, c);
    } else {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }
}

void ExpPolyBuilder::add(const Rat& coeff, std::vector<int> mono, const Rat& ecst,
                         std::vector<Rat> elin) {
    const int d = result_.patch()->dim();
    if ((int)mono.size() != d || (int)elin.size() != d)
        throw structural_error("term data does not match patch dimension");
    for (int m : mono)
        if (m < 0) throw structural_error("negative monomial exponent");
    result_.add_term(ExpKey{std::move(elin), ecst, std::move(mono)}, coeff);
}

ExpPoly ExpPoly::zero(const PatchPtr& p) {
    ExpPoly r;
    r.patch_ = p;
    return r;
}

ExpPoly ExpPoly::constant(const PatchPtr& p, const Rat& c) {
    ExpPoly r = zero(p);
    r.add_term(ExpKey{std::vector<Rat>(p->dim(), Rat(0)), Rat(0),
                      std::vector<int>(p->dim(), 0)},
               c);
    return r;
}

ExpPoly ExpPoly::variable(const PatchPtr& p, int index) {
    if (index < 0 || index >= p->dim()) throw structural_error("variable index out of range");
    ExpPoly r = zero(p);
    std::vector<int> mono(p->dim(), 0);
    mono[index] = 1;
    r.add_term(ExpKey{std::vector<Rat>(p->dim(), Rat(0)), Rat(0), std::move(mono)}, Rat(1));
    return r;
}

ExpPoly ExpPoly::variable(const PatchPtr& p, const std::string& name) {
    int i = p->index_of(name);
    if (i < 0) throw structural_error("unknown variable '" + name + "'");
    return variable(p, i);
}

ExpPoly ExpPoly::exponential(const PatchPtr& p, const Rat& cst, std::vector<Rat> lin) {
    if ((int)lin.size() != p->dim())
        throw structural_error("exponent data does not match patch dimension");
    ExpPoly r = zero(p);
    r.add_term(ExpKey{std::move(lin), cst, std::vector<int>(p->dim(), 0)}, Rat(1));
    return r;
}

ExpPoly ExpPoly::term(const PatchPtr& p, const Rat& coeff, std::vector<int> mono,
                      const Rat& ecst, std::vector<Rat> elin) {
    ExpPolyBuilder b(p);
    b.add(coeff, std::move(mono), ecst, std::move(elin));
    return b.take();
}

// ---------------------------------------------------------------------------
// predicates

bool ExpPoly::is_constant() const {
    for (const auto& [k, c] : terms_)
        if (!all_zero(k.mono) || !all_zero(k.lin)) return false;
    return true;
}

std::optional<Rat> ExpPoly::as_rational() const {
    if (terms_.empty()) return Rat(0);
    if (terms_.size() != 1) return std::nullopt;
    const auto& [k, c] = *terms_.begin();
    if (!all_zero(k.mono) || !all_zero(k.lin) || k.cst != 0) return std::nullopt;
    return c;
}

std::optional<std::pair<Rat, std::vector<Rat>>> ExpPoly::as_affine() const {
    Rat a0 = 0;
    std::vector<Rat> a(patch_->dim(), Rat(0));
    for (const auto& [k, c] : terms_) {
        if (!all_zero(k.lin) || k.cst != 0) return std::nullopt;
        int degree = 0, where = -1;
        for (int i = 0; i < (int)k.mono.size(); ++i) {
            degree += k.mono[i];
            if (k.mono[i] > 0) where = i;
        }
        if (degree == 0)
            a0 = c;
        else if (degree == 1)
            a[where] = c;
        else
            return std::nullopt;
    }
    return std::make_pair(a0, a);
}

bool ExpPoly::is_unit() const {
    return terms_.size() == 1 && all_zero(terms_.begin()->first.mono);
}

ExpPoly ExpPoly::unit_inverse() const {
    if (!is_unit()) throw precondition_error("not a unit: " + text());
    const auto& [k, c] = *terms_.begin();
    ExpPoly r = zero(patch_);
    std::vector<Rat> neg = k.lin;
    for (Rat& v : neg) v = -v;
    r.add_term(ExpKey{std::move(neg), -k.cst, k.mono}, 1 / c);
    return r;
}

std::optional<ExpPoly> ExpPoly::divided_exactly_by(const ExpPoly& d) const {
    require_same_patch(patch_, d.patch_, "divided_exactly_by");
    if (d.is_zero()) throw precondition_error("division by zero");
    if (d.is_unit()) return divided_by_unit(d);
    // Lead-term reduction under the key order. The order is additive, so the
    // top key of a product is the sum of top keys and the greedy reduction
    // reaches zero exactly when the quotient exists in the ring.
    const auto& lead = *d.terms_.rbegin();
    ExpPoly r = *this;
    ExpPoly q = zero(patch_);
    for (int guard = 0; !r.is_zero(); ++guard) {
        if (guard > 20000) return std::nullopt;
        const auto& lt = *r.terms_.rbegin();
        ExpKey tk;
        tk.mono.resize(lt.first.mono.size());
        for (size_t i = 0; i < tk.mono.size(); ++i) {
            tk.mono[i] = lt.first.mono[i] - lead.first.mono[i];
            if (tk.mono[i] < 0) return std::nullopt;
        }
        tk.lin.resize(lt.first.lin.size());
        for (size_t i = 0; i < tk.lin.size(); ++i)
            tk.lin[i] = lt.first.lin[i] - lead.first.lin[i];
        tk.cst = lt.first.cst - lead.first.cst;
        ExpPoly t = term(patch_, lt.second / lead.second, tk.mono, tk.cst, tk.lin);
        q += t;
        r -= t * d;
    }
    return q;
}

// ---------------------------------------------------------------------------
// ring operations

ExpPoly ExpPoly::operator+(const ExpPoly& o) const {
    require_same_patch(patch_, o.patch_, "+");
    ExpPoly r = *this;
    for (const auto& [k, c] : o.terms_) r.add_term(k, c);
    return r;
}

ExpPoly ExpPoly::operator-(const ExpPoly& o) const {
    require_same_patch(patch_, o.patch_, "-");
    ExpPoly r = *this;
    for (const auto& [k, c] : o.terms_) r.add_term(k, -c);
    return r;
}

ExpPoly& ExpPoly::operator+=(const ExpPoly& o) {
    require_same_patch(patch_, o.patch_, "+");
    for (const auto& [k, c] : o.terms_) add_term(k, c);
    return *this;
}

ExpPoly& ExpPoly::operator-=(const ExpPoly& o) {
    require_same_patch(patch_, o.patch_, "-");
    for (const auto& [k, c] : o.terms_) add_term(k, -c);
    return *this;
}

ExpPoly ExpPoly::operator-() const { return scaled(Rat(-1)); }

ExpPoly ExpPoly::scaled(const Rat& c) const {
    ExpPoly r = zero(patch_);
    if (c == 0) return r;
    for (const auto& [k, v] : terms_) r.terms_.emplace(k, v * c);
    return r;
}

ExpPoly ExpPoly::operator*(const ExpPoly& o) const {
    require_same_patch(patch_, o.patch_, "*");
    const int d = patch_->dim();
    ExpPoly r = zero(patch_);
    for (const auto& [ka, ca] : terms_) {
        for (const auto& [kb, cb] : o.terms_) {
            ExpKey k;
            k.lin.resize(d);
            k.mono.resize(d);
            for (int i = 0; i < d; ++i) {
                k.lin[i] = ka.lin[i] + kb.lin[i];
                k.mono[i] = ka.mono[i] + kb.mono[i];
            }
            k.cst = ka.cst + kb.cst;
            r.add_term(k, ca * cb);
        }
    }
    return r;
}

ExpPoly ExpPoly::pow(int k) const {
    if (k < 0) return unit_inverse().pow(-k);
    ExpPoly r = constant(patch_, 1);
    for (int i = 0; i < k; ++i) r = r * *this;
    return r;
}

// ---------------------------------------------------------------------------
// calculus

ExpPoly ExpPoly::derivative(int var_index) const {
    if (var_index < 0 || var_index >= patch_->dim())
        throw structural_error("variable index out of range");
    ExpPoly r = zero(patch_);
    for (const auto& [k, c] : terms_) {
        if (k.mono[var_index] > 0) {
            ExpKey down = k;
            down.mono[var_index] -= 1;
            r.add_term(down, c * k.mono[var_index]);
        }
        if (k.lin[var_index] != 0) r.add_term(k, c * k.lin[var_index]);
    }
    return r;
}

ExpPoly ExpPoly::derivative(const std::string& var) const {
    int i = patch_->index_of(var);
    if (i < 0) throw structural_error("unknown variable '" + var + "'");
    return derivative(i);
}

// ---------------------------------------------------------------------------
// substitution and evaluation

ExpPoly ExpPoly::substitute(const std::vector<ExpPoly>& images) const {
    const int d = patch_->dim();
    if ((int)images.size() != d)
        throw structural_error("substitution needs one image per patch variable");
    PatchPtr target = d > 0 ? images[0].patch() : patch_;
    for (const ExpPoly& im : images) require_same_patch(target, im.patch(), "substitution image");

    // affine data for variables that appear inside exponentials, on demand
    std::vector<std::optional<std::pair<Rat, std::vector<Rat>>>> affine(d);
    auto affine_of = [&](int i) -> const std::pair<Rat, std::vector<Rat>>& {
        if (!affine[i]) {
            affine[i] = images[i].as_affine();
            if (!affine[i])
                throw unsupported_substitution(
                    "variable '" + patch_->names[i] +
                    "' occurs in an exponent but its image is not affine: " + images[i].text());
        }
        return *affine[i];
    };

    ExpPoly out = zero(target);
    for (const auto& [k, c] : terms_) {
        Rat ecst = k.cst;
        std::vector<Rat> elin(target->dim(), Rat(0));
        ExpPoly factor = constant(target, c);
        for (int i = 0; i < d; ++i) {
            if (k.lin[i] != 0) {
                const auto& [a0, a] = affine_of(i);
                ecst += k.lin[i] * a0;
                for (int j = 0; j < target->dim(); ++j) elin[j] += k.lin[i] * a[j];
            }
            if (k.mono[i] > 0) factor = factor * images[i].pow(k.mono[i]);
        }
        out += factor * exponential(target, ecst, std::move(elin));
    }
    return out;
}

ExpPoly ExpPoly::substitute_one(const std::string& var, const ExpPoly& image) const {
    require_same_patch(patch_, image.patch(), "substitute_one");
    int idx = patch_->index_of(var);
    if (idx < 0) throw structural_error("unknown variable '" + var + "'");
    std::vector<ExpPoly> images;
    for (int i = 0; i < patch_->dim(); ++i)
        images.push_back(i == idx ? image : variable(patch_, i));
    return substitute(images);
}

ExpPoly ExpPoly::at_point(const Point& pt, const PatchPtr& target_patch) const {
    if ((int)pt.size() != patch_->dim())
        throw structural_error("point dimension does not match patch");
    std::vector<ExpPoly> images;
    for (const Rat& v : pt) images.push_back(constant(target_patch, v));
    if (patch_->dim() == 0) return transported(target_patch);
    return substitute(images);
}

EvalResult ExpPoly::evaluate(const Point& pt, const Rat& max_width) const {
    if ((int)pt.size() != patch_->dim())
        throw structural_error("point dimension does not match patch");
    // collapse to sum of s_q * e^q with exact rational s_q
    std::map<Rat, Rat> by_exponent;
    for (const auto& [k, c] : terms_) {
        Rat mono_value = c;
        Rat q = k.cst;
        for (int i = 0; i < patch_->dim(); ++i) {
            mono_value *= rat_pow(pt[i], k.mono[i]);
            q += k.lin[i] * pt[i];
        }
        if (mono_value != 0) {
            by_exponent[q] += mono_value;
            if (by_exponent[q] == 0) by_exponent.erase(q);
        }
    }
    EvalResult res;
    Rat exact_part = 0;
    int interval_terms = 0;
    for (const auto& [q, s] : by_exponent)
        if (q == 0)
            exact_part = s;
        else
            ++interval_terms;
    if (interval_terms == 0) {
        res.exact = true;
        res.value = exact_part;
        res.box = {exact_part, exact_part};
        return res;
    }
    res.exact = false;
    Rat lo = exact_part, hi = exact_part;
    for (const auto& [q, s] : by_exponent) {
        if (q == 0) continue;
        Rat per_term = max_width / interval_terms / (s < 0 ? -s : s);
        RatInterval e = enclose_exp(q, per_term);
        if (s >= 0) {
            lo += s * e.lo;
            hi += s * e.hi;
        } else {
            lo += s * e.hi;
            hi += s * e.lo;
        }
    }
    res.box = {lo, hi};
    return res;
}

ExpPoly ExpPoly::transported(const PatchPtr& bigger) const {
    const int d = patch_->dim(), D = bigger->dim();
    std::vector<int> where(d);
    for (int i = 0; i < d; ++i) {
        where[i] = bigger->index_of(patch_->names[i]);
        if (where[i] < 0)
            throw structural_error("target patch lacks variable '" + patch_->names[i] + "'");
    }
    ExpPoly r = zero(bigger);
    for (const auto& [k, c] : terms_) {
        ExpKey nk;
        nk.lin.assign(D, Rat(0));
        nk.mono.assign(D, 0);
        nk.cst = k.cst;
        for (int i = 0; i < d; ++i) {
            nk.lin[where[i]] = k.lin[i];
            nk.mono[where[i]] = k.mono[i];
        }
        r.add_term(nk, c);
    }
    return r;
}

// ---------------------------------------------------------------------------
// serialization

namespace {

// affine expression inside exp(...): cst + sum lin_i * x_i
std::string affine_text(const Patch& p, const Rat& cst, const std::vector<Rat>& lin) {
    std::ostringstream os;
    bool first = true;
    auto join = [&](const Rat& coeff) -> Rat {
        if (first) {
            if (coeff < 0) os << "-";
            first = false;
        } else {
            os << (coeff < 0 ? " - " : " + ");
        }
        return coeff < 0 ? -coeff : coeff;
    };
    if (cst != 0) os << rat_text(join(cst));
    for (int i = 0; i < (int)lin.size(); ++i) {
        if (lin[i] == 0) continue;
        Rat a = join(lin[i]);
        if (a != 1) os << rat_text(a) << "*";
        os << p.names[i];
    }
    if (first) os << "0";
    return os.str();
}

} // namespace

std::string ExpPoly::text() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, c] : terms_) {
        Rat a = c;
        if (first) {
            if (a < 0) {
                os << "-";
                a = -a;
            }
            first = false;
        } else {
            os << (a < 0 ? " - " : " + ");
            if (a < 0) a = -a;
        }
        std::vector<std::string> factors;
        bool has_tail = !all_zero(k.mono) || !all_zero(k.lin) || k.cst != 0;
        if (a != 1 || !has_tail) factors.push_back(rat_text(a));
        for (int i = 0; i < (int)k.mono.size(); ++i) {
            if (k.mono[i] == 0) continue;
            if (k.mono[i] == 1)
                factors.push_back(patch_->names[i]);
            else
                factors.push_back(patch_->names[i] + "^" + std::to_string(k.mono[i]));
        }
        if (!all_zero(k.lin) || k.cst != 0)
            factors.push_back("exp(" + affine_text(*patch_, k.cst, k.lin) + ")");
        for (size_t i = 0; i < factors.size(); ++i) {
            if (i) os << "*";
            os << factors[i];
        }
    }
    return os.str();
}

} // namespace jgeo
