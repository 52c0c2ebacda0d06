#include "jgeo/multivec.hpp"

#include "jgeo/errors.hpp"
#include "jgeo/parse.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

namespace jgeo {

// ---------------------------------------------------------------------------
// container

void Tensor::add_term(std::vector<int> indices, const ExpPoly& c) {
    if ((int)indices.size() != grade_) throw structural_error("index tuple does not match grade");
    if (c.is_zero()) return;
    require_same_patch(patch_, c.patch(), "tensor coefficient");
    // insertion sort, tracking parity; repeated index kills the term
    int sign = 1;
    for (size_t i = 1; i < indices.size(); ++i)
        for (size_t j = i; j > 0 && indices[j - 1] >= indices[j]; --j) {
            if (indices[j - 1] == indices[j]) return;
            std::swap(indices[j - 1], indices[j]);
            sign = -sign;
        }
    for (int idx : indices)
        if (idx < 0 || idx >= index_dim_) throw structural_error("basis index out of range");
    ExpPoly add = sign > 0 ? c : -c;
    auto it = comp_.find(indices);
    if (it == comp_.end()) {
        comp_.emplace(std::move(indices), std::move(add));
    } else {
        it->second += add;
        if (it->second.is_zero()) comp_.erase(it);
    }
}

Tensor Tensor::zero(const PatchPtr& p, int grade, Variance v) {
    return frame_zero(p, p->dim(), grade, v);
}

Tensor Tensor::frame_zero(const PatchPtr& coeff_patch, int index_dim, int grade, Variance v) {
    if (grade < 0) throw structural_error("negative grade");
    if (index_dim < 0) throw structural_error("negative index dimension");
    Tensor t;
    t.patch_ = coeff_patch;
    t.grade_ = grade;
    t.variance_ = v;
    t.index_dim_ = index_dim;
    return t;
}

Tensor Tensor::frame_basis(const PatchPtr& coeff_patch, int index_dim, Variance v,
                           const std::vector<int>& indices) {
    Tensor t = frame_zero(coeff_patch, index_dim, (int)indices.size(), v);
    t.add_term(indices, ExpPoly::constant(coeff_patch, 1));
    return t;
}

Tensor Tensor::scalar(const PatchPtr& p, const ExpPoly& f, Variance v) {
    Tensor t = zero(p, 0, v);
    t.add_term({}, f);
    return t;
}

Tensor Tensor::vector_field(const PatchPtr& p, std::vector<ExpPoly> comps) {
    if ((int)comps.size() != p->dim())
        throw structural_error("vector field needs one component per variable");
    Tensor t = zero(p, 1, Variance::multivector);
    for (int i = 0; i < p->dim(); ++i) t.add_term({i}, comps[i]);
    return t;
}

Tensor Tensor::one_form(const PatchPtr& p, std::vector<ExpPoly> comps) {
    if ((int)comps.size() != p->dim())
        throw structural_error("one-form needs one component per variable");
    Tensor t = zero(p, 1, Variance::form);
    for (int i = 0; i < p->dim(); ++i) t.add_term({i}, comps[i]);
    return t;
}

Tensor Tensor::basis(const PatchPtr& p, Variance v, const std::vector<int>& indices) {
    Tensor t = zero(p, (int)indices.size(), v);
    t.add_term(indices, ExpPoly::constant(p, 1));
    return t;
}

ExpPoly Tensor::component(std::vector<int> indices) const {
    if ((int)indices.size() != grade_) throw structural_error("index tuple does not match grade");
    int sign = 1;
    for (size_t i = 1; i < indices.size(); ++i)
        for (size_t j = i; j > 0 && indices[j - 1] >= indices[j]; --j) {
            if (indices[j - 1] == indices[j]) return ExpPoly::zero(patch_);
            std::swap(indices[j - 1], indices[j]);
            sign = -sign;
        }
    auto it = comp_.find(indices);
    if (it == comp_.end()) return ExpPoly::zero(patch_);
    return sign > 0 ? it->second : -it->second;
}

Tensor Tensor::operator+(const Tensor& o) const {
    require_same_patch(patch_, o.patch_, "tensor sum");
    if (grade_ != o.grade_ || variance_ != o.variance_ || index_dim_ != o.index_dim_)
        throw structural_error("tensor sum needs matching grade, variance, and index space");
    Tensor r = *this;
    for (const auto& [i, c] : o.comp_) r.add_term(i, c);
    return r;
}

Tensor Tensor::operator-(const Tensor& o) const { return *this + (-o); }

Tensor Tensor::operator-() const { return scale(Rat(-1)); }

Tensor Tensor::scale(const ExpPoly& f) const {
    Tensor r = *this;
    r.comp_.clear();
    for (const auto& [i, c] : comp_) r.add_term(i, c * f);
    return r;
}

Tensor Tensor::scale(const Rat& c) const {
    Tensor r = *this;
    r.comp_.clear();
    if (c == 0) return r;
    for (const auto& [i, v] : comp_) r.comp_.emplace(i, v.scaled(c));
    return r;
}

bool Tensor::operator==(const Tensor& o) const {
    return same_patch(patch_, o.patch_) && grade_ == o.grade_ && variance_ == o.variance_ &&
           index_dim_ == o.index_dim_ && comp_ == o.comp_;
}

Tensor Tensor::substitute_coeffs(const std::vector<ExpPoly>& images) const {
    PatchPtr target = patch_->dim() > 0 && !images.empty() ? images[0].patch() : patch_;
    int nd = patch_indexed() ? target->dim() : index_dim_;
    Tensor r = frame_zero(target, nd, grade_, variance_);
    for (const auto& [i, c] : comp_) r.add_term(i, c.substitute(images));
    return r;
}

Tensor Tensor::transported(const PatchPtr& bigger) const {
    if (!patch_indexed())
        throw precondition_error("transported moves patch-indexed tensors; use coeffs_transported");
    std::vector<int> where(patch_->dim());
    for (int i = 0; i < patch_->dim(); ++i) {
        where[i] = bigger->index_of(patch_->names[i]);
        if (where[i] < 0)
            throw structural_error("target patch lacks variable '" + patch_->names[i] + "'");
    }
    Tensor r = zero(bigger, grade_, variance_);
    for (const auto& [i, c] : comp_) {
        std::vector<int> idx(i.size());
        for (size_t k = 0; k < i.size(); ++k) idx[k] = where[i[k]];
        r.add_term(idx, c.transported(bigger));
    }
    return r;
}

Tensor Tensor::coeffs_transported(const PatchPtr& bigger) const {
    Tensor r = frame_zero(bigger, index_dim_, grade_, variance_);
    for (const auto& [i, c] : comp_) r.add_term(i, c.transported(bigger));
    return r;
}

Tensor Tensor::widened(int index_dim) const {
    if (index_dim < index_dim_) throw precondition_error("widened cannot shrink the index space");
    Tensor r = *this;
    r.index_dim_ = index_dim;
    return r;
}

// ---------------------------------------------------------------------------
// wedge, contraction, pairing

Tensor wedge(const Tensor& a, const Tensor& b) {
    require_same_patch(a.patch(), b.patch(), "wedge");
    if (a.variance() != b.variance()) throw structural_error("wedge across variances");
    if (a.index_dim() != b.index_dim()) throw structural_error("wedge across index spaces");
    Tensor r = Tensor::frame_zero(a.patch(), a.index_dim(), a.grade() + b.grade(), a.variance());
    for (const auto& [i, c] : a.components())
        for (const auto& [j, d] : b.components()) {
            std::vector<int> idx = i;
            idx.insert(idx.end(), j.begin(), j.end());
            r.add_term(std::move(idx), c * d);
        }
    return r;
}

namespace {

// contraction of the leading slot with the basis covector/vector `index`
Tensor contract_first_slot(const Tensor& t, int index) {
    Tensor r = Tensor::frame_zero(t.patch(), t.index_dim(), t.grade() - 1, t.variance());
    for (const auto& [i, c] : t.components()) {
        auto pos = std::find(i.begin(), i.end(), index);
        if (pos == i.end()) continue;
        std::vector<int> rest;
        rest.reserve(i.size() - 1);
        for (auto it = i.begin(); it != i.end(); ++it)
            if (it != pos) rest.push_back(*it);
        int k = (int)(pos - i.begin());
        r.add_term(std::move(rest), k % 2 == 0 ? c : -c);
    }
    return r;
}

} // namespace

Tensor interior_product(const Tensor& contractor, const Tensor& target) {
    require_same_patch(contractor.patch(), target.patch(), "interior product");
    if (contractor.variance() == target.variance())
        throw structural_error("interior product needs opposite variances");
    if (contractor.index_dim() != target.index_dim())
        throw structural_error("interior product across index spaces");
    if (contractor.grade() == 0) {
        ExpPoly f = contractor.component({});
        return target.scale(f);
    }
    if (contractor.grade() > target.grade())
        throw structural_error("contractor grade exceeds target grade");
    Tensor out = Tensor::frame_zero(target.patch(), target.index_dim(),
                                    target.grade() - contractor.grade(), target.variance());
    for (const auto& [k, c] : contractor.components()) {
        Tensor cur = target;
        for (int idx : k) cur = contract_first_slot(cur, idx);
        out = out + cur.scale(c);
    }
    return out;
}

ExpPoly pairing(const Tensor& form, const Tensor& mv) {
    require_same_patch(form.patch(), mv.patch(), "pairing");
    if (form.variance() != Variance::form || mv.variance() != Variance::multivector)
        throw structural_error("pairing takes a form and a multivector");
    if (form.index_dim() != mv.index_dim()) throw structural_error("pairing across index spaces");
    if (form.grade() != mv.grade()) throw structural_error("pairing needs equal grades");
    ExpPoly s = ExpPoly::zero(form.patch());
    for (const auto& [i, c] : form.components()) {
        auto it = mv.components().find(i);
        if (it != mv.components().end()) s += c * it->second;
    }
    return s;
}

// ---------------------------------------------------------------------------
// differential

namespace {

void require_patch_indexed(const Tensor& t, const char* what) {
    if (!t.patch_indexed())
        throw precondition_error(std::string(what) + " acts on patch-indexed tensors");
}

} // namespace

DifferentialForm de_rham(const DifferentialForm& w) {
    if (w.variance() != Variance::form) throw structural_error("de Rham acts on forms");
    require_patch_indexed(w, "de Rham");
    Tensor r = Tensor::zero(w.patch(), w.grade() + 1, Variance::form);
    for (const auto& [j, c] : w.components())
        for (int i = 0; i < w.patch()->dim(); ++i) {
            ExpPoly d = c.derivative(i);
            if (d.is_zero()) continue;
            std::vector<int> idx;
            idx.reserve(j.size() + 1);
            idx.push_back(i);
            idx.insert(idx.end(), j.begin(), j.end());
            r.add_term(std::move(idx), d);
        }
    return r;
}

DifferentialForm de_rham(const ExpPoly& f) {
    return de_rham(Tensor::scalar(f.patch(), f, Variance::form));
}

// ---------------------------------------------------------------------------
// Schouten bracket

namespace {

Multivector lie_bracket(const Multivector& x, const Multivector& y) {
    const PatchPtr& p = x.patch();
    std::vector<ExpPoly> z(p->dim(), ExpPoly::zero(p));
    for (int j = 0; j < p->dim(); ++j) {
        for (int i = 0; i < p->dim(); ++i) {
            ExpPoly xi = x.component({i}), yi = y.component({i});
            if (!xi.is_zero()) z[j] += xi * y.component({j}).derivative(i);
            if (!yi.is_zero()) z[j] -= yi * x.component({j}).derivative(i);
        }
    }
    return Tensor::vector_field(p, std::move(z));
}

Multivector lie_derive_multivector(const Multivector& x, const Multivector& q) {
    const PatchPtr& p = x.patch();
    if (q.grade() == 0) {
        ExpPoly f = q.component({});
        ExpPoly xf = ExpPoly::zero(p);
        for (int i = 0; i < p->dim(); ++i) xf += x.component({i}) * f.derivative(i);
        return Tensor::scalar(p, xf);
    }
    if (q.grade() == 1) return lie_bracket(x, q);
    Tensor out = Tensor::zero(p, q.grade(), Variance::multivector);
    for (const auto& [idx, c] : q.components()) {
        // X(c) ∂_I  +  c Σ ∂.. ∧ [X, ∂_i] ∧ ..
        ExpPoly xc = ExpPoly::zero(p);
        for (int i = 0; i < p->dim(); ++i) xc += x.component({i}) * c.derivative(i);
        out.add_term(idx, xc);
        for (size_t pos = 0; pos < idx.size(); ++pos) {
            // [X, ∂_j] = -Σ_k (∂_j X^k) ∂_k
            for (int k = 0; k < p->dim(); ++k) {
                ExpPoly d = x.component({k}).derivative(idx[pos]);
                if (d.is_zero()) continue;
                std::vector<int> nidx = idx;
                nidx[pos] = k;
                out.add_term(std::move(nidx), -(c * d));
            }
        }
    }
    return out;
}

} // namespace

Multivector schouten(const Multivector& pp, const Multivector& qq) {
    require_same_patch(pp.patch(), qq.patch(), "bracket");
    if (pp.variance() != Variance::multivector || qq.variance() != Variance::multivector)
        throw structural_error("bracket takes multivectors");
    require_patch_indexed(pp, "bracket");
    require_patch_indexed(qq, "bracket");
    const PatchPtr& pa = pp.patch();
    const int p = pp.grade(), q = qq.grade();
    if (p == 0 && q == 0) return Tensor::zero(pa, 0, Variance::multivector);
    if (p == 0) return interior_product(de_rham(pp.component({})), qq);
    if (q == 0) return interior_product(de_rham(qq.component({})), pp);
    if (p == 1) return lie_derive_multivector(pp, qq);
    // peel the first factor of each term of pp:
    // [X∧P', Q] = (-1)^{pq} ( [Q,X]∧P' + (-1)^{q+1} X∧[Q,P'] )
    Tensor out = Tensor::zero(pa, p + q - 1, Variance::multivector);
    const Rat spq = (p * q) % 2 == 0 ? 1 : -1;
    const Rat sq1 = (q + 1) % 2 == 0 ? 1 : -1;
    for (const auto& [idx, c] : pp.components()) {
        Tensor x = Tensor::zero(pa, 1, Variance::multivector);
        x.add_term({idx[0]}, c);
        Tensor rest = Tensor::basis(pa, Variance::multivector,
                                    std::vector<int>(idx.begin() + 1, idx.end()));
        Tensor qx = schouten(qq, x);
        Tensor qrest = schouten(qq, rest);
        out = out + (wedge(qx, rest) + wedge(x, qrest).scale(sq1)).scale(spq);
    }
    return out;
}

Multivector schouten_alt(const Multivector& p, const Multivector& q) {
    Tensor b = schouten(p, q);
    return (p.grade() + 1) % 2 == 0 ? b : -b;
}

Tensor lie_derivative(const Tensor& x, const Tensor& t) {
    if (x.variance() != Variance::multivector || x.grade() != 1)
        throw structural_error("Lie derivative needs a vector field");
    if (t.variance() == Variance::multivector) return schouten(x, t);
    if (t.grade() == 0) return interior_product(x, de_rham(t));
    return interior_product(x, de_rham(t)) + de_rham(interior_product(x, t));
}

// ---------------------------------------------------------------------------
// maps between patches

PatchMap PatchMap::make(const PatchPtr& src, const PatchPtr& dst, std::vector<ExpPoly> comps) {
    if ((int)comps.size() != dst->dim())
        throw structural_error("map needs one component per target variable");
    for (const auto& c : comps) require_same_patch(src, c.patch(), "map component");
    PatchMap m;
    m.source = src;
    m.target = dst;
    m.comp = std::move(comps);
    return m;
}

PatchMap PatchMap::identity(const PatchPtr& p) {
    std::vector<ExpPoly> comps;
    for (int i = 0; i < p->dim(); ++i) comps.push_back(ExpPoly::variable(p, i));
    return make(p, p, std::move(comps));
}

PatchMap PatchMap::with_inverse(PatchMap fwd, PatchMap bwd) {
    if (!same_patch(fwd.source, bwd.target) || !same_patch(fwd.target, bwd.source))
        throw structural_error("inverse map patches do not match");
    PatchMap fb = fwd.then(bwd), bf = bwd.then(fwd);
    for (int i = 0; i < fwd.source->dim(); ++i)
        if (fb.comp[i] != ExpPoly::variable(fwd.source, i))
            throw structural_error("claimed inverse fails on source variable '" +
                                   fwd.source->names[i] + "'");
    for (int i = 0; i < fwd.target->dim(); ++i)
        if (bf.comp[i] != ExpPoly::variable(fwd.target, i))
            throw structural_error("claimed inverse fails on target variable '" +
                                   fwd.target->names[i] + "'");
    fwd.inverse = std::make_shared<const PatchMap>(std::move(bwd));
    return fwd;
}

ExpPoly PatchMap::pull(const ExpPoly& f_on_target) const {
    require_same_patch(f_on_target.patch(), target, "pull");
    if (target->dim() == 0) return f_on_target.transported(source);
    return f_on_target.substitute(comp);
}

PatchMap PatchMap::then(const PatchMap& next) const {
    require_same_patch(target, next.source, "map composition");
    std::vector<ExpPoly> comps;
    for (const auto& c : next.comp) comps.push_back(pull(c));
    PatchMap m = make(source, next.target, std::move(comps));
    if (inverse && next.inverse) {
        std::vector<ExpPoly> back;
        for (const auto& c : inverse->comp) back.push_back(next.inverse->pull(c));
        m.inverse = std::make_shared<const PatchMap>(
            make(next.target, source, std::move(back)));
    }
    return m;
}

RingMat PatchMap::jacobian() const {
    RingMat j = RingMat::zero(source, target->dim(), source->dim());
    for (int a = 0; a < target->dim(); ++a)
        for (int i = 0; i < source->dim(); ++i) j.at(a, i) = comp[a].derivative(i);
    return j;
}

Point PatchMap::apply_point(const Point& x) const {
    Point y;
    for (const auto& c : comp) {
        EvalResult r = c.evaluate(x);
        if (!r.exact)
            throw precondition_error("map value at the point is not rational: " + c.text());
        y.push_back(r.value);
    }
    return y;
}

namespace {

void increasing_tuples(int n, int k, std::vector<int>& cur,
                       const std::function<void(const std::vector<int>&)>& emit, int start) {
    if ((int)cur.size() == k) {
        emit(cur);
        return;
    }
    for (int i = start; i <= n - (k - (int)cur.size()); ++i) {
        cur.push_back(i);
        increasing_tuples(n, k, cur, emit, i + 1);
        cur.pop_back();
    }
}

} // namespace

Multivector pushforward(const Multivector& t, const PatchMap& phi) {
    if (t.variance() != Variance::multivector)
        throw structural_error("pushforward acts on multivectors");
    require_patch_indexed(t, "pushforward");
    require_same_patch(t.patch(), phi.source, "pushforward");
    if (!phi.inverse) throw structural_error("pushforward needs an invertible map");
    const int k = t.grade();
    RingMat j = phi.jacobian();
    // accumulate components over the source, then move through the inverse
    std::map<std::vector<int>, ExpPoly> acc;
    for (const auto& [idx, c] : t.components()) {
        std::vector<int> cur;
        increasing_tuples(phi.target->dim(), k, cur,
                          [&](const std::vector<int>& a) {
                              RingMat sub = RingMat::zero(phi.source, k, k);
                              for (int r = 0; r < k; ++r)
                                  for (int s = 0; s < k; ++s) sub.at(r, s) = j.at(a[r], idx[s]);
                              ExpPoly minor = det(sub);
                              if (minor.is_zero()) return;
                              auto it = acc.find(a);
                              if (it == acc.end())
                                  acc.emplace(a, c * minor);
                              else
                                  it->second += c * minor;
                          },
                          0);
    }
    Tensor out = Tensor::zero(phi.target, k, Variance::multivector);
    for (const auto& [a, c] : acc) {
        ExpPoly moved = phi.source->dim() == 0 ? c.transported(phi.target)
                                               : c.substitute(phi.inverse->comp);
        out.add_term(a, moved);
    }
    return out;
}

DifferentialForm pullback(const DifferentialForm& w, const PatchMap& phi) {
    if (w.variance() != Variance::form) throw structural_error("pullback acts on forms");
    require_patch_indexed(w, "pullback");
    require_same_patch(w.patch(), phi.target, "pullback");
    RingMat j = phi.jacobian();
    Tensor out = Tensor::zero(phi.source, w.grade(), Variance::form);
    for (const auto& [a, c] : w.components()) {
        Tensor piece = Tensor::scalar(phi.source, phi.pull(c), Variance::form);
        for (int r : a) {
            std::vector<ExpPoly> row;
            for (int i = 0; i < phi.source->dim(); ++i) row.push_back(j.at(r, i));
            piece = wedge(piece, Tensor::one_form(phi.source, std::move(row)));
        }
        out = out + piece;
    }
    return out;
}

// ---------------------------------------------------------------------------
// tensor grammar

namespace {

struct TTok {
    enum Kind { Number, Ident, BasisUp, Plus, Minus, Star, Caret, LParen, RParen, End } kind;
    std::string text;
    int line = 1, col = 1;
};

class TensorLexer {
public:
    explicit TensorLexer(const std::string& s) : s_(s) { advance(); }
    const TTok& peek() const { return tok_; }
    TTok take() {
        TTok t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n')) {
            if (s_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
            ++pos_;
        }
        tok_ = {TTok::End, "", line_, col_};
        if (pos_ >= s_.size()) return;
        unsigned char c = s_[pos_];
        auto one = [&](TTok::Kind k) {
            tok_.kind = k;
            ++pos_;
            ++col_;
        };
        if (c == '@') {
            one(TTok::BasisUp);
            read_ident();
            return;
        }
        if (c == 0xE2 && pos_ + 2 < s_.size() && (unsigned char)s_[pos_ + 1] == 0x88 &&
            (unsigned char)s_[pos_ + 2] == 0x82) {
            pos_ += 3;
            ++col_;
            tok_.kind = TTok::BasisUp;
            read_ident();
            return;
        }
        if (isdigit(c)) {
            tok_.kind = TTok::Number;
            while (pos_ < s_.size() && isdigit((unsigned char)s_[pos_])) {
                tok_.text += s_[pos_++];
                ++col_;
            }
            if (pos_ + 1 < s_.size() && s_[pos_] == '/' && isdigit((unsigned char)s_[pos_ + 1])) {
                tok_.text += s_[pos_++];
                ++col_;
                while (pos_ < s_.size() && isdigit((unsigned char)s_[pos_])) {
                    tok_.text += s_[pos_++];
                    ++col_;
                }
            }
            return;
        }
        if (isalpha(c) || c == '_') {
            tok_.kind = TTok::Ident;
            read_ident();
            return;
        }
        switch (c) {
        case '+': one(TTok::Plus); return;
        case '-': one(TTok::Minus); return;
        case '*': one(TTok::Star); return;
        case '^': one(TTok::Caret); return;
        case '(': one(TTok::LParen); return;
        case ')': one(TTok::RParen); return;
        default:
            throw parse_error(line_, col_, std::string("unexpected character '") + (char)c + "'");
        }
    }

    void read_ident() {
        if (pos_ >= s_.size() || !(isalpha((unsigned char)s_[pos_]) || s_[pos_] == '_'))
            throw parse_error(line_, col_, "expected variable name");
        while (pos_ < s_.size() && (isalnum((unsigned char)s_[pos_]) || s_[pos_] == '_')) {
            tok_.text += s_[pos_++];
            ++col_;
        }
        while (pos_ < s_.size() && s_[pos_] == '\'') {
            tok_.text += s_[pos_++];
            ++col_;
        }
    }

    const std::string& s_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    TTok tok_;
};

struct TValue {
    ExpPoly s;
    std::vector<int> chain; // basis indices in written order
    std::optional<long> int_literal;
};

class TensorParser {
public:
    TensorParser(const std::string& s, const PatchPtr& p, Variance v)
        : lex_(s), patch_(p), variance_(v) {}

    Tensor run() {
        Tensor acc = sum();
        const TTok& t = lex_.peek();
        if (t.kind != TTok::End) throw parse_error(t.line, t.col, "unexpected trailing input");
        return acc;
    }

private:
    Tensor sum() {
        std::map<int, Tensor> by_grade;
        int sign = 1;
        if (lex_.peek().kind == TTok::Minus) {
            lex_.take();
            sign = -1;
        }
        add_term(by_grade, term(), sign);
        for (;;) {
            const TTok& t = lex_.peek();
            if (t.kind == TTok::Plus)
                sign = 1;
            else if (t.kind == TTok::Minus)
                sign = -1;
            else
                break;
            lex_.take();
            add_term(by_grade, term(), sign);
        }
        Tensor out = Tensor::zero(patch_, 0, variance_);
        bool seen = false;
        for (auto& [g, t] : by_grade) {
            if (t.is_zero()) continue;
            if (seen) throw parse_error(1, 1, "terms of different grade in one tensor");
            out = t;
            seen = true;
        }
        return out;
    }

    void add_term(std::map<int, Tensor>& by_grade, TValue v, int sign) {
        int g = (int)v.chain.size();
        auto it = by_grade.find(g);
        if (it == by_grade.end())
            it = by_grade.emplace(g, Tensor::zero(patch_, g, variance_)).first;
        it->second.add_term(v.chain, sign > 0 ? v.s : -v.s);
    }

    TValue term() {
        TValue acc = factor();
        for (;;) {
            const TTok& t = lex_.peek();
            if (t.kind == TTok::Star) {
                lex_.take();
                TValue b = factor();
                acc.s = acc.s * b.s;
                acc.chain.insert(acc.chain.end(), b.chain.begin(), b.chain.end());
                acc.int_literal.reset();
            } else if (t.kind == TTok::Caret) {
                TTok caret = lex_.take();
                TValue b = factor();
                if (b.chain.empty() && b.int_literal) {
                    if (!acc.chain.empty())
                        throw parse_error(caret.line, caret.col,
                                          "cannot raise a basis factor to a power");
                    acc.s = acc.s.pow((int)*b.int_literal);
                    acc.int_literal.reset();
                } else if (!b.chain.empty()) {
                    acc.s = acc.s * b.s;
                    acc.chain.insert(acc.chain.end(), b.chain.begin(), b.chain.end());
                    acc.int_literal.reset();
                } else {
                    throw parse_error(caret.line, caret.col, "'^' needs an integer exponent");
                }
            } else {
                return acc;
            }
        }
    }

    TValue factor() {
        if (lex_.peek().kind == TTok::Minus) {
            lex_.take();
            TValue v = factor();
            v.s = -v.s;
            if (v.int_literal) v.int_literal = -*v.int_literal;
            return v;
        }
        return atom();
    }

    TValue atom() {
        TTok t = lex_.take();
        switch (t.kind) {
        case TTok::Number: {
            TValue v{parse_scalar(t.text, patch_), {}, std::nullopt};
            if (t.text.find('/') == std::string::npos && t.text.size() <= 9)
                v.int_literal = std::stol(t.text);
            return v;
        }
        case TTok::BasisUp: {
            if (variance_ != Variance::multivector)
                throw parse_error(t.line, t.col, "vector basis symbol in a form");
            int idx = patch_->index_of(t.text);
            if (idx < 0) throw parse_error(t.line, t.col, "unknown variable '" + t.text + "'");
            return {ExpPoly::constant(patch_, 1), {idx}, std::nullopt};
        }
        case TTok::Ident: {
            if (variance_ == Variance::form && t.text.size() > 1 && t.text[0] == 'd' &&
                patch_->index_of(t.text) < 0 && patch_->index_of(t.text.substr(1)) >= 0)
                return {ExpPoly::constant(patch_, 1), {patch_->index_of(t.text.substr(1))},
                        std::nullopt};
            if (t.text == "exp") {
                // hand the call to the scalar grammar: reconstruct "exp(...)"
                TTok open = lex_.take();
                if (open.kind != TTok::LParen)
                    throw parse_error(open.line, open.col, "expected '(' after exp");
                TValue inner = sum_scalar();
                TTok close = lex_.take();
                if (close.kind != TTok::RParen)
                    throw parse_error(close.line, close.col, "expected ')'");
                auto aff = inner.s.as_affine();
                if (!aff)
                    throw parse_error(t.line, t.col, "exp argument must be affine");
                return {ExpPoly::exponential(patch_, aff->first, aff->second), {}, std::nullopt};
            }
            int idx = patch_->index_of(t.text);
            if (idx < 0) throw parse_error(t.line, t.col, "unknown variable '" + t.text + "'");
            return {ExpPoly::variable(patch_, idx), {}, std::nullopt};
        }
        case TTok::LParen: {
            TValue inner = sum_scalar();
            TTok close = lex_.take();
            if (close.kind != TTok::RParen)
                throw parse_error(close.line, close.col, "expected ')'");
            return inner;
        }
        default:
            break;
        }
        throw parse_error(t.line, t.col, "expected number, variable, basis factor, or '('");
    }

    // parenthesized subexpressions must stay scalar (no basis factors inside)
    TValue sum_scalar() {
        int sign = 1;
        if (lex_.peek().kind == TTok::Minus) {
            lex_.take();
            sign = -1;
        }
        TValue acc = term();
        require_scalar(acc);
        if (sign < 0) acc.s = -acc.s;
        for (;;) {
            const TTok& t = lex_.peek();
            if (t.kind == TTok::Plus)
                sign = 1;
            else if (t.kind == TTok::Minus)
                sign = -1;
            else
                break;
            lex_.take();
            TValue b = term();
            require_scalar(b);
            acc.s = sign > 0 ? acc.s + b.s : acc.s - b.s;
            acc.int_literal.reset();
        }
        return acc;
    }

    void require_scalar(const TValue& v) {
        if (!v.chain.empty())
            throw parse_error(1, 1, "basis factors are not allowed inside parentheses");
    }

    TensorLexer lex_;
    PatchPtr patch_;
    Variance variance_;
};

} // namespace

Multivector parse_multivector(const std::string& text, const PatchPtr& patch) {
    return TensorParser(text, patch, Variance::multivector).run();
}

DifferentialForm parse_form(const std::string& text, const PatchPtr& patch) {
    return TensorParser(text, patch, Variance::form).run();
}

std::string Tensor::text() const {
    std::vector<std::string> names;
    if (patch_indexed()) {
        for (const auto& n : patch_->names)
            names.push_back((variance_ == Variance::multivector ? "∂" : "d") + n);
    } else {
        // synthesized frame names e1..er, duals starred
        for (int i = 0; i < index_dim_; ++i) {
            std::string n = "e" + std::to_string(i + 1);
            if (variance_ == Variance::form) n += "*";
            names.push_back(std::move(n));
        }
    }
    return text(names);
}

std::string Tensor::text(const std::vector<std::string>& basis_names) const {
    if ((int)basis_names.size() != index_dim_)
        throw structural_error("basis name list does not match the index space");
    if (comp_.empty()) return "0";
    if (grade_ == 0) return comp_.begin()->second.text();
    std::ostringstream os;
    bool first = true;
    for (const auto& [idx, c] : comp_) {
        std::string chain;
        for (size_t k = 0; k < idx.size(); ++k) {
            if (k) chain += "^";
            chain += basis_names[idx[k]];
        }
        ExpPoly body = c;
        bool negative = false;
        if (c.term_count() == 1 && c.terms().begin()->second < 0) {
            negative = true;
            body = -c;
        }
        if (first) {
            if (negative) os << "-";
            first = false;
        } else {
            os << (negative ? " - " : " + ");
        }
        auto one = body.as_rational();
        if (one && *one == 1) {
            os << chain;
        } else if (body.term_count() == 1) {
            os << body.text() << "*" << chain;
        } else {
            os << "(" << body.text() << ")*" << chain;
        }
    }
    return os.str();
}

} // namespace jgeo
