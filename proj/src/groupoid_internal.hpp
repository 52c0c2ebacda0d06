#pragma once

#include "jgeo/groupoid.hpp"

#include <functional>
#include <optional>

// Shared machinery of the groupoid translation calculus: fresh coordinate
// names, interval evaluation of ring elements over boxes, staged point
// evaluation of map chains (exact while the values stay rational-exponential,
// interval enclosures afterwards), and identity comparison with
// symbolic-over-pointwise certificates.
namespace jgeo {
namespace gdetail {

std::string fresh_name(const std::string& want, const std::vector<std::string>& taken);
std::vector<std::string> fresh_names(const std::vector<std::string>& want,
                                     std::vector<std::string> taken);

RatInterval iv_exact(const Rat& r);
RatInterval iv_add(const RatInterval& a, const RatInterval& b);
RatInterval iv_sub(const RatInterval& a, const RatInterval& b);
RatInterval iv_mul(const RatInterval& a, const RatInterval& b);
RatInterval iv_pow(const RatInterval& a, int n);
// e^x over a box, each endpoint enclosed to width <= w
RatInterval iv_exp(const RatInterval& x, const Rat& w);
RatInterval interval_eval(const ExpPoly& f, const std::vector<RatInterval>& box,
                          const Rat& w);

// One scalar value mid-evaluation: a constant ring element while exact
// (sums of c * e^q over the empty patch), an interval once outside the ring.
struct SVal {
    bool ring = true;
    ExpPoly c = ExpPoly::zero(make_patch({}));
    RatInterval box{0, 0};

    RatInterval to_box(const Rat& w) const;
};
SVal sval_rat(const Rat& r);
SVal sval_const(const ExpPoly& c); // constant over the empty patch
SVal sval_add(const SVal& a, const SVal& b);
SVal sval_sub(const SVal& a, const SVal& b);
SVal sval_mul(const SVal& a, const SVal& b);
SVal sval_exp(const SVal& a); // e^a; leaves the ring unless a is rational
// f evaluated on values for its patch variables
SVal sval_eval(const ExpPoly& f, const std::vector<SVal>& at);
// zero test: exact when possible, else enclosure width <= 10^-30 around 0;
// nullopt residual on success, rendered value on failure
std::optional<std::string> sval_nonzero(const SVal& v);

std::vector<SVal> point_vals(const Point& p);
std::vector<SVal> apply_comps(const std::vector<ExpPoly>& comps, const std::vector<SVal>& v);
std::vector<SVal> apply_map(const PatchMap& m, const std::vector<SVal>& v);
// Composition images: nullopt when a substitution leaves the ring. Results
// land over `result_patch` (components over a zero-dimensional patch are
// constants and transport there directly).
std::optional<std::vector<ExpPoly>> try_subst(const std::vector<ExpPoly>& comps,
                                              const std::vector<ExpPoly>& images,
                                              const PatchPtr& result_patch);

// One side of an identity of maps: symbolic components over the domain when
// they exist in the ring, plus an always-usable staged point evaluator.
struct SideVal {
    PatchPtr dom = make_patch({});
    std::optional<std::vector<ExpPoly>> sym;
    std::function<std::vector<SVal>(const Point&)> pt;
};
SideVal side_comps(std::vector<ExpPoly> comps);
SideVal side_vars(const PatchPtr& p, const std::vector<int>& idx);
SideVal side_identity(const PatchPtr& p);
SideVal side_chain(std::vector<PatchMap> maps); // left-to-right composition
SideVal side_then(const SideVal& s, const PatchMap& next);
SideVal side_select(const SideVal& s, const std::vector<int>& idx);
SideVal side_concat(const std::vector<SideVal>& parts);
SideVal side_sum(const SideVal& a, const SideVal& b);
SideVal side_sub(const SideVal& a, const SideVal& b);
SideVal side_neg(const SideVal& a);
// component-wise product of two one-component sides
SideVal side_mul(const SideVal& a, const SideVal& b);
// f (over some patch) evaluated on symbolic components over `dom`
SideVal side_fn_at(const ExpPoly& f, const std::vector<ExpPoly>& at, const PatchPtr& dom);
// one-component side e^{sign * sigma}; symbolic only for affine sigma
SideVal side_exp_sigma(const PatchPtr& dom, const ExpPoly& sigma_on_dom, int sign);
// components from `from` on multiplied by e^{sign * sigma}
SideVal side_scale_from(const SideVal& s, int from, const ExpPoly& sigma_on_dom, int sign);

// Equality of two sides: term-normalized differences when both are symbolic
// (certificate "symbolic"), else exact or enclosed evaluation on sampled
// points of the domain (certificate "pointwise", points recorded).
GroupoidCheck compare_sides(const std::string& label, const PatchPtr& domain, const SideVal& a,
                            const SideVal& b, const SampleSpec& spec);

std::vector<ExpPoly> patch_vars(const PatchPtr& p, int from, int count);
// arrow names followed by a fresh copy, the target chart of pair
// parametrizations
PatchPtr doubled_target(const PatchPtr& arrow);
std::vector<ExpPoly> transport_all(const std::vector<ExpPoly>& v, const PatchPtr& big);
RingMat transport_mat(const RingMat& m, const PatchPtr& big);
// Substitution helpers carrying the result patch explicitly, so sources of
// dimension zero (whose entries are constants) transport instead.
std::vector<ExpPoly> subst_all(const std::vector<ExpPoly>& v, const std::vector<ExpPoly>& images,
                               const PatchPtr& result_patch);
RingMat subst_mat(const RingMat& m, const std::vector<ExpPoly>& images,
                  const PatchPtr& result_patch);

// Ring inverse through a unit determinant or exact division; nullopt when
// the matrix fails to invert over the ring.
std::optional<RingMat> try_ring_inverse(const RingMat& m);
// Lexicographically first size-k index subset of the columns of `wide`
// (k x N) whose square block inverts over the ring; returns the block
// inverse through `inv`.
std::optional<std::vector<int>> pick_invertible_columns(const RingMat& wide,
                                                        RingMat* inv);

// Frame data extended with the translation derivatives used internally.
struct FrameWork {
    InvariantFrame f;
    std::vector<int> slots;
    std::vector<ExpPoly> r_eps_alpha; // over G: fiber coordinates of eps(alpha(g))
    RingMat right_jac;                // over G: U(h), d/dg mult at (eps(beta(h)), r(h))
    RingMat beta_tilde;               // over G: n x rank, col i = U * (a_i - unit part)
    PatchMap eps_alpha;               // G -> G
    PatchMap eps_beta;                // G -> G
};
FrameWork frame_work(const ConcreteGroupoid& g);

// Invertible chart (base x fiber) -> G straightening the unit submanifold to
// the zero section; carries its inverse.
PatchMap unit_straightening(const ConcreteGroupoid& g);

// Bivector components as an antisymmetric matrix over the tensor's patch.
RingMat bivector_matrix(const Multivector& lambda);
std::vector<ExpPoly> field_comps(const Multivector& x);
std::vector<ExpPoly> form_comps(const DifferentialForm& w);

} // namespace gdetail
} // namespace jgeo
