#pragma once

#include "jgeo/bialgebroid.hpp"

namespace jgeo {

// Deterministic rational sample plan: lexicographic tuples over `grid` first,
// then pseudo-random rationals from `seed`, capped at `count` points total.
struct SampleSpec {
    unsigned seed = 0;
    int count = 100;
    std::vector<Rat> grid; // empty means the default {-2,-1,-1/2,1/2,1,2}
};
const std::vector<Rat>& default_sample_grid();
std::vector<Point> sample_points(const PatchPtr& p, const SampleSpec& spec);

// One verified identity. `certificate` is "symbolic" when both sides
// normalized to equal ring elements, "pointwise" when equality was only
// established at the recorded sample points (exactly when the evaluations
// stay rational-exponential, otherwise through interval enclosures of width
// at most 10^-30).
struct GroupoidCheck {
    std::string label;
    bool pass = true;
    std::string certificate = "symbolic";
    std::string residual;      // first failing difference, rendered
    std::vector<Point> points; // samples used by a pointwise certificate
};

struct GroupoidReport {
    bool pass = true;
    std::vector<GroupoidCheck> checks;

    void add(GroupoidCheck c);
    const GroupoidCheck* find(const std::string& label) const;
    std::string summary() const;
};

// Groupoid with explicit coordinate patches for the arrow space G and the
// object space M. A pair (g, h) is composable when alpha(g) = beta(h); the
// composable pairs are presented as their own patch C through
// `composable_parametrization`: C -> G x G. Normal form requirements, checked
// by make_groupoid:
//   * the leading dim G coordinates of C are the coordinates of g, and the
//     first dim G parametrization components are exactly those variables;
//   * every remaining C coordinate (a "fiber" coordinate of the second
//     factor) appears verbatim as a component of the second half, so the
//     parametrization of h admits a coordinate retraction.
// `mult` sends a point of C to the product of the pair it parametrizes.
struct ConcreteGroupoid {
    PatchPtr g_patch = make_patch({});
    PatchPtr m_patch = make_patch({});
    PatchMap alpha;                      // G -> M
    PatchMap beta;                       // G -> M
    PatchMap epsilon;                    // M -> G
    PatchMap iota;                       // G -> G
    PatchMap composable_parametrization; // C -> G x G
    PatchMap mult;                       // C -> G
    std::string name;
    bool verified = false;

    const PatchPtr& composable_patch() const { return mult.source; }
    int fiber_dim() const;
    std::vector<std::string> fiber_names() const;
    // slot[j] = index of the second-half component that equals fiber variable j
    std::vector<int> retraction_slots() const;
    PatchMap first_of_pair() const;  // C -> G
    PatchMap second_of_pair() const; // C -> G
    // fiber coordinates of an arrow: the retraction-slot components
    std::vector<ExpPoly> fiber_coords_of(const PatchMap& arrow) const;
};

ConcreteGroupoid make_groupoid(const PatchPtr& g_patch, const PatchPtr& m_patch,
                               PatchMap alpha, PatchMap beta, PatchMap epsilon,
                               PatchMap iota, PatchMap composable_parametrization,
                               PatchMap mult, std::string name = "");

// Real-valued function on the arrow space, additive over products.
struct MultiplicativeFunction {
    ExpPoly sigma;
    bool verified = false;
};

// Checks the groupoid axioms: the parametrized pairs are composable, source
// and target of products, associativity on the derived triple patch, unit
// laws, inverse laws, and involutivity of inversion (which installs iota's
// inverse). With `sigma`, additionally sigma(gh) = sigma(g) + sigma(h) and
// vanishing on units. Identities are certified symbolically when the
// compositions stay in the ring, otherwise at sample points.
GroupoidReport verify_groupoid(ConcreteGroupoid& g,
                               MultiplicativeFunction* sigma = nullptr,
                               const SampleSpec& spec = {});

// Frame data of the algebroid of a groupoid, extracted from the composable
// parametrization: column i of `left_frame` is the left-invariant extension
// of the unit-fiber tangent frame vector a_i, `unit_frame` holds the a_i
// along units, `unit_coframe` the dual covectors (annihilating the unit
// tangent directions), `coframe_ext` a global 1-form extension of the
// coframe, and `anchor_rows` row i = the pushforward of a_i to the base.
struct InvariantFrame {
    int rank = 0;
    RingMat left_frame;    // over G:  dim G x rank
    RingMat unit_frame;    // over M:  dim G x rank
    RingMat unit_coframe;  // over M:  rank x dim G
    RingMat coframe_ext;   // over G:  rank x dim G
    RingMat anchor_rows;   // over M:  rank x dim M
};
InvariantFrame invariant_frame(const ConcreteGroupoid& g);

// Derived groupoids on doubled patches. `tangent` applies the chain rule to
// every structural map; `cotangent` dualizes translations (base A*G in the
// unit-coframe chart base x (mu1..mur)); the `_r` variants append the extra
// real slot twisted by sigma; `semidirect` is the product with a time line,
// source shifted by sigma. Twisted cotangent maps carry e^{±sigma} factors,
// so those two kinds require an affine sigma.
enum class DoubleKind { tangent, cotangent, tangent_r, cotangent_r, semidirect };

struct DoubledGroupoid {
    ConcreteGroupoid groupoid;
    PatchMap to_base;       // new arrow patch -> original arrow patch
    std::string extra_name; // the appended slot's coordinate, "" for plain kinds
};
DoubledGroupoid tangent_cotangent(const ConcreteGroupoid& g,
                                  const MultiplicativeFunction* sigma,
                                  DoubleKind which);

// Jacobi structure on the arrow space of a groupoid, with the multiplicative
// function twisting its compatibility conditions.
struct JacobiGroupoidInstance {
    ConcreteGroupoid groupoid;
    JacobiStructure j;
    MultiplicativeFunction sigma;
    std::string name;
    bool verified = false;
};

// Jacobi-groupoid verification: the bundle map (omega, gamma) |->
// (sharp(omega) + gamma E, -omega(E)) from the twisted cotangent groupoid to
// the twisted tangent groupoid must cover a base map phi0 on A*G (source and
// target compatibility) and respect multiplication on composable covector
// pairs. Returns the report together with phi0 : A*G -> TM x R.
struct JacobiGroupoidReport {
    bool pass = false;
    GroupoidReport checks;
    PatchPtr astar_patch = make_patch({});
    PatchPtr tmr_patch = make_patch({});
    PatchMap phi0; // A*G -> TM x R
};
JacobiGroupoidReport verify_jacobi_groupoid(JacobiGroupoidInstance& inst,
                                            const SampleSpec& spec = {});

// Consequences of the axioms on a verified instance: coisotropy of the unit
// submanifold, right invariance of E with E(sigma) = 0 and the compatibility
// sharp(d sigma) = X0_right - e^{-sigma} X0_left, the two unit-retraction
// identities conjugating sharp, the twisted multiplicativity of Lambda along
// bisections, and left invariance of e^{sigma} L_{X_left} Lambda.
GroupoidReport structural_properties(const JacobiGroupoidInstance& inst,
                                     const SampleSpec& spec = {});

// Contact groupoid check for a contact form eta on the arrow space:
// eta_{gh}(X + Y) = eta_g(X) + e^{sigma(g)} eta_h(Y) on composable tangent
// pairs, the induced identity for d eta, eta pulled to units vanishes, and
// inversion pulls eta to -e^{-sigma} eta.
GroupoidReport contact_groupoid_check(const ConcreteGroupoid& g,
                                      const DifferentialForm& eta,
                                      const MultiplicativeFunction& sigma,
                                      const SampleSpec& spec = {});

// Generalized Lie bialgebroid of a Jacobi groupoid: the algebroid of the
// groupoid with the unit derivative of sigma as cocycle, paired with the
// conormal algebroid of the unit submanifold carrying the section X0 with
// E = -(right-invariant extension of X0). `construction` records the frame
// and conormal consistency checks, `compatibility` the full duality report.
struct DerivedBialgebroid {
    bool pass = false;
    GenLieBialgebroid pair;
    GroupoidReport construction;
    CompatReport compatibility;
};
DerivedBialgebroid derive_gen_bialgebroid(const JacobiGroupoidInstance& inst);

// Equivalence with the homogeneous Poisson picture: the product groupoid
// G x R ->> M x R with the poissonization e^{-t}(Lambda + dt ^ E) is a
// Poisson groupoid exactly when the instance is a Jacobi groupoid. Both
// verdicts are compared; on a joint pass the algebroid and dual-algebroid
// time extensions of the derived pair are matched against the derived pair
// of the product, and the cotangent brackets against the poissonization's.
struct ProductEquivalenceReport {
    bool pass = false;
    JacobiGroupoidReport direct;
    JacobiGroupoidReport product;
    bool verdicts_agree = false;
    GroupoidReport isomorphism;
};
ProductEquivalenceReport verify_p38(const JacobiGroupoidInstance& inst,
                                    const SampleSpec& spec = {});

// Stock instances. The product example places a Jacobi structure (lambda, e)
// on M at both ends of M x R x M with the twist e^{-t}; the dual-bundle
// example adds fiberwise translation to the fiberwise-linear structure of an
// algebroid with cocycle; the group example is a fixed two-dimensional
// group, multiplication (a, b)(a', b') = (a + a', b + e^a b'), carrying
// (Lambda, E) = (0, d/db) and sigma = a.
JacobiGroupoidInstance banal_example(const PatchPtr& m, const Multivector& lambda,
                                     const Multivector& e);
JacobiGroupoidInstance dual_bundle_abelian_example(const AlgebroidStructure& a,
                                                   const Cocycle& w0);
JacobiGroupoidInstance jacobi_lie_group_example();
// name in {banal, dual_bundle_abelian, jacobi_lie_group}, stock parameters
JacobiGroupoidInstance builtin_example(const std::string& name);

// Pair groupoid on M: arrows (x, y), multiplication (x, y)(y, z) = (x, z).
ConcreteGroupoid pair_groupoid(const PatchPtr& m);

} // namespace jgeo
