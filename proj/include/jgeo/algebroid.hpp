#pragma once

#include "jgeo/jacobi.hpp"

namespace jgeo {

// Lie algebroid trivialized by a global frame over a coordinate patch. Row i
// of `anchor` holds the components of the image vector field of frame section
// i; the bracket is stored through its structure functions on the frame,
// skew-symmetric in the lower pair, and extended to all sections by the
// Leibniz rule through the anchor. `verified` records a verify_algebroid pass.
struct AlgebroidStructure {
    PatchPtr base = make_patch({});
    int rank = 0;
    std::vector<std::string> frame; // e1..er unless overridden
    RingMat anchor;                 // rank x base dim
    std::vector<ExpPoly> c;         // flat [i][j][k]: [e_i,e_j] = Σ_k c^k_{ij} e_k
    std::string name;
    bool verified = false;

    const ExpPoly& bracket_coeff(int i, int j, int k) const;
    Multivector bracket_of_basis(int i, int j) const; // grade-1 frame section
};

// One bracket structure function: [e_i, e_j] gains coeff · e_k (i < j).
struct StructureEntry {
    int i = 0, j = 0, k = 0;
    ExpPoly coeff;
};

AlgebroidStructure make_algebroid(const PatchPtr& base, int rank, RingMat anchor,
                                  const std::vector<StructureEntry>& entries,
                                  std::string name = "",
                                  std::vector<std::string> frame = {});

// Frame-indexed alternating tensors: sections of the exterior powers of the
// bundle (multivector variance) and of its dual (form variance).
Multivector section_zero(const AlgebroidStructure& a, int grade);
DifferentialForm dual_zero(const AlgebroidStructure& a, int grade);
Multivector section_basis(const AlgebroidStructure& a, const std::vector<int>& indices);
DifferentialForm dual_basis(const AlgebroidStructure& a, const std::vector<int>& indices);
Multivector section_of(const AlgebroidStructure& a, std::vector<ExpPoly> comps);
DifferentialForm dual_of(const AlgebroidStructure& a, std::vector<ExpPoly> comps);

// ρ(e_i)(f)
ExpPoly anchor_apply(const AlgebroidStructure& a, int i, const ExpPoly& f);
// the ordinary vector field ρ(X) of a grade-1 section X
Multivector anchor_field(const AlgebroidStructure& a, const Multivector& x);
// ρ(X)(f)
ExpPoly anchor_derivation(const AlgebroidStructure& a, const Multivector& x, const ExpPoly& f);

// Checks the anchor sends frame brackets to commutators and the Jacobi
// identity of the bracket on frame triples; sets a.verified on pass.
Verdict verify_algebroid(AlgebroidStructure& a);

// Degree-raising differential on dual sections: on functions (df)(e_i) =
// ρ(e_i)(f), in higher degree the usual alternating sum over the frame.
DifferentialForm differential(const AlgebroidStructure& a, const ExpPoly& f);
DifferentialForm differential(const AlgebroidStructure& a, const DifferentialForm& w);

// A dual section φ with φ[X,Y] = ρ(X)(φY) − ρ(Y)(φX), stored through its
// frame components φ(e_i). Closed degree-1 element of the differential above.
struct Cocycle {
    AlgebroidStructure host;
    std::vector<ExpPoly> comps;
    bool verified = false;
};
Cocycle make_cocycle(const AlgebroidStructure& a, std::vector<ExpPoly> comps);
DifferentialForm cocycle_form(const Cocycle& phi);
Verdict verify_cocycle(Cocycle& phi);

// d_φ ω = dω + φ∧ω; squares to zero exactly when φ is a cocycle.
DifferentialForm differential_with_cocycle(const AlgebroidStructure& a, const Cocycle& phi,
                                           const ExpPoly& f);
DifferentialForm differential_with_cocycle(const AlgebroidStructure& a, const Cocycle& phi,
                                           const DifferentialForm& w);

// Schouten bracket on frame sections, graded exactly like `schouten`:
// [P,Q] = (-1)^{pq}[Q,P], [X,f] = ρ(X)(f), Leibniz over wedges.
Multivector algebroid_schouten(const AlgebroidStructure& a, const Multivector& p,
                               const Multivector& q);

// Bracket deformed by a cocycle:
// [P,Q]_φ = [P,Q] + (-1)^{p+1}(p-1) P∧(i(φ)Q) − (q-1)(i(φ)P)∧Q.
Multivector phi0_schouten(const AlgebroidStructure& a, const Cocycle& phi,
                          const Multivector& p, const Multivector& q);
// deformed Lie derivative along a grade-1 section: [X,P]_φ
Multivector phi0_lie_derivative(const AlgebroidStructure& a, const Cocycle& phi,
                                const Multivector& x, const Multivector& p);

// Product with the tangent line: rank+1 over the base extended by a time
// variable; the added frame section anchors to ∂t and brackets to zero.
AlgebroidStructure product_with_tangent_line(const AlgebroidStructure& a,
                                             const std::string& time_var = "t");

// Graded embedding into the product: P ↦ e^{-(p-1)t}(P + (i(φ)P)∧e_t).
Multivector u_lift(const AlgebroidStructure& product, const Cocycle& phi, const Multivector& p);

// The embedding intertwines the deformed bracket with the product bracket:
// lift([P,Q]_φ) = [lift P, lift Q].
Verdict u_embedding_check(const AlgebroidStructure& a, const Cocycle& phi,
                          const Multivector& p, const Multivector& q);

// Is the frame map m (column i = image of source frame section i, both
// algebroids over one base) compatible with anchors and brackets?
Verdict algebroid_morphism_check(const AlgebroidStructure& src, const AlgebroidStructure& dst,
                                 const RingMat& m);

// First-order differential operators on the base: rank dim+1, the extra
// section acting as multiplication. [(X,f),(Y,g)] = ([X,Y], X(g) − Y(f)).
AlgebroidStructure build_tm_times_r(const PatchPtr& base);
// (0,…,0,1): pairs a section (X,f) to f.
Cocycle tm_times_r_cocycle(const AlgebroidStructure& a);

// Bracket on (1-form, function) pairs induced by a Jacobi structure; the
// bracket of the cotangent algebroid below on arbitrary pair sections.
CosectionPair cotangent_bracket(const JacobiStructure& j, const CosectionPair& x,
                                const CosectionPair& y);

// Cotangent algebroid of a verified Jacobi structure: frame (δx_i, 0), (0,1),
// anchor (ω,f) ↦ ♯_Λω + fE, bracket = cotangent_bracket on the frame.
AlgebroidStructure build_jacobi_cotangent(const JacobiStructure& j);
// (−E, 0) as a cocycle of that algebroid.
Cocycle jacobi_cotangent_cocycle(const AlgebroidStructure& a, const JacobiStructure& j);

// Time-dependent sections over base × time with anchor ρ + φ·∂t ...
AlgebroidStructure build_bar(const AlgebroidStructure& a, const Cocycle& phi,
                             const std::string& time_var = "t");
// ... and the e^{-t}-rescaled structure on the same bundle.
AlgebroidStructure build_hat(const AlgebroidStructure& a, const Cocycle& phi,
                             const std::string& time_var = "t");
// e^t · identity: a morphism from the flat extension to the rescaled one.
RingMat bar_to_hat_frame_map(const AlgebroidStructure& bar);

// Fiberwise-linear Poisson (no cocycle) or Jacobi (with cocycle) structure on
// the dual patch base × (mu1..mur): brackets of linear functions represent
// brackets of sections, {μ̃_i, x_l} = ρ_{il}; the cocycle contributes a
// Liouville wedge and the vertical lift as −E.
JacobiStructure linear_structures_on_dual(const AlgebroidStructure& a,
                                          const Cocycle* w0 = nullptr);

// Conormal algebroid of a coisotropic coordinate subspace: frame = restricted
// vanishing-coordinate differentials, anchor through ♯_Λ, bracket restricted
// from cotangent_bracket, plus the restricted −ω(E) cocycle.
struct ConormalAlgebroid {
    AlgebroidStructure algebroid;     // over the surviving coordinates
    Cocycle cocycle;
    std::vector<int> conormal_indices; // ambient indices of the frame covectors
};
ConormalAlgebroid conormal_algebroid(const JacobiStructure& j, const CoisotropicSubpatch& s);

// Rendering with the algebroid's own frame names.
std::string section_text(const AlgebroidStructure& a, const Tensor& t);
std::string algebroid_text(const AlgebroidStructure& a);

} // namespace jgeo
