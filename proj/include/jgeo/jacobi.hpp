#pragma once

#include "jgeo/multivec.hpp"
#include "jgeo/verdict.hpp"

#include <utility>

namespace jgeo {

// Bivector/vector pair (Λ, E) on a patch. `verified` records that the
// compatibility identities ⟦Λ,Λ⟧ = 2E∧Λ and ⟦E,Λ⟧ = 0 have been checked.
struct JacobiStructure {
    PatchPtr patch = make_patch({});
    Multivector lambda; // grade 2
    Multivector e;      // grade 1
    bool verified = false;
};

// Shape-checked unverified candidate.
JacobiStructure jacobi_candidate(const Multivector& lambda, const Multivector& e);

// Checks ⟦Λ,Λ⟧ − 2E∧Λ and ⟦E,Λ⟧ vanish identically; sets j.verified on pass.
Verdict verify_jacobi(JacobiStructure& j);
Verdict verify_jacobi(const Multivector& lambda, const Multivector& e);

// Λ(ω, ν) for 1-forms ω, ν.
ExpPoly bivector_eval(const Multivector& lambda, const DifferentialForm& omega,
                      const DifferentialForm& nu);
// ♯_Λ(ω) = i(ω)Λ.
Multivector sharp_map(const Multivector& lambda, const DifferentialForm& omega);

// {f,g} = Λ(δf,δg) + f·E(g) − g·E(f).
ExpPoly jacobi_bracket(const ExpPoly& f, const ExpPoly& g, const JacobiStructure& j);
// X_f = ♯_Λ(δf) + f·E.
Multivector hamiltonian_field(const ExpPoly& f, const JacobiStructure& j);

// A coorientable contact form η on an odd-dimensional patch, together with the
// matrix of ♭_η(X) = i(X)δη + η(X)η and the nondegeneracy certificate: either
// det ♭_η is a unit of the ring, or it was checked nonzero at sample points.
struct ContactStructure {
    PatchPtr patch = make_patch({});
    DifferentialForm eta;
    RingMat flat_matrix;
    bool unit_certified = false;
    std::vector<Point> certified_points;
};

struct ContactToJacobi {
    ContactStructure contact;
    JacobiStructure jacobi;
};

// Inverts ♭_η to produce E = ♭_η⁻¹(η) and Λ(ω,ν) = δη(♭_η⁻¹ω, ♭_η⁻¹ν).
// A det that vanishes identically, or at a certified sample point, raises
// non_contact_error. With an empty grid a default rational grid is used.
ContactToJacobi contact_to_jacobi(const DifferentialForm& eta,
                                  const std::vector<Point>& sample_grid = {});

// Section pairs of TM⊕ℝ and T*M⊕ℝ.
struct SectionPair {
    Multivector field; // grade 1
    ExpPoly fn;
};
struct CosectionPair {
    DifferentialForm form; // grade 1
    ExpPoly fn;
};

// ♯_{(Λ,E)}(ω, γ) = (♯_Λω + γE, −ω(E)).
SectionPair sharp_pair(const JacobiStructure& j, const CosectionPair& in);
// ♭-type map of a contact form: (X, λ) ↦ (−i(X)δη − λη, η(X)); inverse of
// sharp_pair for the structure derived from the same η.
CosectionPair flat_pair(const ContactStructure& c, const SectionPair& in);

// Λ̃ = e^{−t}(Λ + ∂t∧E) on the patch extended by the time variable, with the
// homogeneity check L_{∂t}Λ̃ = −Λ̃ and the Poisson check ⟦Λ̃,Λ̃⟧ = 0.
struct Poissonization {
    PatchPtr extended = make_patch({});
    Multivector lambda_tilde;
    Verdict homogeneity;
    Verdict poisson;
};
Poissonization poissonize(const JacobiStructure& j, const std::string& time_var = "t");

// For a contact-derived structure: checks the bundle maps of Λ̃ and of
// Ω̃ = e^{t}(δη + δt∧η) are mutually inverse, symbolically in both orders
// (the flat map here is X ↦ Ω̃(·, X)).
Verdict poissonization_inverts_contact(const ContactStructure& c, const Poissonization& p);

// Coordinate subspace S = {x_k = 0 : k in vanishing} of the ambient patch.
struct CoisotropicSubpatch {
    PatchPtr ambient;
    std::vector<int> vanishing; // strictly increasing, nonempty, in range
};
CoisotropicSubpatch coisotropic_subpatch(const PatchPtr& ambient, std::vector<int> vanishing);

// Pass iff every ♯_Λ(δx_k), k in the vanishing set, is tangent to S after
// restriction: its components along vanishing coordinates vanish on S.
Verdict coisotropy_check(const Multivector& lambda, const CoisotropicSubpatch& s);

// Restriction to S: vanishing coordinates substituted by zero.
ExpPoly restrict_to_subpatch(const ExpPoly& f, const CoisotropicSubpatch& s);

} // namespace jgeo
