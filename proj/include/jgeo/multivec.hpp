#pragma once

#include "jgeo/matrix.hpp"

#include <memory>

namespace jgeo {

enum class Variance { multivector, form };

// Graded alternating tensor with exp-polynomial coefficients: a multivector
// field or a differential form on a patch, depending on the variance flag.
// Components are stored on strictly increasing index tuples with all skew
// signs normalized, so structural equality is tensor equality.
class Tensor {
public:
    Tensor() = default; // grade-0 zero multivector over the empty patch

    static Tensor zero(const PatchPtr& p, int grade, Variance v);
    static Tensor scalar(const PatchPtr& p, const ExpPoly& f,
                         Variance v = Variance::multivector);
    static Tensor vector_field(const PatchPtr& p, std::vector<ExpPoly> comps);
    static Tensor one_form(const PatchPtr& p, std::vector<ExpPoly> comps);
    // basis k-vector / k-form on the given indices (sign-normalized)
    static Tensor basis(const PatchPtr& p, Variance v, const std::vector<int>& indices);

    // tensors indexed by an abstract frame of the given size instead of the
    // patch variables; coefficients still live on the patch
    static Tensor frame_zero(const PatchPtr& coeff_patch, int index_dim, int grade, Variance v);
    static Tensor frame_basis(const PatchPtr& coeff_patch, int index_dim, Variance v,
                              const std::vector<int>& indices);

    const PatchPtr& patch() const { return patch_; }
    int grade() const { return grade_; }
    Variance variance() const { return variance_; }
    int index_dim() const { return index_dim_; }
    // patch-indexed (ordinary) tensors have index_dim == patch dim
    bool patch_indexed() const { return index_dim_ == patch_->dim(); }
    bool is_zero() const { return comp_.empty(); }
    const std::map<std::vector<int>, ExpPoly>& components() const { return comp_; }
    // component on a (not necessarily sorted) index tuple, with skew sign
    ExpPoly component(std::vector<int> indices) const;

    // accumulate c on the tuple, sorting and sign-normalizing; zero dropped
    void add_term(std::vector<int> indices, const ExpPoly& c);

    Tensor operator+(const Tensor& o) const;
    Tensor operator-(const Tensor& o) const;
    Tensor operator-() const;
    Tensor scale(const ExpPoly& f) const;
    Tensor scale(const Rat& c) const;
    bool operator==(const Tensor& o) const;
    bool operator!=(const Tensor& o) const { return !(*this == o); }

    // coefficients pushed through a substitution (basis indices unchanged);
    // the caller is responsible for the basis identification
    Tensor substitute_coeffs(const std::vector<ExpPoly>& images) const;
    // same tensor over a patch containing the same variable names
    // (patch-indexed tensors only: the index space follows the patch)
    Tensor transported(const PatchPtr& bigger) const;
    // coefficients moved to a larger patch, index space untouched
    Tensor coeffs_transported(const PatchPtr& bigger) const;
    // same components inside a larger index space
    Tensor widened(int index_dim) const;

    std::string text() const;
    // custom basis names (one per index)
    std::string text(const std::vector<std::string>& basis_names) const;

private:
    PatchPtr patch_ = make_patch({});
    int grade_ = 0;
    Variance variance_ = Variance::multivector;
    int index_dim_ = 0;
    std::map<std::vector<int>, ExpPoly> comp_;
};

using Multivector = Tensor;
using DifferentialForm = Tensor;

Tensor wedge(const Tensor& a, const Tensor& b);

// First-slot contraction: the contractor (a form against a multivector, or a
// multivector against a form) eats the leading slots of the target.
Tensor interior_product(const Tensor& contractor, const Tensor& target);

// Full contraction of a form with a multivector of the same grade.
ExpPoly pairing(const Tensor& form, const Tensor& mv);

DifferentialForm de_rham(const DifferentialForm& w);
DifferentialForm de_rham(const ExpPoly& f); // differential of a function

// Schouten bracket of multivector fields, graded so that
// [P,Q] = (-1)^{pq}[Q,P], [X,f] = X(f), and the graded Jacobi identity holds.
Multivector schouten(const Multivector& p, const Multivector& q);
// Alternative grading of the same bracket: (-1)^{p+1} times `schouten`.
Multivector schouten_alt(const Multivector& p, const Multivector& q);

// L_X: Cartan's formula on forms, the Schouten bracket on multivectors.
Tensor lie_derivative(const Tensor& x, const Tensor& t);

// Explicit map between patches: one scalar per target variable.
struct PatchMap {
    PatchPtr source = make_patch({});
    PatchPtr target = make_patch({});
    std::vector<ExpPoly> comp; // over source
    std::shared_ptr<const PatchMap> inverse;

    static PatchMap make(const PatchPtr& src, const PatchPtr& dst, std::vector<ExpPoly> comps);
    // checks both compositions are the identity, exactly
    static PatchMap with_inverse(PatchMap fwd, PatchMap bwd);
    static PatchMap identity(const PatchPtr& p);

    ExpPoly pull(const ExpPoly& f_on_target) const; // f ∘ this
    PatchMap then(const PatchMap& next) const;      // x ↦ next(this(x))
    RingMat jacobian() const;                       // rows: target comps, cols: source vars
    Point apply_point(const Point& x) const;        // exact rational values required
};

// Transport of a multivector along an invertible map (inverse required).
Multivector pushforward(const Multivector& t, const PatchMap& phi);
// Transport of a form against the direction of any map.
DifferentialForm pullback(const DifferentialForm& w, const PatchMap& phi);

// Tensor grammar: sums of `coef * ∂x^∂y` (ASCII alias @x) for multivectors
// and `coef * dx^dy` for forms, coefficients in the scalar grammar.
Multivector parse_multivector(const std::string& text, const PatchPtr& patch);
DifferentialForm parse_form(const std::string& text, const PatchPtr& patch);

} // namespace jgeo
