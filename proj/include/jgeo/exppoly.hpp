#pragma once

#include "jgeo/patch.hpp"

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace jgeo {

// Term key of an exp-polynomial: the monomial x^mono together with the
// exponential factor e^{cst + lin·x}. Coefficients live in the enclosing map.
struct ExpKey {
    std::vector<Rat> lin;  // one rational per patch variable
    Rat cst;               // constant offset inside the exponential
    std::vector<int> mono; // non-negative exponents, one per patch variable

    friend bool operator<(const ExpKey& a, const ExpKey& b) {
        if (a.lin != b.lin) return a.lin < b.lin;
        if (a.cst != b.cst) return a.cst < b.cst;
        return a.mono < b.mono;
    }
    friend bool operator==(const ExpKey& a, const ExpKey& b) {
        return a.lin == b.lin && a.cst == b.cst && a.mono == b.mono;
    }
};

// Closed rational interval; used for rigorous numeric evaluation.
struct RatInterval {
    Rat lo, hi;
    Rat width() const { return hi - lo; }
};

// Rigorous enclosure of e^x for rational x, of width <= max_width.
RatInterval enclose_exp(const Rat& x, const Rat& max_width);

// 10^-30, the default enclosure width.
const Rat& default_enclosure_width();

struct EvalResult {
    bool exact = false;
    Rat value;        // meaningful when exact
    RatInterval box;  // meaningful when !exact (and also filled when exact)
};

// Element of the coefficient ring: a finite sum of
//   coefficient * monomial * e^{affine form},
// kept in a unique normal form (sorted keys, no zero coefficients), so
// structural equality decides ring equality.
class ExpPoly {
public:
    ExpPoly() = default; // zero over the empty patch

    static ExpPoly zero(const PatchPtr& p);
    static ExpPoly constant(const PatchPtr& p, const Rat& c);
    static ExpPoly variable(const PatchPtr& p, const std::string& name);
    static ExpPoly variable(const PatchPtr& p, int index);
    // e^{cst + lin·x}
    static ExpPoly exponential(const PatchPtr& p, const Rat& cst, std::vector<Rat> lin);
    static ExpPoly term(const PatchPtr& p, const Rat& coeff, std::vector<int> mono,
                        const Rat& ecst, std::vector<Rat> elin);

    const PatchPtr& patch() const { return patch_; }
    bool is_zero() const { return terms_.empty(); }
    // constant in the ring sense: no variable occurs (exponentials of pure
    // constants allowed)
    bool is_constant() const;
    std::optional<Rat> as_rational() const;
    // a + sum b_i x_i when the element is affine with no exponentials
    std::optional<std::pair<Rat, std::vector<Rat>>> as_affine() const;
    size_t term_count() const { return terms_.size(); }
    const std::map<ExpKey, Rat>& terms() const { return terms_; }

    ExpPoly operator+(const ExpPoly& o) const;
    ExpPoly operator-(const ExpPoly& o) const;
    ExpPoly operator*(const ExpPoly& o) const;
    ExpPoly operator-() const;
    ExpPoly& operator+=(const ExpPoly& o);
    ExpPoly& operator-=(const ExpPoly& o);
    ExpPoly scaled(const Rat& c) const;
    ExpPoly pow(int k) const;
    bool operator==(const ExpPoly& o) const {
        return same_patch(patch_, o.patch_) && terms_ == o.terms_;
    }
    bool operator!=(const ExpPoly& o) const { return !(*this == o); }

    ExpPoly derivative(int var_index) const;
    ExpPoly derivative(const std::string& var) const;

    // Substitute every patch variable: images[i] replaces variable i; all
    // images must share one target patch (taken as the result patch).
    // Throws unsupported_substitution if a variable occurring inside an
    // exponential receives a non-affine image.
    ExpPoly substitute(const std::vector<ExpPoly>& images) const;
    // Same-patch convenience: replace one variable, keep the others.
    ExpPoly substitute_one(const std::string& var, const ExpPoly& image) const;

    // Exact value as a constant element (sum of c·e^q) over target_patch.
    ExpPoly at_point(const Point& pt, const PatchPtr& target_patch) const;

    // Exact rational when every exponential collapses (exponent zero);
    // otherwise a rigorous interval of width <= max_width.
    EvalResult evaluate(const Point& pt, const Rat& max_width = default_enclosure_width()) const;

    // Single term c·e^{...} with trivial monomial — invertible in the ring.
    bool is_unit() const;
    ExpPoly unit_inverse() const;
    // Exact division by a unit.
    ExpPoly divided_by_unit(const ExpPoly& u) const { return *this * u.unit_inverse(); }
    // Exact ring division; nullopt when no quotient exists in the ring.
    std::optional<ExpPoly> divided_exactly_by(const ExpPoly& d) const;

    // Transport to a patch containing (at least) the same variable names.
    ExpPoly transported(const PatchPtr& bigger) const;

    // Canonical serialization in the expression grammar.
    std::string text() const;

private:
    PatchPtr patch_ = make_patch({});
    std::map<ExpKey, Rat> terms_;

    void add_term(const ExpKey& k, const Rat& c);
    friend class ExpPolyBuilder;
};

// Incremental construction helper (used by parser and tensor code).
class ExpPolyBuilder {
public:
    explicit ExpPolyBuilder(const PatchPtr& p) { result_.patch_ = p; }
    void add(const Rat& coeff, std::vector<int> mono, const Rat& ecst, std::vector<Rat> elin);
    ExpPoly take() { return std::move(result_); }

private:
    ExpPoly result_;
};

} // namespace jgeo
