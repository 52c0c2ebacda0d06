#pragma once

// Deterministic random scalars and tensors for property tests. Uses the
// mt19937 bit stream directly (no distributions) so sequences are identical
// on every platform.

#include "jgeo/multivec.hpp"

#include <random>

namespace randsup {

using namespace jgeo;

class Rng {
public:
    explicit Rng(unsigned seed) : eng_(seed) {}
    int pick(int n) { return (int)(eng_() % (unsigned)n); } // uniform-ish on [0,n)
    Rat coeff() {
        static const Rat table[] = {Rat(1), Rat(-1), Rat(2), Rat(-2), Rat(1, 2), Rat(-1, 2),
                                    Rat(3)};
        return table[pick(7)];
    }

private:
    std::mt19937 eng_;
};

// polynomial of degree <= 2 in the patch variables, optional e^{±t} factor
// when the patch has a variable named t
inline ExpPoly random_scalar(Rng& rng, const PatchPtr& p) {
    const int d = p->dim();
    int t_index = p->index_of("t");
    ExpPoly out = ExpPoly::zero(p);
    int n_terms = 1 + rng.pick(2);
    for (int n = 0; n < n_terms; ++n) {
        std::vector<int> mono(d, 0);
        int degree = d > 0 ? rng.pick(3) : 0; // constants over the empty patch
        for (int k = 0; k < degree; ++k) mono[rng.pick(d)] += 1;
        std::vector<Rat> lin(d, Rat(0));
        if (t_index >= 0) {
            int e = rng.pick(3); // 0, +1, -1
            if (e == 1) lin[t_index] = 1;
            if (e == 2) lin[t_index] = -1;
        }
        out += ExpPoly::term(p, rng.coeff(), std::move(mono), Rat(0), std::move(lin));
    }
    return out;
}

inline Multivector random_multivector(Rng& rng, const PatchPtr& p, int grade) {
    Tensor t = Tensor::zero(p, grade, Variance::multivector);
    // walk increasing tuples via bitmasks
    for (unsigned mask = 0; mask < (1u << p->dim()); ++mask) {
        if (__builtin_popcount(mask) != grade) continue;
        if (rng.pick(3) == 0) continue; // leave some components empty
        std::vector<int> idx;
        for (int i = 0; i < p->dim(); ++i)
            if (mask & (1u << i)) idx.push_back(i);
        t.add_term(idx, random_scalar(rng, p));
    }
    return t;
}

inline DifferentialForm random_form(Rng& rng, const PatchPtr& p, int grade) {
    Tensor t = Tensor::zero(p, grade, Variance::form);
    for (unsigned mask = 0; mask < (1u << p->dim()); ++mask) {
        if (__builtin_popcount(mask) != grade) continue;
        if (rng.pick(3) == 0) continue;
        std::vector<int> idx;
        for (int i = 0; i < p->dim(); ++i)
            if (mask & (1u << i)) idx.push_back(i);
        t.add_term(idx, random_scalar(rng, p));
    }
    return t;
}

} // namespace randsup
