#pragma once

#include "jgeo/errors.hpp"
#include "jgeo/rational.hpp"

#include <memory>
#include <string>
#include <vector>

namespace jgeo {

// An ordered list of coordinate names. The order fixes every basis ordering
// downstream (monomial vectors, tensor index tuples, matrix layouts).
struct Patch {
    std::vector<std::string> names;

    int dim() const { return static_cast<int>(names.size()); }

    // -1 when absent
    int index_of(const std::string& v) const {
        for (int i = 0; i < dim(); ++i)
            if (names[i] == v) return i;
        return -1;
    }

    bool operator==(const Patch& o) const { return names == o.names; }
};

using PatchPtr = std::shared_ptr<const Patch>;

inline PatchPtr make_patch(std::vector<std::string> names) {
    for (size_t i = 0; i < names.size(); ++i)
        for (size_t j = i + 1; j < names.size(); ++j)
            if (names[i] == names[j])
                throw structural_error("duplicate patch variable '" + names[i] + "'");
    auto p = std::make_shared<Patch>();
    p->names = std::move(names);
    return p;
}

// Patch with the extra names appended (fresh names required).
inline PatchPtr extend_patch(const PatchPtr& p, const std::vector<std::string>& extra) {
    std::vector<std::string> names = p->names;
    names.insert(names.end(), extra.begin(), extra.end());
    return make_patch(std::move(names));
}

inline bool same_patch(const PatchPtr& a, const PatchPtr& b) {
    return a == b || (a && b && *a == *b);
}

inline void require_same_patch(const PatchPtr& a, const PatchPtr& b, const char* what) {
    if (!same_patch(a, b))
        throw structural_error(std::string(what) + ": operands live over different patches");
}

// A rational point of a patch (one value per variable, in patch order).
using Point = std::vector<Rat>;

} // namespace jgeo
