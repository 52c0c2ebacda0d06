#pragma once

#include <stdexcept>
#include <string>

namespace jgeo {

// Root of the library's exception hierarchy.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Mixing objects that live over different patches, bad grades, malformed data.
struct structural_error : error {
    using error::error;
};

// A substitution whose image leaves the coefficient ring (non-affine image of
// a variable that occurs inside an exponential).
struct unsupported_substitution : error {
    using error::error;
};

// Identically singular matrix passed to a linear solve.
struct singular_matrix_error : error {
    using error::error;
};

// A documented operation precondition does not hold.
struct precondition_error : error {
    using error::error;
};

// A 1-form fails the nondegeneracy a contact structure needs.
struct non_contact_error : error {
    using error::error;
};

// Text that does not conform to the expression / model grammar.
struct parse_error : error {
    int line;
    int col;
    parse_error(int line_, int col_, const std::string& msg)
        : error(msg + " at line " + std::to_string(line_) + ", column " + std::to_string(col_)),
          line(line_), col(col_) {}
};

} // namespace jgeo
