#pragma once

#include "jgeo/exppoly.hpp"

#include <string>

namespace jgeo {

// Parse a scalar expression over the patch. Grammar: rational literals p/q,
// patch variables, + - *, ^ with integer exponent, exp(<affine expression>),
// parentheses, unary minus. '/' appears only inside rational literals.
// Round-trips with ExpPoly::text().
ExpPoly parse_scalar(const std::string& text, const PatchPtr& patch);

} // namespace jgeo
