#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace jgeo {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline Rat rat(long long num, long long den = 1) {
    return Rat(Int(num), Int(den));
}

// "p" for integers, "p/q" otherwise (the grammar's rational literal form,
// with a leading '-' for negatives).
inline std::string rat_text(const Rat& r) {
    return r.str();
}

} // namespace jgeo
