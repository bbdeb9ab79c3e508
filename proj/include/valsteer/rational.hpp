#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

#include <string>
#include <vector>

#include "valsteer/errors.hpp"

namespace valsteer {

using BigInt = boost::multiprecision::cpp_int;

/// Exact rational number. Metric rates and proportions are kept exact so the
/// inequality predicates and sum-to-one invariants hold without float drift.
using Rational = boost::rational<BigInt>;

inline Rational make_rational(long long num, long long den) {
    if (den == 0) throw InvalidParameter("rational with zero denominator");
    return Rational(BigInt(num), BigInt(den));
}

inline double to_double(const Rational& r) {
    return r.numerator().convert_to<double>() / r.denominator().convert_to<double>();
}

inline std::string to_string(const Rational& r) {
    return r.numerator().str() + "/" + r.denominator().str();
}

inline Rational mean(const std::vector<Rational>& xs) {
    if (xs.empty()) throw EmptyInput("mean of zero rationals");
    Rational acc(0);
    for (const auto& x : xs) acc += x;
    return acc / Rational(BigInt(static_cast<long long>(xs.size())));
}

} // namespace valsteer
