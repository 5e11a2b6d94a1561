#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace umc {

// Exact arithmetic everywhere. Distances stay symbolic (ladder indices);
// rationals appear only for ladder values, ratios and reports.
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::rational<BigInt>;

/// Lowest-terms rendering: "3", "1/2", "-5/7".
inline std::string format_rational(const Rational& r) {
    std::ostringstream os;
    os << r.numerator();
    if (r.denominator() != 1) os << '/' << r.denominator();
    return os.str();
}

/// Parses "p" or "p/q" with optional sign. Throws std::invalid_argument on
/// malformed text or a zero denominator.
inline Rational parse_rational(std::string_view text) {
    const std::string s(text);
    if (s.empty()) throw std::invalid_argument("not a rational: ''");
    const auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(BigInt(s), BigInt(1));
        const std::string num = s.substr(0, slash);
        const std::string den = s.substr(slash + 1);
        if (num.empty() || den.empty()) throw std::invalid_argument("empty part");
        BigInt d(den);
        if (d == 0) throw std::invalid_argument("zero denominator");
        return Rational(BigInt(num), d);
    } catch (const std::exception&) {
        throw std::invalid_argument("not a rational: '" + s + "'");
    }
}

}  // namespace umc
