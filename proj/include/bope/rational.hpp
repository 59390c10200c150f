#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace bope {

using Rational = boost::multiprecision::cpp_rational;

// "p/q", "p" or "-p/q"; throws std::invalid_argument otherwise
Rational parse_rational(const std::string& text);

// "p/q" or "p" in lowest terms
std::string to_string(const Rational& q);

double to_double(const Rational& q);

bool is_integer(const Rational& q);

// requires is_integer(q) and a value that fits
long long to_integer(const Rational& q);

// floor(q) as an integer
long long floor_int(const Rational& q);

} // namespace bope
