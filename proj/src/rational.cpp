#include "bope/rational.hpp"

#include <cctype>
#include <stdexcept>

namespace bope {

namespace {

boost::multiprecision::cpp_int parse_int(const std::string& s, const std::string& whole)
{
    std::size_t i = 0;
    bool neg = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
        neg = s[i] == '-';
        ++i;
    }
    if (i >= s.size())
        throw std::invalid_argument("malformed rational '" + whole + "'");
    boost::multiprecision::cpp_int v = 0;
    for (; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i])))
            throw std::invalid_argument("malformed rational '" + whole + "'");
        v = v * 10 + (s[i] - '0');
    }
    return neg ? -v : v;
}

std::string strip(const std::string& s)
{
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a])))
        ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])))
        --b;
    return s.substr(a, b - a);
}

} // namespace

Rational parse_rational(const std::string& text)
{
    std::string s = strip(text);
    auto slash = s.find('/');
    if (slash == std::string::npos)
        return Rational(parse_int(s, text));
    auto num = parse_int(strip(s.substr(0, slash)), text);
    auto den = parse_int(strip(s.substr(slash + 1)), text);
    if (den == 0)
        throw std::invalid_argument("zero denominator in '" + text + "'");
    return Rational(num, den);
}

std::string to_string(const Rational& q)
{
    auto n = boost::multiprecision::numerator(q);
    auto d = boost::multiprecision::denominator(q);
    if (d == 1)
        return n.str();
    return n.str() + "/" + d.str();
}

double to_double(const Rational& q) { return q.convert_to<double>(); }

bool is_integer(const Rational& q) { return boost::multiprecision::denominator(q) == 1; }

long long to_integer(const Rational& q)
{
    if (!is_integer(q))
        throw std::invalid_argument("rational " + to_string(q) + " is not an integer");
    return boost::multiprecision::numerator(q).convert_to<long long>();
}

long long floor_int(const Rational& q)
{
    auto n = boost::multiprecision::numerator(q);
    auto d = boost::multiprecision::denominator(q);
    boost::multiprecision::cpp_int f = n / d;
    if (n < 0 && f * d != n)
        f -= 1;
    return f.convert_to<long long>();
}

} // namespace bope
