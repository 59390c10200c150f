#include "bope/series.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <unordered_map>

namespace bope {

namespace {

template <class T>
int lex_compare(const std::vector<T>& a, const std::vector<T>& b)
{
    std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i] < b[i])
            return -1;
        if (b[i] < a[i])
            return 1;
    }
    return a.size() < b.size() ? -1 : a.size() > b.size() ? 1 : 0;
}

const cplx I_PI{0, M_PI};

cplx int_pow(cplx v, long long k)
{
    if (k < 0)
        return 1.0 / int_pow(v, -k);
    cplx out = 1;
    cplx b = v;
    while (k) {
        if (k & 1)
            out *= b;
        b *= b;
        k >>= 1;
    }
    return out;
}

// principal c^q
cplx complex_pow(cplx c, const Rational& q)
{
    if (is_integer(q))
        return int_pow(c, to_integer(q));
    return std::exp(to_double(q) * std::log(c));
}

} // namespace

bool operator<(const SectorKey& a, const SectorKey& b)
{
    int c = lex_compare(a.base, b.base);
    if (c)
        return c < 0;
    return lex_compare(a.logs, b.logs) < 0;
}

bool operator==(const SectorKey& a, const SectorKey& b) { return a.base == b.base && a.logs == b.logs; }

bool operator<(const GenSeries::FlatKey& a, const GenSeries::FlatKey& b)
{
    int c = lex_compare(a.exps, b.exps);
    if (c)
        return c < 0;
    return lex_compare(a.logs, b.logs) < 0;
}

GenSeries::GenSeries(std::vector<SeriesVar> vars, int order) : vars_(std::move(vars)), order_(order)
{
    if (order < 0)
        throw std::invalid_argument("truncation order must be nonnegative");
    ratio_.assign(vars_.size(), -1);
    for (std::size_t v = 0; v < vars_.size(); ++v)
        if (vars_[v].kind == VarKind::Ratio) {
            ratio_[v] = static_cast<int>(ratio_vars_.size());
            ratio_vars_.push_back(static_cast<int>(v));
        }
    bits_ = std::max(1, static_cast<int>(std::bit_width(static_cast<unsigned>(order))));
    if (bits_ * ratio_vars_.size() > 64)
        throw std::invalid_argument("too many ratio variables for truncation order " + std::to_string(order));
}

GenSeries GenSeries::constant(std::vector<SeriesVar> vars, int order, cplx c)
{
    GenSeries s(std::move(vars), order);
    std::size_t n = s.vars_.size();
    s.add_term({std::vector<Rational>(n), std::vector<int>(n, 0)}, std::vector<int>(n, 0), c);
    return s;
}

GenSeries GenSeries::monomial(std::vector<SeriesVar> vars, int order, cplx c, const std::vector<Rational>& exps)
{
    GenSeries s(std::move(vars), order);
    std::size_t n = s.vars_.size();
    if (exps.size() != n)
        throw std::invalid_argument("exponent vector has the wrong length");
    for (std::size_t v = 0; v < n; ++v)
        if (s.vars_[v].kind == VarKind::Translation && (!is_integer(exps[v]) || exps[v] < 0))
            throw std::invalid_argument("translation variable needs a nonnegative integer exponent");
    s.add_term({exps, std::vector<int>(n, 0)}, std::vector<int>(n, 0), c);
    return s;
}

int GenSeries::var_index(const std::string& name) const
{
    for (std::size_t v = 0; v < vars_.size(); ++v)
        if (vars_[v].name == name)
            return static_cast<int>(v);
    return -1;
}

std::vector<int> GenSeries::offsets(std::uint64_t key) const
{
    std::vector<int> out(vars_.size(), 0);
    std::uint64_t mask = (std::uint64_t{1} << bits_) - 1;
    for (std::size_t k = 0; k < ratio_vars_.size(); ++k)
        out[ratio_vars_[k]] = static_cast<int>((key >> (bits_ * k)) & mask);
    return out;
}

std::uint64_t GenSeries::pack(const std::vector<int>& offs) const
{
    std::uint64_t key = 0;
    for (std::size_t k = 0; k < ratio_vars_.size(); ++k)
        key |= static_cast<std::uint64_t>(offs[ratio_vars_[k]]) << (bits_ * k);
    return key;
}

void GenSeries::add_term(const SectorKey& k, const std::vector<int>& offs, cplx c)
{
    if (c == cplx(0))
        return;
    if (k.base.size() != vars_.size() || k.logs.size() != vars_.size() || offs.size() != vars_.size())
        throw std::invalid_argument("term does not match the variable set");
    int deg = 0;
    for (std::size_t v = 0; v < vars_.size(); ++v) {
        if (offs[v] < 0 || (offs[v] > 0 && ratio_[v] < 0))
            throw std::invalid_argument("offsets are only allowed on ratio variables");
        deg += offs[v];
    }
    if (deg > order_)
        return;
    auto& terms = sectors_[k];
    std::uint64_t key = pack(offs);
    auto it = std::lower_bound(terms.begin(), terms.end(), key,
                               [](const SeriesTerm& t, std::uint64_t x) { return t.key < x; });
    if (it != terms.end() && it->key == key) {
        it->coef += c;
        if (it->coef == cplx(0))
            terms.erase(it);
    } else {
        terms.insert(it, {key, deg, c});
    }
    if (terms.empty())
        sectors_.erase(k);
}

void GenSeries::set_sector(const SectorKey& k, std::vector<SeriesTerm> terms)
{
    terms.erase(std::remove_if(terms.begin(), terms.end(), [](const SeriesTerm& t) { return t.coef == cplx(0); }),
                terms.end());
    if (terms.empty())
        sectors_.erase(k);
    else
        sectors_[k] = std::move(terms);
}

std::size_t GenSeries::term_count() const
{
    std::size_t n = 0;
    for (const auto& [k, t] : sectors_)
        n += t.size();
    return n;
}

std::map<GenSeries::FlatKey, cplx> GenSeries::flatten() const
{
    std::map<FlatKey, cplx> out;
    for (const auto& [k, terms] : sectors_)
        for (const auto& t : terms) {
            FlatKey f{k.base, k.logs};
            auto offs = offsets(t.key);
            for (std::size_t v = 0; v < vars_.size(); ++v)
                f.exps[v] += offs[v];
            cplx& slot = out[f];
            slot += t.coef;
            if (slot == cplx(0))
                out.erase(f);
        }
    return out;
}

GenSeries GenSeries::renamed(const std::map<std::string, std::string>& names) const
{
    GenSeries out = *this;
    for (auto& v : out.vars_) {
        auto it = names.find(v.name);
        if (it != names.end())
            v.name = it->second;
    }
    return out;
}

void GenSeries::check_compatible(const GenSeries& o) const
{
    bool same = vars_.size() == o.vars_.size();
    for (std::size_t v = 0; same && v < vars_.size(); ++v)
        same = vars_[v].name == o.vars_[v].name && vars_[v].kind == o.vars_[v].kind;
    if (!same)
        throw std::invalid_argument("series over different variable sets");
}

GenSeries truncate(const GenSeries& s, int order)
{
    GenSeries out(s.vars(), std::min(order, s.order()));
    for (const auto& [k, terms] : s.sectors())
        for (const auto& t : terms)
            if (t.degree <= out.order())
                out.add_term(k, s.offsets(t.key), t.coef);
    return out;
}

GenSeries operator+(const GenSeries& a, const GenSeries& b)
{
    a.check_compatible(b);
    if (a.order() != b.order()) {
        int m = std::min(a.order(), b.order());
        return truncate(a, m) + truncate(b, m);
    }
    GenSeries out = a;
    int n = out.order();
    for (const auto& [k, terms] : b.sectors()) {
        auto it = out.sectors_.find(k);
        std::vector<SeriesTerm> merged;
        const std::vector<SeriesTerm> empty;
        const auto& mine = it == out.sectors_.end() ? empty : it->second;
        std::size_t i = 0, j = 0;
        while (i < mine.size() || j < terms.size()) {
            if (j < terms.size() && terms[j].degree > n) {
                ++j;
                continue;
            }
            if (j == terms.size() || (i < mine.size() && mine[i].key < terms[j].key)) {
                merged.push_back(mine[i++]);
            } else if (i == mine.size() || terms[j].key < mine[i].key) {
                merged.push_back(terms[j++]);
            } else {
                SeriesTerm t = mine[i++];
                t.coef += terms[j++].coef;
                merged.push_back(t);
            }
        }
        out.set_sector(k, std::move(merged));
    }
    return out;
}

GenSeries operator*(cplx c, const GenSeries& a)
{
    GenSeries out = a;
    if (c == cplx(0)) {
        out.sectors_.clear();
        return out;
    }
    for (auto& [k, terms] : out.sectors_)
        for (auto& t : terms)
            t.coef *= c;
    return out;
}

GenSeries operator-(const GenSeries& a, const GenSeries& b) { return a + cplx(-1) * b; }

namespace {

// coefficient sums for one output sector
class Accumulator {
public:
    explicit Accumulator(int total_bits)
    {
        if (total_bits <= 22)
            dense_.assign(std::size_t{1} << total_bits, cplx(0));
    }

    void add(std::uint64_t key, cplx c)
    {
        if (dense_.empty()) {
            sparse_[key] += c;
            return;
        }
        cplx& slot = dense_[key];
        if (slot == cplx(0))
            touched_.push_back(key);
        slot += c;
    }

    std::vector<std::pair<std::uint64_t, cplx>> take()
    {
        std::vector<std::pair<std::uint64_t, cplx>> out;
        if (dense_.empty()) {
            out.assign(sparse_.begin(), sparse_.end());
        } else {
            std::sort(touched_.begin(), touched_.end());
            touched_.erase(std::unique(touched_.begin(), touched_.end()), touched_.end());
            for (auto k : touched_)
                out.emplace_back(k, dense_[k]);
        }
        std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
        return out;
    }

private:
    std::vector<cplx> dense_;
    std::vector<std::uint64_t> touched_;
    std::unordered_map<std::uint64_t, cplx> sparse_;
};

} // namespace

GenSeries operator*(const GenSeries& a, const GenSeries& b)
{
    a.check_compatible(b);
    if (a.order() != b.order()) {
        int m = std::min(a.order(), b.order());
        return truncate(a, m) * truncate(b, m);
    }
    GenSeries out(a.vars(), a.order());
    int n = out.order();
    int total_bits = out.bits_ * static_cast<int>(out.ratio_vars_.size());
    std::map<SectorKey, Accumulator> acc;
    std::map<SectorKey, std::vector<SeriesTerm>> by_degree;
    for (const auto& [k, terms] : b.sectors()) {
        auto sorted = terms;
        std::stable_sort(sorted.begin(), sorted.end(),
                         [](const SeriesTerm& x, const SeriesTerm& y) { return x.degree < y.degree; });
        by_degree.emplace(k, std::move(sorted));
    }
    std::size_t nv = a.vars().size();
    for (const auto& [ka, ta] : a.sectors())
        for (const auto& [kb, tb] : by_degree) {
            SectorKey k{std::vector<Rational>(nv), std::vector<int>(nv)};
            for (std::size_t v = 0; v < nv; ++v) {
                k.base[v] = ka.base[v] + kb.base[v];
                k.logs[v] = ka.logs[v] + kb.logs[v];
            }
            auto it = acc.find(k);
            if (it == acc.end())
                it = acc.emplace(k, Accumulator(total_bits)).first;
            Accumulator& sink = it->second;
            for (const auto& x : ta) {
                int room = n - x.degree;
                for (const auto& y : tb) {
                    if (y.degree > room)
                        break;
                    sink.add(x.key + y.key, x.coef * y.coef);
                }
            }
        }
    for (auto& [k, sink] : acc) {
        std::vector<SeriesTerm> terms;
        for (const auto& [key, c] : sink.take()) {
            auto offs = out.offsets(key);
            int deg = 0;
            for (int o : offs)
                deg += o;
            terms.push_back({key, deg, c});
        }
        out.set_sector(k, std::move(terms));
    }
    return out;
}

namespace {

struct UnitForm {
    cplx c;
    SectorKey key;
    GenSeries u; // zero base, positive ratio order
};

UnitForm unit_form(const GenSeries& s, const char* what)
{
    if (s.sectors().size() != 1)
        throw std::invalid_argument(std::string(what) + " needs a series with a single leading monomial");
    const auto& [k, terms] = *s.sectors().begin();
    for (int l : k.logs)
        if (l)
            throw std::invalid_argument(std::string(what) + " of a series with log terms");
    if (terms.empty() || terms.front().key != 0)
        throw std::invalid_argument(std::string(what) + " needs an invertible leading term");
    std::size_t nv = s.vars().size();
    UnitForm f{terms.front().coef, k, GenSeries(s.vars(), s.order())};
    SectorKey zero{std::vector<Rational>(nv), std::vector<int>(nv, 0)};
    for (std::size_t i = 1; i < terms.size(); ++i)
        f.u.add_term(zero, s.offsets(terms[i].key), terms[i].coef / f.c);
    return f;
}

GenSeries int_power(const GenSeries& s, long long k)
{
    GenSeries out = GenSeries::constant(s.vars(), s.order(), 1);
    GenSeries b = s;
    while (k) {
        if (k & 1)
            out = out * b;
        k >>= 1;
        if (k)
            b = b * b;
    }
    return out;
}

} // namespace

GenSeries pow(const GenSeries& s, const Rational& q)
{
    if (is_integer(q) && q >= 0)
        return int_power(s, to_integer(q));
    UnitForm f = unit_form(s, "pow");
    std::size_t nv = s.vars().size();
    std::vector<Rational> base(nv);
    for (std::size_t v = 0; v < nv; ++v) {
        base[v] = f.key.base[v] * q;
        if (s.vars()[v].kind == VarKind::Translation && (!is_integer(base[v]) || base[v] < 0))
            throw std::invalid_argument("pow would give a non-polynomial translation power");
    }
    GenSeries sum = GenSeries::constant(s.vars(), s.order(), 1);
    GenSeries uk = GenSeries::constant(s.vars(), s.order(), 1);
    double qd = to_double(q);
    double binom = 1;
    bool finite = is_integer(q) && q >= 0;
    long long kmax = s.order();
    if (finite)
        kmax = std::min<long long>(kmax, to_integer(q));
    for (long long k = 1; k <= kmax && !f.u.is_zero(); ++k) {
        binom *= (qd - static_cast<double>(k - 1)) / static_cast<double>(k);
        uk = uk * f.u;
        if (uk.is_zero())
            break;
        sum = sum + cplx(binom) * uk;
    }
    GenSeries lead = GenSeries::monomial(s.vars(), s.order(), complex_pow(f.c, q), base);
    return lead * sum;
}

GenSeries log1p(const GenSeries& u)
{
    GenSeries out(u.vars(), u.order());
    if (u.is_zero())
        return out;
    std::size_t nv = u.vars().size();
    SectorKey zero{std::vector<Rational>(nv), std::vector<int>(nv, 0)};
    if (u.sectors().size() != 1 || !(u.sectors().begin()->first == zero) || u.sectors().begin()->second.front().key == 0)
        throw std::invalid_argument("log1p needs a series of positive ratio order");
    GenSeries uk = GenSeries::constant(u.vars(), u.order(), 1);
    for (int k = 1; k <= u.order(); ++k) {
        uk = uk * u;
        if (uk.is_zero())
            break;
        out = out + cplx((k % 2 ? 1.0 : -1.0) / k) * uk;
    }
    return out;
}

GenSeries log(const GenSeries& s)
{
    UnitForm f = unit_form(s, "log");
    std::size_t nv = s.vars().size();
    GenSeries out = GenSeries::constant(s.vars(), s.order(), std::log(f.c));
    for (std::size_t v = 0; v < nv; ++v) {
        if (f.key.base[v] == 0)
            continue;
        SectorKey k{std::vector<Rational>(nv), std::vector<int>(nv, 0)};
        k.logs[v] = 1;
        out.add_term(k, std::vector<int>(nv, 0), to_double(f.key.base[v]));
    }
    return out + log1p(f.u);
}

std::vector<SeriesVar> coordinate_vars(const CoordSystem& cs)
{
    std::vector<SeriesVar> vars{{x_name, VarKind::Root}, {z_name, VarKind::Translation}};
    for (const auto& n : cs.edge_names)
        vars.push_back({n, VarKind::Ratio});
    return vars;
}

int PowerProduct::max_label() const
{
    int m = 0;
    for (const auto& [p, s] : pairs)
        m = std::max({m, p.first, p.second});
    for (const auto& [i, k] : powers)
        m = std::max(m, i);
    return m;
}

PowerProduct operator*(const PowerProduct& a, const PowerProduct& b)
{
    PowerProduct out = a;
    out.constant *= b.constant;
    out.pairs.insert(out.pairs.end(), b.pairs.begin(), b.pairs.end());
    for (const auto& [i, k] : b.powers)
        if ((out.powers[i] += k) == 0)
            out.powers.erase(i);
    return out;
}

namespace {

class PPParser {
public:
    explicit PPParser(const std::string& s) : s_(s) {}

    PowerProduct parse()
    {
        PowerProduct f;
        skip();
        if (i_ == s_.size())
            throw parse_error("empty expression", 0);
        for (;;) {
            factor(f);
            skip();
            if (i_ == s_.size())
                break;
            expect('*');
        }
        return f;
    }

private:
    void skip()
    {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_])))
            ++i_;
    }

    bool peek(char c)
    {
        skip();
        return i_ < s_.size() && s_[i_] == c;
    }

    void expect(char c)
    {
        if (!peek(c))
            throw parse_error(std::string("expected '") + c + "'", i_);
        ++i_;
    }

    int label()
    {
        skip();
        if (i_ >= s_.size() || s_[i_] != 'z')
            throw parse_error("expected z<label>", i_);
        ++i_;
        std::size_t start = i_;
        while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_])))
            ++i_;
        if (start == i_)
            throw parse_error("expected a label after z", i_);
        int v = std::stoi(s_.substr(start, i_ - start));
        if (v < 1)
            throw parse_error("labels start at 1", start);
        return v;
    }

    Rational exponent()
    {
        skip();
        bool paren = peek('(');
        if (paren)
            ++i_;
        skip();
        std::size_t start = i_;
        while (i_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[i_])) || s_[i_] == '-' ||
                                  s_[i_] == '+' || s_[i_] == '/'))
            ++i_;
        Rational q;
        try {
            q = parse_rational(s_.substr(start, i_ - start));
        } catch (const std::invalid_argument&) {
            throw parse_error("bad exponent", start);
        }
        if (paren)
            expect(')');
        return q;
    }

    void factor(PowerProduct& f)
    {
        skip();
        if (peek('(')) {
            ++i_;
            int a = label();
            expect('-');
            int b = label();
            expect(')');
            if (a == b)
                throw parse_error("pair factor with equal labels", i_);
            Rational q = 1;
            if (peek('^')) {
                ++i_;
                q = exponent();
            }
            if (q != 0)
                f.pairs.push_back({{a, b}, q});
            return;
        }
        if (peek('z')) {
            int a = label();
            long long k = 1;
            if (peek('^')) {
                ++i_;
                std::size_t at = i_;
                Rational q = exponent();
                if (!is_integer(q) || q < 0)
                    throw parse_error("powers of z_i must be nonnegative integers", at);
                k = to_integer(q);
            }
            if ((f.powers[a] += static_cast<int>(k)) == 0)
                f.powers.erase(a);
            return;
        }
        std::size_t start = i_;
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(s_.substr(start), &used);
        } catch (const std::exception&) {
            throw parse_error("expected a factor", start);
        }
        i_ += used;
        f.constant *= v;
    }

    const std::string& s_;
    std::size_t i_ = 0;
};

std::string exponent_text(const Rational& q)
{
    std::string t = to_string(q);
    return is_integer(q) && q >= 0 ? t : "(" + t + ")";
}

} // namespace

PowerProduct parse_power_product(const std::string& text) { return PPParser(text).parse(); }

std::string to_string(const PowerProduct& f)
{
    std::string out;
    auto sep = [&] {
        if (!out.empty())
            out += " * ";
    };
    if (f.constant != cplx(1) || (f.pairs.empty() && f.powers.empty())) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", f.constant.real());
        out += buf;
    }
    for (const auto& [p, s] : f.pairs) {
        sep();
        out += "(z" + std::to_string(p.first) + "-z" + std::to_string(p.second) + ")";
        if (s != 1)
            out += "^" + exponent_text(s);
    }
    for (const auto& [i, k] : f.powers) {
        sep();
        out += "z" + std::to_string(i);
        if (k != 1)
            out += "^" + std::to_string(k);
    }
    return out;
}

Expansion expand(const Tree& a, const PowerProduct& f, int order) { return expand(a_coordinates(a), f, order); }

Expansion expand(const CoordSystem& cs, const PowerProduct& f, int order)
{
    if (f.max_label() > cs.r)
        throw std::invalid_argument("expression uses labels beyond the tree");
    auto vars = coordinate_vars(cs);
    std::size_t nv = vars.size();
    int E = cs.edge_count();
    Expansion out{GenSeries::constant(vars, order, f.constant), false};
    SectorKey zero{std::vector<Rational>(nv), std::vector<int>(nv, 0)};
    auto offs_of = [&](const Monomial& m) {
        std::vector<int> offs(nv, 0);
        for (int e = 0; e < E; ++e)
            offs[2 + e] = m[e];
        return offs;
    };
    for (const auto& [p, s] : f.pairs) {
        auto pf = pair_difference(cs, p.first, p.second);
        if (!pf)
            throw std::invalid_argument("pair (" + std::to_string(p.first) + "," + std::to_string(p.second) +
                                        ") has no certified factorization");
        GenSeries one_plus(vars, order);
        one_plus.add_term(zero, std::vector<int>(nv, 0), 1);
        for (const auto& [m, c] : pf->P.terms)
            one_plus.add_term(zero, offs_of(m), static_cast<double>(c));
        std::vector<Rational> exps(nv);
        exps[0] = s;
        for (int e = 0; e < E; ++e)
            exps[2 + e] = s * pf->m[e];
        cplx lead = 1;
        if (pf->c < 0) {
            out.negative_leading_sign = true;
            lead = is_integer(s) ? (to_integer(s) % 2 ? -1.0 : 1.0) : std::exp(to_double(s) * I_PI);
        }
        out.series = out.series * (GenSeries::monomial(vars, order, lead, exps) * pow(one_plus, s));
    }
    for (const auto& [i, k] : f.powers) {
        GenSeries zi(vars, order);
        SectorKey zkey = zero;
        zkey.base[1] = 1;
        zi.add_term(zkey, std::vector<int>(nv, 0), 1);
        SectorKey xkey = zero;
        xkey.base[0] = 1;
        for (const auto& [m, c] : cs.Q[i - 1].terms)
            zi.add_term(xkey, offs_of(m), static_cast<double>(c));
        out.series = out.series * pow(zi, k);
    }
    return out;
}

cplx evaluate_series(const GenSeries& s, const std::map<std::string, cplx>& values)
{
    const auto& vars = s.vars();
    std::size_t nv = vars.size();
    std::vector<cplx> val(nv), lg(nv);
    std::vector<bool> have_log(nv, false);
    for (std::size_t v = 0; v < nv; ++v) {
        auto it = values.find(vars[v].name);
        if (it == values.end())
            throw std::invalid_argument("no value for variable " + vars[v].name);
        val[v] = it->second;
    }
    auto log_of = [&](std::size_t v) {
        if (!have_log[v]) {
            if (on_cut(val[v]))
                throw std::domain_error("variable " + vars[v].name + " is on the branch cut");
            lg[v] = std::log(val[v]);
            have_log[v] = true;
        }
        return lg[v];
    };
    // integer offset powers
    std::vector<std::vector<cplx>> table(nv);
    for (std::size_t v = 0; v < nv; ++v)
        if (vars[v].kind == VarKind::Ratio) {
            table[v].resize(s.order() + 1);
            table[v][0] = 1;
            for (int k = 1; k <= s.order(); ++k)
                table[v][k] = table[v][k - 1] * val[v];
        }
    std::vector<int> ratio_vars;
    for (std::size_t v = 0; v < nv; ++v)
        if (vars[v].kind == VarKind::Ratio)
            ratio_vars.push_back(static_cast<int>(v));
    int bits = std::max(1, static_cast<int>(std::bit_width(static_cast<unsigned>(s.order()))));
    std::uint64_t mask = (std::uint64_t{1} << bits) - 1;

    cplx total = 0;
    for (const auto& [k, terms] : s.sectors()) {
        cplx factor = 1;
        for (std::size_t v = 0; v < nv; ++v) {
            if (k.logs[v] == 0 && is_integer(k.base[v])) {
                long long e = to_integer(k.base[v]);
                if (e != 0)
                    factor *= int_pow(val[v], e);
                continue;
            }
            cplx L = log_of(v);
            if (k.base[v] != 0)
                factor *= std::exp(to_double(k.base[v]) * L);
            for (int j = 0; j < k.logs[v]; ++j)
                factor *= L;
        }
        cplx sum = 0;
        for (const auto& t : terms) {
            cplx term = t.coef;
            std::uint64_t key = t.key;
            for (std::size_t r = 0; key && r < ratio_vars.size(); ++r) {
                int off = static_cast<int>(key & mask);
                if (off)
                    term *= table[ratio_vars[r]][off];
                key >>= bits;
            }
            sum += term;
        }
        total += factor * sum;
    }
    return total;
}

cplx evaluate_series(const GenSeries& s, const CoordSystem& cs, const CoordValues& v)
{
    return evaluate_series(s, v.named(cs));
}

cplx tree_log(const CoordSystem& cs, const CoordValues& v, int i, int j)
{
    auto pf = pair_difference(cs, i, j);
    if (!pf)
        throw std::invalid_argument("pair has no certified factorization in the tree");
    cplx L = std::log(v.x) + std::log(1.0 + pf->P.eval(v.zeta));
    if (pf->c < 0)
        L += I_PI;
    for (int e = 0; e < cs.edge_count(); ++e)
        if (pf->m[e])
            L += static_cast<double>(pf->m[e]) * std::log(v.zeta[e]);
    return L;
}

cplx evaluate_closed(const PowerProduct& f, const std::vector<cplx>& point, const BranchPlan& plan)
{
    int n = static_cast<int>(point.size());
    if (f.max_label() > n)
        throw std::invalid_argument("point has fewer entries than the expression needs");
    auto z = [&](int i) { return point[i - 1]; };
    cplx out = f.constant;
    for (const auto& [i, k] : f.powers)
        out *= int_pow(z(i), k);

    std::vector<bool> used(f.pairs.size(), false);
    auto find = [&](std::pair<int, int> p) {
        for (std::size_t a = 0; a < f.pairs.size(); ++a)
            if (!used[a] && f.pairs[a].first == p) {
                used[a] = true;
                return a;
            }
        throw std::invalid_argument("branch plan names a factor the expression does not have");
    };
    for (const auto& [p1, p2] : plan.paired) {
        std::size_t a = find(p1), b = find(p2);
        cplx w = z(p1.first) - z(p1.second);
        cplx wb = z(p2.first) - z(p2.second);
        if (std::abs(wb - std::conj(w)) > 1e-9 * (1 + std::abs(w)))
            throw std::invalid_argument("paired factors are not complex conjugates");
        const Rational& s = f.pairs[a].second;
        const Rational& t = f.pairs[b].second;
        if (!is_integer(s - t))
            throw std::invalid_argument("paired exponents must differ by an integer");
        out *= std::pow(std::abs(w), 2 * to_double(t)) * int_pow(w, to_integer(s - t));
    }

    std::optional<CoordSystem> cs;
    std::optional<CoordValues> cv;
    if (plan.tree) {
        cs = a_coordinates(*plan.tree);
        if (cs->r != n)
            throw std::invalid_argument("tree size does not match the point");
        cv = psi(*cs, point);
    }
    for (std::size_t a = 0; a < f.pairs.size(); ++a) {
        if (used[a])
            continue;
        const auto& [p, s] = f.pairs[a];
        cplx w = z(p.first) - z(p.second);
        if (cs) {
            cplx L = tree_log(*cs, *cv, p.first, p.second);
            out *= is_integer(s) ? int_pow(w, to_integer(s)) : std::exp(to_double(s) * L);
            continue;
        }
        if (is_integer(s)) {
            out *= int_pow(w, to_integer(s));
            continue;
        }
        if (on_cut(w))
            throw std::domain_error("unpaired non-integer power of a factor on the branch cut");
        out *= std::exp(to_double(s) * std::log(w));
    }
    return out;
}

nlohmann::json to_json(const GenSeries& s)
{
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [k, c] : s.flatten()) {
        nlohmann::json e;
        e["exponents"] = nlohmann::json::object();
        e["logs"] = nlohmann::json::object();
        for (std::size_t v = 0; v < s.vars().size(); ++v) {
            if (k.exps[v] != 0)
                e["exponents"][s.vars()[v].name] = to_string(k.exps[v]);
            if (k.logs[v] != 0)
                e["logs"][s.vars()[v].name] = k.logs[v];
        }
        e["re"] = c.real();
        e["im"] = c.imag();
        out.push_back(std::move(e));
    }
    return out;
}

} // namespace bope
