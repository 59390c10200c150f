#include "bope/series.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <map>
#include <random>

using namespace bope;

namespace {

std::vector<SeriesVar> ratio_vars(int n)
{
    std::vector<SeriesVar> v;
    for (int i = 0; i < n; ++i)
        v.push_back({"q" + std::to_string(i), VarKind::Ratio});
    return v;
}

SectorKey zero_key(std::size_t n) { return {std::vector<Rational>(n), std::vector<int>(n, 0)}; }

// coefficient of prod q_i^{e_i} in a series with a zero base sector
cplx coef(const GenSeries& s, std::vector<int> e)
{
    auto flat = s.flatten();
    GenSeries::FlatKey k{std::vector<Rational>(e.begin(), e.end()), std::vector<int>(e.size(), 0)};
    auto it = flat.find(k);
    return it == flat.end() ? cplx(0) : it->second;
}

using Dense = std::map<std::array<int, 3>, cplx>;

Dense dense_mul(const Dense& a, const Dense& b, int n)
{
    Dense out;
    for (const auto& [ea, ca] : a)
        for (const auto& [eb, cb] : b) {
            std::array<int, 3> e{ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]};
            if (e[0] + e[1] + e[2] <= n)
                out[e] += ca * cb;
        }
    return out;
}

CoordSystem example_cs() { return a_coordinates(parse_plain_tree("(23)((15)4)")); }

std::vector<cplx> point_with_margin(const CoordSystem& cs, std::mt19937_64& rng, double margin)
{
    std::uniform_real_distribution<double> u(-1, 1);
    for (;;) {
        std::vector<cplx> z(cs.r);
        for (auto& v : z)
            v = {u(rng), u(rng)};
        try {
            auto m = region_membership(cs, z);
            if (m.in_U && m.margin >= margin)
                return z;
        } catch (const std::invalid_argument&) {
        }
    }
}

} // namespace

TEST(Series, GeometricAndBinomial)
{
    auto vars = ratio_vars(1);
    GenSeries one_plus(vars, 3);
    one_plus.add_term(zero_key(1), {0}, 1);
    one_plus.add_term(zero_key(1), {1}, 1);
    GenSeries inv = pow(one_plus, Rational(-1));
    EXPECT_EQ(inv.term_count(), 4u);
    for (int k = 0; k <= 3; ++k)
        EXPECT_EQ(coef(inv, {k}), cplx(k % 2 ? -1 : 1));

    GenSeries sq = pow(truncate(one_plus, 2), Rational(1, 2));
    EXPECT_NEAR(std::abs(coef(sq, {0}) - 1.0), 0, 1e-15);
    EXPECT_NEAR(std::abs(coef(sq, {1}) - 0.5), 0, 1e-15);
    EXPECT_NEAR(std::abs(coef(sq, {2}) + 0.125), 0, 1e-15);
    EXPECT_EQ(sq.term_count(), 3u);
}

TEST(Series, PowErrors)
{
    auto vars = ratio_vars(1);
    GenSeries no_lead(vars, 3);
    no_lead.add_term(zero_key(1), {1}, 1);
    EXPECT_THROW(pow(no_lead, Rational(1, 2)), std::invalid_argument);
    EXPECT_THROW(pow(GenSeries(vars, 3), Rational(-1)), std::invalid_argument);
    EXPECT_THROW(log(no_lead), std::invalid_argument);
    // nonnegative integer powers are plain products
    GenSeries sq = pow(no_lead, Rational(2));
    EXPECT_EQ(coef(sq, {2}), cplx(1));
}

TEST(Series, MulMatchesDenseConvolution)
{
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<int> deg(0, 4);
    std::normal_distribution<double> g(0, 1);
    for (int t = 0; t < 60; ++t) {
        int n = 1 + static_cast<int>(rng() % 8);
        auto vars = ratio_vars(3);
        GenSeries f(vars, n), h(vars, n);
        Dense df, dh;
        for (int k = 0; k < 6; ++k) {
            std::array<int, 3> e{deg(rng), deg(rng), deg(rng)};
            cplx c{g(rng), g(rng)};
            f.add_term(zero_key(3), {e[0], e[1], e[2]}, c);
            if (e[0] + e[1] + e[2] <= n)
                df[e] += c;
            std::array<int, 3> e2{deg(rng), deg(rng), deg(rng)};
            cplx c2{g(rng), g(rng)};
            h.add_term(zero_key(3), {e2[0], e2[1], e2[2]}, c2);
            if (e2[0] + e2[1] + e2[2] <= n)
                dh[e2] += c2;
        }
        GenSeries p = f * h;
        Dense want = dense_mul(df, dh, n);
        std::size_t nonzero = 0;
        for (const auto& [e, c] : want) {
            ASSERT_LT(std::abs(coef(p, {e[0], e[1], e[2]}) - c), 1e-12);
            nonzero += std::abs(c) > 0;
        }
        EXPECT_LE(p.term_count(), want.size());
    }
}

TEST(Series, SectorsMultiplyExactly)
{
    std::vector<SeriesVar> vars{{"x", VarKind::Root}, {"z", VarKind::Translation}, {"q", VarKind::Ratio}};
    GenSeries a = GenSeries::monomial(vars, 5, 2, {Rational(1, 3), 0, Rational(-1, 2)});
    GenSeries b = GenSeries::monomial(vars, 5, 3, {Rational(2, 3), 2, Rational(1, 2)});
    GenSeries p = a * b;
    ASSERT_EQ(p.sectors().size(), 1u);
    const auto& key = p.sectors().begin()->first;
    EXPECT_EQ(key.base[0], Rational(1));
    EXPECT_EQ(key.base[1], Rational(2));
    EXPECT_EQ(key.base[2], Rational(0));
    EXPECT_EQ(p.sectors().begin()->second.front().coef, cplx(6));
    EXPECT_THROW(GenSeries::monomial(vars, 5, 1, {0, Rational(1, 2), 0}), std::invalid_argument);
}

TEST(Series, LogAndLog1p)
{
    auto vars = ratio_vars(2);
    GenSeries u(vars, 10);
    u.add_term(zero_key(2), {1, 0}, 0.3);
    u.add_term(zero_key(2), {1, 1}, -0.2);
    GenSeries one_plus = GenSeries::constant(vars, 10, 1) + u;
    Rational q(3, 7);
    GenSeries lhs = log(pow(one_plus, q));
    GenSeries rhs = cplx(to_double(q)) * log1p(u);
    auto a = lhs.flatten(), b = rhs.flatten();
    ASSERT_EQ(a.size(), b.size());
    for (const auto& [k, c] : a)
        EXPECT_LT(std::abs(c - b.at(k)), 1e-13);

    std::vector<SeriesVar> xv{{"x", VarKind::Root}, {"q", VarKind::Ratio}};
    GenSeries s = GenSeries::monomial(xv, 30, 2.0, {Rational(1, 2), 0});
    GenSeries w(xv, 30);
    w.add_term(zero_key(2), {0, 0}, 1);
    w.add_term(zero_key(2), {0, 1}, 0.5);
    GenSeries ls = log(s * w);
    std::map<std::string, cplx> vals{{"x", cplx(0.3, 0.8)}, {"q", cplx(0.2, -0.1)}};
    cplx direct = std::log(2.0 * std::sqrt(vals["x"]) * (1.0 + 0.5 * vals["q"]));
    EXPECT_LT(std::abs(evaluate_series(ls, vals) - direct), 1e-12);
    bool has_log_sector = false;
    for (const auto& [k, t] : ls.sectors())
        has_log_sector = has_log_sector || k.logs[0] == 1;
    EXPECT_TRUE(has_log_sector);
}

TEST(Series, WorkedExpansionLowOrder)
{
    CoordSystem cs = example_cs();
    Expansion e = expand(cs, parse_power_product("(z2-z1)^-1"), 2);
    EXPECT_FALSE(e.negative_leading_sign);
    const GenSeries& s = e.series;
    int a = s.var_index("zeta(23)"), b = s.var_index("zeta(15)"), c = s.var_index("zeta((15)4)");
    auto at = [&](int da, int db, int dc) {
        GenSeries::FlatKey k{std::vector<Rational>(s.vars().size()), std::vector<int>(s.vars().size(), 0)};
        k.exps[0] = -1;
        k.exps[a] = da;
        k.exps[b] = db;
        k.exps[c] = dc;
        auto flat = s.flatten();
        auto it = flat.find(k);
        return it == flat.end() ? cplx(0) : it->second;
    };
    EXPECT_EQ(at(0, 0, 0), cplx(1));
    EXPECT_EQ(at(1, 0, 0), cplx(-1));
    EXPECT_EQ(at(0, 0, 1), cplx(1));
    EXPECT_EQ(at(2, 0, 0), cplx(1));
    EXPECT_EQ(at(1, 0, 1), cplx(-2));
    EXPECT_EQ(at(0, 0, 2), cplx(1));
    EXPECT_EQ(at(0, 1, 1), cplx(1));
    EXPECT_EQ(s.term_count(), 7u);
}

TEST(Series, WorkedExpansionGeometricOracle)
{
    const int N = 6;
    CoordSystem cs = example_cs();
    GenSeries s = expand(cs, parse_power_product("(z2-z1)^-1"), N).series;
    int a = s.var_index("zeta(23)"), b = s.var_index("zeta(15)"), c = s.var_index("zeta((15)4)");
    // sum_{l<=N} (-za + zc + zb zc)^l, exponents ordered (a, b, c)
    Dense u{{{1, 0, 0}, -1.0}, {{0, 0, 1}, 1.0}, {{0, 1, 1}, 1.0}};
    Dense sum{{{0, 0, 0}, 1.0}}, power{{{0, 0, 0}, 1.0}};
    for (int l = 1; l <= N; ++l) {
        power = dense_mul(power, u, N);
        for (const auto& [e, v] : power)
            sum[e] += v;
    }
    auto flat = s.flatten();
    std::size_t matched = 0;
    for (const auto& [e, v] : sum) {
        if (v == cplx(0))
            continue;
        GenSeries::FlatKey k{std::vector<Rational>(s.vars().size()), std::vector<int>(s.vars().size(), 0)};
        k.exps[0] = -1;
        k.exps[a] = e[0];
        k.exps[b] = e[1];
        k.exps[c] = e[2];
        ASSERT_TRUE(flat.count(k));
        EXPECT_LT(std::abs(flat.at(k) - v), 1e-14);
        ++matched;
    }
    EXPECT_EQ(matched, flat.size());
}

TEST(Series, TrivialExpansions)
{
    for (const char* t : {"(23)((15)4)", "1(2(34))", "(12)(34)", "12"}) {
        CoordSystem cs = a_coordinates(parse_plain_tree(t));
        PowerProduct f;
        f.pairs.push_back({{cs.root_left, cs.root_right}, 1});
        GenSeries s = expand(cs, f, 5).series;
        ASSERT_EQ(s.term_count(), 1u);
        auto flat = s.flatten();
        EXPECT_EQ(flat.begin()->first.exps[0], Rational(1));
        EXPECT_EQ(flat.begin()->second, cplx(1));
        for (int n : {0, 3, 12}) {
            GenSeries one = expand(cs, parse_power_product("(z1-z2)*(z1-z2)^(-1)"), n).series;
            ASSERT_EQ(one.term_count(), 1u);
            auto only = one.flatten();
            EXPECT_LT(std::abs(only.begin()->second - 1.0), 1e-15);
            for (const auto& e : only.begin()->first.exps)
                EXPECT_EQ(e, 0);
        }
    }
}

TEST(Series, ExpandIsHomomorphism)
{
    std::mt19937_64 rng(17);
    CoordSystem cs = a_coordinates(parse_plain_tree("(3(14))2"));
    for (int t = 0; t < 20; ++t) {
        PowerProduct f, g;
        for (int k = 0; k < 2; ++k) {
            int i = 1 + static_cast<int>(rng() % 4), j = 1 + static_cast<int>(rng() % 4);
            if (i == j)
                continue;
            Rational q(static_cast<int>(rng() % 7) - 3, 1 + static_cast<int>(rng() % 3));
            if (q != 0)
                (k ? f : g).pairs.push_back({{i, j}, q});
        }
        f.powers[1 + static_cast<int>(rng() % 4)] = 1 + static_cast<int>(rng() % 2);
        int n = 6;
        GenSeries lhs = expand(cs, f * g, n).series;
        GenSeries rhs = truncate(expand(cs, f, n).series * expand(cs, g, n).series, n);
        auto a = lhs.flatten(), b = rhs.flatten();
        ASSERT_EQ(a.size(), b.size());
        for (const auto& [k, c] : a)
            ASSERT_LT(std::abs(c - b.at(k)), 1e-12 * (1 + std::abs(c)));
    }
}

TEST(Series, EvaluateBasics)
{
    std::vector<SeriesVar> xv{{"x", VarKind::Root}};
    EXPECT_EQ(evaluate_series(GenSeries::constant(xv, 3, 1), {{"x", cplx(-4, 0)}}), cplx(1));
    GenSeries half = GenSeries::monomial(xv, 3, 1, {Rational(1, 2)});
    EXPECT_THROW(evaluate_series(half, {{"x", cplx(-1, 0)}}), std::domain_error);
    EXPECT_THROW(evaluate_series(half, {}), std::invalid_argument);
    EXPECT_LT(std::abs(evaluate_series(half, {{"x", cplx(-1, 1e-3)}}) - std::sqrt(cplx(-1, 1e-3))), 1e-15);
    GenSeries inv = GenSeries::monomial(xv, 3, 1, {Rational(-2)});
    EXPECT_EQ(evaluate_series(inv, {{"x", cplx(-2, 0)}}), cplx(0.25));
}

TEST(Series, WorkedExpansionConverges)
{
    CoordSystem cs = example_cs();
    PowerProduct f = parse_power_product("(z2-z1)^-1");
    GenSeries s = expand(cs, f, 40).series;
    std::mt19937_64 rng(23);
    for (int t = 0; t < 20; ++t) {
        auto z = point_with_margin(cs, rng, 0.5);
        cplx direct = 1.0 / (z[1] - z[0]);
        cplx got = evaluate_series(s, cs, psi(cs, z));
        EXPECT_LT(std::abs(got - direct) / std::abs(direct), 1e-8);
    }
}

TEST(Series, ConvergenceWithOrder)
{
    std::mt19937_64 rng(29);
    CoordSystem cs = a_coordinates(parse_plain_tree("1((23)4)"));
    PowerProduct f = parse_power_product("(z1-z2)^(1/3) * (z2-z4)^(-5/2) * (z3-z1)^(2/5) * z2^2");
    std::vector<GenSeries> ss;
    for (int n : {10, 20, 40})
        ss.push_back(expand(cs, f, n).series);
    for (int t = 0; t < 10; ++t) {
        auto z = point_with_margin(cs, rng, 0.5);
        BranchPlan plan;
        plan.tree = cs.tree;
        cplx direct = evaluate_closed(f, z, plan);
        std::vector<double> err;
        for (const auto& s : ss)
            err.push_back(std::abs(evaluate_series(s, cs, psi(cs, z)) - direct) / std::abs(direct));
        EXPECT_LE(err[1], 1.1 * err[0]);
        EXPECT_LE(err[2], 1.1 * err[1] + 1e-15);
        EXPECT_LT(err[2], 1e-8);
    }
}

TEST(Series, EvaluateClosed)
{
    PowerProduct sq = parse_power_product("(z1-z2)^2");
    std::vector<cplx> p{cplx(1, 2), cplx(-0.5, 0.25)};
    cplx d = p[0] - p[1];
    EXPECT_EQ(evaluate_closed(sq, p), d * d);

    PowerProduct pair = parse_power_product("(z1-z2)^(1/2) * (z3-z4)^(-1/2)");
    std::vector<cplx> q{-1, 0, -1, 0};
    EXPECT_THROW(evaluate_closed(pair, q), std::domain_error);
    BranchPlan plan;
    plan.paired.push_back({{1, 2}, {3, 4}});
    EXPECT_LT(std::abs(evaluate_closed(pair, q, plan) - cplx(-1)), 1e-15);

    std::vector<cplx> notconj{cplx(1, 1), 0, cplx(1, 1), 0};
    EXPECT_THROW(evaluate_closed(pair, notconj, plan), std::invalid_argument);
    BranchPlan bad;
    bad.paired.push_back({{1, 3}, {3, 4}});
    EXPECT_THROW(evaluate_closed(pair, q, bad), std::invalid_argument);
}

TEST(Series, PowerProductText)
{
    PowerProduct f = parse_power_product(" (z1 - z2)^(-1/2) * z3^2*(z2-z1) ");
    ASSERT_EQ(f.pairs.size(), 2u);
    EXPECT_EQ(f.pairs[0].second, Rational(-1, 2));
    EXPECT_EQ(f.powers.at(3), 2);
    EXPECT_EQ(to_string(f), "(z1-z2)^(-1/2) * (z2-z1) * z3^2");
    EXPECT_EQ(to_string(parse_power_product(to_string(f))), to_string(f));
    EXPECT_THROW(parse_power_product("(z1-z1)"), parse_error);
    EXPECT_THROW(parse_power_product("(z1-z2"), parse_error);
    EXPECT_THROW(parse_power_product("z1^(1/2)"), parse_error);
    EXPECT_THROW(parse_power_product(""), parse_error);
}

TEST(Series, JsonIsCanonical)
{
    CoordSystem cs = example_cs();
    auto j = to_json(expand(cs, parse_power_product("(z2-z1)^-1"), 2).series);
    ASSERT_EQ(j.size(), 7u);
    EXPECT_EQ(j[0]["exponents"]["x_A"], "-1");
    EXPECT_EQ(j.dump(), to_json(expand(cs, parse_power_product("(z2-z1)^-1"), 2).series).dump());
}
