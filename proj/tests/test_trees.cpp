#include "bope/trees.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>

using namespace bope;

namespace {

Tree P(const std::string& s) { return parse_plain_tree(s); }
ColoredTree C(const std::string& s) { return parse_colored_tree(s); }

// Insertion by rewriting the canonical text, one digit per label.
std::string text_compose_oracle(const std::string& a, int p, const std::string& b)
{
    int m = static_cast<int>(std::count_if(b.begin(), b.end(), ::isdigit));
    std::string shifted;
    for (char ch : b)
        shifted += std::isdigit(static_cast<unsigned char>(ch)) ? std::to_string(ch - '0' + p - 1) : std::string(1, ch);
    if (m > 1)
        shifted = "(" + shifted + ")";
    std::string out;
    for (char ch : a) {
        if (!std::isdigit(static_cast<unsigned char>(ch))) {
            out += ch;
            continue;
        }
        int v = ch - '0';
        if (v == p)
            out += shifted;
        else
            out += std::to_string(v > p ? v + m - 1 : v);
    }
    return out;
}

Tree random_tree(std::mt19937_64& rng, int r)
{
    std::vector<int> labels(r);
    std::iota(labels.begin(), labels.end(), 1);
    std::shuffle(labels.begin(), labels.end(), rng);
    std::function<Tree(int, int)> build = [&](int lo, int hi) {
        if (hi - lo == 1)
            return Tree::leaf(labels[lo]);
        std::uniform_int_distribution<int> cut(lo + 1, hi - 1);
        int c = cut(rng);
        return Tree::node(build(lo, c), build(c, hi));
    };
    return build(0, r);
}

std::vector<int> random_perm(std::mt19937_64& rng, int r)
{
    std::vector<int> g(r);
    std::iota(g.begin(), g.end(), 1);
    std::shuffle(g.begin(), g.end(), rng);
    return g;
}

} // namespace

TEST(Parse, FigureTree)
{
    Tree t = P("(5(23))((17)(64))");
    EXPECT_EQ(t.size(), 7);
    EXPECT_EQ(t.leaves(), (std::vector<int>{5, 2, 3, 1, 7, 6, 4}));
    EXPECT_EQ(t.left().leaves(), (std::vector<int>{5, 2, 3}));
    EXPECT_EQ(t.left().right(), Tree::node(Tree::leaf(2), Tree::leaf(3)));
    EXPECT_EQ(format_tree(t), "(5(23))((17)(64))");
}

TEST(Parse, SingleLeafAndEmpty)
{
    Tree t = P("1");
    EXPECT_TRUE(t.is_leaf());
    EXPECT_EQ(t.label(), 1);
    EXPECT_EQ(format_tree(t), "1");
    EXPECT_TRUE(P("").empty());
    EXPECT_EQ(format_tree(Tree{}), "");
}

TEST(Parse, WhitespaceAndRedundantRootParens)
{
    EXPECT_EQ(P(" ( 5 ( 2 3 ) ) ( (1 7) (6 4) ) "), P("(5(23))((17)(64))"));
    EXPECT_EQ(P("(12)"), P("12"));
}

TEST(Parse, ColoredFigureTree)
{
    ColoredTree e = C("(t(c2) o4)(t(c3 c1) o5)");
    EXPECT_EQ(e.closed_count(), 3);
    EXPECT_EQ(e.open_count(), 2);
    EXPECT_EQ(e.color(), Color::o);
    EXPECT_EQ(e.left().left().kind(), NodeKind::Tau);
    EXPECT_EQ(e.right().left().child().left().label(), 3);
    EXPECT_EQ(format_tree(e), "(t(c2) o4)(t(c3 c1) o5)");
    EXPECT_EQ(C("(t(c2)o4)(t(c3c1)o5)"), e);
}

TEST(Parse, LargeLabelsUseBraces)
{
    Tree t = P("({10}1)(2(3(4(5(6(7(89)))))))");
    EXPECT_EQ(t.size(), 10);
    EXPECT_EQ(format_tree(t), "({10}1)(2(3(4(5(6(7(89)))))))");
    std::string ct = "t(c10 (c1 (c2 (c3 (c4 (c5 (c6 (c7 (c8 c9))))))))) o11";
    EXPECT_EQ(format_tree(C(ct)), ct);
}

TEST(Parse, Errors)
{
    EXPECT_THROW(P("(12"), parse_error);
    EXPECT_THROW(P("123"), parse_error); // root needs parentheses for 3 leaves
    EXPECT_THROW(P("(1)2"), parse_error);
    EXPECT_THROW(P("12x"), parse_error);
    EXPECT_THROW(P("(11)"), std::invalid_argument);  // duplicate
    EXPECT_THROW(P("(13)"), std::invalid_argument);  // missing 2
    EXPECT_THROW(parse_tree("(1 c2)"), parse_error); // mixed kinds
    EXPECT_THROW(C("t(c1) o3"), std::invalid_argument);
    EXPECT_THROW(C("(t(c1) o3) o2"), std::invalid_argument); // open order
    EXPECT_THROW(C("c1 o2"), std::invalid_argument);         // closed leaf outside tau
    EXPECT_THROW(C("t(t(c1) o2)"), std::invalid_argument);
    try {
        P("(12)(3");
        FAIL();
    } catch (const parse_error& e) {
        EXPECT_EQ(e.position(), 6u);
    }
}

TEST(Parse, RoundTripRandom)
{
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> size(1, 14);
    for (int i = 0; i < 10000; ++i) {
        Tree t = random_tree(rng, size(rng));
        std::string s = format_tree(t);
        ASSERT_EQ(P(s), t) << s;
        ASSERT_EQ(format_tree(P(s)), s);
    }
}

TEST(Compose, FrozenExamples)
{
    EXPECT_EQ(format_tree(compose(P("3((12)4)"), 2, P("2(13)"))), "5((1(3(24)))6)");
    EXPECT_EQ(format_tree(compose(P("3((12)4)"), 2, Tree{})), "2(13)");
}

TEST(Compose, TextOracle)
{
    for (int r = 1; r <= 4; ++r)
        for (const auto& a : all_trees(r))
            for (int m = 1; m <= 9 - r && m <= 3; ++m)
                for (const auto& b : all_trees(m))
                    for (int p = 1; p <= r; ++p) {
                        std::string want = text_compose_oracle(format_tree(a), p, format_tree(b));
                        ASSERT_EQ(compose(a, p, b), P(want)) << format_tree(a) << " o_" << p << " " << format_tree(b);
                    }
}

TEST(Compose, Units)
{
    for (int r = 1; r <= 4; ++r)
        for (const auto& a : all_trees(r)) {
            for (int p = 1; p <= r; ++p)
                EXPECT_EQ(compose(a, p, P("1")), a);
            EXPECT_EQ(compose(P("1"), 1, a), a);
        }
}

TEST(Compose, Errors)
{
    EXPECT_THROW(compose(P("12"), 3, P("1")), std::out_of_range);
    EXPECT_THROW(compose(P("12"), 0, P("1")), std::out_of_range);
    EXPECT_THROW(compose(Tree{}, 1, P("1")), std::invalid_argument);
}

TEST(Operad, CountsAndShapes)
{
    EXPECT_EQ(all_trees(3).size(), 12u);
    auto shapes = tree_shapes(4);
    std::set<std::string> got;
    for (const auto& s : shapes)
        got.insert(format_tree(s));
    EXPECT_EQ(got, (std::set<std::string>{"(12)(34)", "1(2(34))", "1((23)4)", "(1(23))4", "((12)3)4"}));
}

TEST(Operad, AssociativityExhaustiveT3)
{
    std::vector<Tree> small{Tree{}};
    for (int m = 1; m <= 3; ++m)
        for (const auto& t : all_trees(m))
            small.push_back(t);
    for (const auto& a : all_trees(3))
        for (const auto& b : small)
            for (const auto& c : small)
                for (int p = 1; p <= 3; ++p) {
                    for (int q = 1; q <= b.size(); ++q)
                        ASSERT_EQ(compose(compose(a, p, b), p - 1 + q, c), compose(a, p, compose(b, q, c)));
                    for (int p2 = p + 1; p2 <= 3; ++p2)
                        ASSERT_EQ(compose(compose(a, p, b), p2 + b.size() - 1, c), compose(compose(a, p2, c), p, b));
                }
}

TEST(Operad, PermuteExamplesAndAction)
{
    EXPECT_EQ(permute(P("1(23)"), {1, 2, 3}), P("1(23)"));
    EXPECT_EQ(permute(P("1(23)"), {2, 1, 3}), P("2(13)"));
    EXPECT_THROW(permute(P("1(23)"), {1, 2}), std::invalid_argument);
    EXPECT_THROW(permute(P("1(23)"), {1, 1, 3}), std::invalid_argument);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 300; ++i) {
        int r = 1 + static_cast<int>(rng() % 7);
        Tree a = random_tree(rng, r);
        auto g = random_perm(rng, r);
        auto h = random_perm(rng, r);
        std::vector<int> hg(r);
        for (int k = 0; k < r; ++k)
            hg[k] = h[g[k] - 1];
        ASSERT_EQ(permute(permute(a, g), h), permute(a, hg));
    }
}

TEST(Operad, EquivarianceRandom)
{
    std::mt19937_64 rng(11);
    for (int i = 0; i < 500; ++i) {
        int r = 1 + static_cast<int>(rng() % 6);
        int m = static_cast<int>(rng() % 5);
        Tree a = random_tree(rng, r);
        Tree b = m ? random_tree(rng, m) : Tree{};
        int p = 1 + static_cast<int>(rng() % r);
        auto g = random_perm(rng, r);
        Tree lhs = compose(permute(a, g), g[p - 1], b);
        Tree base = compose(a, p, b);
        if (base.empty()) {
            ASSERT_TRUE(lhs.empty());
            continue;
        }
        ASSERT_EQ(lhs, permute(base, block_permutation(g, p, m)));
    }
}

TEST(Operad, RandomAssociativity)
{
    std::mt19937_64 rng(5);
    for (int i = 0; i < 500; ++i) {
        int r = 1 + static_cast<int>(rng() % 6);
        int m = static_cast<int>(rng() % 4);
        int k = static_cast<int>(rng() % 4);
        Tree a = random_tree(rng, r);
        Tree b = m ? random_tree(rng, m) : Tree{};
        Tree c = k ? random_tree(rng, k) : Tree{};
        int p = 1 + static_cast<int>(rng() % r);
        if (m > 0) {
            int q = 1 + static_cast<int>(rng() % m);
            ASSERT_EQ(compose(compose(a, p, b), p - 1 + q, c), compose(a, p, compose(b, q, c)));
        }
        if (p < r) {
            int p2 = p + 1 + static_cast<int>(rng() % (r - p));
            ASSERT_EQ(compose(compose(a, p, b), p2 + m - 1, c), compose(compose(a, p2, c), p, b));
        }
    }
}

TEST(Meta, FigureTreeCoordinates)
{
    TreeMeta m = tree_meta(P("(23)((15)4)"));
    ASSERT_EQ(m.vertices.size(), 4u);
    ASSERT_EQ(m.edges.size(), 3u);
    EXPECT_EQ(m.rightmost, 4);
    EXPECT_EQ(m.vertices[m.root].L, 3);
    EXPECT_EQ(m.vertices[m.root].R, 4);
    std::map<std::string, std::pair<int, int>> lr;
    for (const auto& v : m.vertices)
        lr[format_tree(v.subtree)] = {v.L, v.R};
    EXPECT_EQ(lr["23"], std::make_pair(2, 3));
    EXPECT_EQ(lr["(15)4"], std::make_pair(5, 4));
    EXPECT_EQ(lr["15"], std::make_pair(1, 5));
}

TEST(Meta, VertexAndEdgeCounts)
{
    std::mt19937_64 rng(1);
    for (int i = 0; i < 200; ++i) {
        int r = 2 + static_cast<int>(rng() % 8);
        Tree t = random_tree(rng, r);
        TreeMeta m = tree_meta(t);
        ASSERT_EQ(static_cast<int>(m.vertices.size()), r - 1);
        ASSERT_EQ(static_cast<int>(m.edges.size()), r - 2);
        ASSERT_EQ(m.rightmost, m.vertices[m.root].R);
        ASSERT_EQ(m.rightmost, t.leaves().back());
    }
}

TEST(Colored, ComposeExamples)
{
    ColoredTree e = C("t(c1) o2");
    EXPECT_EQ(compose_colored(e, {NodeKind::Open, 2}, C("o1")), e);
    ColoredTree got = compose_colored(e, {NodeKind::Closed, 1}, C("c2 c1"));
    EXPECT_EQ(format_tree(got), "t(c2 c1) o3");
    EXPECT_EQ(got.closed_count(), 2);
    EXPECT_EQ(got.open_count(), 1);
    EXPECT_EQ(compose_colored(C("c1 c2"), {NodeKind::Closed, 2}, C("c2 c1")), C("c1 (c3 c2)"));
}

TEST(Colored, ComposeOpenOpen)
{
    // t(c1) o2 at o2 with t(c1) o2: closed labels of the insert follow, opens renumber left to right
    ColoredTree got = compose_colored(C("t(c1) o2"), {NodeKind::Open, 2}, C("o2 t(c1)"));
    EXPECT_EQ(format_tree(got), "t(c1)(o3 t(c2))");
    ColoredTree got2 = compose_colored(C("(o1 o2) o3"), {NodeKind::Open, 2}, C("t(c1) o2"));
    EXPECT_EQ(got2.closed_count(), 1);
    EXPECT_EQ(format_tree(got2), "(o2 (t(c1) o3)) o4");
}

TEST(Colored, ComposeErrors)
{
    ColoredTree e = C("t(c1) o2");
    EXPECT_THROW(compose_colored(e, {NodeKind::Open, 2}, C("c1")), std::invalid_argument);
    EXPECT_THROW(compose_colored(e, {NodeKind::Closed, 1}, C("o1")), std::invalid_argument);
    EXPECT_THROW(compose_colored(e, {NodeKind::Open, 3}, C("o1")), std::invalid_argument);
    EXPECT_THROW(compose_colored(e, {NodeKind::Closed, 2}, C("c1")), std::invalid_argument);
}

TEST(Colored, ComposeFigureShape)
{
    // inserting t(c1 c2) o3 at an open slot keeps colors and counts
    ColoredTree e = C("(t(c2) o4)(t(c3 c1) o5)");
    ColoredTree x = C("t(c1 c2) o3");
    ColoredTree got = compose_colored(e, {NodeKind::Open, 4}, x);
    EXPECT_EQ(got.closed_count(), 5);
    EXPECT_EQ(got.open_count(), 2);
    EXPECT_NO_THROW(validate(got));
    EXPECT_EQ(format_tree(got), "(t(c2)(t(c4 c5) o6))(t(c3 c1) o7)");
}

TEST(Doubling, Examples)
{
    EXPECT_EQ(doubling(C("t(c1)")), P("12"));
    EXPECT_EQ(format_tree(doubling(C("t(c1) o2"))), "(12)3");
    // bold n on the left copy, its bar on the right copy
    EXPECT_EQ(format_tree(doubling(C("(t(c2) o4)(t(c3 c1) o5)"))), "((34)7)(((51)(62))8)");
    EXPECT_THROW(doubling(C("c1 c2")), std::invalid_argument);
}

TEST(Doubling, InjectiveSmall)
{
    for (int n = 1; n <= 5; ++n)
        for (int r = 0; r <= n; ++r) {
            std::set<Tree> seen;
            auto all = all_open_trees(r, n - r);
            for (const auto& e : all) {
                ASSERT_NO_THROW(validate(e));
                ASSERT_TRUE(seen.insert(doubling(e)).second) << format_tree(e);
            }
            ASSERT_EQ(seen.size(), all.size());
        }
}

TEST(Doubling, EnumerationCounts)
{
    // hand counts: T^o(0,2) = {o1 o2}; T^o(1,1) = {t(c1) o2, o2 t(c1)};
    // T^o(2,0) = {t(c1 c2), t(c2 c1), t(c1) t(c2), t(c2) t(c1)}
    EXPECT_EQ(all_open_trees(0, 2).size(), 1u);
    EXPECT_EQ(all_open_trees(1, 1).size(), 2u);
    EXPECT_EQ(all_open_trees(2, 0).size(), 4u);
    EXPECT_EQ(all_open_trees(1, 0).size(), 1u);
}
