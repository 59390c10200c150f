#include "bope/braids.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace bope {

void validate(const BraidWord& w)
{
    if (w.n < 0)
        throw std::invalid_argument("negative strand count");
    for (int l : w.letters)
        if (l == 0 || std::abs(l) >= w.n)
            throw std::invalid_argument("generator s" + std::to_string(std::abs(l)) + " out of range for " +
                                        std::to_string(w.n) + " strands");
}

BraidWord identity_word(int n) { return {n, {}}; }

BraidWord concat(const BraidWord& a, const BraidWord& b)
{
    if (a.n != b.n)
        throw std::invalid_argument("braid words on different strand counts");
    BraidWord out = a;
    out.letters.insert(out.letters.end(), b.letters.begin(), b.letters.end());
    return out;
}

BraidWord free_reduce(const BraidWord& w)
{
    BraidWord out{w.n, {}};
    for (int l : w.letters) {
        if (!out.letters.empty() && out.letters.back() == -l)
            out.letters.pop_back();
        else
            out.letters.push_back(l);
    }
    return out;
}

BraidWord parse_word(const std::string& text, int n)
{
    BraidWord w{n, {}};
    std::istringstream in(text);
    std::string tok;
    std::size_t pos = 0;
    while (in >> tok) {
        pos = text.find(tok, pos);
        if (tok == "e")
            continue;
        if (tok.size() < 2 || tok[0] != 's')
            throw parse_error("expected s<i> or s<i>^-1", pos);
        std::size_t i = 1;
        while (i < tok.size() && std::isdigit(static_cast<unsigned char>(tok[i])))
            ++i;
        if (i == 1)
            throw parse_error("missing generator index", pos + 1);
        int g = std::stoi(tok.substr(1, i - 1));
        int sign = 1;
        if (i < tok.size()) {
            if (tok.substr(i) != "^-1")
                throw parse_error("unexpected '" + tok.substr(i) + "'", pos + i);
            sign = -1;
        }
        if (g < 1 || g >= n)
            throw parse_error("generator s" + std::to_string(g) + " out of range for " + std::to_string(n) +
                                  " strands",
                              pos);
        w.letters.push_back(sign * g);
        pos += tok.size();
    }
    return w;
}

std::string format_word(const BraidWord& w)
{
    if (w.letters.empty())
        return "e";
    std::string out;
    for (int l : w.letters) {
        if (!out.empty())
            out += ' ';
        out += "s" + std::to_string(std::abs(l));
        if (l < 0)
            out += "^-1";
    }
    return out;
}

std::vector<int> braid_permutation(const BraidWord& w)
{
    // at[q] = starting position of the strand now at position q
    std::vector<int> at(w.n);
    for (int k = 0; k < w.n; ++k)
        at[k] = k + 1;
    for (int l : w.letters) {
        int i = std::abs(l);
        std::swap(at[i - 1], at[i]);
    }
    std::vector<int> perm(w.n);
    for (int q = 0; q < w.n; ++q)
        perm[at[q] - 1] = q + 1;
    return perm;
}

bool is_pure(const BraidWord& w)
{
    auto p = braid_permutation(w);
    for (int k = 0; k < w.n; ++k)
        if (p[k] != k + 1)
            return false;
    return true;
}

BraidWord mirror(const BraidWord& w)
{
    BraidWord out = w;
    for (int& l : out.letters)
        l = -l;
    return out;
}

std::map<std::pair<int, int>, int> crossing_counts(const BraidWord& w)
{
    std::map<std::pair<int, int>, int> out;
    std::vector<int> at(w.n);
    for (int k = 0; k < w.n; ++k)
        at[k] = k + 1;
    for (int l : w.letters) {
        int i = std::abs(l);
        int a = at[i - 1], b = at[i];
        out[{std::min(a, b), std::max(a, b)}] += l > 0 ? 1 : -1;
        std::swap(at[i - 1], at[i]);
    }
    for (auto it = out.begin(); it != out.end();)
        it = it->second == 0 ? out.erase(it) : std::next(it);
    return out;
}

void cable_compose_into(const BraidWord& g, int p, const BraidWord& h, BraidWord& out)
{
    if (p < 1 || p > g.n)
        throw std::out_of_range("cable position " + std::to_string(p) + " outside 1.." + std::to_string(g.n));
    int m = h.n;
    out.n = g.n + m - 1;
    out.letters.clear();
    int cur = p;
    for (int l : g.letters) {
        int i = l > 0 ? l : -l;
        int sign = l > 0 ? 1 : -1;
        if (i == cur) {
            // thin strand at cur+1 passes the whole block
            for (int k = cur + m - 1; k >= cur; --k)
                out.letters.push_back(sign * k);
            ++cur;
        } else if (i == cur - 1) {
            for (int k = cur - 1; k <= cur + m - 2; ++k)
                out.letters.push_back(sign * k);
            --cur;
        } else {
            int j = i > cur ? i + m - 1 : i;
            out.letters.push_back(sign * j);
        }
    }
    for (int l : h.letters)
        out.letters.push_back(l > 0 ? l + cur - 1 : l - (cur - 1));
}

BraidWord cable_compose(const BraidWord& g, int p, const BraidWord& h)
{
    BraidWord out;
    cable_compose_into(g, p, h, out);
    return out;
}

std::vector<int> block_substituted_permutation(const std::vector<int>& pg, int p, const std::vector<int>& ph)
{
    int n = static_cast<int>(pg.size());
    int m = static_cast<int>(ph.size());
    if (p < 1 || p > n)
        throw std::out_of_range("block position out of range");
    int wide_end = pg[p - 1];
    std::vector<int> out(n + m - 1);
    for (int k = 1; k <= n; ++k) {
        if (k == p)
            continue;
        int start = k < p ? k : k + m - 1;
        int end = pg[k - 1] < wide_end ? pg[k - 1] : pg[k - 1] + m - 1;
        out[start - 1] = end;
    }
    for (int j = 1; j <= m; ++j)
        out[p + j - 2] = wide_end + ph[j - 1] - 1;
    return out;
}

namespace {

template <class Label>
void check_carries(const std::vector<Label>& from, const std::vector<Label>& to, const BraidWord& w)
{
    if (static_cast<int>(from.size()) != w.n || static_cast<int>(to.size()) != w.n)
        throw std::invalid_argument("strand count does not match the trees");
    auto perm = braid_permutation(w);
    for (int k = 0; k < w.n; ++k)
        if (!(to[perm[k] - 1] == from[k]))
            throw std::invalid_argument("braid permutation does not carry the source leaf order to the target");
}

} // namespace

PaBMorphism pab_morphism(const Tree& a, const Tree& b, const BraidWord& w)
{
    validate(a);
    validate(b);
    validate(w);
    if (a.size() != b.size())
        throw std::invalid_argument("source and target have different sizes");
    check_carries(a.leaves(), b.leaves(), w);
    return {a, b, w};
}

PaBMorphism pab_compose(const PaBMorphism& g, int p, const PaBMorphism& h)
{
    auto leaves = g.source.leaves();
    auto it = std::find(leaves.begin(), leaves.end(), p);
    if (it == leaves.end())
        throw std::out_of_range("no leaf " + std::to_string(p) + " in the source tree");
    int pos = static_cast<int>(it - leaves.begin()) + 1;
    return pab_morphism(compose(g.source, p, h.source), compose(g.target, p, h.target),
                        cable_compose(g.word, pos, h.word));
}

std::vector<StrandColor> strand_coloring(int r, int s)
{
    std::vector<StrandColor> out;
    for (int k = 1; k <= r; ++k) {
        out.push_back({StrandKind::Z, k});
        out.push_back({StrandKind::Zbar, k});
    }
    for (int j = 1; j <= s; ++j)
        out.push_back({StrandKind::X, r + j});
    return out;
}

PaPBMorphism papb_morphism(const ColoredTree& e, const ColoredTree& e2, const BraidWord& w)
{
    validate(e);
    validate(e2);
    validate(w);
    if (e.color() != Color::o || e2.color() != Color::o)
        throw std::invalid_argument("PaPB morphisms join open-colored trees");
    if (e.closed_count() != e2.closed_count() || e.open_count() != e2.open_count())
        throw std::invalid_argument("source and target have different leaf counts");
    check_carries(doubling(e).leaves(), doubling(e2).leaves(), w);
    return {e, e2, w, strand_coloring(e.closed_count(), e.open_count())};
}

std::vector<std::string> papb_generator_names() { return {"alpha_o", "alpha_c", "sigma", "p", "q"}; }

PaPBMorphism papb_generator(const std::string& name)
{
    auto C = parse_colored_tree;
    if (name == "alpha_o")
        return papb_morphism(C("(o1 o2) o3"), C("o1 (o2 o3)"), identity_word(3));
    if (name == "alpha_c")
        return papb_morphism(C("t((c1 c2) c3)"), C("t(c1 (c2 c3))"), identity_word(6));
    if (name == "sigma")
        return papb_morphism(C("t(c1 c2)"), C("t(c2 c1)"), parse_word("s1 s3^-1", 4));
    if (name == "p")
        return papb_morphism(C("t(c1) o2"), C("o2 t(c1)"), parse_word("s2^-1 s1", 3));
    if (name == "q")
        return papb_morphism(C("t(c1 c2)"), C("t(c1) t(c2)"), parse_word("s2", 4));
    throw std::invalid_argument("unknown generator '" + name + "'");
}

namespace {

int doubled_position(const ColoredTree& e, int label)
{
    auto leaves = doubling(e).leaves();
    auto it = std::find(leaves.begin(), leaves.end(), label);
    if (it == leaves.end())
        throw std::out_of_range("no doubled leaf " + std::to_string(label));
    return static_cast<int>(it - leaves.begin()) + 1;
}

void check_slot(const ColoredTree& e, LeafRef slot)
{
    for (const auto& l : e.leaves())
        if (l.kind == slot.kind && l.label == slot.label)
            return;
    throw std::invalid_argument("slot is not a leaf of the source tree");
}

} // namespace

PaPBMorphism papb_compose(const PaPBMorphism& mu, LeafRef slot, const PaBMorphism& gamma)
{
    if (slot.kind != NodeKind::Closed)
        throw std::invalid_argument("a closed morphism goes into a closed slot");
    check_slot(mu.source, slot);
    int r = mu.source.closed_count();
    int zp = doubled_position(mu.source, doubled_label(r, slot, false));
    int zb = doubled_position(mu.source, doubled_label(r, slot, true));
    int t = gamma.word.n;
    BraidWord w = cable_compose(mu.word, zp, gamma.word);
    if (zb > zp)
        zb += t - 1;
    w = cable_compose(w, zb, mirror(gamma.word));
    return papb_morphism(compose_colored(mu.source, slot, as_colored(gamma.source)),
                         compose_colored(mu.target, slot, as_colored(gamma.target)), w);
}

PaPBMorphism papb_compose(const PaPBMorphism& mu, LeafRef slot, const PaPBMorphism& nu)
{
    if (slot.kind != NodeKind::Open)
        throw std::invalid_argument("an open morphism goes into an open slot");
    check_slot(mu.source, slot);
    int r = mu.source.closed_count();
    int xp = doubled_position(mu.source, doubled_label(r, slot));
    return papb_morphism(compose_colored(mu.source, slot, nu.source), compose_colored(mu.target, slot, nu.target),
                         cable_compose(mu.word, xp, nu.word));
}

bool conjugation_symmetric(const PaPBMorphism& mu)
{
    int r = mu.source.closed_count();
    auto swap_bar = [&](std::vector<int> ls) {
        for (int& l : ls)
            if (l <= 2 * r)
                l = l % 2 ? l + 1 : l - 1;
        return ls;
    };
    try {
        check_carries(swap_bar(doubling(mu.source).leaves()), swap_bar(doubling(mu.target).leaves()),
                      mirror(mu.word));
    } catch (const std::invalid_argument&) {
        return false;
    }
    return true;
}

} // namespace bope
