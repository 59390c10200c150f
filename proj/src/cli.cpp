#include "bope/cli.hpp"

#include "bope/braids.hpp"
#include "bope/latticecft.hpp"
#include "bope/series.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <random>
#include <regex>
#include <sstream>
#include <stdexcept>

namespace bope {

using nlohmann::json;

namespace {

std::string fmt_double(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void dump_into(const json& j, std::string& s, int indent, int level)
{
    auto newline = [&](int lv) {
        if (indent >= 0) {
            s += '\n';
            s.append(static_cast<std::size_t>(indent * lv), ' ');
        }
    };
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) {
            s += "{}";
            return;
        }
        s += '{';
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first)
                s += ',';
            first = false;
            newline(level + 1);
            s += json(it.key()).dump();
            s += indent >= 0 ? ": " : ":";
            dump_into(it.value(), s, indent, level + 1);
        }
        newline(level);
        s += '}';
        return;
    }
    case json::value_t::array: {
        if (j.empty()) {
            s += "[]";
            return;
        }
        s += '[';
        bool first = true;
        for (const auto& e : j) {
            if (!first)
                s += ',';
            first = false;
            newline(level + 1);
            dump_into(e, s, indent, level + 1);
        }
        newline(level);
        s += ']';
        return;
    }
    case json::value_t::number_float: {
        double x = j.get<double>();
        s += std::isfinite(x) ? fmt_double(x) : "null";
        return;
    }
    default:
        s += j.dump();
    }
}

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

std::string monomial_string(const Monomial& m, const std::vector<std::string>& names)
{
    std::string out;
    for (std::size_t e = 0; e < m.size(); ++e) {
        if (m[e] == 0)
            continue;
        if (!out.empty())
            out += '*';
        out += names[e];
        if (m[e] != 1)
            out += '^' + std::to_string(m[e]);
    }
    return out;
}

std::string poly_string(const IntPoly& p, const std::vector<std::string>& names)
{
    if (p.is_zero())
        return "0";
    std::string out;
    for (const auto& [m, c] : p.terms) {
        std::string mono = monomial_string(m, names);
        long long a = c < 0 ? -c : c;
        if (out.empty())
            out += c < 0 ? "-" : "";
        else
            out += c < 0 ? " - " : " + ";
        if (mono.empty())
            out += std::to_string(a);
        else
            out += (a == 1 ? "" : std::to_string(a) + "*") + mono;
    }
    return out;
}

json poly_json(const IntPoly& p, const std::vector<std::string>& names)
{
    json terms = json::array();
    for (const auto& [m, c] : p.terms) {
        json mono = json::object();
        for (std::size_t e = 0; e < m.size(); ++e)
            if (m[e] != 0)
                mono[names[e]] = m[e];
        terms.push_back({{"coef", c}, {"monomial", mono}});
    }
    return terms;
}

std::string diff(int i, int j) { return "z" + std::to_string(i) + "-z" + std::to_string(j); }

std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        if (ch == ',' || std::isspace(static_cast<unsigned char>(ch))) {
            if (!cur.empty())
                out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty())
        out.push_back(cur);
    return out;
}

int parse_int(const std::string& s, const std::string& what)
{
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(s, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("expected an integer " + what + ", got '" + s + "'");
    }
    if (used != s.size())
        throw std::invalid_argument("expected an integer " + what + ", got '" + s + "'");
    return v;
}

// "c2" or "o3"
LeafRef parse_slot(const std::string& s)
{
    if (s.size() < 2 || (s[0] != 'c' && s[0] != 'o'))
        throw std::invalid_argument("expected a colored slot c<k> or o<k>, got '" + s + "'");
    return {s[0] == 'c' ? NodeKind::Closed : NodeKind::Open, parse_int(s.substr(1), "slot label")};
}

// word with strands inferred from the largest generator when n <= 0
BraidWord read_word(const std::string& text, int n)
{
    if (n <= 0) {
        int top = 0;
        std::regex gen("s([0-9]+)");
        for (auto it = std::sregex_iterator(text.begin(), text.end(), gen); it != std::sregex_iterator(); ++it)
            top = std::max(top, std::stoi((*it)[1].str()));
        n = top + 1;
    }
    return parse_word(text, n);
}

json word_json(const BraidWord& w)
{
    return {{"strands", w.n}, {"word", format_word(w)}, {"permutation", braid_permutation(w)}, {"pure", is_pure(w)}};
}

std::string join(const std::vector<int>& v)
{
    std::string out;
    for (int x : v)
        out += (out.empty() ? "" : " ") + std::to_string(x);
    return out;
}

struct Options {
    std::string format;
    std::string out_path;
    std::string config_path;
    std::optional<int> N;
    std::optional<double> tol;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> point;
    int strands = 0;
    int inner = 0;
    bool timing = false;
};

struct Output {
    std::string text;
    int code = exit_pass;
};

bool want_json(const Options& o, bool json_default)
{
    if (o.format.empty())
        return json_default;
    if (o.format == "json")
        return true;
    if (o.format == "text")
        return false;
    throw std::invalid_argument("unknown format '" + o.format + "'");
}

void need(const std::vector<std::string>& args, std::size_t k, const std::string& usage)
{
    if (args.size() != k)
        throw std::invalid_argument("usage: " + usage);
}

Output cmd_tree(const std::string& action, const std::vector<std::string>& args, const Options& o)
{
    bool as_json = want_json(o, false);
    AnyTree result;
    if (action == "parse") {
        need(args, 1, "tree parse <tree>");
        result = parse_tree(args[0]);
    } else if (action == "compose") {
        need(args, 3, "tree compose <tree> <slot> <tree>");
        AnyTree a = parse_tree(args[0]);
        const auto& slot = args[1];
        if (auto* p = std::get_if<Tree>(&a); p && !slot.empty() && std::isdigit(static_cast<unsigned char>(slot[0]))) {
            result = compose(*p, parse_int(slot, "slot"), parse_plain_tree(args[2]));
        } else {
            ColoredTree e = std::holds_alternative<Tree>(a) ? as_colored(std::get<Tree>(a)) : std::get<ColoredTree>(a);
            if (args[2].empty())
                throw std::invalid_argument("colored composition needs a non-empty tree");
            AnyTree b = parse_tree(args[2]);
            ColoredTree x = std::holds_alternative<Tree>(b) ? as_colored(std::get<Tree>(b)) : std::get<ColoredTree>(b);
            result = compose_colored(e, parse_slot(slot), x);
        }
    } else if (action == "permute") {
        need(args, 2, "tree permute <tree> <g1,g2,...>");
        Tree a = parse_plain_tree(args[0]);
        std::vector<int> g;
        for (const auto& s : split_list(args[1]))
            g.push_back(parse_int(s, "permutation entry"));
        result = permute(a, g);
    } else if (action == "double") {
        need(args, 1, "tree double <colored tree>");
        result = doubling(parse_colored_tree(args[0]));
    } else {
        throw std::invalid_argument("unknown tree action '" + action + "'");
    }
    std::string text = format_tree(result);
    if (!as_json)
        return {text + "\n"};
    json j{{"tree", text}};
    if (auto* t = std::get_if<Tree>(&result)) {
        j["kind"] = "plain";
        j["leaves"] = t->size();
    } else {
        const auto& c = std::get<ColoredTree>(result);
        j["kind"] = "colored";
        j["closed"] = c.closed_count();
        j["open"] = c.open_count();
        j["color"] = c.color() == Color::c ? "c" : "o";
    }
    return {dump_json(j) + "\n"};
}

Output cmd_coords(const std::vector<std::string>& args, const Options& o)
{
    need(args, 1, "coords <tree> [--point z1,z2,...]");
    bool as_json = want_json(o, true);
    Tree a = parse_plain_tree(args[0]);
    validate(a);
    CoordSystem cs = a_coordinates(a);
    const auto& vs = cs.meta.vertices;
    json j;
    j["tree"] = format_tree(a);
    j["z_A"] = "z" + std::to_string(cs.root_right);
    j["x_A"] = cs.r > 1 ? diff(cs.root_left, cs.root_right) : "";
    json zeta = json::array();
    for (int k = 0; k < cs.edge_count(); ++k) {
        const Vertex& d = vs[cs.meta.edges[k]];
        const Vertex& u = vs[d.parent];
        zeta.push_back({{"name", cs.edge_names[k]},
                        {"formula", "(" + diff(d.L, d.R) + ")/(" + diff(u.L, u.R) + ")"}});
    }
    j["zeta"] = zeta;
    json q = json::object();
    for (int i = 1; i <= cs.r; ++i)
        q["z" + std::to_string(i)] = poly_json(cs.Q[i - 1], cs.edge_names);
    j["Q"] = q;

    std::ostringstream text;
    text << "tree " << j["tree"].get<std::string>() << "\n";
    text << z_name << " = " << j["z_A"].get<std::string>() << "\n";
    text << x_name << " = " << j["x_A"].get<std::string>() << "\n";
    for (const auto& e : zeta)
        text << e["name"].get<std::string>() << " = " << e["formula"].get<std::string>() << "\n";
    for (int i = 1; i <= cs.r; ++i)
        text << "z" << i << " = z_A + x_A*(" << poly_string(cs.Q[i - 1], cs.edge_names) << ")\n";

    if (o.point) {
        auto pt = parse_point(*o.point);
        if (static_cast<int>(pt.size()) != cs.r)
            throw std::invalid_argument("point has " + std::to_string(pt.size()) + " entries, tree has " +
                                        std::to_string(cs.r) + " leaves");
        CoordValues v = psi(cs, pt);
        auto back = psi_inverse(cs, v);
        double rt = 0;
        for (int i = 0; i < cs.r; ++i)
            rt = std::max(rt, std::abs(back[i] - pt[i]));
        json vals = json::object();
        vals[z_name] = cjson(v.z);
        vals[x_name] = cjson(v.x);
        for (int k = 0; k < cs.edge_count(); ++k)
            vals[cs.edge_names[k]] = cjson(v.zeta[k]);
        Membership m = region_membership(cs, pt);
        json pj = json::array();
        for (auto z : pt)
            pj.push_back(cjson(z));
        j["point"] = pj;
        j["values"] = vals;
        j["roundtrip_error"] = rt;
        j["region"] = {{"in_Ubar", m.in_Ubar}, {"in_U", m.in_U}, {"margin", m.margin}};
        for (const auto& [name, z] : v.named(cs))
            text << name << " at point = " << fmt_double(z.real()) << (z.imag() < 0 ? " - " : " + ")
                 << fmt_double(std::abs(z.imag())) << "i\n";
        text << "region " << (m.in_U ? "U" : m.in_Ubar ? "Ubar" : "outside") << " margin " << fmt_double(m.margin)
             << "\n";
    }
    return {as_json ? dump_json(j) + "\n" : text.str()};
}

Output cmd_expand(const std::vector<std::string>& args, const Options& o)
{
    need(args, 2, "expand <tree> <function> [--N n]");
    bool as_json = want_json(o, true);
    Tree a = parse_plain_tree(args[0]);
    PowerProduct f = parse_power_product(args[1]);
    int N = o.N.value_or(6);
    if (N < 0)
        throw std::invalid_argument("truncation order must be nonnegative");
    Expansion ex = expand(a, f, N);
    json vars = json::array();
    for (const auto& v : ex.series.vars())
        vars.push_back(v.name);
    json j{{"tree", format_tree(a)},
           {"function", to_string(f)},
           {"N", N},
           {"variables", vars},
           {"negative_leading_sign", ex.negative_leading_sign},
           {"terms", to_json(ex.series)}};
    if (as_json)
        return {dump_json(j) + "\n"};
    std::ostringstream text;
    for (const auto& t : j["terms"]) {
        text << "(" << fmt_double(t["re"].get<double>()) << (t["im"].get<double>() < 0 ? " - " : " + ")
             << fmt_double(std::abs(t["im"].get<double>())) << "i)";
        for (const auto& [name, e] : t["exponents"].items())
            text << " " << name << "^" << e.get<std::string>();
        for (const auto& [name, k] : t["logs"].items())
            text << " Log(" << name << ")^" << k.get<int>();
        text << "\n";
    }
    return {text.str()};
}

Output cmd_braid(const std::string& action, const std::vector<std::string>& args, const Options& o)
{
    bool as_json = want_json(o, false);
    json j;
    std::string text;
    if (action == "perm") {
        need(args, 1, "braid perm <word> [--strands n]");
        BraidWord w = read_word(args[0], o.strands);
        j = word_json(w);
        text = join(braid_permutation(w));
    } else if (action == "mirror") {
        need(args, 1, "braid mirror <word> [--strands n]");
        BraidWord w = mirror(read_word(args[0], o.strands));
        j = word_json(w);
        text = format_word(w);
    } else if (action == "cable") {
        need(args, 3, "braid cable <word> <position> <word> [--strands n] [--inner m]");
        BraidWord g = read_word(args[0], o.strands);
        int p = parse_int(args[1], "position");
        BraidWord h = read_word(args[2], o.inner);
        BraidWord w = cable_compose(g, p, h);
        j = word_json(w);
        text = format_word(w);
    } else if (action == "generator") {
        need(args, 1, "braid generator <alpha_o|alpha_c|sigma|p|q>");
        PaPBMorphism mu = papb_generator(args[0]);
        json colors = json::array();
        for (const auto& c : mu.coloring) {
            std::string k = c.kind == StrandKind::Z ? "z" : c.kind == StrandKind::Zbar ? "zbar" : "x";
            colors.push_back(k + std::to_string(c.label));
        }
        j = word_json(mu.word);
        j["name"] = args[0];
        j["source"] = format_tree(mu.source);
        j["target"] = format_tree(mu.target);
        j["doubled_source"] = format_tree(doubling(mu.source));
        j["doubled_target"] = format_tree(doubling(mu.target));
        j["coloring"] = colors;
        text = format_tree(mu.source) + " -> " + format_tree(mu.target) + " : " + format_word(mu.word);
    } else {
        throw std::invalid_argument("unknown braid action '" + action + "'");
    }
    return {as_json ? dump_json(j) + "\n" : text + "\n"};
}

struct ModelConfig {
    Rational R2{2};
    int rho = 1;
    std::optional<std::vector<LatticeVector>> charges;
    int N = 30;
    double tol = 1e-6;
    std::uint64_t seed = 1;
    json raw = json::object();
};

Rational json_rational(const json& v)
{
    if (v.is_string())
        return parse_rational(v.get<std::string>());
    if (v.is_number_integer())
        return Rational(v.get<long long>());
    throw std::invalid_argument("R_squared must be a string \"p/q\" or an integer");
}

int json_rho(const json& v)
{
    int r = 0;
    if (v.is_string()) {
        auto s = v.get<std::string>();
        r = s == "+1" || s == "1" ? 1 : s == "-1" ? -1 : 0;
    } else if (v.is_number_integer()) {
        r = v.get<int>();
    }
    if (r != 1 && r != -1)
        throw std::invalid_argument("reflection must be \"+1\" or \"-1\"");
    return r;
}

ModelConfig load_config(const Options& o)
{
    ModelConfig c;
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        if (!in)
            throw std::invalid_argument("cannot read config '" + o.config_path + "'");
        try {
            c.raw = json::parse(in);
        } catch (const json::exception& e) {
            throw std::invalid_argument("config is not valid JSON: " + std::string(e.what()));
        }
        if (!c.raw.is_object())
            throw std::invalid_argument("config must be a JSON object");
    }
    const json& r = c.raw;
    try {
        if (r.contains("R_squared"))
            c.R2 = json_rational(r["R_squared"]);
        if (r.contains("reflection"))
            c.rho = json_rho(r["reflection"]);
        if (r.contains("charges")) {
            std::vector<LatticeVector> ch;
            for (const auto& p : r["charges"]) {
                if (!p.is_array() || p.size() != 2)
                    throw std::invalid_argument("charges must be [n, m] pairs");
                ch.push_back({p[0].get<long>(), p[1].get<long>()});
            }
            c.charges = ch;
        }
        if (r.contains("truncation"))
            c.N = r["truncation"].get<int>();
        if (r.contains("tolerance"))
            c.tol = r["tolerance"].get<double>();
        if (r.contains("seed"))
            c.seed = r["seed"].get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw std::invalid_argument("bad config field: " + std::string(e.what()));
    }
    if (c.R2 <= 0)
        throw std::invalid_argument("R_squared must be positive");
    if (o.N)
        c.N = *o.N;
    if (o.tol)
        c.tol = *o.tol;
    if (o.seed)
        c.seed = *o.seed;
    if (c.N < 0 || !(c.tol > 0))
        throw std::invalid_argument("truncation must be nonnegative and tolerance positive");
    return c;
}

int config_int(const ModelConfig& c, const std::string& key, int dflt)
{
    if (!c.raw.contains(key))
        return dflt;
    try {
        return c.raw[key].get<int>();
    } catch (const json::exception&) {
        throw std::invalid_argument("config field '" + key + "' must be an integer");
    }
}

std::vector<std::string> config_trees(const ModelConfig& c)
{
    std::vector<std::string> out;
    if (!c.raw.contains("trees"))
        return out;
    try {
        out = c.raw["trees"].get<std::vector<std::string>>();
    } catch (const json::exception&) {
        throw std::invalid_argument("config field 'trees' must be a list of strings");
    }
    return out;
}

json charges_json(const std::vector<LatticeVector>& v)
{
    json out = json::array();
    for (const auto& a : v)
        out.push_back({a.n, a.m});
    return out;
}

// comb r = 5 against the distance chain, two-comb (1(23))(4(56)) against
// its closed-form region
VerifyReport region_agreement_check(int points, std::uint64_t seed)
{
    VerifyReport rep;
    rep.check = "regions";
    rep.seed = seed;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    auto d = [](cplx a, cplx b) { return std::abs(a - b); };
    auto polar = [&](double rad) { return std::polar(rad, 2 * M_PI * u(rng)); };

    CoordSystem comb = a_coordinates(parse_plain_tree("1(2(3(45)))"));
    for (int t = 0; t < points; ++t) {
        std::vector<cplx> z(5);
        z[4] = {u(rng), u(rng)};
        std::vector<double> rad(4);
        for (auto& x : rad)
            x = 0.1 + u(rng);
        if (t % 2 == 0)
            std::sort(rad.begin(), rad.end(), std::greater<>());
        for (int i = 0; i < 4; ++i)
            z[i] = z[4] + polar(rad[i]);
        bool chain = true;
        for (int i = 0; i < 3; ++i)
            chain = chain && d(z[i], z[4]) > d(z[i + 1], z[4]);
        bool got = region_membership(comb, z).in_Ubar;
        rep.add("comb point " + std::to_string(t), got == chain ? 0.0 : 1.0, 0.0, got != chain);
    }

    CoordSystem two = a_coordinates(parse_plain_tree("(1(23))(4(56))"));
    for (int t = 0; t < points; ++t) {
        std::vector<cplx> z(6);
        z[2] = 0;
        z[5] = polar(1.0);
        z[1] = polar(0.5 * u(rng));
        z[0] = polar(0.6 * u(rng));
        z[4] = z[5] + polar(0.5 * u(rng));
        z[3] = z[5] + polar(0.6 * u(rng));
        bool closed = d(z[1], z[2]) < d(z[0], z[2]) && d(z[4], z[5]) < d(z[3], z[5]) &&
                      d(z[0], z[2]) + d(z[3], z[5]) < d(z[2], z[5]);
        bool got = region_membership(two, z).in_Ubar;
        rep.add("two-comb point " + std::to_string(t), got == closed ? 0.0 : 1.0, 0.0, got != closed);
    }
    return rep;
}

VerifyReport run_verify(const std::string& action, const ModelConfig& c)
{
    NarainModel model(c.R2);
    json params{{"R_squared", to_string(c.R2)}, {"reflection", c.rho}};
    int points = config_int(c, "points", 20);
    if (points < 1)
        throw std::invalid_argument("points must be positive");
    VerifyReport rep;

    if (action == "bootstrap") {
        int box = config_int(c, "box", 5);
        if (box < 0)
            throw std::invalid_argument("box must be nonnegative");
        rep = bootstrap_check(model, build_boundary(model, c.rho), box);
        params["box"] = box;
    } else if (action == "boundary-consistency") {
        BoundaryData bd = build_boundary(model, c.rho);
        ConsistencyOptions opt;
        opt.order = c.N;
        opt.tolerance = c.tol;
        opt.points = points;
        opt.seed = c.seed;
        auto charges = c.charges.value_or(std::vector<LatticeVector>{{1, 0}, {0, 1}});
        auto texts = config_trees(c);
        rep.check = "boundary-consistency";
        if (texts.empty()) {
            if (charges.size() != 2)
                throw std::invalid_argument("boundary-consistency takes two charges unless trees are given");
            auto run = [&](const std::vector<LatticeVector>& bulk, const std::vector<LatticeVector>& bdry,
                                const std::vector<std::string>& ts) {
                std::vector<ColoredTree> trees;
                for (const auto& t : ts)
                    trees.push_back(parse_colored_tree(t));
                rep.merge(expansion_consistency_check(model, bd, bulk, bdry, trees, opt));
            };
            run({charges[0]}, {charges[1]}, {"t(c1) o2", "o2 t(c1)"});
            run({charges[0], charges[1]}, {}, {"t(c1) t(c2)", "t(c1 c2)"});
        } else {
            std::vector<ColoredTree> trees;
            for (const auto& t : texts)
                trees.push_back(parse_colored_tree(t));
            auto r = static_cast<std::size_t>(trees[0].closed_count());
            if (charges.size() != r + static_cast<std::size_t>(trees[0].open_count()))
                throw std::invalid_argument("charge count does not match the trees");
            std::vector<LatticeVector> bulk(charges.begin(), charges.begin() + r);
            std::vector<LatticeVector> bdry(charges.begin() + r, charges.end());
            rep.merge(expansion_consistency_check(model, bd, bulk, bdry, trees, opt));
            params["trees"] = texts;
        }
        params["charges"] = charges_json(charges);
        params["truncation"] = c.N;
        params["tolerance"] = c.tol;
        params["points"] = points;
    } else if (action == "bulk-consistency") {
        ConsistencyOptions opt;
        opt.order = c.N;
        opt.tolerance = c.tol;
        opt.points = points;
        opt.seed = c.seed;
        auto charges = c.charges.value_or(std::vector<LatticeVector>{{1, -1}, {2, 1}, {0, 1}, {-1, 2}});
        auto texts = config_trees(c);
        if (texts.empty())
            texts = {"1(2(34))", "(12)(34)", "(2(13))4"};
        std::vector<Tree> trees;
        for (const auto& t : texts)
            trees.push_back(parse_plain_tree(t));
        rep.check = "bulk-consistency";
        rep.merge(expansion_consistency_check(model, charges, trees, opt));
        if (charges.size() >= 2)
            rep.merge(single_valuedness_check(model, charges, points, c.seed));
        params["charges"] = charges_json(charges);
        params["trees"] = texts;
        params["truncation"] = c.N;
        params["tolerance"] = c.tol;
        params["points"] = points;
    } else if (action == "skew") {
        auto charges = c.charges.value_or(std::vector<LatticeVector>{{1, 0}, {0, 1}});
        if (charges.size() < 2 || charges.size() % 2)
            throw std::invalid_argument("skew takes charges in pairs");
        int samples = config_int(c, "samples", 10);
        rep.check = "skew";
        for (std::size_t k = 0; k < charges.size(); k += 2)
            rep.merge(skew_symmetry_check(model, charges[k], charges[k + 1], samples, c.seed + k / 2));
        params["charges"] = charges_json(charges);
        params["samples"] = samples;
    } else if (action == "regions") {
        int pts = config_int(c, "points", 1000);
        if (pts < 1)
            throw std::invalid_argument("points must be positive");
        rep = region_agreement_check(pts, c.seed);
        params = {{"points", pts}};
    } else {
        throw std::invalid_argument("unknown verify action '" + action + "'");
    }
    rep.parameters = params;
    rep.seed = c.seed;
    return rep;
}

Output cmd_verify(const std::string& action, const std::vector<std::string>& args, const Options& o)
{
    if (!args.empty())
        throw std::invalid_argument("verify takes its inputs from --config");
    bool as_json = want_json(o, true);
    ModelConfig c = load_config(o);
    auto t0 = std::chrono::steady_clock::now();
    VerifyReport rep = run_verify(action, c);
    rep.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string text;
    if (as_json) {
        text = dump_json(to_json(rep, o.timing)) + "\n";
    } else {
        text = to_text(rep);
        if (o.timing)
            text += "runtime " + fmt_double(rep.runtime) + " s\n";
    }
    return {text, rep.pass ? exit_pass : exit_check_failed};
}

} // namespace

std::string dump_json(const json& j, int indent)
{
    std::string s;
    dump_into(j, s, indent, 0);
    return s;
}

cplx parse_complex(const std::string& input)
{
    std::string s;
    for (char ch : input)
        if (!std::isspace(static_cast<unsigned char>(ch)))
            s += ch;
    auto bad = [&] { return std::invalid_argument("cannot parse complex number '" + input + "'"); };
    if (s.empty())
        throw bad();
    auto real_of = [&](const std::string& t) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(t, &used);
        } catch (const std::exception&) {
            throw bad();
        }
        if (used != t.size())
            throw bad();
        return v;
    };
    if (s.back() != 'i')
        return {real_of(s), 0};
    std::string body = s.substr(0, s.size() - 1);
    std::size_t split = std::string::npos;
    for (std::size_t k = body.size(); k-- > 1;)
        if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
            split = k;
            break;
        }
    auto imag_of = [&](const std::string& t) {
        if (t.empty() || t == "+")
            return 1.0;
        if (t == "-")
            return -1.0;
        return real_of(t);
    };
    if (split == std::string::npos)
        return {0, imag_of(body)};
    return {real_of(body.substr(0, split)), imag_of(body.substr(split))};
}

std::vector<cplx> parse_point(const std::string& text)
{
    std::vector<cplx> out;
    for (const auto& s : split_list(text))
        out.push_back(parse_complex(s));
    return out;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"tree coordinates, series expansions, braids and lattice CFT checks", "bope"};
    app.require_subcommand(1);
    Options o;
    std::string action;
    std::vector<std::string> args;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--format", o.format, "json or text");
        sub->add_option("--out", o.out_path, "write output to this file");
        sub->add_option("--seed", o.seed, "random seed");
        sub->add_option("--N", o.N, "truncation order");
        sub->add_option("--tol", o.tol, "tolerance");
        sub->add_option("--config", o.config_path, "model config JSON");
        sub->add_flag("--timing", o.timing, "report runtime");
    };
    auto* tree = app.add_subcommand("tree", "parse | compose | permute | double");
    auto* coords = app.add_subcommand("coords", "A-coordinates of a tree");
    auto* expand_cmd = app.add_subcommand("expand", "expand a power product in a tree");
    auto* braid = app.add_subcommand("braid", "perm | mirror | cable | generator");
    auto* verify = app.add_subcommand("verify", "bulk-consistency | boundary-consistency | bootstrap | skew | regions");
    for (auto* sub : {tree, braid, verify})
        sub->add_option("action", action, "action")->required();
    for (auto* sub : {tree, coords, expand_cmd, braid, verify}) {
        sub->add_option("args", args, "arguments");
        common(sub);
    }
    coords->add_option("--point", o.point, "z1,z2,... with entries like 0.5+1i");
    braid->add_option("--strands", o.strands, "strand count of the (outer) word");
    braid->add_option("--inner", o.inner, "strand count of the inserted word");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err) == 0 ? exit_pass : exit_input_error;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return exit_input_error;
    }

    Output res;
    try {
        if (tree->parsed())
            res = cmd_tree(action, args, o);
        else if (coords->parsed())
            res = cmd_coords(args, o);
        else if (expand_cmd->parsed())
            res = cmd_expand(args, o);
        else if (braid->parsed())
            res = cmd_braid(action, args, o);
        else
            res = cmd_verify(action, args, o);
    } catch (const std::logic_error& e) {
        err << "error: " << e.what() << "\n";
        return exit_input_error;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_input_error;
    }

    if (o.out_path.empty()) {
        out << res.text;
    } else {
        std::ofstream f(o.out_path, std::ios::binary);
        if (!(f << res.text)) {
            err << "error: cannot write '" << o.out_path << "'\n";
            return exit_input_error;
        }
    }
    return res.code;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    std::vector<const char*> argv;
    argv.push_back("bope");
    for (const auto& a : args)
        argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace bope
