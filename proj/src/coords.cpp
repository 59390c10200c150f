#include "bope/coords.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace bope {

void IntPoly::add(const Monomial& m, long long c)
{
    if (c == 0)
        return;
    auto it = terms.find(m);
    if (it == terms.end()) {
        terms.emplace(m, c);
        return;
    }
    it->second += c;
    if (it->second == 0)
        terms.erase(it);
}

cplx IntPoly::eval(const std::vector<cplx>& zeta) const
{
    cplx sum = 0;
    for (const auto& [m, c] : terms) {
        cplx t = static_cast<double>(c);
        for (std::size_t e = 0; e < m.size(); ++e)
            for (int k = 0; k < m[e]; ++k)
                t *= zeta[e];
        sum += t;
    }
    return sum;
}

IntPoly operator-(const IntPoly& a, const IntPoly& b)
{
    IntPoly out = a;
    for (const auto& [m, c] : b.terms)
        out.add(m, -c);
    return out;
}

namespace {
std::optional<PairFactor> factor_pair(const CoordSystem& cs, int i, int j);
}

std::string edge_name(const Tree& subtree) { return "zeta(" + format_tree(subtree) + ")"; }

Monomial CoordSystem::vertex_monomial(int v) const
{
    Monomial m(edge_count(), 0);
    for (int u = v; u != meta.root; u = meta.vertices[u].parent)
        m[edge_of_vertex[u]] += 1;
    return m;
}

CoordSystem a_coordinates(const Tree& a)
{
    validate(a);
    if (a.size() < 2)
        throw std::invalid_argument("A-coordinates need at least two leaves");
    CoordSystem cs;
    cs.tree = a;
    cs.meta = tree_meta(a);
    cs.r = a.size();
    const auto& vs = cs.meta.vertices;
    cs.root_left = vs[cs.meta.root].L;
    cs.root_right = vs[cs.meta.root].R;
    cs.edge_of_vertex.assign(vs.size(), -1);
    for (std::size_t k = 0; k < cs.meta.edges.size(); ++k) {
        cs.edge_of_vertex[cs.meta.edges[k]] = static_cast<int>(k);
        cs.edge_names.push_back(edge_name(vs[cs.meta.edges[k]].subtree));
    }
    cs.Q.assign(cs.r, IntPoly{});

    int E = cs.edge_count();
    // leaf i collects M_v for every ancestor v having i in its left subtree
    std::function<void(int, const Monomial&, const IntPoly&)> walk = [&](int v, const Monomial& mv,
                                                                         const IntPoly& acc) {
        const Vertex& vx = vs[v];
        IntPoly with = acc;
        with.add(mv, 1);
        auto descend = [&](int child, const Tree& sub, const IntPoly& poly) {
            if (child < 0) {
                cs.Q[sub.label() - 1] = poly;
                return;
            }
            Monomial mc = mv;
            mc[cs.edge_of_vertex[child]] += 1;
            walk(child, mc, poly);
        };
        descend(vx.left, vx.subtree.left(), with);
        descend(vx.right, vx.subtree.right(), acc);
    };
    walk(cs.meta.root, Monomial(E, 0), IntPoly{});
    cs.pairs.resize(cs.r * cs.r);
    for (int i = 1; i <= cs.r; ++i)
        for (int j = i + 1; j <= cs.r; ++j)
            cs.pairs[(i - 1) * cs.r + j - 1] = factor_pair(cs, i, j);
    return cs;
}

std::map<std::string, cplx> CoordValues::named(const CoordSystem& cs) const
{
    std::map<std::string, cplx> out;
    out[x_name] = x;
    out[z_name] = z;
    for (std::size_t e = 0; e < zeta.size(); ++e)
        out[cs.edge_names[e]] = zeta[e];
    return out;
}

CoordValues psi(const CoordSystem& cs, const std::vector<cplx>& point)
{
    if (static_cast<int>(point.size()) != cs.r)
        throw std::invalid_argument("point has " + std::to_string(point.size()) + " entries, tree has " +
                                    std::to_string(cs.r) + " leaves");
    for (int i = 0; i < cs.r; ++i)
        for (int j = i + 1; j < cs.r; ++j)
            if (point[i] == point[j])
                throw std::invalid_argument("coincident points z_" + std::to_string(i + 1) + " and z_" +
                                            std::to_string(j + 1));
    const auto& vs = cs.meta.vertices;
    auto diff = [&](int v) { return point[vs[v].L - 1] - point[vs[v].R - 1]; };
    CoordValues out;
    out.x = diff(cs.meta.root);
    out.z = point[cs.root_right - 1];
    out.zeta.resize(cs.edge_count());
    for (int k = 0; k < cs.edge_count(); ++k) {
        int v = cs.meta.edges[k];
        out.zeta[k] = diff(v) / diff(vs[v].parent);
    }
    return out;
}

std::vector<cplx> psi_inverse(const CoordSystem& cs, const CoordValues& v)
{
    std::vector<cplx> out(cs.r);
    for (int i = 0; i < cs.r; ++i)
        out[i] = v.z + v.x * cs.Q[i].eval(v.zeta);
    return out;
}

namespace {

std::optional<PairFactor> factor_pair(const CoordSystem& cs, int i, int j)
{
    IntPoly d = cs.Q[i - 1] - cs.Q[j - 1];
    auto divides = [](const Monomial& a, const Monomial& b) {
        for (std::size_t k = 0; k < a.size(); ++k)
            if (a[k] > b[k])
                return false;
        return true;
    };
    std::vector<const Monomial*> minimal;
    for (const auto& [m, c] : d.terms) {
        bool is_min = true;
        for (const auto& [m2, c2] : d.terms)
            if (&m2 != &m && divides(m2, m)) {
                is_min = false;
                break;
            }
        if (is_min)
            minimal.push_back(&m);
    }
    if (minimal.size() != 1)
        return std::nullopt;
    long long lead = d.terms.at(*minimal[0]);
    if (lead != 1 && lead != -1)
        return std::nullopt;
    PairFactor f;
    f.m = *minimal[0];
    f.c = static_cast<int>(lead);
    for (const auto& [m, c] : d.terms) {
        if (m == f.m)
            continue;
        Monomial q = m;
        for (std::size_t k = 0; k < q.size(); ++k)
            q[k] -= f.m[k];
        f.P.add(q, c * lead);
    }
    return f;
}

} // namespace

std::optional<PairFactor> pair_difference(const CoordSystem& cs, int i, int j)
{
    if (i == j || i < 1 || j < 1 || i > cs.r || j > cs.r)
        throw std::invalid_argument("pair_difference needs two distinct leaf labels");
    auto f = cs.pairs[(std::min(i, j) - 1) * cs.r + std::max(i, j) - 1];
    if (f && i > j)
        f->c = -f->c;
    return f;
}

Certificate admissibility_certificate(const CoordSystem& cs, const std::vector<double>& radii)
{
    if (static_cast<int>(radii.size()) != cs.edge_count())
        throw std::invalid_argument("radius vector has the wrong length");
    for (double p : radii)
        if (!(p > 0))
            throw std::invalid_argument("radii must be positive");
    double worst = 0;
    for (int i = 1; i <= cs.r; ++i)
        for (int j = i + 1; j <= cs.r; ++j) {
            const auto& f = cs.pairs[(i - 1) * cs.r + j - 1];
            if (!f)
                return {false, -std::numeric_limits<double>::infinity()};
            double sum = 0;
            for (const auto& [m, c] : f->P.terms) {
                double t = std::fabs(static_cast<double>(c));
                for (std::size_t e = 0; e < m.size(); ++e)
                    t *= std::pow(radii[e], m[e]);
                sum += t;
            }
            worst = std::max(worst, sum);
        }
    return {worst < 1, 1 - worst};
}

bool on_cut(cplx v) { return std::fabs(v.imag()) <= 1e-14 * (1 + std::fabs(v.real())) && v.real() <= 0; }

Membership region_membership(const CoordSystem& cs, const std::vector<cplx>& point)
{
    Membership out;
    CoordValues v = psi(cs, point);
    if (v.x == cplx(0))
        return out;
    std::vector<double> radii;
    for (cplx z : v.zeta) {
        if (z == cplx(0))
            return out;
        radii.push_back(std::abs(z));
    }
    Certificate c = admissibility_certificate(cs, radii);
    out.margin = c.margin;
    out.in_Ubar = c.admissible;
    out.in_U = out.in_Ubar && !on_cut(v.x) && std::none_of(v.zeta.begin(), v.zeta.end(), on_cut);
    return out;
}

std::vector<cplx> doubled_point(int r, const std::vector<cplx>& point)
{
    std::vector<cplx> out;
    out.reserve(point.size() + r);
    for (int k = 0; k < r; ++k) {
        out.push_back(point[k]);
        out.push_back(std::conj(point[k]));
    }
    for (std::size_t j = r; j < point.size(); ++j)
        out.push_back(point[j]);
    return out;
}

OpenMembership region_membership_open(const ColoredTree& e, const std::vector<cplx>& point, bool require_leaf_order)
{
    validate(e);
    int r = e.closed_count();
    int s = e.open_count();
    if (static_cast<int>(point.size()) != r + s)
        throw std::invalid_argument("point has the wrong number of entries");
    for (int k = 0; k < r; ++k)
        if (!(point[k].imag() > 0))
            throw std::invalid_argument("bulk point z_" + std::to_string(k + 1) + " is not in the upper half-plane");
    for (int j = r; j < r + s; ++j) {
        if (point[j].imag() != 0)
            throw std::invalid_argument("boundary point x_" + std::to_string(j + 1) + " is not real");
        if (j > r && !(point[j - 1].real() > point[j].real()))
            throw std::invalid_argument("boundary points must decrease strictly in label");
    }
    OpenMembership out;
    if (require_leaf_order) {
        double prev = std::numeric_limits<double>::infinity();
        for (const auto& l : e.leaves()) {
            double re = point[l.label - 1].real();
            if (!(re < prev))
                return out;
            prev = re;
        }
    }
    Tree d = doubling(e);
    if (d.size() < 2) {
        out.member = true;
        out.margin = 1;
        return out;
    }
    Membership m = region_membership(a_coordinates(d), doubled_point(r, point));
    out.member = m.in_Ubar;
    out.margin = m.margin;
    return out;
}

} // namespace bope
