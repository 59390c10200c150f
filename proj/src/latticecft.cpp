#include "bope/latticecft.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace bope {

namespace {

const LatticeVector e1{1, 0};
const LatticeVector e2{0, 1};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel_error(cplx got, cplx want)
{
    double scale = std::abs(want);
    return std::abs(got - want) / (scale > 0 ? scale : 1);
}

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

nlohmann::json charges_json(const std::vector<LatticeVector>& cs)
{
    nlohmann::json out = nlohmann::json::array();
    for (const auto& c : cs)
        out.push_back({c.n, c.m});
    return out;
}

} // namespace

LatticeVector operator+(const LatticeVector& a, const LatticeVector& b) { return {a.n + b.n, a.m + b.m}; }
LatticeVector operator-(const LatticeVector& a) { return {-a.n, -a.m}; }

std::string to_string(const LatticeVector& a) { return "(" + std::to_string(a.n) + "," + std::to_string(a.m) + ")"; }

long lattice_pairing(const LatticeVector& a, const LatticeVector& b) { return a.n * b.m + a.m * b.n; }

Rational reduce_phase(const Rational& theta)
{
    Rational half = theta / 2;
    return theta - 2 * Rational(floor_int(half));
}

cplx phase(const Rational& theta)
{
    Rational t = reduce_phase(theta);
    if (t == 0)
        return 1;
    if (t == 1)
        return -1;
    if (t == Rational(1, 2))
        return {0, 1};
    if (t == Rational(3, 2))
        return {0, -1};
    double x = M_PI * to_double(t);
    return {std::cos(x), std::sin(x)};
}

NarainModel::NarainModel(Rational r2) : R2(std::move(r2))
{
    if (!(R2 > 0))
        throw std::invalid_argument("R^2 must be positive");
}

Rational NarainModel::aa(const LatticeVector& x, const LatticeVector& y) const
{
    return (Rational(x.n * y.n) / R2 + x.n * y.m + x.m * y.n + Rational(x.m * y.m) * R2) / 2;
}

Rational NarainModel::bb(const LatticeVector& x, const LatticeVector& y) const
{
    return (Rational(x.n * y.n) / R2 - x.n * y.m - x.m * y.n + Rational(x.m * y.m) * R2) / 2;
}

Rational NarainModel::ab(const LatticeVector& x, const LatticeVector& y) const
{
    return (Rational(x.n * y.n) / R2 - x.n * y.m + x.m * y.n - Rational(x.m * y.m) * R2) / 2;
}

Rational NarainModel::ba(const LatticeVector& x, const LatticeVector& y) const
{
    return (Rational(x.n * y.n) / R2 + x.n * y.m - x.m * y.n - Rational(x.m * y.m) * R2) / 2;
}

Rational NarainModel::h(const LatticeVector& x) const { return aa(x, x) / 2; }
Rational NarainModel::hbar(const LatticeVector& x) const { return bb(x, x) / 2; }

double NarainModel::a(const LatticeVector& x) const
{
    double R = std::sqrt(to_double(R2));
    return (x.n / R + x.m * R) / std::sqrt(2.0);
}

double NarainModel::abar(const LatticeVector& x) const
{
    double R = std::sqrt(to_double(R2));
    return (x.n / R - x.m * R) / std::sqrt(2.0);
}

Rational epsilon_phase(const LatticeVector& a, const LatticeVector& b)
{
    const long ac[2] = {a.n, a.m};
    const long bc[2] = {b.n, b.m};
    const LatticeVector basis[2] = {e1, e2};
    long k = 0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < i; ++j)
            k += ac[i] * bc[j] * lattice_pairing(basis[i], basis[j]);
    return reduce_phase(Rational(k));
}

int epsilon_cocycle(const LatticeVector& a, const LatticeVector& b) { return epsilon_phase(a, b) == 0 ? 1 : -1; }

Rational t_pairing(const NarainModel& model, int rho, const LatticeVector& x, const LatticeVector& y)
{
    return model.aa(x, y) + rho * (model.ab(x, y) + model.ba(x, y)) + model.bb(x, y);
}

Rational phi_pairing(const NarainModel& model, int rho, const LatticeVector& x, const LatticeVector& y)
{
    return rho * (model.ab(x, y) - model.ba(x, y));
}

Rational commutator_phase(const NarainModel& model, int rho, const LatticeVector& x, const LatticeVector& y)
{
    return reduce_phase(-(Rational(lattice_pairing(x, y)) + phi_pairing(model, rho, x, y)));
}

long BoundaryData::m_coordinate(const LatticeVector& a) const
{
    // a = c generator + d kernel with det [generator kernel] = 1
    return a.n * kernel.m - a.m * kernel.n;
}

bool BoundaryData::in_kernel(const LatticeVector& a) const { return m_coordinate(a) == 0; }

Rational BoundaryData::eta_phase(const LatticeVector& a, const LatticeVector& b) const
{
    std::vector<long> ca{m_coordinate(a)}, cb{m_coordinate(b)};
    Rational out = 0;
    for (std::size_t i = 0; i < eta_table.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            out += eta_table[i][j] * ca[i] * cb[j];
    return reduce_phase(out);
}

cplx BoundaryData::eta(const LatticeVector& a, const LatticeVector& b) const { return phase(eta_phase(a, b)); }

cplx BoundaryData::sigma(const LatticeVector& a) const
{
    auto it = sigma_override.find(a);
    if (it != sigma_override.end())
        return it->second;
    Rational g = b12 * a.n * a.m + b11 * Rational(a.n * (a.n - 1) / 2) + b22 * Rational(a.m * (a.m - 1) / 2);
    return phase(-g);
}

Rational epsilon_prime_phase(const NarainModel& model, const BoundaryData& bd, const LatticeVector& x,
                             const LatticeVector& y)
{
    return reduce_phase(epsilon_phase(x, y) - bd.eta_phase(x, y) + bd.rho * model.ba(x, y));
}

BoundaryData build_boundary(const NarainModel& model, int rho)
{
    if (rho != 1 && rho != -1)
        throw std::invalid_argument("reflection sign must be +1 or -1");
    BoundaryData bd;
    bd.rho = rho;
    Rational t11 = t_pairing(model, rho, e1, e1);
    Rational t12 = t_pairing(model, rho, e1, e2);
    if (t11 == 0) {
        bd.kernel = e1;
    } else {
        // t(e2) = (t12/t11) t(e1) on the line T
        Rational q = t12 / t11;
        long p = static_cast<long>(numerator(q));
        long d = static_cast<long>(denominator(q));
        bd.kernel = {-p, d};
    }
    if (t_pairing(model, rho, bd.kernel, bd.kernel) != 0)
        throw std::logic_error("kernel vector is not in ker t");
    // generator with n k_m - m k_n = 1
    long x0 = 1, y0 = 0, x1 = 0, y1 = 1, a = bd.kernel.m, b = -bd.kernel.n;
    while (b != 0) {
        long q = a / b;
        std::tie(a, b) = std::make_pair(b, a - q * b);
        std::tie(x0, x1) = std::make_pair(x1, x0 - q * x1);
        std::tie(y0, y1) = std::make_pair(y1, y0 - q * y1);
    }
    if (a < 0) {
        x0 = -x0;
        y0 = -y0;
        a = -a;
    }
    if (a != 1)
        throw std::logic_error("kernel vector is not primitive");
    bd.generator = {x0, y0};

    // M has rank one: the basis table has only its diagonal entry, unused
    std::vector<LatticeVector> m_basis{bd.generator};
    bd.eta_table.assign(m_basis.size(), std::vector<Rational>(m_basis.size(), Rational(0)));
    for (std::size_t i = 0; i < m_basis.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            bd.eta_table[i][j] = commutator_phase(model, rho, m_basis[i], m_basis[j]);

    const LatticeVector basis[2] = {e1, e2};
    for (const auto& u : basis)
        for (const auto& v : basis)
            if (reduce_phase(epsilon_prime_phase(model, bd, u, v) - epsilon_prime_phase(model, bd, v, u)) != 0)
                throw std::domain_error("eps' is not symmetric; no trivializing sigma exists");
    bd.b11 = epsilon_prime_phase(model, bd, e1, e1);
    bd.b12 = epsilon_prime_phase(model, bd, e1, e2);
    bd.b22 = epsilon_prime_phase(model, bd, e2, e2);
    return bd;
}

void VerifyReport::add(std::string label, double error, double tolerance, bool keep)
{
    ++sample_count;
    bool ok = error <= tolerance;
    if (!ok)
        pass = false;
    if (std::isnan(error) || error > max_error)
        max_error = std::isnan(error) ? error : std::max(max_error, error);
    if (keep || !ok)
        samples.push_back({std::move(label), error, tolerance});
}

void VerifyReport::merge(const VerifyReport& other)
{
    samples.insert(samples.end(), other.samples.begin(), other.samples.end());
    sample_count += other.sample_count;
    if (std::isnan(other.max_error) || other.max_error > max_error)
        max_error = other.max_error;
    pass = pass && other.pass;
    runtime += other.runtime;
}

nlohmann::json to_json(const VerifyReport& r, bool with_runtime)
{
    nlohmann::json out;
    out["check"] = r.check;
    out["parameters"] = r.parameters;
    out["seed"] = r.seed;
    out["sample_count"] = r.sample_count;
    out["max_error"] = r.max_error;
    out["pass"] = r.pass;
    nlohmann::json ss = nlohmann::json::array();
    for (const auto& s : r.samples)
        ss.push_back({{"label", s.label}, {"error", s.error}, {"tolerance", s.tolerance}});
    out["samples"] = std::move(ss);
    if (with_runtime)
        out["runtime"] = r.runtime;
    return out;
}

std::string to_text(const VerifyReport& r)
{
    std::ostringstream out;
    out << r.check << ": " << (r.pass ? "pass" : "FAIL") << "  samples=" << r.sample_count
        << "  max_error=" << fmt(r.max_error) << "\n";
    for (const auto& s : r.samples)
        if (!(s.error <= s.tolerance))
            out << "  " << s.label << "  error=" << fmt(s.error) << " > " << fmt(s.tolerance) << "\n";
    return out.str();
}

VerifyReport bootstrap_check(const NarainModel& model, const BoundaryData& bd, int box)
{
    auto t0 = std::chrono::steady_clock::now();
    VerifyReport rep;
    rep.check = "bootstrap";
    rep.parameters = {{"R_squared", to_string(model.R2)}, {"reflection", bd.rho}, {"box", box}};
    const double tol = 1e-12;
    rep.add("bb1 sigma(0)", std::abs(bd.sigma({0, 0}) - 1.0), tol);
    std::vector<LatticeVector> pts;
    for (long n = -box; n <= box; ++n)
        for (long m = -box; m <= box; ++m)
            pts.push_back({n, m});
    for (const auto& a : pts)
        for (const auto& b : pts) {
            std::string ab = " a=" + to_string(a) + " b=" + to_string(b);
            cplx lhs = phase(epsilon_phase(a, b) + bd.rho * model.ba(a, b)) * bd.sigma(a + b);
            cplx rhs = bd.sigma(a) * bd.sigma(b) * bd.eta(a, b);
            rep.add("bb2" + ab, std::abs(lhs - rhs), tol, false);
            cplx l3 = bd.eta(a, b) / bd.eta(b, a);
            cplx r3 = phase(commutator_phase(model, bd.rho, a, b));
            rep.add("bb3" + ab, std::abs(l3 - r3), tol, false);
            if (bd.in_kernel(a))
                rep.add("ker_t" + ab, std::abs(phase(commutator_phase(model, bd.rho, a, b)) - 1.0), tol, false);
        }
    rep.runtime = seconds_since(t0);
    return rep;
}

cplx bulk_correlator(const NarainModel& model, const LatticeVector& dual, const std::vector<BulkInsertion>& ins)
{
    int r = static_cast<int>(ins.size());
    LatticeVector total;
    for (const auto& i : ins)
        total = total + i.charge;
    for (int i = 0; i < r; ++i)
        for (int j = i + 1; j < r; ++j)
            if (ins[i].z == ins[j].z)
                throw std::invalid_argument("coincident bulk points");
    if (!(total == dual))
        return 0;
    Rational eps = 0;
    PowerProduct f;
    BranchPlan plan;
    for (int i = 0; i < r; ++i)
        for (int j = i + 1; j < r; ++j) {
            eps += epsilon_phase(ins[i].charge, ins[j].charge);
            std::pair<int, int> p{2 * i + 1, 2 * j + 1}, q{2 * i + 2, 2 * j + 2};
            f.pairs.push_back({p, model.aa(ins[i].charge, ins[j].charge)});
            f.pairs.push_back({q, model.bb(ins[i].charge, ins[j].charge)});
            plan.paired.push_back({p, q});
        }
    std::vector<cplx> z;
    for (const auto& i : ins)
        z.push_back(i.z);
    return phase(eps) * evaluate_closed(f, doubled_point(r, z), plan);
}

Rational chiral_pairing(const NarainModel& model, const ChiralCharge& p, const ChiralCharge& q)
{
    return model.aa(p.u, q.u) + model.ab(p.u, q.v) + model.ba(p.v, q.u) + model.bb(p.v, q.v);
}

std::vector<ChiralCharge> doubled_charges(int rho, const std::vector<LatticeVector>& bulk,
                                          const std::vector<LatticeVector>& boundary)
{
    auto scale = [](int s, const LatticeVector& v) { return LatticeVector{s * v.n, s * v.m}; };
    std::vector<ChiralCharge> out;
    for (const auto& a : bulk) {
        out.push_back({a, {}});
        out.push_back({{}, scale(rho, a)});
    }
    for (const auto& b : boundary)
        out.push_back({b, scale(rho, b)});
    return out;
}

ClosedForm mixed_closed_form(const NarainModel& model, int rho, const std::vector<LatticeVector>& bulk,
                             const std::vector<LatticeVector>& boundary)
{
    int r = static_cast<int>(bulk.size());
    int s = static_cast<int>(boundary.size());
    auto q = doubled_charges(rho, bulk, boundary);
    auto Z = [](int i) { return 2 * i - 1; };
    auto B = [](int i) { return 2 * i; };
    auto X = [r](int j) { return 2 * r + j; };
    ClosedForm out;
    auto add = [&](int a, int b) {
        Rational e = chiral_pairing(model, q[a - 1], q[b - 1]);
        if (e != 0)
            out.f.pairs.push_back({{a, b}, e});
    };
    for (int i = 1; i <= r; ++i)
        for (int j = i + 1; j <= r; ++j) {
            Rational s1 = chiral_pairing(model, q[Z(i) - 1], q[Z(j) - 1]);
            Rational s2 = chiral_pairing(model, q[B(i) - 1], q[B(j) - 1]);
            if (s1 == 0 && s2 == 0)
                continue;
            out.f.pairs.push_back({{Z(i), Z(j)}, s1});
            out.f.pairs.push_back({{B(i), B(j)}, s2});
            out.plan.paired.push_back({{Z(i), Z(j)}, {B(i), B(j)}});
        }
    for (int i = 1; i <= r; ++i)
        for (int j = i; j <= r; ++j)
            add(Z(i), B(j));
    for (int i = 1; i <= r; ++i)
        for (int j = i + 1; j <= r; ++j)
            add(B(i), Z(j));
    for (int i = 1; i <= r; ++i)
        for (int j = 1; j <= s; ++j) {
            add(Z(i), X(j));
            add(B(i), X(j));
        }
    for (int k = 1; k <= s; ++k)
        for (int l = k + 1; l <= s; ++l)
            add(X(k), X(l));
    return out;
}

ColoredTree reference_tree(int r, int s)
{
    std::vector<ColoredTree> items;
    for (int i = 1; i <= r; ++i)
        items.push_back(ColoredTree::tau(ColoredTree::closed(i)));
    for (int j = 1; j <= s; ++j)
        items.push_back(ColoredTree::open(r + j));
    if (items.empty())
        throw std::invalid_argument("reference tree needs at least one insertion");
    ColoredTree acc = items.back();
    for (int k = static_cast<int>(items.size()) - 2; k >= 0; --k)
        acc = ColoredTree::node(items[k], acc);
    return acc;
}

namespace {

LatticeVector subtree_charge(const ColoredTree& t, const std::vector<LatticeVector>& bulk,
                             const std::vector<LatticeVector>& boundary)
{
    int r = static_cast<int>(bulk.size());
    switch (t.kind()) {
    case NodeKind::Closed:
        return bulk.at(t.label() - 1);
    case NodeKind::Open:
        return boundary.at(t.label() - r - 1);
    case NodeKind::Tau:
        return subtree_charge(t.child(), bulk, boundary);
    case NodeKind::Inner:
        return subtree_charge(t.left(), bulk, boundary) + subtree_charge(t.right(), bulk, boundary);
    }
    throw std::logic_error("unreachable");
}

// eps at closed vertices, sigma at tau vertices, eta at open vertices
cplx tree_coefficient(const BoundaryData& bd, const ColoredTree& t, const std::vector<LatticeVector>& bulk,
                      const std::vector<LatticeVector>& boundary)
{
    switch (t.kind()) {
    case NodeKind::Closed:
    case NodeKind::Open:
        return 1;
    case NodeKind::Tau:
        return bd.sigma(subtree_charge(t.child(), bulk, boundary)) *
               tree_coefficient(bd, t.child(), bulk, boundary);
    case NodeKind::Inner: {
        LatticeVector l = subtree_charge(t.left(), bulk, boundary);
        LatticeVector r = subtree_charge(t.right(), bulk, boundary);
        cplx v = t.color() == Color::c ? phase(epsilon_phase(l, r)) : bd.eta(l, r);
        return v * tree_coefficient(bd, t.left(), bulk, boundary) * tree_coefficient(bd, t.right(), bulk, boundary);
    }
    }
    throw std::logic_error("unreachable");
}

Rational plain_coefficient_phase(const Tree& t, const std::vector<LatticeVector>& charges, LatticeVector& total)
{
    if (t.is_leaf()) {
        total = charges.at(t.label() - 1);
        return 0;
    }
    LatticeVector l, r;
    Rational out = plain_coefficient_phase(t.left(), charges, l) + plain_coefficient_phase(t.right(), charges, r);
    total = l + r;
    return out + epsilon_phase(l, r);
}

// every pair with a nonzero exponent, oriented so that c = +1 in cs
PowerProduct tree_oriented(const CoordSystem& cs, const std::function<Rational(int, int)>& exponent)
{
    PowerProduct f;
    for (int k = 1; k <= cs.r; ++k)
        for (int l = k + 1; l <= cs.r; ++l) {
            Rational e = exponent(k, l);
            if (e == 0)
                continue;
            auto pf = pair_difference(cs, k, l);
            if (!pf)
                throw std::invalid_argument("pair " + std::to_string(k) + "," + std::to_string(l) +
                                            " has no certified factorization");
            f.pairs.push_back({pf->c > 0 ? std::make_pair(k, l) : std::make_pair(l, k), e});
        }
    return f;
}

GenSeries expand_block(const CoordSystem& cs, const PowerProduct& f, int order)
{
    Expansion ex = expand(cs, f, order);
    if (ex.negative_leading_sign)
        throw std::logic_error("tree-oriented block picked up a sign");
    return ex.series;
}

void check_mixed_point(int r, int s, const std::vector<cplx>& point)
{
    if (static_cast<int>(point.size()) != r + s)
        throw std::invalid_argument("point has the wrong number of entries");
    for (int k = 0; k < r; ++k)
        if (!(point[k].imag() > 0))
            throw std::invalid_argument("bulk point outside the upper half-plane");
    for (int j = r; j < r + s; ++j) {
        if (point[j].imag() != 0)
            throw std::invalid_argument("boundary point is not real");
        if (j > r && !(point[j - 1].real() > point[j].real()))
            throw std::invalid_argument("boundary points must decrease strictly in label");
    }
}

} // namespace

cplx mixed_normalization(const NarainModel& model, const BoundaryData& bd, const std::vector<LatticeVector>& bulk,
                         const std::vector<LatticeVector>& boundary)
{
    int r = static_cast<int>(bulk.size());
    int s = static_cast<int>(boundary.size());
    if (r + s == 0)
        return 1;
    ColoredTree e = reference_tree(r, s);
    cplx coef = tree_coefficient(bd, e, bulk, boundary);
    int K = r + s;
    if (K == 1 && r == 0)
        return coef;
    // witness: item k at 10^{-(k-1)}, bulk heights far below every gap
    std::vector<cplx> point(K);
    for (int k = 1; k <= K; ++k) {
        double x = std::pow(10.0, -(k - 1));
        point[k - 1] = k <= r ? cplx(x, std::pow(10.0, -(K + 2)) * (1 + 0.1 * k)) : cplx(x, 0);
    }
    if (!region_membership_open(e, point, true).member)
        throw std::logic_error("witness point is outside the reference region");
    Tree d = doubling(e);
    CoordSystem cs = a_coordinates(d);
    auto dp = doubled_point(r, point);
    CoordValues cv = psi(cs, dp);
    ClosedForm cf = mixed_closed_form(model, bd.rho, bulk, boundary);
    Rational phi = 0;
    for (const auto& [p, ex] : cf.f.pairs) {
        auto [a, b] = p;
        auto pf = pair_difference(cs, a, b);
        cplx tl = pf->c > 0 ? tree_log(cs, cv, a, b) : tree_log(cs, cv, b, a);
        double k = ((std::log(dp[a - 1] - dp[b - 1]) - tl) / cplx(0, M_PI)).real();
        phi += ex * Rational(std::lround(k));
    }
    return coef * phase(-phi);
}

cplx mixed_correlator(const NarainModel& model, const BoundaryData& bd, const LatticeVector& dual,
                      const std::vector<LatticeVector>& bulk, const std::vector<cplx>& z,
                      const std::vector<LatticeVector>& boundary, const std::vector<cplx>& x)
{
    int r = static_cast<int>(bulk.size());
    int s = static_cast<int>(boundary.size());
    if (static_cast<int>(z.size()) != r || static_cast<int>(x.size()) != s)
        throw std::invalid_argument("charges and points differ in number");
    std::vector<cplx> point = z;
    point.insert(point.end(), x.begin(), x.end());
    check_mixed_point(r, s, point);
    LatticeVector total;
    for (const auto& a : bulk)
        total = total + a;
    for (const auto& b : boundary)
        total = total + b;
    if (bd.m_coordinate(total) != bd.m_coordinate(dual))
        return 0;
    ClosedForm cf = mixed_closed_form(model, bd.rho, bulk, boundary);
    return mixed_normalization(model, bd, bulk, boundary) * evaluate_closed(cf.f, doubled_point(r, point), cf.plan);
}

TreeExpansion tree_expansion(const NarainModel& model, const Tree& a, const std::vector<LatticeVector>& charges,
                             int order)
{
    validate(a);
    if (a.size() != static_cast<int>(charges.size()))
        throw std::invalid_argument("one charge per leaf is needed");
    TreeExpansion out;
    out.tree = a;
    out.r = a.size();
    out.cs = a_coordinates(a);
    LatticeVector total;
    out.coefficient = phase(plain_coefficient_phase(a, charges, total));
    out.block_product = tree_oriented(out.cs, [&](int k, int l) { return model.aa(charges[k - 1], charges[l - 1]); });
    out.anti_product = tree_oriented(out.cs, [&](int k, int l) { return model.bb(charges[k - 1], charges[l - 1]); });
    out.block = expand_block(out.cs, out.block_product, order);
    out.anti = expand_block(out.cs, out.anti_product, order);
    return out;
}

TreeExpansion tree_expansion(const NarainModel& model, const BoundaryData& bd, const ColoredTree& e,
                             const std::vector<LatticeVector>& bulk, const std::vector<LatticeVector>& boundary,
                             int order)
{
    validate(e);
    if (e.color() != Color::o)
        throw std::invalid_argument("tree_expansion needs an open-colored tree");
    if (e.closed_count() != static_cast<int>(bulk.size()) || e.open_count() != static_cast<int>(boundary.size()))
        throw std::invalid_argument("charges do not match the leaves of the tree");
    TreeExpansion out;
    out.colored = true;
    out.r = e.closed_count();
    out.tree = doubling(e);
    out.cs = a_coordinates(out.tree);
    out.coefficient = tree_coefficient(bd, e, bulk, boundary);
    auto q = doubled_charges(bd.rho, bulk, boundary);
    out.block_product =
        tree_oriented(out.cs, [&](int k, int l) { return chiral_pairing(model, q[k - 1], q[l - 1]); });
    out.block = expand_block(out.cs, out.block_product, order);
    return out;
}

cplx evaluate_expansion(const TreeExpansion& t, const std::vector<cplx>& point)
{
    if (t.colored) {
        auto dp = doubled_point(t.r, point);
        return t.coefficient * evaluate_series(t.block, t.cs, psi(t.cs, dp));
    }
    std::vector<cplx> bar(point.size());
    std::transform(point.begin(), point.end(), bar.begin(), [](cplx z) { return std::conj(z); });
    return t.coefficient * evaluate_series(t.block, t.cs, psi(t.cs, point)) *
           evaluate_series(*t.anti, t.cs, psi(t.cs, bar));
}

cplx evaluate_expansion_closed(const TreeExpansion& t, const std::vector<cplx>& point)
{
    BranchPlan plan;
    plan.tree = t.tree;
    if (t.colored)
        return t.coefficient * evaluate_closed(t.block_product, doubled_point(t.r, point), plan);
    std::vector<cplx> bar(point.size());
    std::transform(point.begin(), point.end(), bar.begin(), [](cplx z) { return std::conj(z); });
    return t.coefficient * evaluate_closed(t.block_product, point, plan) * evaluate_closed(t.anti_product, bar, plan);
}

std::optional<Rational> predicted_phase(const NarainModel& model, int rho, const ColoredTree& e,
                                        const std::vector<LatticeVector>& bulk,
                                        const std::vector<LatticeVector>& boundary)
{
    auto C = parse_colored_tree;
    if (bulk.size() == 1 && boundary.size() == 1) {
        const auto& a = bulk[0];
        const auto& b = boundary[0];
        if (e == C("t(c1) o2"))
            return Rational(0);
        if (e == C("o2 t(c1)"))
            return reduce_phase(Rational(lattice_pairing(a, b)) + phi_pairing(model, rho, a, b));
    }
    if (bulk.size() == 2 && boundary.empty()) {
        if (e == C("t(c1) t(c2)"))
            return Rational(0);
        if (e == C("t(c1 c2)"))
            return reduce_phase(-rho * model.ba(bulk[0], bulk[1]));
    }
    return std::nullopt;
}

namespace {

double uniform(std::mt19937_64& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

void place_plain(const Tree& t, cplx c, double s, std::mt19937_64& rng, std::vector<cplx>& out)
{
    if (t.is_leaf()) {
        out[t.label() - 1] = c;
        return;
    }
    cplx d = std::polar(s / 2, uniform(rng, 0, 2 * M_PI));
    place_plain(t.left(), c + d, s * uniform(rng, 0.05, 0.2), rng, out);
    place_plain(t.right(), c - d, s * uniform(rng, 0.05, 0.2), rng, out);
}

// closed subtree around c, left children to the right
void place_closed(const ColoredTree& t, cplx c, double s, std::mt19937_64& rng, std::vector<cplx>& out)
{
    if (t.kind() == NodeKind::Closed) {
        out[t.label() - 1] = c;
        return;
    }
    cplx d = std::polar(s / 2, uniform(rng, -M_PI / 3, M_PI / 3));
    place_closed(t.left(), c + d, s * uniform(rng, 0.05, 0.2), rng, out);
    place_closed(t.right(), c - d, s * uniform(rng, 0.05, 0.2), rng, out);
}

void place_open(const ColoredTree& t, double c, double s, std::mt19937_64& rng, std::vector<cplx>& out)
{
    switch (t.kind()) {
    case NodeKind::Open:
        out[t.label() - 1] = c;
        return;
    case NodeKind::Tau: {
        double h = s * uniform(rng, 0.2, 0.5);
        place_closed(t.child(), cplx(c, h), h * uniform(rng, 0.05, 0.2), rng, out);
        return;
    }
    case NodeKind::Inner:
        place_open(t.left(), c + s / 2, s * uniform(rng, 0.05, 0.3), rng, out);
        place_open(t.right(), c - s / 2, s * uniform(rng, 0.05, 0.3), rng, out);
        return;
    case NodeKind::Closed:
        break;
    }
    throw std::invalid_argument("open placement reached a closed leaf");
}

} // namespace

std::vector<cplx> sample_region_point(const Tree& a, std::mt19937_64& rng, const SamplingOptions& opt)
{
    validate(a);
    CoordSystem cs = a_coordinates(a);
    for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
        std::vector<cplx> p(a.size());
        place_plain(a, cplx(uniform(rng, -1, 1), uniform(rng, -1, 1)), uniform(rng, 0.5, 2), rng, p);
        if (a.size() < 2)
            return p;
        Membership m = region_membership(cs, p);
        if (m.in_U && m.margin >= opt.min_margin)
            return p;
    }
    throw std::runtime_error("no region point found for " + format_tree(a));
}

std::vector<cplx> sample_region_point(const ColoredTree& e, std::mt19937_64& rng, const SamplingOptions& opt)
{
    validate(e);
    if (e.color() != Color::o)
        throw std::invalid_argument("sampling needs an open-colored tree");
    int r = e.closed_count();
    int s = e.open_count();
    for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
        std::vector<cplx> p(r + s);
        place_open(e, uniform(rng, -1, 1), uniform(rng, 0.5, 2), rng, p);
        bool ordered = true;
        for (int j = r + 1; j < r + s; ++j)
            ordered = ordered && p[j - 1].real() > p[j].real();
        if (!ordered)
            throw std::invalid_argument("open leaves of " + format_tree(e) + " are not in label order");
        OpenMembership m = region_membership_open(e, p, true);
        if (m.member && m.margin >= opt.min_margin)
            return p;
    }
    throw std::runtime_error("no region point found for " + format_tree(e));
}

VerifyReport expansion_consistency_check(const NarainModel& model, const BoundaryData& bd,
                                         const std::vector<LatticeVector>& bulk,
                                         const std::vector<LatticeVector>& boundary,
                                         const std::vector<ColoredTree>& trees, const ConsistencyOptions& opt)
{
    auto t0 = std::chrono::steady_clock::now();
    VerifyReport rep;
    rep.check = "boundary-consistency";
    rep.seed = opt.seed;
    nlohmann::json tj = nlohmann::json::array();
    for (const auto& e : trees)
        tj.push_back(format_tree(e));
    rep.parameters = {{"R_squared", to_string(model.R2)},
                      {"reflection", bd.rho},
                      {"bulk", charges_json(bulk)},
                      {"boundary", charges_json(boundary)},
                      {"trees", tj},
                      {"truncation", opt.order},
                      {"points", opt.points}};
    int r = static_cast<int>(bulk.size());
    std::mt19937_64 rng(opt.seed);
    cplx lambda = mixed_normalization(model, bd, bulk, boundary);
    ClosedForm cf = mixed_closed_form(model, bd.rho, bulk, boundary);
    for (const auto& e : trees) {
        std::string name = format_tree(e);
        TreeExpansion te = tree_expansion(model, bd, e, bulk, boundary, opt.order);
        auto pred = predicted_phase(model, bd.rho, e, bulk, boundary);
        BranchPlan tree_plan;
        tree_plan.tree = te.tree;
        for (int k = 0; k < opt.points; ++k) {
            auto p = sample_region_point(e, rng, opt.sampling);
            auto dp = doubled_point(r, p);
            cplx closed = evaluate_closed(cf.f, dp, cf.plan);
            cplx series = evaluate_expansion(te, p);
            rep.add(name + " #" + std::to_string(k), rel_error(series, lambda * closed), opt.tolerance);
            if (pred) {
                cplx measured = closed / evaluate_closed(te.block_product, dp, tree_plan);
                rep.add(name + " phase #" + std::to_string(k), std::abs(measured - phase(*pred)),
                        opt.phase_tolerance);
            }
        }
    }
    rep.runtime = seconds_since(t0);
    return rep;
}

VerifyReport expansion_consistency_check(const NarainModel& model, const std::vector<LatticeVector>& charges,
                                         const std::vector<Tree>& trees, const ConsistencyOptions& opt)
{
    auto t0 = std::chrono::steady_clock::now();
    VerifyReport rep;
    rep.check = "bulk-consistency";
    rep.seed = opt.seed;
    nlohmann::json tj = nlohmann::json::array();
    for (const auto& a : trees)
        tj.push_back(format_tree(a));
    rep.parameters = {{"R_squared", to_string(model.R2)},
                      {"charges", charges_json(charges)},
                      {"trees", tj},
                      {"truncation", opt.order},
                      {"points", opt.points}};
    std::mt19937_64 rng(opt.seed);
    LatticeVector total;
    for (const auto& c : charges)
        total = total + c;
    for (const auto& a : trees) {
        std::string name = format_tree(a);
        TreeExpansion te = tree_expansion(model, a, charges, opt.order);
        for (int k = 0; k < opt.points; ++k) {
            auto p = sample_region_point(a, rng, opt.sampling);
            std::vector<BulkInsertion> ins;
            for (std::size_t i = 0; i < charges.size(); ++i)
                ins.push_back({charges[i], p[i]});
            cplx want = bulk_correlator(model, total, ins);
            rep.add(name + " #" + std::to_string(k), rel_error(evaluate_expansion(te, p), want), opt.tolerance);
        }
    }
    rep.runtime = seconds_since(t0);
    return rep;
}

cplx continue_along(const PowerProduct& f, const std::vector<std::vector<cplx>>& path)
{
    if (path.empty())
        throw std::invalid_argument("empty path");
    const auto& end = path.back();
    cplx out = f.constant;
    for (const auto& [i, k] : f.powers)
        out *= std::pow(end.at(i - 1), k);
    for (const auto& [p, s] : f.pairs) {
        auto w = [&](std::size_t t) { return path[t].at(p.first - 1) - path[t].at(p.second - 1); };
        cplx L = std::log(w(0));
        for (std::size_t t = 1; t < path.size(); ++t)
            L += std::log(w(t) / w(t - 1));
        out *= std::exp(to_double(s) * L);
    }
    return out;
}

namespace {

PowerProduct bulk_chiral_product(const NarainModel& model, const std::vector<LatticeVector>& charges)
{
    PowerProduct f;
    int r = static_cast<int>(charges.size());
    for (int i = 0; i < r; ++i)
        for (int j = i + 1; j < r; ++j) {
            f.pairs.push_back({{2 * i + 1, 2 * j + 1}, model.aa(charges[i], charges[j])});
            f.pairs.push_back({{2 * i + 2, 2 * j + 2}, model.bb(charges[i], charges[j])});
        }
    return f;
}

// rotate points i and j about their midpoint by angle turn * pi
std::vector<std::vector<cplx>> pair_rotation(const std::vector<cplx>& z, int i, int j, double turn, int segments)
{
    cplx c = (z[i] + z[j]) / 2.0;
    std::vector<std::vector<cplx>> path;
    for (int k = 0; k <= segments; ++k) {
        cplx rot = std::polar(1.0, M_PI * turn * k / segments);
        std::vector<cplx> p = z;
        p[i] = c + (z[i] - c) * rot;
        p[j] = c + (z[j] - c) * rot;
        path.push_back(doubled_point(static_cast<int>(p.size()), p));
    }
    return path;
}

} // namespace

VerifyReport single_valuedness_check(const NarainModel& model, const std::vector<LatticeVector>& charges,
                                     int points, std::uint64_t seed, double tolerance)
{
    auto t0 = std::chrono::steady_clock::now();
    VerifyReport rep;
    rep.check = "single-valuedness";
    rep.seed = seed;
    rep.parameters = {{"R_squared", to_string(model.R2)}, {"charges", charges_json(charges)}, {"points", points}};
    int r = static_cast<int>(charges.size());
    if (r < 2)
        throw std::invalid_argument("single-valuedness needs two insertions");
    std::mt19937_64 rng(seed);
    PowerProduct f = bulk_chiral_product(model, charges);
    for (int k = 0; k < points; ++k) {
        std::vector<cplx> z(r);
        for (auto& v : z)
            v = {uniform(rng, -1, 1), uniform(rng, -1, 1)};
        int bi = 0, bj = 1;
        for (int i = 0; i < r; ++i)
            for (int j = i + 1; j < r; ++j)
                if (std::abs(z[i] - z[j]) < std::abs(z[bi] - z[bj])) {
                    bi = i;
                    bj = j;
                }
        auto path = pair_rotation(z, bi, bj, 2, 64);
        cplx start = continue_along(f, {path.front()});
        cplx end = continue_along(f, path);
        rep.add("loop z" + std::to_string(bi + 1) + " z" + std::to_string(bj + 1) + " #" + std::to_string(k),
                rel_error(end, start), tolerance);
    }
    rep.runtime = seconds_since(t0);
    return rep;
}

VerifyReport skew_symmetry_check(const NarainModel& model, const LatticeVector& a, const LatticeVector& b,
                                 int samples, std::uint64_t seed, double tolerance)
{
    auto t0 = std::chrono::steady_clock::now();
    VerifyReport rep;
    rep.check = "skew";
    rep.seed = seed;
    rep.parameters = {{"R_squared", to_string(model.R2)}, {"a", {a.n, a.m}}, {"b", {b.n, b.m}}, {"samples", samples}};
    std::mt19937_64 rng(seed);
    PowerProduct f = bulk_chiral_product(model, {a, b});
    f.constant = phase(epsilon_phase(a, b));
    cplx ratio = phase(epsilon_phase(a, b) - epsilon_phase(b, a));
    for (int k = 0; k < samples; ++k) {
        cplx z1{uniform(rng, -1, 1), uniform(rng, -1, 1)};
        cplx z2{uniform(rng, -1, 1), uniform(rng, -1, 1)};
        cplx c12 = bulk_correlator(model, a + b, {{a, z1}, {b, z2}});
        cplx swapped = bulk_correlator(model, a + b, {{b, z2}, {a, z1}});
        cplx at_end = bulk_correlator(model, a + b, {{a, z2}, {b, z1}});
        cplx cont = continue_along(f, pair_rotation({z1, z2}, 0, 1, 1, 64));
        std::string tag = " #" + std::to_string(k);
        rep.add("continuation" + tag, rel_error(cont, at_end), tolerance);
        rep.add("skew" + tag, rel_error(swapped, c12), tolerance);
        rep.add("phase" + tag, std::abs(cont / c12 - ratio), tolerance);
    }
    rep.runtime = seconds_since(t0);
    return rep;
}

std::vector<std::vector<cplx>> braid_path(const BraidWord& w, int segments)
{
    validate(w);
    std::vector<cplx> z(w.n);
    std::vector<int> at(w.n); // strand at each position
    for (int k = 0; k < w.n; ++k) {
        z[k] = -(k + 1.0);
        at[k] = k;
    }
    std::vector<std::vector<cplx>> path{z};
    for (int l : w.letters) {
        int i = std::abs(l);
        int sa = at[i - 1], sb = at[i];
        cplx c = (z[sa] + z[sb]) / 2.0;
        cplx za = z[sa], zb = z[sb];
        for (int k = 1; k <= segments; ++k) {
            cplx rot = std::polar(1.0, (l > 0 ? M_PI : -M_PI) * k / segments);
            z[sa] = c + (za - c) * rot;
            z[sb] = c + (zb - c) * rot;
            path.push_back(z);
        }
        z[sa] = zb;
        z[sb] = za;
        path.back() = z;
        std::swap(at[i - 1], at[i]);
    }
    return path;
}

std::map<std::pair<int, int>, double> winding_numbers(const std::vector<std::vector<cplx>>& path)
{
    std::map<std::pair<int, int>, double> out;
    if (path.empty())
        return out;
    int n = static_cast<int>(path.front().size());
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            double total = 0;
            for (std::size_t t = 1; t < path.size(); ++t)
                total += std::arg((path[t][a] - path[t][b]) / (path[t - 1][a] - path[t - 1][b]));
            out[{a + 1, b + 1}] = total / M_PI;
        }
    return out;
}

} // namespace bope
