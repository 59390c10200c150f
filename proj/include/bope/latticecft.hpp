#pragma once

#include "bope/braids.hpp"
#include "bope/series.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace bope {

// alpha = n e_1 + m e_2 in II_{1,1}, (e_1, e_2) = 1, (e_i, e_i) = 0
struct LatticeVector {
    long n = 0;
    long m = 0;

    friend bool operator==(const LatticeVector&, const LatticeVector&) = default;
    friend auto operator<=>(const LatticeVector&, const LatticeVector&) = default;
};

LatticeVector operator+(const LatticeVector& a, const LatticeVector& b);
LatticeVector operator-(const LatticeVector& a);
std::string to_string(const LatticeVector& a);

long lattice_pairing(const LatticeVector& a, const LatticeVector& b);

// exp(i pi theta)
cplx phase(const Rational& theta);
// theta reduced to [0, 2)
Rational reduce_phase(const Rational& theta);

// a = (n/R + m R)/sqrt2, abar = (n/R - m R)/sqrt2; all pairings are
// rational for rational R^2
struct NarainModel {
    Rational R2;

    explicit NarainModel(Rational r2);

    Rational aa(const LatticeVector& x, const LatticeVector& y) const;  // a a'
    Rational bb(const LatticeVector& x, const LatticeVector& y) const;  // abar abar'
    Rational ab(const LatticeVector& x, const LatticeVector& y) const;  // a abar'
    Rational ba(const LatticeVector& x, const LatticeVector& y) const;  // abar a'
    Rational h(const LatticeVector& x) const;
    Rational hbar(const LatticeVector& x) const;
    double a(const LatticeVector& x) const;
    double abar(const LatticeVector& x) const;
};

// bimultiplicative from eps(e_k, e_l) = (-1)^{(e_k, e_l)} for l < k, 1 otherwise;
// returned as a phase in units of i pi
Rational epsilon_phase(const LatticeVector& a, const LatticeVector& b);
int epsilon_cocycle(const LatticeVector& a, const LatticeVector& b);

struct BoundaryData {
    int rho = 1;
    LatticeVector kernel;    // primitive generator of ker t
    LatticeVector generator; // t(generator) generates M
    // eta on the basis of M; entry (i, j) used for i > j
    std::vector<std::vector<Rational>> eta_table;
    // sigma phase: sum_{i<j} b_ij a_i a_j + sum_i b_ii a_i (a_i - 1)/2, negated
    Rational b11, b12, b22;
    // single-point sign flips, for negative controls
    std::map<LatticeVector, cplx> sigma_override;

    // coordinate of t(alpha) on the generator of M
    long m_coordinate(const LatticeVector& a) const;
    bool in_kernel(const LatticeVector& a) const;

    Rational eta_phase(const LatticeVector& a, const LatticeVector& b) const; // eta(t a, t b)
    cplx eta(const LatticeVector& a, const LatticeVector& b) const;
    cplx sigma(const LatticeVector& a) const;
};

// (t a, t b) with t a = a + rho abar
Rational t_pairing(const NarainModel& model, int rho, const LatticeVector& x, const LatticeVector& y);
// (a, phi b)_lat = rho (a abar' - abar a')
Rational phi_pairing(const NarainModel& model, int rho, const LatticeVector& x, const LatticeVector& y);
// c(a, b) = exp(-i pi ((a, b) + (a, phi b))), in units of i pi
Rational commutator_phase(const NarainModel& model, int rho, const LatticeVector& x, const LatticeVector& y);
// eps'(a, b) = eps(a, b) eta(ta, tb)^{-1} exp(i pi rho abar a'), in units of i pi
Rational epsilon_prime_phase(const NarainModel& model, const BoundaryData& bd, const LatticeVector& x,
                             const LatticeVector& y);

// throws std::domain_error if eps' is not symmetric
BoundaryData build_boundary(const NarainModel& model, int rho);

struct Sample {
    std::string label;
    double error = 0;
    double tolerance = 0;
};

struct VerifyReport {
    std::string check;
    nlohmann::json parameters = nlohmann::json::object();
    std::vector<Sample> samples;
    std::size_t sample_count = 0; // may exceed samples.size() when only failures are kept
    double max_error = 0;
    bool pass = true;
    std::uint64_t seed = 0;
    double runtime = 0;

    void add(std::string label, double error, double tolerance, bool keep = true);
    void merge(const VerifyReport& other);
};

nlohmann::json to_json(const VerifyReport& r, bool with_runtime = false);
std::string to_text(const VerifyReport& r);

// (1) sigma(0) = 1, (2) eps sigma(a+b) exp(i pi rho abar a') = sigma sigma eta,
// (3) eta(ta,tb)/eta(tb,ta) = c(a,b), (4) c(a,b) = 1 for a in ker t
VerifyReport bootstrap_check(const NarainModel& model, const BoundaryData& bd, int box);

struct BulkInsertion {
    LatticeVector charge;
    cplx z;
};

// zero unless the charges sum to dual
cplx bulk_correlator(const NarainModel& model, const LatticeVector& dual, const std::vector<BulkInsertion>& ins);

// chiral charge a(u) + abar(v)
struct ChiralCharge {
    LatticeVector u, v;
};
Rational chiral_pairing(const NarainModel& model, const ChiralCharge& p, const ChiralCharge& q);

// z_i -> a(alpha_i), conj z_i -> rho abar(alpha_i), x_j -> t(beta_j), by doubled label
std::vector<ChiralCharge> doubled_charges(int rho, const std::vector<LatticeVector>& bulk,
                                          const std::vector<LatticeVector>& boundary);

struct ClosedForm {
    PowerProduct f; // over doubled labels
    BranchPlan plan;
};

// product over doubled pairs with the fixed orientations; bulk pairs paired
ClosedForm mixed_closed_form(const NarainModel& model, int rho, const std::vector<LatticeVector>& bulk,
                             const std::vector<LatticeVector>& boundary);

// right comb of tau(c_1), ..., tau(c_r), o_{r+1}, ..., o_{r+s}
ColoredTree reference_tree(int r, int s);

// normalization of the closed form fixed on the reference tree
cplx mixed_normalization(const NarainModel& model, const BoundaryData& bd, const std::vector<LatticeVector>& bulk,
                         const std::vector<LatticeVector>& boundary);

// bulk points in H, boundary points real and strictly decreasing;
// zero unless t(sum of charges) = t(dual)
cplx mixed_correlator(const NarainModel& model, const BoundaryData& bd, const LatticeVector& dual,
                      const std::vector<LatticeVector>& bulk, const std::vector<cplx>& z,
                      const std::vector<LatticeVector>& boundary, const std::vector<cplx>& x);

// Cocycle coefficient times chiral blocks in the A-coordinates of the working
// tree. Colored trees use doubling(E) and a single block. Plain trees carry a
// holomorphic block and an antiholomorphic one in the same variable names,
// the latter evaluated at the coordinates of the conjugate point.
struct TreeExpansion {
    Tree tree;
    int r = 0;
    bool colored = false;
    cplx coefficient = 1;
    CoordSystem cs;
    GenSeries block{{}, 0};
    std::optional<GenSeries> anti;
    PowerProduct block_product; // tree-oriented, c = +1 on every pair
    PowerProduct anti_product;
};

TreeExpansion tree_expansion(const NarainModel& model, const Tree& a, const std::vector<LatticeVector>& charges,
                             int order);
TreeExpansion tree_expansion(const NarainModel& model, const BoundaryData& bd, const ColoredTree& e,
                             const std::vector<LatticeVector>& bulk, const std::vector<LatticeVector>& boundary,
                             int order);

// point = (z_1..z_r) for plain trees, (z_1..z_r, x_{r+1}..x_{r+s}) for colored ones
cplx evaluate_expansion(const TreeExpansion& t, const std::vector<cplx>& point);
// same blocks through the closed tree branch, no truncation
cplx evaluate_expansion_closed(const TreeExpansion& t, const std::vector<cplx>& point);

// Predicted phase of closed form over tree block for the (1,1) trees
// tau(c1) o2, o2 tau(c1) and the (2,0) trees tau(c1) tau(c2), tau(c1 c2)
std::optional<Rational> predicted_phase(const NarainModel& model, int rho, const ColoredTree& e,
                                        const std::vector<LatticeVector>& bulk,
                                        const std::vector<LatticeVector>& boundary);

struct SamplingOptions {
    double min_margin = 0.5;
    int max_attempts = 100000;
};

// random point in the certified region of the tree with margin >= min_margin
std::vector<cplx> sample_region_point(const Tree& a, std::mt19937_64& rng, const SamplingOptions& opt = {});
// colored version: real parts decrease along the leaf order
std::vector<cplx> sample_region_point(const ColoredTree& e, std::mt19937_64& rng, const SamplingOptions& opt = {});

struct ConsistencyOptions {
    int order = 30;
    double tolerance = 1e-6;
    double phase_tolerance = 1e-10;
    int points = 20;
    std::uint64_t seed = 1;
    SamplingOptions sampling;
};

VerifyReport expansion_consistency_check(const NarainModel& model, const BoundaryData& bd,
                                         const std::vector<LatticeVector>& bulk,
                                         const std::vector<LatticeVector>& boundary,
                                         const std::vector<ColoredTree>& trees, const ConsistencyOptions& opt);
VerifyReport expansion_consistency_check(const NarainModel& model, const std::vector<LatticeVector>& charges,
                                         const std::vector<Tree>& trees, const ConsistencyOptions& opt);

// Numeric continuation of every pair factor along a polyline of doubled
// configurations, starting from the principal branch.
cplx continue_along(const PowerProduct& f, const std::vector<std::vector<cplx>>& path);

// full turn of the closest pair about its midpoint, 64 segments
VerifyReport single_valuedness_check(const NarainModel& model, const std::vector<LatticeVector>& charges,
                                     int points, std::uint64_t seed, double tolerance = 1e-12);

// 2-point correlator continued along z12 -> z12 e^{i pi t} against the swapped correlator
VerifyReport skew_symmetry_check(const NarainModel& model, const LatticeVector& a, const LatticeVector& b,
                                 int samples, std::uint64_t seed, double tolerance = 1e-10);

// Strands on the real line, position q at -q; each letter is a half turn
// of the two strands about their midpoint (counterclockwise for +i).
std::vector<std::vector<cplx>> braid_path(const BraidWord& w, int segments = 64);
// total change of Arg(w_a - w_b) / pi for strands starting at a < b
std::map<std::pair<int, int>, double> winding_numbers(const std::vector<std::vector<cplx>>& path);

} // namespace bope
