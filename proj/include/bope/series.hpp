#pragma once

#include "bope/coords.hpp"
#include "bope/rational.hpp"

#include <json.hpp>

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bope {

enum class VarKind { Root, Translation, Ratio };

struct SeriesVar {
    std::string name;
    VarKind kind = VarKind::Ratio;
};

// Exponents of every variable plus log powers. Ratio variables carry an
// additional nonnegative integer offset per term, bounded in total by N.
struct SectorKey {
    std::vector<Rational> base;
    std::vector<int> logs;

    friend bool operator<(const SectorKey& a, const SectorKey& b);
    friend bool operator==(const SectorKey& a, const SectorKey& b);
};

struct SeriesTerm {
    std::uint64_t key = 0; // packed ratio offsets
    int degree = 0;
    cplx coef;
};

class GenSeries {
public:
    GenSeries(std::vector<SeriesVar> vars, int order);

    static GenSeries constant(std::vector<SeriesVar> vars, int order, cplx c);
    // c * prod v^e
    static GenSeries monomial(std::vector<SeriesVar> vars, int order, cplx c, const std::vector<Rational>& exps);

    const std::vector<SeriesVar>& vars() const { return vars_; }
    int order() const { return order_; }
    int var_index(const std::string& name) const;

    // ratio offsets of a term, indexed like vars() (zero for other kinds)
    std::vector<int> offsets(std::uint64_t key) const;
    std::uint64_t pack(const std::vector<int>& offs) const;

    const std::map<SectorKey, std::vector<SeriesTerm>>& sectors() const { return sectors_; }
    void add_term(const SectorKey& k, const std::vector<int>& offs, cplx c);

    std::size_t term_count() const;
    bool is_zero() const { return sectors_.empty(); }

    // full exponent (base + offset) -> coefficient; sectors whose bases
    // differ by integers are merged here
    struct FlatKey {
        std::vector<Rational> exps;
        std::vector<int> logs;
        friend bool operator<(const FlatKey& a, const FlatKey& b);
    };
    std::map<FlatKey, cplx> flatten() const;

    GenSeries renamed(const std::map<std::string, std::string>& names) const;

    friend GenSeries operator+(const GenSeries& a, const GenSeries& b);
    friend GenSeries operator-(const GenSeries& a, const GenSeries& b);
    friend GenSeries operator*(const GenSeries& a, const GenSeries& b);
    friend GenSeries operator*(cplx c, const GenSeries& a);

private:
    void check_compatible(const GenSeries& o) const;
    void set_sector(const SectorKey& k, std::vector<SeriesTerm> terms);

    std::vector<SeriesVar> vars_;
    int order_;
    std::vector<int> ratio_;      // var index -> ratio slot, -1 otherwise
    std::vector<int> ratio_vars_; // ratio slot -> var index
    int bits_ = 1;
    std::map<SectorKey, std::vector<SeriesTerm>> sectors_;
};

GenSeries truncate(const GenSeries& s, int order);
// c * monomial * (1 + u)  ->  c^q * monomial^q * sum binom(q, k) u^k
GenSeries pow(const GenSeries& s, const Rational& q);
// s must have zero constant part of positive ratio order
GenSeries log1p(const GenSeries& u);
// c * monomial * (1 + u) -> Log c + sum b_v Log v + log1p(u)
GenSeries log(const GenSeries& s);

std::vector<SeriesVar> coordinate_vars(const CoordSystem& cs);

// f = constant * prod (z_i - z_j)^{s_ij} * prod z_i^{k_i}; pairs are ordered
struct PowerProduct {
    cplx constant = 1;
    std::vector<std::pair<std::pair<int, int>, Rational>> pairs;
    std::map<int, int> powers;

    int max_label() const;
    friend PowerProduct operator*(const PowerProduct& a, const PowerProduct& b);
};

// "(z1-z2)^(-1/2) * z3^2 * (z2-z1)"
PowerProduct parse_power_product(const std::string& text);
std::string to_string(const PowerProduct& f);

struct Expansion {
    GenSeries series;
    bool negative_leading_sign = false; // some c = -1 was raised with e^{i pi s}
};

// throws std::invalid_argument for an uncertifiable pair
Expansion expand(const Tree& a, const PowerProduct& f, int order);
Expansion expand(const CoordSystem& cs, const PowerProduct& f, int order);

// principal branch; throws std::domain_error if a multivalued power sits on the cut
cplx evaluate_series(const GenSeries& s, const std::map<std::string, cplx>& values);
cplx evaluate_series(const GenSeries& s, const CoordSystem& cs, const CoordValues& v);

struct BranchPlan {
    // (z_a - z_b)^s with (z_c - z_d)^t, the second being the conjugate of
    // the first, evaluated as |w|^{2t} w^{s-t}; s - t must be an integer
    std::vector<std::pair<std::pair<int, int>, std::pair<int, int>>> paired;
    // when set, every unpaired pair factor uses the branch of the
    // A-coordinates: Log c + Log x_A + m.Log zeta + Log(1 + P)
    std::optional<Tree> tree;
};

// Log(z_i - z_j) on the branch of the A-coordinates:
// Log c + Log x_A + m.Log zeta + Log(1 + P)
cplx tree_log(const CoordSystem& cs, const CoordValues& v, int i, int j);

cplx evaluate_closed(const PowerProduct& f, const std::vector<cplx>& point, const BranchPlan& plan = {});

nlohmann::json to_json(const GenSeries& s);

} // namespace bope
