#pragma once

#include "bope/trees.hpp"

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bope {

using cplx = std::complex<double>;

// exponent vector over the edges of a tree
using Monomial = std::vector<int>;

struct IntPoly {
    std::map<Monomial, long long> terms; // no zero coefficients

    void add(const Monomial& m, long long c);
    bool is_zero() const { return terms.empty(); }
    cplx eval(const std::vector<cplx>& zeta) const;
};

IntPoly operator-(const IntPoly& a, const IntPoly& b);

// z_i - z_j = x_A * c * zeta^m * (1 + P)
struct PairFactor {
    Monomial m;
    int c = 1;
    IntPoly P;
};

struct CoordSystem {
    Tree tree;
    TreeMeta meta;
    int r = 0;
    int root_left = 0;   // L(t_A)
    int root_right = 0;  // R(t_A) = r_A
    std::vector<int> edge_of_vertex; // -1 for the root
    std::vector<std::string> edge_names;
    std::vector<IntPoly> Q; // Q[i-1]: z_i = z_A + x_A Q_i(zeta)
    std::vector<std::optional<PairFactor>> pairs; // i < j at (i-1)*r + j-1

    int edge_count() const { return static_cast<int>(meta.edges.size()); }
    // x_A * M_v = z_{L(v)} - z_{R(v)}
    Monomial vertex_monomial(int v) const;
};

inline const std::string x_name = "x_A";
inline const std::string z_name = "z_A";
std::string edge_name(const Tree& subtree);

CoordSystem a_coordinates(const Tree& a);

struct CoordValues {
    cplx x;
    cplx z;
    std::vector<cplx> zeta; // edge order of CoordSystem

    std::map<std::string, cplx> named(const CoordSystem& cs) const;
};

// throws std::invalid_argument on coincident points
CoordValues psi(const CoordSystem& cs, const std::vector<cplx>& point);
std::vector<cplx> psi_inverse(const CoordSystem& cs, const CoordValues& v);

std::optional<PairFactor> pair_difference(const CoordSystem& cs, int i, int j);

struct Certificate {
    bool admissible = false;
    double margin = 0;
};

Certificate admissibility_certificate(const CoordSystem& cs, const std::vector<double>& radii);

// on R_{<=0} up to the usual tolerance
bool on_cut(cplx v);

struct Membership {
    bool in_Ubar = false;
    bool in_U = false;
    double margin = 0;
};

Membership region_membership(const CoordSystem& cs, const std::vector<cplx>& point);

// (z_1, conj z_1, ..., z_r, conj z_r, x_{r+1}, ..., x_{r+s})
std::vector<cplx> doubled_point(int r, const std::vector<cplx>& point);

struct OpenMembership {
    bool member = false;
    double margin = 0;
};

// point = (z_1..z_r in H, x_{r+1}..x_{r+s} real and decreasing).
// With require_leaf_order the real parts must also decrease along the
// leaf order of E, which pins every tree-branch logarithm to its
// principal value.
OpenMembership region_membership_open(const ColoredTree& e, const std::vector<cplx>& point,
                                      bool require_leaf_order = false);

} // namespace bope
