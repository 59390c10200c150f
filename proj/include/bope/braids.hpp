#pragma once

#include "bope/trees.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace bope {

// Letters are +i for sigma_i and -i for its inverse. sigma_i takes the
// strand at position i over the one at i+1: a counterclockwise half turn.
struct BraidWord {
    int n = 0;
    std::vector<int> letters;

    friend bool operator==(const BraidWord&, const BraidWord&) = default;
};

// throws std::invalid_argument on an out-of-range letter
void validate(const BraidWord& w);

BraidWord identity_word(int n);
BraidWord concat(const BraidWord& a, const BraidWord& b);
BraidWord free_reduce(const BraidWord& w);

// "s1 s2^-1 s1"; "e" or "" is the empty word
BraidWord parse_word(const std::string& text, int n);
std::string format_word(const BraidWord& w);

// perm[k-1] = final position of the strand starting at position k
std::vector<int> braid_permutation(const BraidWord& w);
bool is_pure(const BraidWord& w);

BraidWord mirror(const BraidWord& w);

// Sum of crossing signs for each unordered pair of strands, keyed by
// starting positions (a < b).
std::map<std::pair<int, int>, int> crossing_counts(const BraidWord& w);

// Strand at position p of g widened to the m strands of h; m = 0 deletes it.
BraidWord cable_compose(const BraidWord& g, int p, const BraidWord& h);
// same, writing into out (reuses its storage)
void cable_compose_into(const BraidWord& g, int p, const BraidWord& h, BraidWord& out);

// permutation of the cabled braid predicted from the two permutations
std::vector<int> block_substituted_permutation(const std::vector<int>& pg, int p, const std::vector<int>& ph);

struct PaBMorphism {
    Tree source;
    Tree target;
    BraidWord word;
};

// checks that the word carries the leaf order of A to that of B
PaBMorphism pab_morphism(const Tree& a, const Tree& b, const BraidWord& w);
PaBMorphism pab_compose(const PaBMorphism& g, int p, const PaBMorphism& h);

enum class StrandKind { Z, Zbar, X };

struct StrandColor {
    StrandKind kind = StrandKind::Z;
    int label = 0; // closed label k for z_k / conj z_k, open label for x
};

struct PaPBMorphism {
    ColoredTree source;
    ColoredTree target;
    BraidWord word;                    // on the doubled strands
    std::vector<StrandColor> coloring; // by doubled label
};

std::vector<StrandColor> strand_coloring(int r, int s);

PaPBMorphism papb_morphism(const ColoredTree& e, const ColoredTree& e2, const BraidWord& w);

// alpha_o, alpha_c, sigma, p, q
PaPBMorphism papb_generator(const std::string& name);
std::vector<std::string> papb_generator_names();

// slot is a closed label (h is closed, inserted as (h, mirror h) at the
// z_p and conj z_p strands) or an open label (h is cabled at x_p)
PaPBMorphism papb_compose(const PaPBMorphism& mu, LeafRef slot, const PaBMorphism& gamma);
PaPBMorphism papb_compose(const PaPBMorphism& mu, LeafRef slot, const PaPBMorphism& nu);

// swapping z_k with conj z_k and mirroring the word gives a valid morphism
bool conjugation_symmetric(const PaPBMorphism& mu);

} // namespace bope
