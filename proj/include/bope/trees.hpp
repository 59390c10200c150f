#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace bope {

class parse_error : public std::invalid_argument {
public:
    parse_error(const std::string& what, std::size_t pos);
    std::size_t position() const noexcept { return pos_; }

private:
    std::size_t pos_;
};

// Labeled binary tree, or the distinguished empty tree.
class Tree {
    struct Node;

public:
    Tree() = default;

    static Tree leaf(int label);
    static Tree node(Tree left, Tree right);

    bool empty() const noexcept { return !n_; }
    bool is_leaf() const noexcept;
    int label() const;
    const Tree& left() const;
    const Tree& right() const;
    int size() const noexcept;

    // leaf labels left to right
    std::vector<int> leaves() const;

    friend bool operator==(const Tree& a, const Tree& b);
    friend bool operator!=(const Tree& a, const Tree& b) { return !(a == b); }
    friend bool operator<(const Tree& a, const Tree& b);

private:
    std::shared_ptr<const Node> n_;
};

struct Tree::Node {
    int label = 0; // 0 for internal nodes
    int size = 1;
    Tree left, right;
};

// Throws std::invalid_argument unless the labels are exactly {1..r}.
void validate(const Tree& t);

// Internal vertices in pre-order. The edge above a non-root vertex v is
// stored with index v: d(e) = v, u(e) = parent.
struct Vertex {
    Tree subtree;
    int parent = -1;
    bool is_left_child = false;
    int left = -1; // child vertex index, -1 for a leaf
    int right = -1;
    int L = 0; // rightmost leaf of the left child
    int R = 0; // rightmost descendant leaf
};

struct TreeMeta {
    std::vector<Vertex> vertices;
    std::vector<int> edges; // lower vertex of each edge, pre-order
    int root = -1;
    int rightmost = 0;
};

TreeMeta tree_meta(const Tree& t);

Tree compose(const Tree& a, int p, const Tree& b);

// g[i-1] is the image of label i
Tree permute(const Tree& a, const std::vector<int>& g);

// g' with compose(permute(A, g), g(p), B) = permute(compose(A, p, B), g')
std::vector<int> block_permutation(const std::vector<int>& g, int p, int m);

// all labeled trees with r >= 1 leaves
std::vector<Tree> all_trees(int r);
// shapes with leaves labeled 1..n left to right
std::vector<Tree> tree_shapes(int n);

enum class NodeKind { Closed, Open, Inner, Tau };
enum class Color { c, o };

struct LeafRef {
    NodeKind kind = NodeKind::Closed;
    int label = 0;
};

class ColoredTree {
    struct Node;

public:
    ColoredTree() = default;

    static ColoredTree closed(int label);
    static ColoredTree open(int label);
    static ColoredTree node(ColoredTree left, ColoredTree right);
    static ColoredTree tau(ColoredTree child);

    bool empty() const noexcept { return !n_; }
    NodeKind kind() const;
    int label() const;
    const ColoredTree& left() const;
    const ColoredTree& right() const;
    const ColoredTree& child() const;

    int closed_count() const noexcept;
    int open_count() const noexcept;
    bool has_tau() const noexcept;
    Color color() const noexcept;

    // leaves left to right
    std::vector<LeafRef> leaves() const;

    friend bool operator==(const ColoredTree& a, const ColoredTree& b);
    friend bool operator!=(const ColoredTree& a, const ColoredTree& b) { return !(a == b); }
    friend bool operator<(const ColoredTree& a, const ColoredTree& b);

private:
    std::shared_ptr<const Node> n_;
};

struct ColoredTree::Node {
    NodeKind kind = NodeKind::Closed;
    int label = 0;
    int closed = 0;
    int open = 0;
    bool tau = false;
    ColoredTree left, right; // child of Tau is stored in left
};

// Throws std::invalid_argument on a malformed colored tree.
void validate(const ColoredTree& t);

ColoredTree as_colored(const Tree& t);
Tree as_plain(const ColoredTree& t);

using AnyTree = std::variant<Tree, ColoredTree>;

AnyTree parse_tree(const std::string& text);
Tree parse_plain_tree(const std::string& text);
ColoredTree parse_colored_tree(const std::string& text);

std::string format_tree(const Tree& t);
std::string format_tree(const ColoredTree& t);
std::string format_tree(const AnyTree& t);

ColoredTree compose_colored(const ColoredTree& e, LeafRef p, const ColoredTree& x);

// closed k -> 2k-1, its copy -> 2k, open r+j -> 2r+j
int doubled_label(int r, LeafRef leaf, bool bar = false);
Tree doubling(const ColoredTree& e);

// valid o-colored trees with the given closed and open counts
std::vector<ColoredTree> all_open_trees(int r, int s);

} // namespace bope
