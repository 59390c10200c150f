#include "bope/trees.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>

namespace bope {

parse_error::parse_error(const std::string& what, std::size_t pos)
    : std::invalid_argument(what + " at position " + std::to_string(pos)), pos_(pos)
{
}

// ---------------------------------------------------------------- Tree

Tree Tree::leaf(int label)
{
    if (label < 1)
        throw std::invalid_argument("leaf label must be positive");
    auto n = std::make_shared<Node>();
    n->label = label;
    Tree t;
    t.n_ = std::move(n);
    return t;
}

Tree Tree::node(Tree left, Tree right)
{
    if (left.empty() || right.empty())
        throw std::invalid_argument("internal node needs two children");
    auto n = std::make_shared<Node>();
    n->size = left.size() + right.size();
    n->left = std::move(left);
    n->right = std::move(right);
    Tree t;
    t.n_ = std::move(n);
    return t;
}

bool Tree::is_leaf() const noexcept { return n_ && n_->label > 0; }

int Tree::label() const
{
    if (!is_leaf())
        throw std::logic_error("label() on a non-leaf");
    return n_->label;
}

const Tree& Tree::left() const
{
    if (!n_ || is_leaf())
        throw std::logic_error("left() on a leaf");
    return n_->left;
}

const Tree& Tree::right() const
{
    if (!n_ || is_leaf())
        throw std::logic_error("right() on a leaf");
    return n_->right;
}

int Tree::size() const noexcept { return n_ ? n_->size : 0; }

std::vector<int> Tree::leaves() const
{
    std::vector<int> out;
    std::function<void(const Tree&)> walk = [&](const Tree& t) {
        if (t.empty())
            return;
        if (t.is_leaf()) {
            out.push_back(t.label());
            return;
        }
        walk(t.left());
        walk(t.right());
    };
    walk(*this);
    return out;
}

bool operator==(const Tree& a, const Tree& b)
{
    if (a.n_ == b.n_)
        return true;
    if (!a.n_ || !b.n_)
        return false;
    if (a.n_->label != b.n_->label || a.n_->size != b.n_->size)
        return false;
    if (a.n_->label > 0)
        return true;
    return a.n_->left == b.n_->left && a.n_->right == b.n_->right;
}

bool operator<(const Tree& a, const Tree& b)
{
    if (a.n_ == b.n_)
        return false;
    if (!a.n_ || !b.n_)
        return !a.n_;
    if (a.is_leaf() != b.is_leaf())
        return a.is_leaf();
    if (a.is_leaf())
        return a.label() < b.label();
    if (a.left() != b.left())
        return a.left() < b.left();
    return a.right() < b.right();
}

void validate(const Tree& t)
{
    auto ls = t.leaves();
    std::sort(ls.begin(), ls.end());
    for (std::size_t i = 0; i < ls.size(); ++i)
        if (ls[i] != static_cast<int>(i) + 1)
            throw std::invalid_argument("leaf labels must be exactly 1.." + std::to_string(ls.size()));
}

TreeMeta tree_meta(const Tree& t)
{
    TreeMeta m;
    if (t.size() < 2) {
        if (t.size() == 1)
            m.rightmost = t.label();
        return m;
    }
    std::function<int(const Tree&)> rightmost = [&](const Tree& s) {
        return s.is_leaf() ? s.label() : rightmost(s.right());
    };
    std::function<int(const Tree&, int, bool)> visit = [&](const Tree& s, int parent, bool is_left) {
        int idx = static_cast<int>(m.vertices.size());
        m.vertices.push_back(Vertex{});
        Vertex v;
        v.subtree = s;
        v.parent = parent;
        v.is_left_child = is_left;
        v.L = rightmost(s.left());
        v.R = rightmost(s.right());
        if (!s.left().is_leaf())
            v.left = visit(s.left(), idx, true);
        if (!s.right().is_leaf())
            v.right = visit(s.right(), idx, false);
        m.vertices[idx] = v;
        return idx;
    };
    m.root = visit(t, -1, false);
    for (std::size_t i = 0; i < m.vertices.size(); ++i)
        if (m.vertices[i].parent >= 0)
            m.edges.push_back(static_cast<int>(i));
    m.rightmost = m.vertices[m.root].R;
    return m;
}

namespace {

Tree relabel(const Tree& t, const std::function<int(int)>& f)
{
    if (t.empty())
        return t;
    if (t.is_leaf())
        return Tree::leaf(f(t.label()));
    return Tree::node(relabel(t.left(), f), relabel(t.right(), f));
}

} // namespace

Tree compose(const Tree& a, int p, const Tree& b)
{
    if (a.empty())
        throw std::invalid_argument("cannot compose into the empty tree");
    int n = a.size();
    if (p < 1 || p > n)
        throw std::out_of_range("composition index " + std::to_string(p) + " outside 1.." + std::to_string(n));
    int m = b.size();
    Tree shifted = relabel(b, [&](int j) { return j + p - 1; });
    std::function<Tree(const Tree&)> go = [&](const Tree& t) -> Tree {
        if (t.is_leaf()) {
            int i = t.label();
            if (i == p)
                return shifted;
            return Tree::leaf(i > p ? i + m - 1 : i);
        }
        Tree l = go(t.left());
        Tree r = go(t.right());
        if (l.empty())
            return r;
        if (r.empty())
            return l;
        return Tree::node(std::move(l), std::move(r));
    };
    return go(a);
}

Tree permute(const Tree& a, const std::vector<int>& g)
{
    int r = a.size();
    if (static_cast<int>(g.size()) != r)
        throw std::invalid_argument("permutation size does not match the tree");
    std::vector<int> seen(r + 1, 0);
    for (int x : g) {
        if (x < 1 || x > r || seen[x]++)
            throw std::invalid_argument("not a permutation of 1.." + std::to_string(r));
    }
    return relabel(a, [&](int i) { return g[i - 1]; });
}

std::vector<int> block_permutation(const std::vector<int>& g, int p, int m)
{
    int n = static_cast<int>(g.size());
    if (p < 1 || p > n)
        throw std::out_of_range("block index out of range");
    int gp = g[p - 1];
    auto adj = [&](int x) { return x < gp ? x : x + m - 1; };
    std::vector<int> out(n + m - 1);
    for (int i = 1; i <= n; ++i) {
        if (i == p)
            continue;
        int label = i < p ? i : i + m - 1;
        out[label - 1] = adj(g[i - 1]);
    }
    for (int j = 1; j <= m; ++j)
        out[p - 1 + j - 1] = gp - 1 + j;
    return out;
}

std::vector<Tree> tree_shapes(int n)
{
    std::function<std::vector<Tree>(int, int)> gen = [&](int first, int count) {
        std::vector<Tree> out;
        if (count == 1) {
            out.push_back(Tree::leaf(first));
            return out;
        }
        for (int k = 1; k < count; ++k)
            for (const auto& l : gen(first, k))
                for (const auto& r : gen(first + k, count - k))
                    out.push_back(Tree::node(l, r));
        return out;
    };
    if (n < 1)
        return {};
    return gen(1, n);
}

std::vector<Tree> all_trees(int r)
{
    std::vector<Tree> out;
    std::vector<int> g(r);
    for (const auto& shape : tree_shapes(r)) {
        std::iota(g.begin(), g.end(), 1);
        do {
            out.push_back(permute(shape, g));
        } while (std::next_permutation(g.begin(), g.end()));
    }
    return out;
}

// ---------------------------------------------------------------- ColoredTree

ColoredTree ColoredTree::closed(int label)
{
    if (label < 1)
        throw std::invalid_argument("leaf label must be positive");
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Closed;
    n->label = label;
    n->closed = 1;
    ColoredTree t;
    t.n_ = std::move(n);
    return t;
}

ColoredTree ColoredTree::open(int label)
{
    if (label < 1)
        throw std::invalid_argument("leaf label must be positive");
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Open;
    n->label = label;
    n->open = 1;
    ColoredTree t;
    t.n_ = std::move(n);
    return t;
}

ColoredTree ColoredTree::node(ColoredTree left, ColoredTree right)
{
    if (left.empty() || right.empty())
        throw std::invalid_argument("internal node needs two children");
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Inner;
    n->closed = left.closed_count() + right.closed_count();
    n->open = left.open_count() + right.open_count();
    n->tau = left.has_tau() || right.has_tau();
    n->left = std::move(left);
    n->right = std::move(right);
    ColoredTree t;
    t.n_ = std::move(n);
    return t;
}

ColoredTree ColoredTree::tau(ColoredTree child)
{
    if (child.empty())
        throw std::invalid_argument("tau needs a child");
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Tau;
    n->closed = child.closed_count();
    n->open = child.open_count();
    n->tau = true;
    n->left = std::move(child);
    ColoredTree t;
    t.n_ = std::move(n);
    return t;
}

NodeKind ColoredTree::kind() const
{
    if (!n_)
        throw std::logic_error("kind() on the empty tree");
    return n_->kind;
}

int ColoredTree::label() const
{
    if (!n_ || (n_->kind != NodeKind::Closed && n_->kind != NodeKind::Open))
        throw std::logic_error("label() on a non-leaf");
    return n_->label;
}

const ColoredTree& ColoredTree::left() const
{
    if (!n_ || n_->kind != NodeKind::Inner)
        throw std::logic_error("left() on a non-inner node");
    return n_->left;
}

const ColoredTree& ColoredTree::right() const
{
    if (!n_ || n_->kind != NodeKind::Inner)
        throw std::logic_error("right() on a non-inner node");
    return n_->right;
}

const ColoredTree& ColoredTree::child() const
{
    if (!n_ || n_->kind != NodeKind::Tau)
        throw std::logic_error("child() on a non-tau node");
    return n_->left;
}

int ColoredTree::closed_count() const noexcept { return n_ ? n_->closed : 0; }
int ColoredTree::open_count() const noexcept { return n_ ? n_->open : 0; }
bool ColoredTree::has_tau() const noexcept { return n_ && n_->tau; }

Color ColoredTree::color() const noexcept
{
    return (has_tau() || open_count() > 0) ? Color::o : Color::c;
}

std::vector<LeafRef> ColoredTree::leaves() const
{
    std::vector<LeafRef> out;
    std::function<void(const ColoredTree&)> walk = [&](const ColoredTree& t) {
        if (t.empty())
            return;
        switch (t.kind()) {
        case NodeKind::Closed:
        case NodeKind::Open:
            out.push_back({t.kind(), t.label()});
            break;
        case NodeKind::Tau:
            walk(t.child());
            break;
        case NodeKind::Inner:
            walk(t.left());
            walk(t.right());
            break;
        }
    };
    walk(*this);
    return out;
}

bool operator==(const ColoredTree& a, const ColoredTree& b)
{
    if (a.n_ == b.n_)
        return true;
    if (!a.n_ || !b.n_)
        return false;
    const auto& x = *a.n_;
    const auto& y = *b.n_;
    if (x.kind != y.kind || x.label != y.label || x.closed != y.closed || x.open != y.open)
        return false;
    return x.left == y.left && x.right == y.right;
}

bool operator<(const ColoredTree& a, const ColoredTree& b)
{
    if (a.n_ == b.n_)
        return false;
    if (!a.n_ || !b.n_)
        return !a.n_;
    const auto& x = *a.n_;
    const auto& y = *b.n_;
    if (x.kind != y.kind)
        return x.kind < y.kind;
    if (x.label != y.label)
        return x.label < y.label;
    if (x.left != y.left)
        return x.left < y.left;
    return x.right < y.right;
}

namespace {

void check_open_structure(const ColoredTree& t, bool under_tau)
{
    switch (t.kind()) {
    case NodeKind::Open:
        if (under_tau)
            throw std::invalid_argument("open leaf below tau");
        return;
    case NodeKind::Closed:
        if (!under_tau)
            throw std::invalid_argument("closed leaf c" + std::to_string(t.label()) + " is not below a tau");
        return;
    case NodeKind::Tau:
        if (under_tau)
            throw std::invalid_argument("nested tau");
        check_open_structure(t.child(), true);
        return;
    case NodeKind::Inner:
        check_open_structure(t.left(), under_tau);
        check_open_structure(t.right(), under_tau);
        return;
    }
}

} // namespace

void validate(const ColoredTree& t)
{
    if (t.empty())
        throw std::invalid_argument("empty colored tree");
    int r = t.closed_count();
    if (t.color() == Color::o)
        check_open_structure(t, false);
    std::vector<int> closed;
    std::vector<int> open;
    for (const auto& l : t.leaves())
        (l.kind == NodeKind::Closed ? closed : open).push_back(l.label);
    std::sort(closed.begin(), closed.end());
    for (std::size_t i = 0; i < closed.size(); ++i)
        if (closed[i] != static_cast<int>(i) + 1)
            throw std::invalid_argument("closed labels must be exactly 1.." + std::to_string(r));
    for (std::size_t j = 0; j < open.size(); ++j)
        if (open[j] != r + static_cast<int>(j) + 1)
            throw std::invalid_argument("open labels must be " + std::to_string(r + 1) + ".." +
                                        std::to_string(r + static_cast<int>(open.size())) +
                                        " increasing left to right");
}

ColoredTree as_colored(const Tree& t)
{
    if (t.empty())
        return {};
    if (t.is_leaf())
        return ColoredTree::closed(t.label());
    return ColoredTree::node(as_colored(t.left()), as_colored(t.right()));
}

Tree as_plain(const ColoredTree& t)
{
    if (t.empty())
        return {};
    switch (t.kind()) {
    case NodeKind::Closed:
        return Tree::leaf(t.label());
    case NodeKind::Inner:
        return Tree::node(as_plain(t.left()), as_plain(t.right()));
    default:
        throw std::invalid_argument("tree is not closed-colored");
    }
}

// ---------------------------------------------------------------- parsing

namespace {

struct Token {
    enum Kind { LParen, RParen, TauOpen, Plain, Closed, Open, End } kind;
    int value = 0;
    std::size_t pos = 0;
};

std::vector<Token> tokenize(const std::string& s)
{
    std::vector<Token> out;
    std::size_t i = 0;
    auto skip = [&] {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i])))
            ++i;
    };
    auto read_int = [&](std::size_t start) {
        skip();
        if (i >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i])))
            throw parse_error("expected a label", i);
        long long v = 0;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
            v = v * 10 + (s[i] - '0');
            if (v > 1000000)
                throw parse_error("label too large", start);
            ++i;
        }
        return static_cast<int>(v);
    };
    for (;;) {
        skip();
        if (i >= s.size())
            break;
        std::size_t start = i;
        char ch = s[i];
        if (ch == '(') {
            out.push_back({Token::LParen, 0, start});
            ++i;
        } else if (ch == ')') {
            out.push_back({Token::RParen, 0, start});
            ++i;
        } else if (ch == 't') {
            ++i;
            skip();
            if (i >= s.size() || s[i] != '(')
                throw parse_error("expected '(' after t", i);
            ++i;
            out.push_back({Token::TauOpen, 0, start});
        } else if (ch == 'c' || ch == 'o') {
            ++i;
            int v = read_int(start);
            out.push_back({ch == 'c' ? Token::Closed : Token::Open, v, start});
        } else if (std::isdigit(static_cast<unsigned char>(ch))) {
            out.push_back({Token::Plain, ch - '0', start});
            ++i;
        } else if (ch == '{') {
            ++i;
            int v = read_int(start);
            skip();
            if (i >= s.size() || s[i] != '}')
                throw parse_error("expected '}'", i);
            ++i;
            out.push_back({Token::Plain, v, start});
        } else {
            throw parse_error(std::string("unexpected character '") + ch + "'", start);
        }
    }
    out.push_back({Token::End, 0, s.size()});
    return out;
}

struct PNode {
    NodeKind kind = NodeKind::Closed;
    bool plain = false;
    int label = 0;
    std::size_t pos = 0;
    std::vector<PNode> kids;
};

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : t_(std::move(toks)) {}

    PNode parse_top()
    {
        PNode n = seq();
        if (peek().kind != Token::End)
            throw parse_error("unexpected token", peek().pos);
        return n;
    }

private:
    const Token& peek() const { return t_[i_]; }

    bool starts_atom() const
    {
        auto k = peek().kind;
        return k == Token::LParen || k == Token::TauOpen || k == Token::Plain || k == Token::Closed ||
               k == Token::Open;
    }

    // one or two atoms
    PNode seq()
    {
        std::size_t pos = peek().pos;
        PNode a = atom();
        if (!starts_atom())
            return a;
        PNode b = atom();
        if (starts_atom())
            throw parse_error("internal nodes need parentheses", peek().pos);
        PNode n;
        n.kind = NodeKind::Inner;
        n.pos = pos;
        n.kids.push_back(std::move(a));
        n.kids.push_back(std::move(b));
        return n;
    }

    PNode atom()
    {
        const Token& tk = peek();
        PNode n;
        n.pos = tk.pos;
        switch (tk.kind) {
        case Token::Plain:
        case Token::Closed:
        case Token::Open:
            n.kind = tk.kind == Token::Open ? NodeKind::Open : NodeKind::Closed;
            n.plain = tk.kind == Token::Plain;
            n.label = tk.value;
            if (n.label < 1)
                throw parse_error("labels start at 1", tk.pos);
            ++i_;
            return n;
        case Token::LParen: {
            ++i_;
            if (!starts_atom())
                throw parse_error("expected a subtree", peek().pos);
            PNode a = atom();
            if (!starts_atom())
                throw parse_error("a parenthesized node needs two subtrees", peek().pos);
            PNode b = atom();
            if (peek().kind != Token::RParen)
                throw parse_error("expected ')'", peek().pos);
            ++i_;
            n.kind = NodeKind::Inner;
            n.kids.push_back(std::move(a));
            n.kids.push_back(std::move(b));
            return n;
        }
        case Token::TauOpen: {
            ++i_;
            if (!starts_atom())
                throw parse_error("expected a subtree inside t(...)", peek().pos);
            PNode c = seq();
            if (peek().kind != Token::RParen)
                throw parse_error("expected ')'", peek().pos);
            ++i_;
            n.kind = NodeKind::Tau;
            n.kids.push_back(std::move(c));
            return n;
        }
        default:
            throw parse_error("expected a subtree", tk.pos);
        }
    }

    std::vector<Token> t_;
    std::size_t i_ = 0;
};

void scan_kinds(const PNode& n, bool& any_plain, bool& any_colored, std::size_t& mix_pos)
{
    if (n.kind == NodeKind::Tau || (n.kind != NodeKind::Inner && !n.plain)) {
        if (!any_colored && any_plain)
            mix_pos = n.pos;
        any_colored = true;
    }
    if (n.kind != NodeKind::Inner && n.kind != NodeKind::Tau && n.plain) {
        if (!any_plain && any_colored)
            mix_pos = n.pos;
        any_plain = true;
    }
    for (const auto& k : n.kids)
        scan_kinds(k, any_plain, any_colored, mix_pos);
}

Tree build_plain(const PNode& n)
{
    if (n.kind == NodeKind::Inner)
        return Tree::node(build_plain(n.kids[0]), build_plain(n.kids[1]));
    return Tree::leaf(n.label);
}

ColoredTree build_colored(const PNode& n)
{
    switch (n.kind) {
    case NodeKind::Inner:
        return ColoredTree::node(build_colored(n.kids[0]), build_colored(n.kids[1]));
    case NodeKind::Tau:
        return ColoredTree::tau(build_colored(n.kids[0]));
    case NodeKind::Open:
        return ColoredTree::open(n.label);
    case NodeKind::Closed:
        return ColoredTree::closed(n.label);
    }
    throw std::logic_error("unreachable");
}

} // namespace

AnyTree parse_tree(const std::string& text)
{
    auto toks = tokenize(text);
    if (toks.size() == 1)
        return Tree{};
    PNode root = Parser(std::move(toks)).parse_top();
    bool any_plain = false, any_colored = false;
    std::size_t mix = 0;
    scan_kinds(root, any_plain, any_colored, mix);
    if (any_plain && any_colored)
        throw parse_error("plain and colored leaves cannot be mixed", mix);
    if (any_plain) {
        Tree t = build_plain(root);
        validate(t);
        return t;
    }
    ColoredTree t = build_colored(root);
    validate(t);
    return t;
}

Tree parse_plain_tree(const std::string& text)
{
    auto t = parse_tree(text);
    if (auto* p = std::get_if<Tree>(&t))
        return *p;
    const auto& c = std::get<ColoredTree>(t);
    if (c.color() == Color::c)
        return as_plain(c);
    throw std::invalid_argument("expected a plain tree");
}

ColoredTree parse_colored_tree(const std::string& text)
{
    auto t = parse_tree(text);
    if (auto* c = std::get_if<ColoredTree>(&t))
        return *c;
    return as_colored(std::get<Tree>(t));
}

namespace {

std::string plain_label(int v)
{
    return v <= 9 ? std::string(1, static_cast<char>('0' + v)) : "{" + std::to_string(v) + "}";
}

std::string plain_atom(const Tree& t)
{
    if (t.is_leaf())
        return plain_label(t.label());
    return "(" + plain_atom(t.left()) + plain_atom(t.right()) + ")";
}

std::string join(const std::string& a, const std::string& b)
{
    if (!a.empty() && !b.empty() && a.back() == ')' && b.front() == '(')
        return a + b;
    return a + " " + b;
}

std::string colored_inner(const ColoredTree& t);

std::string colored_atom(const ColoredTree& t)
{
    switch (t.kind()) {
    case NodeKind::Closed:
        return "c" + std::to_string(t.label());
    case NodeKind::Open:
        return "o" + std::to_string(t.label());
    case NodeKind::Tau:
        return "t(" + colored_inner(t.child()) + ")";
    case NodeKind::Inner:
        return "(" + join(colored_atom(t.left()), colored_atom(t.right())) + ")";
    }
    throw std::logic_error("unreachable");
}

std::string colored_inner(const ColoredTree& t)
{
    if (t.kind() == NodeKind::Inner)
        return join(colored_atom(t.left()), colored_atom(t.right()));
    return colored_atom(t);
}

} // namespace

std::string format_tree(const Tree& t)
{
    if (t.empty())
        return "";
    if (t.is_leaf())
        return plain_label(t.label());
    return plain_atom(t.left()) + plain_atom(t.right());
}

std::string format_tree(const ColoredTree& t)
{
    if (t.empty())
        return "";
    return colored_inner(t);
}

std::string format_tree(const AnyTree& t)
{
    return std::visit([](const auto& x) { return format_tree(x); }, t);
}

// ---------------------------------------------------------------- colored operad

namespace {

ColoredTree relabel(const ColoredTree& t, const std::function<int(int)>& fc,
                    const std::function<int(int)>& fo)
{
    switch (t.kind()) {
    case NodeKind::Closed:
        return ColoredTree::closed(fc(t.label()));
    case NodeKind::Open:
        return ColoredTree::open(fo(t.label()));
    case NodeKind::Tau:
        return ColoredTree::tau(relabel(t.child(), fc, fo));
    case NodeKind::Inner:
        return ColoredTree::node(relabel(t.left(), fc, fo), relabel(t.right(), fc, fo));
    }
    throw std::logic_error("unreachable");
}

ColoredTree substitute(const ColoredTree& t, LeafRef p, const ColoredTree& with)
{
    switch (t.kind()) {
    case NodeKind::Closed:
    case NodeKind::Open:
        return (t.kind() == p.kind && t.label() == p.label) ? with : t;
    case NodeKind::Tau:
        return ColoredTree::tau(substitute(t.child(), p, with));
    case NodeKind::Inner:
        return ColoredTree::node(substitute(t.left(), p, with), substitute(t.right(), p, with));
    }
    throw std::logic_error("unreachable");
}

bool has_leaf(const ColoredTree& t, LeafRef p)
{
    for (const auto& l : t.leaves())
        if (l.kind == p.kind && l.label == p.label)
            return true;
    return false;
}

// open labels renumbered r+1, r+2, ... left to right
ColoredTree renumber_open(const ColoredTree& t, int r)
{
    int next = r;
    std::function<ColoredTree(const ColoredTree&)> go = [&](const ColoredTree& s) -> ColoredTree {
        switch (s.kind()) {
        case NodeKind::Closed:
            return s;
        case NodeKind::Open:
            return ColoredTree::open(++next);
        case NodeKind::Tau:
            return ColoredTree::tau(go(s.child()));
        case NodeKind::Inner: {
            ColoredTree l = go(s.left());
            ColoredTree rr = go(s.right());
            return ColoredTree::node(std::move(l), std::move(rr));
        }
        }
        throw std::logic_error("unreachable");
    };
    return go(t);
}

} // namespace

ColoredTree compose_colored(const ColoredTree& e, LeafRef p, const ColoredTree& x)
{
    validate(e);
    if (x.empty())
        throw std::invalid_argument("cannot insert the empty tree into a colored tree");
    validate(x);
    if (p.kind != NodeKind::Closed && p.kind != NodeKind::Open)
        throw std::invalid_argument("leaf reference must name a closed or open leaf");
    if (!has_leaf(e, p))
        throw std::invalid_argument(std::string("no ") + (p.kind == NodeKind::Closed ? "closed" : "open") +
                                    " leaf " + std::to_string(p.label));
    int r = e.closed_count();
    if (p.kind == NodeKind::Closed) {
        if (x.color() != Color::c)
            throw std::invalid_argument("color mismatch: a closed slot takes a closed tree");
        int t = x.closed_count();
        ColoredTree base = relabel(
            e, [&](int q) { return q > p.label ? q + t - 1 : q; }, [&](int o) { return o + t - 1; });
        ColoredTree ins = relabel(
            x, [&](int q) { return q + p.label - 1; }, [](int o) { return o; });
        return substitute(base, p, ins);
    }
    if (x.color() != Color::o)
        throw std::invalid_argument("color mismatch: an open slot takes an open tree");
    ColoredTree ins = relabel(
        x, [&](int q) { return q + r; }, [](int o) { return o; });
    ColoredTree out = substitute(e, p, ins);
    return renumber_open(out, r + x.closed_count());
}

int doubled_label(int r, LeafRef leaf, bool bar)
{
    if (leaf.kind == NodeKind::Closed)
        return bar ? 2 * leaf.label : 2 * leaf.label - 1;
    if (leaf.kind == NodeKind::Open)
        return 2 * r + (leaf.label - r);
    throw std::invalid_argument("leaf reference must name a closed or open leaf");
}

Tree doubling(const ColoredTree& e)
{
    validate(e);
    if (e.color() != Color::o)
        throw std::invalid_argument("doubling needs an open-colored tree");
    int r = e.closed_count();
    std::function<Tree(const ColoredTree&, bool)> go = [&](const ColoredTree& t, bool bar) -> Tree {
        switch (t.kind()) {
        case NodeKind::Closed:
            return Tree::leaf(doubled_label(r, {NodeKind::Closed, t.label()}, bar));
        case NodeKind::Open:
            return Tree::leaf(doubled_label(r, {NodeKind::Open, t.label()}));
        case NodeKind::Tau:
            return Tree::node(go(t.child(), false), go(t.child(), true));
        case NodeKind::Inner:
            return Tree::node(go(t.left(), bar), go(t.right(), bar));
        }
        throw std::logic_error("unreachable");
    };
    return go(e, false);
}

namespace {

std::vector<ColoredTree> closed_trees_on(const std::vector<int>& labels)
{
    std::vector<ColoredTree> out;
    int n = static_cast<int>(labels.size());
    if (n == 1) {
        out.push_back(ColoredTree::closed(labels[0]));
        return out;
    }
    for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
        std::vector<int> a, b;
        for (int i = 0; i < n; ++i)
            ((mask >> i) & 1u ? a : b).push_back(labels[i]);
        for (const auto& l : closed_trees_on(a))
            for (const auto& r : closed_trees_on(b))
                out.push_back(ColoredTree::node(l, r));
    }
    return out;
}

std::vector<ColoredTree> open_trees_on(const std::vector<int>& closed, int s, int first_open)
{
    std::vector<ColoredTree> out;
    int n = static_cast<int>(closed.size());
    if (n == 0 && s == 1) {
        out.push_back(ColoredTree::open(first_open));
        return out;
    }
    if (s == 0 && n > 0)
        for (const auto& c : closed_trees_on(closed))
            out.push_back(ColoredTree::tau(c));
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        std::vector<int> a, b;
        for (int i = 0; i < n; ++i)
            ((mask >> i) & 1u ? a : b).push_back(closed[i]);
        for (int s1 = 0; s1 <= s; ++s1) {
            if (static_cast<int>(a.size()) + s1 == 0 || static_cast<int>(b.size()) + s - s1 == 0)
                continue;
            auto ls = open_trees_on(a, s1, first_open);
            if (ls.empty())
                continue;
            auto rs = open_trees_on(b, s - s1, first_open + s1);
            for (const auto& l : ls)
                for (const auto& r : rs)
                    out.push_back(ColoredTree::node(l, r));
        }
    }
    return out;
}

} // namespace

std::vector<ColoredTree> all_open_trees(int r, int s)
{
    if (r < 0 || s < 0 || r + s == 0)
        return {};
    std::vector<int> closed(r);
    std::iota(closed.begin(), closed.end(), 1);
    return open_trees_on(closed, s, r + 1);
}

} // namespace bope
