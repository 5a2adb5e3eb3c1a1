#include <exoseries/expr.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace exoseries
{
namespace expr
{

namespace
{

NodePtr make_node(NodeKind kind) { return std::make_shared<Node>(Node{kind, {}, {}, 0, {}}); }

} // namespace

NodePtr make_constant(Complex c)
{
    auto n = std::make_shared<Node>(Node{NodeKind::constant, c, {}, 0, {}});
    return n;
}

NodePtr make_param(std::string name, Complex value)
{
    return std::make_shared<Node>(Node{NodeKind::param, value, std::move(name), 0, {}});
}

NodePtr make_x() { return make_node(NodeKind::x); }
NodePtr make_t() { return make_node(NodeKind::t); }

NodePtr make_y(int j)
{
    if (j < 0) throw Error("expr", "negative y index");
    return std::make_shared<Node>(Node{NodeKind::y, {}, {}, j, {}});
}

NodePtr make_sum(std::vector<NodePtr> terms)
{
    return std::make_shared<Node>(Node{NodeKind::sum, {}, {}, 0, std::move(terms)});
}

NodePtr make_product(std::vector<NodePtr> factors)
{
    return std::make_shared<Node>(Node{NodeKind::product, {}, {}, 0, std::move(factors)});
}

NodePtr make_power(NodePtr base, int exponent)
{
    return std::make_shared<Node>(Node{NodeKind::power, {}, {}, exponent, {std::move(base)}});
}

NodePtr make_negate(NodePtr child)
{
    return std::make_shared<Node>(Node{NodeKind::negate, {}, {}, 0, {std::move(child)}});
}

bool structurally_equal(const NodePtr& a, const NodePtr& b)
{
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind || a->index != b->index || a->children.size() != b->children.size()) return false;
    switch (a->kind) {
    case NodeKind::constant:
        if (a->value != b->value) return false;
        break;
    case NodeKind::param:
        if (a->name != b->name || a->value != b->value) return false;
        break;
    default:
        break;
    }
    for (std::size_t i = 0; i < a->children.size(); ++i)
        if (!structurally_equal(a->children[i], b->children[i])) return false;
    return true;
}

int max_y_index(const NodePtr& n)
{
    int m = n->kind == NodeKind::y ? n->index : -1;
    for (const auto& c : n->children) m = std::max(m, max_y_index(c));
    return m;
}

namespace
{

bool is_const(const NodePtr& n) { return n->kind == NodeKind::constant; }

bool is_symbol_free(const NodePtr& n)
{
    if (n->kind == NodeKind::x || n->kind == NodeKind::t || n->kind == NodeKind::y) return false;
    return std::all_of(n->children.begin(), n->children.end(), is_symbol_free);
}

Complex ipow(Complex z, int e)
{
    Complex acc(1);
    const int a = e < 0 ? -e : e;
    for (int i = 0; i < a; ++i) acc *= z;
    if (e < 0) {
        if (z == Complex{}) throw Error("expr", "division by zero in negative power");
        acc = Complex(1) / acc;
    }
    return acc;
}

} // namespace

NodePtr simplify(const NodePtr& n)
{
    switch (n->kind) {
    case NodeKind::constant:
    case NodeKind::param:
    case NodeKind::x:
    case NodeKind::t:
    case NodeKind::y:
        return n;
    case NodeKind::negate: {
        NodePtr s = simplify(n->children[0]);
        if (is_const(s)) return make_constant(-s->value);
        if (s->kind == NodeKind::negate) return s->children[0];
        if (s->kind == NodeKind::product && is_const(s->children[0])) {
            auto fs = s->children;
            const Complex c = -fs[0]->value;
            if (c == Complex(1)) {
                fs.erase(fs.begin());
                return fs.size() == 1 ? fs[0] : make_product(std::move(fs));
            }
            fs[0] = make_constant(c);
            return make_product(std::move(fs));
        }
        return make_negate(std::move(s));
    }
    case NodeKind::sum: {
        std::vector<NodePtr> out;
        Complex c{};
        std::vector<NodePtr> stack;
        for (const auto& ch : n->children) stack.push_back(simplify(ch));
        for (const auto& s : stack) {
            if (s->kind == NodeKind::sum) {
                for (const auto& g : s->children) {
                    if (is_const(g))
                        c += g->value;
                    else
                        out.push_back(g);
                }
            } else if (is_const(s)) {
                c += s->value;
            } else {
                out.push_back(s);
            }
        }
        if (c != Complex{}) out.push_back(make_constant(c));
        if (out.empty()) return make_constant(Complex{});
        if (out.size() == 1) return out[0];
        return make_sum(std::move(out));
    }
    case NodeKind::product: {
        Complex c(1);
        std::vector<NodePtr> fs;
        std::vector<NodePtr> pending;
        for (const auto& ch : n->children) pending.push_back(simplify(ch));
        while (!pending.empty()) {
            NodePtr s = pending.front();
            pending.erase(pending.begin());
            if (is_const(s)) {
                c *= s->value;
            } else if (s->kind == NodeKind::negate) {
                c = -c;
                pending.insert(pending.begin(), s->children[0]);
            } else if (s->kind == NodeKind::product) {
                pending.insert(pending.begin(), s->children.begin(), s->children.end());
            } else {
                fs.push_back(s);
            }
        }
        if (c == Complex{} || fs.empty()) return make_constant(fs.empty() ? c : Complex{});
        NodePtr body = fs.size() == 1 ? fs[0] : make_product(fs);
        if (c == Complex(1)) return body;
        if (c == Complex(-1)) return make_negate(body);
        fs.insert(fs.begin(), make_constant(c));
        return make_product(std::move(fs));
    }
    case NodeKind::power: {
        NodePtr b = simplify(n->children[0]);
        const int e = n->index;
        if (e == 0) return make_constant(Complex(1));
        if (e == 1) return b;
        if (is_const(b)) return make_constant(ipow(b->value, e));
        if (b->kind == NodeKind::power) return make_power(b->children[0], b->index * e);
        return make_power(std::move(b), e);
    }
    }
    return n;
}

} // namespace expr

using namespace expr;

OdeExpr::OdeExpr(NodePtr root, int order_n) : root_(std::move(root)), order_(order_n)
{
    if (!root_) throw Error("expr", "empty expression");
    if (order_ < 1) throw Error("expr", "order 0: the equation contains no derivative y1..yn");
    if (max_y_index(root_) > order_) throw Error("expr", "y index exceeds the declared order");
}

namespace
{

class Parser
{
  public:
    Parser(std::string_view text, const ParamMap& params) : text_(text), params_(params) {}

    NodePtr parse()
    {
        NodePtr e = parse_sum();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
        return e;
    }

  private:
    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

    void skip_ws()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c)
    {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr parse_sum()
    {
        std::vector<NodePtr> terms;
        terms.push_back(parse_term());
        for (;;) {
            if (accept('+')) {
                terms.push_back(parse_term());
            } else if (accept('-')) {
                terms.push_back(make_negate(parse_term()));
            } else {
                break;
            }
        }
        return terms.size() == 1 ? terms[0] : make_sum(std::move(terms));
    }

    NodePtr parse_term()
    {
        std::vector<NodePtr> factors;
        factors.push_back(parse_unary());
        while (accept('*')) factors.push_back(parse_unary());
        return factors.size() == 1 ? factors[0] : make_product(std::move(factors));
    }

    NodePtr parse_unary()
    {
        if (accept('-')) return make_negate(parse_unary());
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    NodePtr parse_power()
    {
        NodePtr base = parse_primary();
        if (!accept('^')) return base;
        skip_ws();
        const std::size_t at = pos_;
        bool negative = false;
        if (accept('-')) {
            negative = true;
        } else {
            accept('+');
        }
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (start == pos_) fail("expected an integer exponent");
        int e = 0;
        auto [p, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, e);
        if (ec != std::errc{} || p != text_.data() + pos_) fail("exponent out of range");
        if (negative) {
            e = -e;
            if (base->kind != NodeKind::t && !is_symbol_free(base)) {
                pos_ = at;
                fail("negative powers are only allowed on t or on constants");
            }
        }
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '^') fail("chained powers need parentheses");
        return make_power(std::move(base), e);
    }

    NodePtr parse_primary()
    {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = parse_sum();
            if (!accept(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        fail("unexpected character '" + std::string(1, c) + "'");
    }

    NodePtr parse_number()
    {
        const std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        };
        digits();
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            digits();
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t q = pos_ + 1;
            if (q < text_.size() && (text_[q] == '+' || text_[q] == '-')) ++q;
            if (q < text_.size() && std::isdigit(static_cast<unsigned char>(text_[q]))) {
                pos_ = q;
                digits();
            }
        }
        const std::string lit(text_.substr(start, pos_ - start));
        std::istringstream is(lit);
        Real v{};
        is >> v;
        if (!is || !is.eof() || lit == ".") {
            pos_ = start;
            fail("malformed number '" + lit + "'");
        }
        return make_constant(Complex(v));
    }

    NodePtr parse_identifier()
    {
        const std::size_t start = pos_;
        while (pos_ < text_.size()
               && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const std::string_view id = text_.substr(start, pos_ - start);
        if (id == "x") return make_x();
        if (id == "t") return make_t();
        if (id.size() >= 2 && id[0] == 'y'
            && std::all_of(id.begin() + 1, id.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
            int j = 0;
            auto [p, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), j);
            if (ec != std::errc{}) {
                pos_ = start;
                fail("y index out of range");
            }
            return make_y(j);
        }
        if (id == "i") {
            pos_ = start;
            fail("'i' is not an identifier; bind complex values through parameters");
        }
        auto it = params_.find(id);
        if (it == params_.end()) {
            pos_ = start;
            fail("unknown symbol '" + std::string(id) + "'");
        }
        return make_param(std::string(id), it->second);
    }

    std::string_view text_;
    const ParamMap& params_;
    std::size_t pos_ = 0;
};

bool reserved_name(std::string_view s)
{
    if (s == "x" || s == "t" || s == "i") return true;
    return s.size() >= 2 && s[0] == 'y'
           && std::all_of(s.begin() + 1, s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

} // namespace

NodePtr parse_expression(std::string_view text, const ParamMap& params)
{
    for (const auto& [name, value] : params) {
        if (reserved_name(name)) throw Error("parse", "parameter name '" + name + "' is reserved");
        if (name.empty() || !(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_'))
            throw Error("parse", "invalid parameter name '" + name + "'");
        if (!std::isfinite(value.real()) || !std::isfinite(value.imag()))
            throw Error("parse", "parameter '" + name + "' is not finite");
    }
    return Parser(text, params).parse();
}

OdeExpr parse_ode(std::string_view text, const ParamMap& params)
{
    NodePtr root = parse_expression(text, params);
    const int n = max_y_index(root);
    if (n < 1) throw ParseError("order 0: the equation must contain y1..yn", 0);
    return OdeExpr(std::move(root), n);
}

namespace
{

std::string format_real(Real v)
{
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) {
        std::ostringstream os;
        os.precision(std::numeric_limits<Real>::max_digits10);
        os << v;
        return os.str();
    }
    return std::string(buf, p);
}

void print_node(std::ostringstream& os, const NodePtr& n);

void print_wrapped(std::ostringstream& os, const NodePtr& n, bool wrap)
{
    if (wrap) os << '(';
    print_node(os, n);
    if (wrap) os << ')';
}

void print_node(std::ostringstream& os, const NodePtr& n)
{
    switch (n->kind) {
    case NodeKind::constant: {
        const Complex v = n->value;
        if (v.imag() != 0) {
            // only produced by folding complex parameters; not reparseable
            os << '(' << format_real(v.real()) << (v.imag() < 0 ? " - " : " + ") << format_real(std::abs(v.imag()))
               << "*I)";
        } else if (v.real() < 0) {
            os << "(-" << format_real(-v.real()) << ')';
        } else {
            os << format_real(v.real());
        }
        break;
    }
    case NodeKind::param:
        os << n->name;
        break;
    case NodeKind::x:
        os << 'x';
        break;
    case NodeKind::t:
        os << 't';
        break;
    case NodeKind::y:
        os << 'y' << n->index;
        break;
    case NodeKind::sum:
        for (std::size_t i = 0; i < n->children.size(); ++i) {
            const auto& c = n->children[i];
            if (i == 0) {
                print_wrapped(os, c, c->kind == NodeKind::sum);
            } else if (c->kind == NodeKind::negate) {
                os << " - ";
                // "a - (b + c)" keeps the inner sum intact
                print_wrapped(os, c->children[0], c->children[0]->kind == NodeKind::sum);
            } else {
                os << " + ";
                print_wrapped(os, c, c->kind == NodeKind::sum);
            }
        }
        break;
    case NodeKind::product:
        for (std::size_t i = 0; i < n->children.size(); ++i) {
            if (i) os << '*';
            const auto& c = n->children[i];
            print_wrapped(os, c, c->kind == NodeKind::sum || c->kind == NodeKind::product);
        }
        break;
    case NodeKind::power: {
        const auto& b = n->children[0];
        const bool atomic = b->kind == NodeKind::param || b->kind == NodeKind::x || b->kind == NodeKind::t
                            || b->kind == NodeKind::y || (b->kind == NodeKind::constant && b->value.imag() == 0 && b->value.real() >= 0);
        print_wrapped(os, b, !atomic);
        os << '^' << n->index;
        break;
    }
    case NodeKind::negate: {
        const auto& c = n->children[0];
        os << '-';
        print_wrapped(os, c, c->kind == NodeKind::sum || c->kind == NodeKind::product);
        break;
    }
    }
}

} // namespace

std::string print(const NodePtr& n)
{
    std::ostringstream os;
    print_node(os, n);
    return os.str();
}

Complex evaluate(const NodePtr& n, const EvalPoint& at)
{
    switch (n->kind) {
    case NodeKind::constant:
    case NodeKind::param:
        return n->value;
    case NodeKind::x:
        return at.x;
    case NodeKind::t:
        return at.t;
    case NodeKind::y:
        if (static_cast<std::size_t>(n->index) >= at.y.size()) throw Error("expr", "evaluation point lacks y" + std::to_string(n->index));
        return at.y[static_cast<std::size_t>(n->index)];
    case NodeKind::sum: {
        Complex s{};
        for (const auto& c : n->children) s += evaluate(c, at);
        return s;
    }
    case NodeKind::product: {
        Complex p(1);
        for (const auto& c : n->children) p *= evaluate(c, at);
        return p;
    }
    case NodeKind::power:
        return ipow(evaluate(n->children[0], at), n->index);
    case NodeKind::negate:
        return -evaluate(n->children[0], at);
    }
    return {};
}

namespace
{

NodePtr derive(const NodePtr& n, int j)
{
    switch (n->kind) {
    case NodeKind::constant:
    case NodeKind::param:
    case NodeKind::x:
    case NodeKind::t:
        return make_constant(Complex{});
    case NodeKind::y:
        return make_constant(Complex(n->index == j ? 1 : 0));
    case NodeKind::sum: {
        std::vector<NodePtr> terms;
        for (const auto& c : n->children) terms.push_back(derive(c, j));
        return make_sum(std::move(terms));
    }
    case NodeKind::product: {
        std::vector<NodePtr> terms;
        for (std::size_t i = 0; i < n->children.size(); ++i) {
            std::vector<NodePtr> fs = n->children;
            fs[i] = derive(n->children[i], j);
            terms.push_back(make_product(std::move(fs)));
        }
        return make_sum(std::move(terms));
    }
    case NodeKind::power: {
        const auto& b = n->children[0];
        return make_product({make_constant(Complex(static_cast<Real>(n->index))), make_power(b, n->index - 1), derive(b, j)});
    }
    case NodeKind::negate:
        return make_negate(derive(n->children[0], j));
    }
    return make_constant(Complex{});
}

} // namespace

OdeExpr partial(const OdeExpr& f, int j)
{
    if (j < 0 || j > f.order()) throw Error("expr", "partial: index " + std::to_string(j) + " out of range");
    return OdeExpr(simplify(derive(f.root(), j)), f.order());
}

int TaylorTerm::degree() const
{
    int d = x_power;
    for (int k : y_powers) d += k;
    return d;
}

namespace
{

// key = (r, k_0, ..., k_n); coefficient is a Laurent polynomial in t
using Key = std::vector<int>;
using Poly = std::map<Key, LaurentPoly>;

int key_degree(const Key& k)
{
    int d = 0;
    for (int v : k) d += v;
    return d;
}

void add_into(Poly& p, const Key& k, const LaurentPoly& c)
{
    auto [it, inserted] = p.emplace(k, c);
    if (!inserted) {
        it->second += c;
        if (it->second.is_zero()) p.erase(it);
    } else if (c.is_zero()) {
        p.erase(it);
    }
}

Poly poly_mul(const Poly& a, const Poly& b, std::optional<int> bound)
{
    Poly out;
    for (const auto& [ka, ca] : a) {
        for (const auto& [kb, cb] : b) {
            Key k(ka.size());
            for (std::size_t i = 0; i < k.size(); ++i) k[i] = ka[i] + kb[i];
            if (bound && key_degree(k) > *bound) continue;
            add_into(out, k, ca * cb);
        }
    }
    return out;
}

Poly expand(const NodePtr& n, std::size_t width, std::optional<int> bound)
{
    const Key zero(width, 0);
    switch (n->kind) {
    case NodeKind::constant:
    case NodeKind::param: {
        Poly p;
        add_into(p, zero, LaurentPoly::constant(n->value));
        return p;
    }
    case NodeKind::x: {
        Key k = zero;
        k[0] = 1;
        if (bound && *bound < 1) return {};
        return Poly{{k, LaurentPoly::constant(Complex(1))}};
    }
    case NodeKind::t:
        return Poly{{zero, LaurentPoly::monomial(Complex(1), 1)}};
    case NodeKind::y: {
        if (static_cast<std::size_t>(n->index) + 1 >= width) throw Error("expr", "y index exceeds expansion width");
        Key k = zero;
        k[static_cast<std::size_t>(n->index) + 1] = 1;
        if (bound && *bound < 1) return {};
        return Poly{{k, LaurentPoly::constant(Complex(1))}};
    }
    case NodeKind::sum: {
        Poly p;
        for (const auto& c : n->children)
            for (const auto& [k, v] : expand(c, width, bound)) add_into(p, k, v);
        return p;
    }
    case NodeKind::product: {
        Poly p{{zero, LaurentPoly::constant(Complex(1))}};
        for (const auto& c : n->children) {
            p = poly_mul(p, expand(c, width, bound), bound);
            if (p.empty()) break;
        }
        return p;
    }
    case NodeKind::power: {
        const int e = n->index;
        Poly base = expand(n->children[0], width, bound);
        if (e < 0) {
            if (base.size() != 1 || base.begin()->first != zero || base.begin()->second.coeffs().size() != 1)
                throw Error("expr", "non-expandable node at origin: negative power of a non-monomial");
            const LaurentPoly& c = base.begin()->second;
            Complex v = ipow(c.leading_coefficient(), e);
            return Poly{{zero, LaurentPoly::monomial(v, c.lead() * e)}};
        }
        Poly acc{{zero, LaurentPoly::constant(Complex(1))}};
        Poly sq = base;
        int m = e;
        while (m > 0) {
            if (m & 1) acc = poly_mul(acc, sq, bound);
            m >>= 1;
            if (m) sq = poly_mul(sq, sq, bound);
        }
        return acc;
    }
    case NodeKind::negate: {
        Poly p = expand(n->children[0], width, bound);
        for (auto& [k, v] : p) v = -v;
        return p;
    }
    }
    return {};
}

} // namespace

std::vector<TaylorTerm> taylor_terms(const OdeExpr& f, std::optional<int> degree_bound)
{
    const std::size_t width = static_cast<std::size_t>(f.order()) + 2;
    Poly p = expand(f.root(), width, degree_bound);
    std::vector<TaylorTerm> out;
    out.reserve(p.size());
    for (auto& [k, c] : p) {
        if (c.is_zero()) continue;
        TaylorTerm term;
        term.x_power = k[0];
        term.y_powers.assign(k.begin() + 1, k.end());
        term.coeff = c;
        out.push_back(std::move(term));
    }
    return out;
}

LaurentPoly expand_in_t(const NodePtr& n)
{
    const int ny = max_y_index(n);
    const std::size_t width = static_cast<std::size_t>(std::max(ny, 0)) + 2;
    Poly p = expand(n, width, std::nullopt);
    LaurentPoly out;
    for (const auto& [k, c] : p) {
        if (key_degree(k) != 0) throw Error("expr", "expression depends on x or y; only t is allowed here");
        out += c;
    }
    return out;
}

} // namespace exoseries
