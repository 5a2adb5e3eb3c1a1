#ifndef EXOSERIES_EXPR_HPP
#define EXOSERIES_EXPR_HPP

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <exoseries/common.hpp>
#include <exoseries/laurent.hpp>

namespace exoseries
{

using ParamMap = std::map<std::string, Complex, std::less<>>;

namespace expr
{

enum class NodeKind { constant, param, x, t, y, sum, product, power, negate };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

// Immutable expression node. Sums and products are n-ary.
struct Node {
    NodeKind kind;
    Complex value{};             // constant, bound param value
    std::string name;            // param
    int index = 0;               // y index, or integer exponent for power
    std::vector<NodePtr> children;
};

NodePtr make_constant(Complex c);
NodePtr make_param(std::string name, Complex value);
NodePtr make_x();
NodePtr make_t();
NodePtr make_y(int j);
NodePtr make_sum(std::vector<NodePtr> terms);
NodePtr make_product(std::vector<NodePtr> factors);
NodePtr make_power(NodePtr base, int exponent);
NodePtr make_negate(NodePtr child);

bool structurally_equal(const NodePtr& a, const NodePtr& b);

// Flatten nested sums/products, fold constants, drop neutral elements.
NodePtr simplify(const NodePtr& n);

// Highest y index present, or -1.
int max_y_index(const NodePtr& n);

} // namespace expr

// A polynomial right-hand side F(x, t, y0, ..., yn) with bound parameters.
class OdeExpr
{
  public:
    OdeExpr(expr::NodePtr root, int order_n);

    const expr::NodePtr& root() const noexcept { return root_; }
    int order() const noexcept { return order_; }

    friend bool operator==(const OdeExpr& a, const OdeExpr& b)
    {
        return a.order_ == b.order_ && expr::structurally_equal(a.root_, b.root_);
    }

  private:
    expr::NodePtr root_;
    int order_;
};

// Parse an arbitrary expression (no order requirement).
expr::NodePtr parse_expression(std::string_view text, const ParamMap& params);

// Parse F; order_n is the largest y index, which must be at least 1.
OdeExpr parse_ode(std::string_view text, const ParamMap& params);

// Infix form that reparses to a structurally equal tree.
std::string print(const expr::NodePtr& n);
inline std::string print(const OdeExpr& f) { return print(f.root()); }

struct EvalPoint {
    Complex x{};
    Complex t{};
    std::span<const Complex> y;
};

Complex evaluate(const expr::NodePtr& n, const EvalPoint& at);
inline Complex evaluate(const OdeExpr& f, const EvalPoint& at) { return evaluate(f.root(), at); }

// Symbolic dF/dy_j; the result keeps the order of F.
OdeExpr partial(const OdeExpr& f, int j);

// Monomial c(t) x^r y0^k0 ... yn^kn of the polynomial expansion of F.
struct TaylorTerm {
    int x_power = 0;
    std::vector<int> y_powers;
    LaurentPoly coeff;

    int degree() const;
    friend bool operator==(const TaylorTerm&, const TaylorTerm&) = default;
};

// All monomials with r + sum k_j <= degree_bound (no bound if nullopt),
// sorted by (r, y_powers). Vanishing coefficients are dropped.
std::vector<TaylorTerm> taylor_terms(const OdeExpr& f, std::optional<int> degree_bound = std::nullopt);

// Expansion of an expression in t only (no x, no y) as an exact Laurent
// polynomial.
LaurentPoly expand_in_t(const expr::NodePtr& n);

} // namespace exoseries

#endif
