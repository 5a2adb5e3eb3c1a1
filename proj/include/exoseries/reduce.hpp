#ifndef EXOSERIES_REDUCE_HPP
#define EXOSERIES_REDUCE_HPP

#include <optional>
#include <vector>

#include <exoseries/common.hpp>
#include <exoseries/exotic.hpp>
#include <exoseries/expr.hpp>
#include <exoseries/laurent.hpp>

namespace exoseries
{

// The linearization along the prefix does not have the required Fuchsian
// shape (ord0 a_j < ord0 a_n, or a_n missing at the common grade).
class ConditionViolated : public Error
{
  public:
    explicit ConditionViolated(const std::string& what) : Error("reduce", what) {}
};

// The substitution y = phi_N + x^N u did not produce the reduced form;
// offending_order is the x-grade (before division by x^{m+N}) that fails.
class ReductionError : public Error
{
  public:
    ReductionError(const std::string& what, int offending_order)
        : Error("reduce", what), offending_order_(offending_order)
    {
    }
    int offending_order() const noexcept { return offending_order_; }

  private:
    int offending_order_;
};

// Leading x-power m shared by the dF/dy_j along the prefix, and their
// grade-m Laurent coefficients (zero for derivatives starting later).
struct LeadingData {
    int m = 0;
    std::vector<LaurentPoly> a;
    std::vector<std::optional<int>> first_grade;

    int order() const { return static_cast<int>(a.size()) - 1; }
};

LeadingData leading_data(const OdeExpr& f, const ExoticSeries& prefix, const Tolerances& tol = default_tolerances());

// a_j(0) after dividing by a_n; requires ord0 a_j >= ord0 a_n.
std::vector<Complex> indicial_coefficients(const LeadingData& lead);

// Roots of sum_j a_j(0) z^j (monic of degree n).
std::vector<Complex> indicial_roots(const std::vector<Complex>& coefficients);

struct RootDistance {
    int k;
    Real min_distance;  // over the n roots lambda of P, distance to Z
};

struct NChoice {
    int N = 0;
    std::vector<Complex> zeta;            // roots in z = k + N + i gamma lambda
    std::vector<RootDistance> per_k;      // k = 1 .. checked_through
    int checked_through = 0;              // explicit check range (>= k_max)
    bool asymptotic_ok = false;           // roots drift away from R beyond it
    std::vector<int> rejected;            // N values that failed the root test
    bool admissible = false;
};

// Distance from the roots of P(lambda) = sum a_j(0)(k+N+i gamma lambda)^j
// to the integers, for one (k, N).
Real min_root_distance(const std::vector<Complex>& zeta, int k, int N, Real gamma);

// Smallest N >= N_min (default m + 1) such that P has no root within
// root_tol of an integer for every k >= 1.
NChoice choose_N(const LeadingData& lead, int k_max, Real gamma, std::optional<int> N_min = std::nullopt,
                 Real root_tol = default_tolerances().root_tol);

// Root test at a fixed N.
NChoice test_N(const LeadingData& lead, int k_max, Real gamma, int N,
                              Real root_tol = default_tolerances().root_tol);

// Data of  sum_j a_j(t) (delta+N)^j u = x M(x, t, u, delta u, ..., delta^n u)
// with a_n == 1. Each M term c(t) x^r u_0^k0 ... u_n^kn is stored as a
// TaylorTerm whose y_powers are the u exponents.
struct ReducedEquation {
    Real gamma = 1;
    int N = 0;
    int m = 0;
    int mu = 0;
    std::vector<LaurentPoly> a;       // normalized
    std::vector<LaurentPoly> raw_a;   // before division by a_n
    std::vector<TaylorTerm> M;

    int order() const { return static_cast<int>(a.size()) - 1; }
};

struct ReduceOptions {
    Tolerances tol = default_tolerances();
    // t-window used when an exact non-monomial a_n has to be inverted
    int t_window = 64;
};

// N together with the largest N the prefix supports,
// N_sup = val F(x, prefix) - m - 1. When the smallest admissible N > m
// exceeds N_sup, N = m is used if its roots are admissible (relaxed); the
// reduced form is then verified explicitly by reduce().
struct NPlan {
    NChoice roots;
    int N = 0;
    int N_sup = 0;
    int residual_valuation = 0;
    bool relaxed = false;
};

NPlan plan_N(const OdeExpr& f, const ExoticSeries& prefix, const LeadingData& lead, int k_max,
             const Tolerances& tol = default_tolerances());

// Reduction along y = phi_N + x^N u where phi_N is the prefix
// cut at grade N and taken as an exact finite sum. The valuation
// precondition val F(x, Phi_N) >= m + N + 1 is verified.
ReducedEquation reduce(const OdeExpr& f, const ExoticSeries& prefix, int N, const ReduceOptions& opts = {});

// Residual valuation of F along a finite exotic sum, via a majorant test.
Valuation residual_valuation(const OdeExpr& f, const ExoticSeries& y, std::optional<int> out_k_max,
                             Real rel_tol = default_tolerances().residual_tol);

// Drop coefficients of value that are negligible against the majorant.
LaurentPoly clean(const LaurentPoly& value, const LaurentPoly& majorant, Real rel_tol);

} // namespace exoseries

#endif
