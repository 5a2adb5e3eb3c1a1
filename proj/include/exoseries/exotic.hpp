#ifndef EXOSERIES_EXOTIC_HPP
#define EXOSERIES_EXOTIC_HPP

#include <map>
#include <optional>
#include <vector>

#include <exoseries/common.hpp>
#include <exoseries/expr.hpp>
#include <exoseries/laurent.hpp>

namespace exoseries
{

// Truncated exotic series  sum_{k} p_k(x^{i gamma}) x^k.
//
// Grades k_min..k_max are reliable; a grade without a stored term is an
// exact zero. k_max == kExact marks a finite sum whose omitted grades are
// all zero.
class ExoticSeries
{
  public:
    ExoticSeries(Real gamma, int k_min, int k_max);

    static ExoticSeries monomial(Real gamma, int k, LaurentPoly p, int k_max = kExact);

    Real gamma() const noexcept { return gamma_; }
    int k_min() const noexcept { return k_min_; }
    int k_max() const noexcept { return k_max_; }
    const std::map<int, LaurentPoly>& terms() const noexcept { return terms_; }

    // Coefficient of x^k; exact zero for an empty grade.
    LaurentPoly term(int k) const;
    void set(int k, LaurentPoly p);

    bool is_zero() const noexcept { return terms_.empty(); }
    // Lowest grade that may be nonzero: first stored grade, or k_max + 1.
    int effective_valuation() const noexcept;

    ExoticSeries truncated(int k_max) const;

  private:
    Real gamma_;
    int k_min_;
    int k_max_;
    std::map<int, LaurentPoly> terms_;
};

// Open sector {arg_lo < arg x < arg_hi, |x| <= radius}.
struct SectorSpec {
    Real arg_lo;
    Real arg_hi;
    Real radius;

    SectorSpec(Real lo, Real hi, Real rad);
    bool contains_arg(Real arg) const noexcept { return arg_lo < arg && arg < arg_hi; }
};

// A point x = modulus * e^{i arg} on an explicit branch of log x.
struct XPoint {
    Real modulus;
    Real arg;

    Complex value() const { return std::polar(modulus, arg); }
};

// x^{i gamma} = exp(i gamma (ln|x| + i arg x)) on the branch of the point.
Complex exotic_t(const XPoint& x, Real gamma);

ExoticSeries operator+(const ExoticSeries& a, const ExoticSeries& b);
ExoticSeries operator-(const ExoticSeries& a, const ExoticSeries& b);
ExoticSeries operator*(const ExoticSeries& a, Complex c);

// Graded Cauchy product. Grades above cap are neither computed nor
// reported as reliable.
ExoticSeries mul(const ExoticSeries& a, const ExoticSeries& b, int cap = kExact);
inline ExoticSeries operator*(const ExoticSeries& a, const ExoticSeries& b) { return mul(a, b); }

// Multiplication by c(t) x^r.
ExoticSeries scale(const ExoticSeries& a, const LaurentPoly& c, int r);

// delta = x d/dx, acting on p_k(t) x^k as (k + i gamma delta_t).
ExoticSeries delta(const ExoticSeries& a);
ExoticSeries delta_power(const ExoticSeries& a, int j);

// Coefficientwise moduli, and the majorant of delta^j.
ExoticSeries abs_series(const ExoticSeries& a);
ExoticSeries abs_delta_power(const ExoticSeries& a, int j);

// Smallest grade carrying a nonzero Laurent coefficient, or nullopt when
// the series vanishes through k_max (then the valuation is >= k_max + 1).
struct Valuation {
    std::optional<int> value;
    int lower_bound;  // value if present, else k_max + 1

    bool at_least(int v) const noexcept { return lower_bound >= v; }
};

Valuation valuation(const ExoticSeries& a);

// Valuation where a grade counts as zero when it is negligible against the
// same grade of a coefficientwise majorant.
Valuation valuation(const ExoticSeries& a, const ExoticSeries& majorant, Real rel_tol);

// Term k scaled by lambda^{-k}; commutes with delta.
ExoticSeries rescale(const ExoticSeries& a, Real lambda);

// Sum of the stored terms at x; refuses points outside the sector.
Complex eval_at(const ExoticSeries& a, const XPoint& x, const SectorSpec& sector);

// Partial sum of the H^j norm, sum_k ||(k+N+i gamma delta_t)^j p_k||.
struct TruncatedNorm {
    Real value;
    int k_max;        // grades included
    int min_trunc_L;  // smallest t-window among the included terms
};

TruncatedNorm norm_Hj(const ExoticSeries& a, int j, int N, const NormParams& p);

enum class SubstituteMode { value, majorant };

// The exotic series of F(x, t, y, delta y, ..., delta^n y) at y = theta,
// through grade out_k_max (all grades when theta is a finite exact sum and
// out_k_max is nullopt). In majorant mode every coefficient is replaced by
// a nonnegative bound on the sum of the moduli of its contributions.
ExoticSeries substitute(const OdeExpr& f, const ExoticSeries& theta, std::optional<int> out_k_max = std::nullopt,
                        SubstituteMode mode = SubstituteMode::value);

// The same for a pre-expanded polynomial and explicit values y_j.
ExoticSeries substitute_terms(const std::vector<TaylorTerm>& terms, const std::vector<ExoticSeries>& ys, Real gamma,
                              std::optional<int> out_k_max, SubstituteMode mode = SubstituteMode::value);

} // namespace exoseries

#endif
