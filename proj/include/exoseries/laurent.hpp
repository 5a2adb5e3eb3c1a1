#ifndef EXOSERIES_LAURENT_HPP
#define EXOSERIES_LAURENT_HPP

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <exoseries/common.hpp>

namespace exoseries
{

// Weights of the Laurent norm ||f|| = r^{-nu} * sum_l |f_l| R^l, 0 < r < R.
struct NormParams {
    Real r;
    Real R;

    NormParams(Real r_, Real R_) : r(r_), R(R_)
    {
        if (!(r > 0) || !(r < R)) throw Error("laurent", "norm parameters must satisfy 0 < r < R");
    }
};

// Truncated Laurent series in t:
//
//   f = sum_{e = lead}^{precision - 1} c_e t^e + O(t^precision).
//
// Coefficients at exponents below precision() are reliable; precision() ==
// kExact marks an exact Laurent polynomial. The canonical zero has no stored
// coefficients and lead() == 0. Nonzero series always have a nonzero
// coefficient at lead().
class LaurentPoly
{
  public:
    LaurentPoly() = default;
    LaurentPoly(int lead, std::vector<Complex> coeffs, int precision = kExact);

    static LaurentPoly zero(int precision = kExact);
    static LaurentPoly constant(Complex c, int precision = kExact);
    static LaurentPoly monomial(Complex c, int exponent, int precision = kExact);

    bool is_zero() const noexcept { return coeffs_.empty(); }
    bool is_exact() const noexcept { return precision_ >= kExact; }
    int lead() const noexcept { return lead_; }
    // Highest stored exponent; lead() - 1 for the zero series.
    int top() const noexcept { return lead_ + static_cast<int>(coeffs_.size()) - 1; }
    // First exponent that is not reliable.
    int precision() const noexcept { return precision_; }
    // Number of retained t-orders beyond lead (kExact for exact series).
    int trunc_L() const noexcept;
    // Lowest exponent that may carry a nonzero coefficient; for a truncated
    // zero this is its precision.
    int effective_lead() const noexcept { return is_zero() ? precision_ : lead_; }
    std::span<const Complex> coeffs() const noexcept { return coeffs_; }
    Complex leading_coefficient() const;

    // Coefficient of t^e; zero outside the stored range.
    Complex operator[](int e) const noexcept;

    LaurentPoly truncated(int precision) const;
    // Multiplication by t^s.
    LaurentPoly shifted(int s) const;
    Complex eval(Complex t) const;

    LaurentPoly operator-() const;
    LaurentPoly& operator+=(const LaurentPoly& g);
    LaurentPoly& operator-=(const LaurentPoly& g);
    LaurentPoly& operator*=(Complex c);

    friend LaurentPoly operator+(LaurentPoly f, const LaurentPoly& g) { return f += g; }
    friend LaurentPoly operator-(LaurentPoly f, const LaurentPoly& g) { return f -= g; }
    friend LaurentPoly operator*(const LaurentPoly& f, const LaurentPoly& g);
    friend LaurentPoly operator*(LaurentPoly f, Complex c) { return f *= c; }
    friend LaurentPoly operator*(Complex c, LaurentPoly f) { return f *= c; }

    // Structural equality: same lead, precision and coefficients.
    friend bool operator==(const LaurentPoly& f, const LaurentPoly& g) = default;

  private:
    void normalize();
    LaurentPoly& accumulate(const LaurentPoly& g, Real sign);

    int lead_ = 0;
    std::vector<Complex> coeffs_;
    int precision_ = kExact;
};

// Multiplicative inverse. For an exact input the result keeps trunc_L
// orders past its lead; for truncated input the natural window of f is kept
// (further capped by trunc_L if given).
LaurentPoly invert(const LaurentPoly& f, std::optional<int> trunc_L = std::nullopt);

// f * invert(g).
LaurentPoly divide(const LaurentPoly& f, const LaurentPoly& g, std::optional<int> trunc_L = std::nullopt);

// (k_plus_N + i*gamma*delta_t)^j f, delta_t = t d/dt.
LaurentPoly shifted_op(const LaurentPoly& f, int k_plus_N, Real gamma, int j);

// Inverse of shifted_op on each coefficient.
LaurentPoly inverse_shifted_op(const LaurentPoly& f, int k_plus_N, Real gamma, int j);

// Coefficientwise |.| and the majorant of shifted_op (multipliers by modulus).
LaurentPoly abs_coefficients(const LaurentPoly& f);
LaurentPoly abs_shifted_op(const LaurentPoly& f, int k_plus_N, Real gamma, int j);

// Norm of the truncation; a lower bound for the norm of the full series.
// nu = max(0, -lead).
Real norm(const LaurentPoly& f, const NormParams& p);

// Largest coefficient modulus.
Real max_abs(const LaurentPoly& f);

// Lowest exponent with a nonzero coefficient. Throws for the zero series.
int ord0(const LaurentPoly& f);

// True when every stored coefficient of f is at most tol times the matching
// coefficient of the nonnegative majorant.
bool negligible(const LaurentPoly& f, const LaurentPoly& majorant, Real tol);

// One row per exponent: exponent,re,im.
void write_csv(std::ostream& os, const LaurentPoly& f);

std::string to_string(const LaurentPoly& f);

} // namespace exoseries

#endif
