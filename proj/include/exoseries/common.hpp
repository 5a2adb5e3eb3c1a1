#ifndef EXOSERIES_COMMON_HPP
#define EXOSERIES_COMMON_HPP

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace exoseries
{

#if defined(EXOSERIES_LONG_DOUBLE)
using Real = long double;
#else
using Real = double;
#endif

using Complex = std::complex<Real>;

// Sentinel for "no truncation": exact polynomials in t, exact finite
// exotic series. Arithmetic on orders saturates at this value.
inline constexpr int kExact = std::numeric_limits<int>::max() / 4;

inline constexpr int sat_add(int a, int b) noexcept
{
    if (a >= kExact || b >= kExact) return kExact;
    const long long s = static_cast<long long>(a) + b;
    if (s >= kExact) return kExact;
    return static_cast<int>(s);
}

struct Tolerances {
    // Relative cancellation threshold: a coefficient produced by a sum is
    // flushed to zero when |sum| <= zero_tol * (sum of |summands|).
    Real zero_tol = 1e-12;
    // Resonance guard for the Fuchsian solve, relative to |k+N+i*gamma*l|^n.
    Real div_tol = 1e-9;
    // Minimum admissible distance between an indicial root and the integers.
    Real root_tol = 1e-6;
    // Relative threshold against the coefficientwise majorant when testing
    // that a residual grade vanishes.
    Real residual_tol = 1e-10;
};

// Process-wide defaults used by arithmetic that takes no explicit tolerance.
Tolerances& default_tolerances() noexcept;

class Error : public std::runtime_error
{
  public:
    Error(std::string stage, const std::string& what)
        : std::runtime_error(what), stage_(std::move(stage))
    {
    }
    const std::string& stage() const noexcept { return stage_; }

  private:
    std::string stage_;
};

class ParseError : public Error
{
  public:
    ParseError(const std::string& what, std::size_t position)
        : Error("parse", what + " at position " + std::to_string(position)), position_(position)
    {
    }
    std::size_t position() const noexcept { return position_; }

  private:
    std::size_t position_;
};

// Raised when a truncated object cannot deliver the requested order.
class InsufficientReliability : public Error
{
  public:
    InsufficientReliability(const std::string& stage, const std::string& what, int needed)
        : Error(stage, what), needed_(needed)
    {
    }
    int needed() const noexcept { return needed_; }

  private:
    int needed_;
};

class NearResonance : public Error
{
  public:
    NearResonance(int k, int ell, Real magnitude)
        : Error("solver", "near-resonance at (k=" + std::to_string(k) + ", l=" + std::to_string(ell)
                              + "), divisor magnitude " + std::to_string(static_cast<double>(magnitude))
                              + "; N must be re-chosen"),
          k_(k), ell_(ell)
    {
    }
    int k() const noexcept { return k_; }
    int ell() const noexcept { return ell_; }

  private:
    int k_;
    int ell_;
};

class MethodInapplicable : public Error
{
  public:
    explicit MethodInapplicable(const std::string& what) : Error("reduce", what) {}
};

class OutsideDomain : public Error
{
  public:
    explicit OutsideDomain(const std::string& what) : Error("exotic", what) {}
};

} // namespace exoseries

#endif
