#ifndef EXOSERIES_SOLVER_HPP
#define EXOSERIES_SOLVER_HPP

#include <map>
#include <vector>

#include <exoseries/common.hpp>
#include <exoseries/exotic.hpp>
#include <exoseries/laurent.hpp>
#include <exoseries/reduce.hpp>

namespace exoseries
{

struct SolverOptions {
    Tolerances tol = default_tolerances();
    // t-orders kept past the lead when a solve would produce an infinite
    // Laurent series from exact data
    int t_window = 96;
    // bound on ||L_k c_k - rhs_k|| / max(1, ||rhs_k||)
    Real forward_tol = 1e-10;
};

// L_k c = sum_j a_j (k+N+i gamma delta_t)^j c.
LaurentPoly apply_operator(const ReducedEquation& eq, int k, const LaurentPoly& c);

// Unique Laurent solution of L_k c = rhs, by the triangular recurrence in
// the t-exponent. Throws NearResonance when a divisor is below div_tol.
LaurentPoly solve_ck(const ReducedEquation& eq, int k, const LaurentPoly& rhs, const SolverOptions& opts = {});

struct PoleEntry {
    int k;
    int nu;      // max(0, -lead c_k)
    int bound;   // k * mu
};

// Coefficients c_1, c_2, ... of u = sum_k c_k(x^{i gamma}) x^k, with the
// products of delta^j u needed by the right-hand sides cached across k.
class RecursionState
{
  public:
    RecursionState(ReducedEquation eq, NormParams norm, SolverOptions opts = {});

    // Resume from previously solved coefficients c_1 .. c_K0.
    // Without stored error bounds each coefficient is taken as correctly rounded.
    static RecursionState resume(ReducedEquation eq, NormParams norm, SolverOptions opts,
                                 std::vector<LaurentPoly> solved, std::vector<Real> forward = {},
                                 std::vector<LaurentPoly> errors = {});

    const ReducedEquation& equation() const noexcept { return eq_; }
    const NormParams& norm_params() const noexcept { return norm_; }
    const SolverOptions& options() const noexcept { return opts_; }
    int solved_through() const noexcept { return static_cast<int>(c_.size()); }

    const LaurentPoly& c(int k) const;
    // right-hand side x^{k-1} coefficient of M along the solved part
    LaurentPoly rhs(int k);
    Real forward_residual(int k) const;
    // Coefficientwise bound on the accumulated rounding error of c_k.
    const LaurentPoly& error_bound(int k) const;

    void extend(int K);

    ExoticSeries psi() const;
    std::vector<PoleEntry> pole_profile() const;

  private:
    // value, coefficientwise modulus majorant and absolute error bound
    struct Tracked {
        LaurentPoly v, a, e;
    };

    Tracked product(const std::vector<int>& key, int s);
    const Tracked& dpsi(int j, int l);
    Tracked build_rhs(int k);

    ReducedEquation eq_;
    NormParams norm_;
    SolverOptions opts_;
    std::vector<LaurentPoly> c_;
    std::vector<LaurentPoly> err_;
    std::vector<Real> forward_;
    std::map<int, LaurentPoly> rhs_cache_;
    std::vector<std::map<int, Tracked>> dpsi_;
    std::map<std::vector<int>, std::map<int, Tracked>> products_;
};

RecursionState solve_through(ReducedEquation eq, int K, NormParams norm, SolverOptions opts = {});

// y = phi_N + x^N psi: the prefix cut at grade N plus the solved tail.
ExoticSeries assemble(const ExoticSeries& prefix, const RecursionState& state);

} // namespace exoseries

#endif
