#ifndef EXOSERIES_CERTIFY_HPP
#define EXOSERIES_CERTIFY_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <exoseries/common.hpp>
#include <exoseries/exotic.hpp>
#include <exoseries/expr.hpp>
#include <exoseries/reduce.hpp>
#include <exoseries/solver.hpp>

namespace exoseries
{

enum class ConditionStatus { ok, failed, inconclusive };

struct ConditionResult {
    ConditionStatus status = ConditionStatus::inconclusive;
    int m = 0;
    std::vector<std::optional<int>> ord_a;  // nullopt: a_j == 0 at grade m
    std::vector<LaurentPoly> a;
    std::string detail;

    bool ok() const noexcept { return status == ConditionStatus::ok; }
};

// ord0 a_j >= ord0 a_n for every j, with a_n nonzero.
ConditionResult check_condition(const OdeExpr& f, const ExoticSeries& prefix,
                                const Tolerances& tol = default_tolerances());

// Sector in which r < |x^{i gamma}| < R, i.e. arg x between -ln R/gamma and
// -ln r/gamma.
SectorSpec sector_for(Real gamma, const NormParams& norm, Real radius);

// Regenerates the prefix with the requested t-window.
using PrefixSource = std::function<ExoticSeries(int trunc_L)>;
PrefixSource fixed_prefix(ExoticSeries prefix);

struct CertifyConfig {
    int K = 40;
    int L_base = 40;
    NormParams norm{0.1, 0.2};
    Real radius_cap = 1;
    Tolerances tol = default_tolerances();
    int samples = 20;
    Real cauchy_ratio_max = 0.9;
    Real residual_rel_max = 1e-6;
    int max_precision_rounds = 4;
    std::optional<int> initial_trunc;
    bool parallel = true;
};

struct ResumeData {
    int input_trunc = 0;
    std::vector<LaurentPoly> c;
    std::vector<Real> forward;
    std::vector<LaurentPoly> err;
};

enum class Verdict { certified, condition_failed, inconclusive };
std::string to_string(Verdict v);

struct SamplePoint {
    XPoint x{0, 0};
    Complex t{};
    Real residual = 0;        // |F(x, y_K)|
    Real residual_scale = 0;  // sum of the moduli of the monomials of F
    Real cauchy_ratio = 0;    // fitted ratio of |c_k(t) x^{k+N}|
    bool ok = false;
};

struct GrowthCheck {
    int K1 = 0;
    int v1 = 0;
    int K2 = 0;
    int v2 = 0;
    bool ok = false;
};

struct ConvergenceReport {
    Verdict verdict = Verdict::inconclusive;
    ConditionStatus condition = ConditionStatus::inconclusive;
    std::string condition_detail;
    int m = 0;
    std::vector<std::optional<int>> ord_a;
    std::vector<Complex> leading_a;  // coefficient of t^{ord a_j} in a_j

    int N = 0;
    int N_sup = 0;
    bool relaxed_N = false;
    std::vector<Complex> zeta;
    std::vector<RootDistance> root_distances;
    int roots_checked_through = 0;
    bool asymptotic_ok = false;
    int mu = 0;

    int K = 0;
    int L_base = 0;
    int input_trunc = 0;
    int min_precision = 0;
    bool precision_ok = false;
    Real gamma = 1;
    Real norm_r = 0;
    Real norm_R = 0;

    std::vector<std::pair<int, Real>> norm_tail;
    Real ratio_estimate = 0;
    // ratio fitted to the norms of |c_k| + rounding bound; the radius uses the larger one
    Real ratio_upper = 0;
    std::vector<Real> sub_ratios;
    bool decay_ok = false;
    Real radius = 0;
    Real arg_lo = 0;
    Real arg_hi = 0;

    GrowthCheck growth;
    std::vector<SamplePoint> samples;
    bool samples_ok = false;
    std::vector<PoleEntry> pole_profile;
    Real max_forward_residual = 0;
    std::vector<std::string> notes;
};

struct CertifyResult {
    ConvergenceReport report;
    std::optional<ExoticSeries> prefix;
    std::optional<ReducedEquation> reduced;
    std::optional<RecursionState> state;
    std::optional<ExoticSeries> solution;
};

// Condition check, choice of N, reduction and the coefficient solve through
// K, raising the prefix t-window until every c_k is reliable through
// t^{L_base}. The report carries no convergence diagnostics yet.
CertifyResult solve_stage(const OdeExpr& f, const PrefixSource& source, const CertifyConfig& config,
                          const std::optional<ResumeData>& resume = std::nullopt);

// solve_stage followed by the residual, decay and pointwise diagnostics.
CertifyResult certify(const OdeExpr& f, const PrefixSource& source, const CertifyConfig& config,
                      const std::optional<ResumeData>& resume = std::nullopt);

// Least-squares ratio exp(slope) of log values[k] over the positive entries
// with k_lo <= k <= k_hi; 0 when fewer than two entries are positive.
Real fitted_ratio(const std::vector<std::pair<int, Real>>& values, int k_lo, int k_hi);

} // namespace exoseries

#endif
