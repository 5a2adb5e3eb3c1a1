#include <exoseries/certify.hpp>

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>

namespace exoseries
{

std::string to_string(Verdict v)
{
    switch (v) {
    case Verdict::certified: return "certified";
    case Verdict::condition_failed: return "condition-failed";
    case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

ConditionResult check_condition(const OdeExpr& f, const ExoticSeries& prefix, const Tolerances& tol)
{
    ConditionResult out;
    LeadingData lead;
    try {
        lead = leading_data(f, prefix, tol);
    } catch (const MethodInapplicable& e) {
        out.status = ConditionStatus::failed;
        out.detail = e.what();
        return out;
    } catch (const InsufficientReliability& e) {
        out.status = ConditionStatus::inconclusive;
        out.detail = e.what();
        return out;
    }
    out.m = lead.m;
    out.a = lead.a;
    for (const auto& a : lead.a) out.ord_a.push_back(a.is_zero() ? std::nullopt : std::optional<int>(ord0(a)));

    const auto& ord_n = out.ord_a.back();
    if (!ord_n) {
        out.status = ConditionStatus::failed;
        out.detail = "a_n vanishes at grade m";
        return out;
    }
    out.status = ConditionStatus::ok;
    for (std::size_t j = 0; j + 1 < out.ord_a.size(); ++j) {
        const auto& o = out.ord_a[j];
        if (o && *o < *ord_n) {
            out.status = ConditionStatus::failed;
            out.detail = "ord0 a_" + std::to_string(j) + " = " + std::to_string(*o) + " < ord0 a_n = " + std::to_string(*ord_n);
            return out;
        }
        if (!o && lead.a[j].precision() <= *ord_n) {
            out.status = ConditionStatus::inconclusive;
            out.detail = "a_" + std::to_string(j) + " is not resolved through t^" + std::to_string(*ord_n);
        }
    }
    return out;
}

SectorSpec sector_for(Real gamma, const NormParams& norm, Real radius)
{
    if (gamma == 0) throw Error("certify", "gamma must be nonzero");
    const Real a = -std::log(norm.R) / gamma;
    const Real b = -std::log(norm.r) / gamma;
    if (!(std::abs(b - a) < 2 * std::numbers::pi_v<Real>))
        throw Error("certify", "annulus r < |t| < R corresponds to a sector opening >= 2*pi; choose R/r closer to 1");
    return SectorSpec(std::min(a, b), std::max(a, b), radius);
}

PrefixSource fixed_prefix(ExoticSeries prefix)
{
    return [p = std::move(prefix)](int) { return p; };
}

Real fitted_ratio(const std::vector<std::pair<int, Real>>& values, int k_lo, int k_hi)
{
    Real sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (const auto& [k, v] : values) {
        if (k < k_lo || k > k_hi || !(v > 0)) continue;
        const Real y = std::log(v);
        sx += k;
        sy += y;
        sxx += Real(k) * k;
        sxy += Real(k) * y;
        ++count;
    }
    if (count < 2) return 0;
    const Real den = count * sxx - sx * sx;
    if (den == 0) return 0;
    return std::exp((count * sxy - sx * sy) / den);
}

namespace
{

ExoticSeries exact_in_x(const ExoticSeries& y)
{
    ExoticSeries out(y.gamma(), y.k_min(), kExact);
    for (const auto& [k, p] : y.terms()) out.set(k, p);
    return out;
}

struct PointEvaluator {
    const OdeExpr& f;
    const std::vector<TaylorTerm>& terms;
    const std::vector<ExoticSeries>& dy;  // delta^j of the solution
    const ExoticSeries& psi;
    const SectorSpec& sector;
    int N;
    int K;

    SamplePoint operator()(const XPoint& x, Real ratio_max, Real residual_max) const
    {
        SamplePoint s;
        s.x = x;
        s.t = exotic_t(x, psi.gamma());
        std::vector<Complex> ys;
        for (const auto& d : dy) ys.push_back(eval_at(d, x, sector));
        const Complex xv = x.value();
        s.residual = std::abs(evaluate(f, EvalPoint{xv, s.t, ys}));
        for (const auto& term : terms) {
            Real m = std::abs(term.coeff.eval(s.t)) * std::pow(x.modulus, term.x_power);
            for (std::size_t j = 0; j < term.y_powers.size(); ++j) m *= std::pow(std::abs(ys[j]), term.y_powers[j]);
            s.residual_scale += m;
        }
        std::vector<std::pair<int, Real>> sizes;
        for (const auto& [k, p] : psi.terms()) sizes.emplace_back(k, std::abs(p.eval(s.t)) * std::pow(x.modulus, k + N));
        s.cauchy_ratio = fitted_ratio(sizes, std::max(1, K / 2), K);
        s.ok = s.cauchy_ratio < ratio_max && s.residual <= residual_max * s.residual_scale;
        return s;
    }
};

std::vector<XPoint> sample_points(const SectorSpec& sector, int count)
{
    std::vector<XPoint> pts;
    const Real lo = sector.radius / 100;
    const Real hi = sector.radius / 2;
    const Real width = sector.arg_hi - sector.arg_lo;
    for (int i = 0; i < count; ++i) {
        const Real u = count == 1 ? Real(0.5) : Real(i) / Real(count - 1);
        const Real v = count == 1 ? Real(0.5) : Real((i * 7) % count) / Real(count - 1);
        pts.push_back({lo * std::pow(hi / lo, u), sector.arg_lo + width * (Real(0.1) + Real(0.8) * v)});
    }
    return pts;
}

} // namespace

CertifyResult solve_stage(const OdeExpr& f, const PrefixSource& source, const CertifyConfig& config,
                          const std::optional<ResumeData>& resume)
{
    if (config.K < 1) throw Error("certify", "K must be at least 1");
    if (config.L_base < 0) throw Error("certify", "L_base must be nonnegative");

    CertifyResult result;
    ConvergenceReport& rep = result.report;
    rep.K = config.K;
    rep.L_base = config.L_base;
    rep.norm_r = config.norm.r;
    rep.norm_R = config.norm.R;

    SolverOptions sopts;
    sopts.tol = config.tol;
    ReduceOptions ropts;
    ropts.tol = config.tol;

    int trunc = resume ? resume->input_trunc : config.initial_trunc.value_or(config.L_base + config.K + 8);
    bool use_resume = resume.has_value();
    for (int round = 0;; ++round) {
        ExoticSeries prefix = source(trunc);
        rep.gamma = prefix.gamma();
        rep.input_trunc = trunc;

        const ConditionResult cond = check_condition(f, prefix, config.tol);
        rep.condition = cond.status;
        rep.condition_detail = cond.detail;
        rep.m = cond.m;
        rep.ord_a = cond.ord_a;
        rep.leading_a.clear();
        for (const auto& a : cond.a) rep.leading_a.push_back(a.is_zero() ? Complex{} : a.leading_coefficient());
        if (!cond.ok()) {
            rep.verdict = cond.status == ConditionStatus::failed ? Verdict::condition_failed : Verdict::inconclusive;
            result.prefix = std::move(prefix);
            return result;
        }

        const LeadingData lead = leading_data(f, prefix, config.tol);
        const NPlan plan = plan_N(f, prefix, lead, config.K, config.tol);
        rep.N = plan.N;
        rep.N_sup = plan.N_sup;
        rep.relaxed_N = plan.relaxed;
        rep.zeta = plan.roots.zeta;
        rep.root_distances = plan.roots.per_k;
        rep.roots_checked_through = plan.roots.checked_through;
        rep.asymptotic_ok = plan.roots.asymptotic_ok;

        ReducedEquation eq = reduce(f, prefix, plan.N, ropts);
        rep.mu = eq.mu;

        RecursionState state = use_resume
                                   ? RecursionState::resume(eq, config.norm, sopts, resume->c, resume->forward, resume->err)
                                   : RecursionState(eq, config.norm, sopts);
        use_resume = false;
        if (state.solved_through() > config.K) {
            std::vector<LaurentPoly> cut, cut_err;
            std::vector<Real> cut_fw;
            for (int k = 1; k <= config.K; ++k) {
                cut.push_back(state.c(k));
                cut_fw.push_back(state.forward_residual(k));
                cut_err.push_back(state.error_bound(k));
            }
            state = RecursionState::resume(eq, config.norm, sopts, std::move(cut), std::move(cut_fw), std::move(cut_err));
        }
        state.extend(config.K);

        int min_prec = kExact;
        for (int k = 1; k <= config.K; ++k) min_prec = std::min(min_prec, state.c(k).precision());
        rep.min_precision = min_prec;
        rep.precision_ok = min_prec >= config.L_base + 1;

        result.prefix = std::move(prefix);
        result.reduced = std::move(eq);
        result.state = std::move(state);
        if (rep.precision_ok || round + 1 >= config.max_precision_rounds) break;
        const int next = trunc + (config.L_base + 1 - min_prec) + 4;
        // a source that ignores the requested window cannot do better
        if (source(next).terms() == result.prefix->terms()) break;
        trunc = next;
    }
    if (!rep.precision_ok)
        rep.notes.push_back("coefficients reliable only through t^" + std::to_string(rep.min_precision - 1)
                            + ", below L_base");
    if (rep.relaxed_N)
        rep.notes.push_back("N = m: the prefix does not support N = m + 1; the reduced form was verified directly");
    result.solution = assemble(*result.prefix, *result.state);
    return result;
}

CertifyResult certify(const OdeExpr& f, const PrefixSource& source, const CertifyConfig& config,
                      const std::optional<ResumeData>& resume)
{
    CertifyResult result = solve_stage(f, source, config, resume);
    ConvergenceReport& rep = result.report;
    if (!result.state) return result;

    const RecursionState& state = *result.state;
    const ReducedEquation& eq = *result.reduced;
    rep.pole_profile = state.pole_profile();
    for (int k = 1; k <= config.K; ++k) {
        const Real fr = state.forward_residual(k);
        if (std::isfinite(fr)) rep.max_forward_residual = std::max(rep.max_forward_residual, fr);
    }

    // residual valuation at K/2 and K
    {
        const ExoticSeries& full = *result.solution;
        GrowthCheck& g = rep.growth;
        g.K1 = std::max(1, config.K / 2);
        g.K2 = config.K;
        const int base = eq.m + eq.N;
        g.v1 = residual_valuation(f, exact_in_x(full.truncated(eq.N + g.K1)), base + g.K1 + 1, config.tol.residual_tol)
                   .lower_bound;
        g.v2 = residual_valuation(f, exact_in_x(full.truncated(eq.N + g.K2)), base + g.K2 + 1, config.tol.residual_tol)
                   .lower_bound;
        g.ok = g.v1 >= base + g.K1 + 1 && g.v2 >= base + g.K2 + 1 && g.v2 > g.v1;
    }

    // geometric decay of ||c_k||
    for (int k = 1; k <= config.K; ++k) rep.norm_tail.emplace_back(k, norm(state.c(k), config.norm));
    const int k_lo = std::max(1, config.K / 2);
    const int k_mid = (k_lo + config.K) / 2;
    rep.ratio_estimate = fitted_ratio(rep.norm_tail, k_lo, config.K);
    // the same fit on |c_k| plus its rounding bound
    std::vector<std::pair<int, Real>> upper;
    for (int k = 1; k <= config.K; ++k)
        upper.emplace_back(k, norm(abs_coefficients(state.c(k)) + state.error_bound(k), config.norm));
    rep.ratio_upper = fitted_ratio(upper, k_lo, config.K);
    const Real rho = std::max(rep.ratio_estimate, rep.ratio_upper);
    rep.radius = rho > 0 ? std::min(config.radius_cap, Real(0.5) / rho) : config.radius_cap;
    rep.sub_ratios = {fitted_ratio(rep.norm_tail, k_lo, k_mid), fitted_ratio(rep.norm_tail, k_mid, config.K)};
    rep.decay_ok = rep.ratio_upper < 1 && rep.ratio_upper * rep.radius < config.cauchy_ratio_max;
    if (!(rep.ratio_upper < 1))
        rep.notes.push_back("rounding bounds on c_k do not decay over the fit range; the working precision is exhausted before K");
    for (Real r : rep.sub_ratios)
        if (!(r * rep.radius < config.cauchy_ratio_max)) rep.decay_ok = false;
    if (rep.ratio_estimate == 0) rep.notes.push_back("coefficient norms vanish on the fit range");

    const SectorSpec sector = sector_for(rep.gamma, config.norm, rep.radius);
    rep.arg_lo = sector.arg_lo;
    rep.arg_hi = sector.arg_hi;
    rep.notes.push_back("sector is the full open arg-range mapped to r < |x^{i gamma}| < R; samples avoid the outer 10% on each side");

    // pointwise checks
    {
        const ExoticSeries y = result.solution->truncated(eq.N + config.K);
        std::vector<ExoticSeries> dy;
        for (int j = 0; j <= f.order(); ++j) dy.push_back(delta_power(y, j));
        const auto terms = taylor_terms(f);
        const ExoticSeries psi = state.psi();
        const PointEvaluator eval{f, terms, dy, psi, sector, eq.N, config.K};
        const auto pts = sample_points(sector, config.samples);
        if (config.parallel) {
            std::vector<std::future<SamplePoint>> jobs;
            for (const auto& p : pts)
                jobs.push_back(std::async(std::launch::async, [&eval, &config, p] {
                    return eval(p, config.cauchy_ratio_max, config.residual_rel_max);
                }));
            for (auto& j : jobs) rep.samples.push_back(j.get());
        } else {
            for (const auto& p : pts) rep.samples.push_back(eval(p, config.cauchy_ratio_max, config.residual_rel_max));
        }
        rep.samples_ok = std::all_of(rep.samples.begin(), rep.samples.end(), [](const SamplePoint& s) { return s.ok; });
    }

    const bool ok = rep.precision_ok && rep.growth.ok && rep.decay_ok && rep.samples_ok;
    rep.verdict = ok ? Verdict::certified : Verdict::inconclusive;
    return result;
}

} // namespace exoseries
