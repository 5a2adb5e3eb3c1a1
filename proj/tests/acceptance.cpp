// Acceptance checks; one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include <exoseries/certify.hpp>
#include <exoseries/painleve3.hpp>
#include <exoseries/reduce.hpp>
#include <exoseries/solver.hpp>

using namespace exoseries;

namespace
{

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int prec = 3)
{
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    return os.str();
}

ExoticSeries cut_exact(const ExoticSeries& y, int k_max)
{
    ExoticSeries out(y.gamma(), y.k_min(), kExact);
    for (const auto& [k, p] : y.terms())
        if (k <= k_max) out.set(k, p);
    return out;
}

// coefficientwise residual of L_k c - rhs, each exponent relative to max(1, |rhs_e|)
Real coefficient_residual(const ReducedEquation& eq, int k, const LaurentPoly& c, const LaurentPoly& rhs)
{
    const LaurentPoly lc = apply_operator(eq, k, c);
    const int cut = std::min(lc.precision(), rhs.precision());
    const LaurentPoly d = (lc - rhs).truncated(cut);
    Real worst = 0;
    if (d.is_zero()) return 0;
    for (int e = d.lead(); e <= d.top(); ++e)
        worst = std::max(worst, std::abs(d[e]) / std::max<Real>(1, std::abs(rhs[e])));
    return worst;
}

Outcome criterion1()
{
    const auto t0 = Clock::now();
    const P3Params p;
    const LeadingData lead = leading_data(p3_equation(p), p3_leading(p, 40));
    const Complex want[3] = {Complex(0, -8), Complex(8, -8), Complex(4)};
    Real err = 0;
    for (int j = 0; j <= 2; ++j) err = std::max(err, std::abs(lead.a[static_cast<std::size_t>(j)][1] - want[j]));
    const double dt = seconds_since(t0);
    std::ostringstream os;
    os << "a_2, a_1, a_0 at t^1 x^-1 = " << lead.a[2][1] << ", " << lead.a[1][1] << ", " << lead.a[0][1]
       << "; max error " << fmt(err) << "; " << fmt(dt) << " s";
    return {lead.m == -1 && err <= 1e-9 && dt < 5, os.str()};
}

Outcome criterion2()
{
    const P3Params p;
    const ConditionResult c = check_condition(p3_equation(p), p3_leading(p, 40));
    bool ords = c.ord_a.size() == 3;
    for (const auto& o : c.ord_a) ords = ords && o == 1;
    std::ostringstream os;
    os << "condition " << (c.ok() ? "ok" : "not ok") << ", m = " << c.m << ", ord_a = [";
    for (std::size_t i = 0; i < c.ord_a.size(); ++i) os << (i ? "," : "") << (c.ord_a[i] ? std::to_string(*c.ord_a[i]) : "inf");
    os << "]";
    return {c.ok() && c.m == -1 && ords, os.str()};
}

Outcome criterion3()
{
    const P3Params p;
    const OdeExpr f = p3_equation(p);
    const CertifyResult run = p3_demo(p, 12, 40);
    const ExoticSeries& y = *run.solution;
    const int m = run.report.m;
    bool ok = true;
    std::ostringstream os;
    for (const int N : {0, 2, 5}) {
        const ExoticSeries phi = cut_exact(y, N);
        const Valuation v = residual_valuation(f, phi, m + N + 2);
        // reduce() re-verifies the same bound before building M
        bool reduced = true;
        try {
            reduce(f, y, N);
        } catch (const Error&) {
            reduced = false;
        }
        const bool pass = v.at_least(m + N + 1) && reduced;
        ok = ok && pass;
        os << "N=" << N << ": val >= " << v.lower_bound << " (need " << m + N + 1 << ")" << (reduced ? "" : " reduce failed") << "; ";
    }
    return {ok, os.str()};
}

ReducedEquation random_reduced(std::mt19937& rng, int mu)
{
    std::uniform_real_distribution<double> u(-1, 1);
    std::uniform_int_distribution<int> order(1, 2);
    ReducedEquation eq;
    eq.gamma = 0.5 + std::abs(u(rng)) * 2;
    eq.N = 0;
    eq.m = 0;
    eq.mu = mu;
    const int n = order(rng);
    for (int j = 0; j < n; ++j) eq.a.push_back(LaurentPoly::constant(Complex(u(rng) + 0.37, u(rng) + 0.21)));
    eq.a.push_back(LaurentPoly::constant(1));
    eq.raw_a = eq.a;
    const auto add = [&](int x_power, std::vector<int> powers, int lead) {
        powers.resize(static_cast<std::size_t>(n + 1), 0);
        std::vector<Complex> cs{Complex(u(rng), u(rng)), Complex(u(rng), u(rng))};
        cs[0] += Complex(1.5, 0);
        eq.M.push_back(TaylorTerm{x_power, powers, LaurentPoly(lead, cs)});
    };
    add(0, {}, -mu);
    add(0, {1}, -mu);
    add(1, {0, 1}, std::min(0, 1 - mu));
    add(0, {2}, -mu);
    if (n == 2) add(0, {1, 0, 1}, -mu);
    return eq;
}

Outcome criterion4()
{
    int violations = 0, checked = 0, failures = 0;
    {
        const CertifyResult run = p3_demo(P3Params{}, 30, 40);
        for (const PoleEntry& e : run.state->pole_profile()) {
            ++checked;
            if (e.nu > e.bound) ++violations;
        }
    }
    std::mt19937 rng(1234);
    int random_runs = 0;
    for (int i = 0; i < 10; ++i) {
        const int mu = i % 3;
        try {
            const RecursionState s = solve_through(random_reduced(rng, mu), 30, NormParams(0.2, 0.4));
            for (const PoleEntry& e : s.pole_profile()) {
                ++checked;
                if (e.nu > e.bound) ++violations;
            }
            ++random_runs;
        } catch (const Error& e) {
            ++failures;
            std::cerr << "  random reduced equation " << i << ": " << e.what() << "\n";
        }
    }
    std::ostringstream os;
    os << checked << " pole orders checked (Painleve K=30 + " << random_runs << " random equations, mu in {0,1,2}); "
       << violations << " violations";
    if (failures) os << "; " << failures << " runs failed";
    return {violations == 0 && failures == 0 && random_runs == 10, os.str()};
}

LaurentPoly random_laurent(std::mt19937& rng, int lead_lo, int lead_hi, int len, int prec_extra)
{
    std::uniform_real_distribution<double> u(-1, 1);
    const int l = std::uniform_int_distribution<int>(lead_lo, lead_hi)(rng);
    std::vector<Complex> cs;
    for (int i = 0; i < len; ++i) cs.emplace_back(u(rng), u(rng));
    return LaurentPoly(l, cs, l + len + prec_extra);
}

Outcome criterion5()
{
    std::mt19937 rng(55);
    const NormParams np(0.15, 0.45);
    const Real slack = 1e-12;
    int trials = 0, violations = 0;
    for (int i = 0; i < 200; ++i) {
        const LaurentPoly f = random_laurent(rng, -3, 2, 7, 8);
        const LaurentPoly g = random_laurent(rng, -3, 2, 7, 8);
        ++trials;
        if (norm(f * g, np) > norm(f, np) * norm(g, np) * (1 + slack)) ++violations;
    }
    for (int i = 0; i < 200; ++i) {
        const Real gamma = std::uniform_real_distribution<double>(0.2, 3)(rng) * (i % 2 ? 1 : -1);
        const int N = std::uniform_int_distribution<int>(0, 3)(rng);
        const int j = std::uniform_int_distribution<int>(1, 3)(rng);
        ExoticSeries th(gamma, 1, 8);
        for (int k = 1; k <= 8; ++k) th.set(k, random_laurent(rng, -2, 1, 6, 10));
        ++trials;
        const Real nj = norm_Hj(th, j, N, np).value;
        if (norm_Hj(th, j - 1, N, np).value > nj * (1 + slack)) ++violations;
        if (norm_Hj(delta(th), j - 1, N, np).value > (1 + N) * nj * (1 + slack)) ++violations;
    }
    return {violations == 0 && trials >= 100, std::to_string(trials) + " random trials, " + std::to_string(violations) + " violations"};
}

Outcome criterion6()
{
    const P3Params p;
    const CertifyResult run = p3_demo(p, 30, 40);
    RecursionState state = *run.state;
    const ReducedEquation& eq = *run.reduced;
    Real worst_forward = 0;
    for (int k = 1; k <= state.solved_through(); ++k) worst_forward = std::max(worst_forward, state.forward_residual(k));

    const Real eps = 1e-3;
    Real worst_base = 0, weakest = std::numeric_limits<Real>::infinity();
    int perturbations = 0;
    for (int k = 1; k <= state.solved_through(); ++k) {
        const LaurentPoly& c = state.c(k);
        const LaurentPoly rhs = state.rhs(k);
        worst_base = std::max(worst_base, coefficient_residual(eq, k, c, rhs));
        const int lo = c.is_zero() ? 0 : c.lead();
        for (int e = lo; e < lo + 6; ++e) {
            const Real scale = std::max<Real>(1, std::abs(c[e]));
            const LaurentPoly bumped = c + LaurentPoly(e, {Complex(eps * scale)}, c.precision());
            weakest = std::min(weakest, coefficient_residual(eq, k, bumped, rhs));
            ++perturbations;
        }
    }
    std::ostringstream os;
    os << "max forward residual " << fmt(worst_forward) << " (< 1e-10); max coefficient residual " << fmt(worst_base) << "; "
       << perturbations << " perturbations of size 1e-3, smallest residual " << fmt(weakest) << " (> 1e-5)";
    return {worst_forward < 1e-10 && worst_base < 1e-10 && weakest > 1e-5, os.str()};
}

Outcome criterion7()
{
    const P3Params p;
    const ReducedEquation eq = reduce(p3_equation(p), p3_leading(p, 120), 0);
    const NormParams np = p3_default_norm(p);
    const int n = eq.order();
    std::mt19937 rng(77);
    std::vector<std::pair<int, Real>> ratios;
    Real C = -std::numeric_limits<Real>::infinity();
    for (int k = 5; k <= 50; ++k) {
        for (int trial = 0; trial < 4; ++trial) {
            const LaurentPoly q = random_laurent(rng, -2, 2, 8, 30);
            const LaurentPoly pk = solve_ck(eq, k, q);
            const int cut = std::min(pk.precision(), q.precision());
            const Real num = norm(shifted_op(pk.truncated(cut), k + eq.N, eq.gamma, n), np);
            const Real rho = num / norm(q.truncated(cut), np);
            Real S = 0;
            for (int i = 1; i <= n; ++i) S += std::pow(Real(k), -i);
            C = std::max(C, (1 - 1 / rho) / S);
            ratios.emplace_back(k, rho);
        }
    }
    bool ok = true;
    Real worst_margin = std::numeric_limits<Real>::infinity();
    for (const auto& [k, rho] : ratios) {
        Real S = 0;
        for (int i = 1; i <= n; ++i) S += std::pow(Real(k), -i);
        const Real margin = 1 - C * S;
        worst_margin = std::min(worst_margin, margin);
        if (!(margin > 0) || rho > 1 / margin * (1 + 1e-12)) ok = false;
    }
    Real max_rho = 0;
    for (const auto& r : ratios) max_rho = std::max(max_rho, r.second);
    std::ostringstream os;
    os << "fitted C = " << fmt(C, 4) << ", max ratio " << fmt(max_rho, 4) << ", min 1 - C(1/k + ... + 1/k^n) = "
       << fmt(worst_margin, 4) << " over k in [5,50]";
    return {ok, os.str()};
}

Outcome criterion8()
{
    const auto t0 = Clock::now();
    const CertifyResult run = p3_demo(P3Params{}, 30, 40);
    const double dt = seconds_since(t0);
    const ConvergenceReport& rep = run.report;
    const SectorSpec sector = sector_for(rep.gamma, NormParams(rep.norm_r, rep.norm_R), rep.radius);
    bool ok = rep.verdict == Verdict::certified && rep.samples.size() == 20 && dt < 60;
    Real worst = 0;
    for (const auto& s : rep.samples) {
        worst = std::max(worst, s.cauchy_ratio);
        if (!(s.cauchy_ratio < 0.9) || !sector.contains_arg(s.x.arg) || s.x.modulus > rep.radius / 2 * (1 + 1e-12)) ok = false;
    }
    std::ostringstream os;
    os << "verdict " << to_string(rep.verdict) << ", " << rep.samples.size() << " samples, max Cauchy ratio " << fmt(worst)
       << ", radius " << fmt(rep.radius) << ", " << fmt(dt) << " s";
    return {ok, os.str()};
}

Outcome criterion9()
{
    // delta y + y = x (1 + y/t): c_k = t^{-(k-1)} prod_{j<=k} 1/(j + 1 - i gamma (j - 1))
    const Real gamma = 1;
    CertifyConfig cfg;
    cfg.K = 8;
    cfg.L_base = 4;
    cfg.norm = NormParams(0.25, 0.5);
    const CertifyResult run =
        solve_stage(parse_ode("y1 + y0 - x*t^-1*y0 - x", {}), fixed_prefix(ExoticSeries(gamma, 0, kExact)), cfg);
    Real err = 0;
    bool shape = true;
    Complex hand(1);
    for (int k = 1; k <= 5; ++k) {
        hand /= Complex(k + 1, -gamma * (k - 1));
        const LaurentPoly& c = run.state->c(k);
        shape = shape && c.is_exact() && c.lead() == -(k - 1) && c.top() == -(k - 1);
        err = std::max(err, std::abs(c[-(k - 1)] - hand));
    }
    return {shape && err <= 1e-12, "c_1..c_5 max deviation from the hand expansion " + fmt(err)};
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"Painleve III leading constants", criterion1},
        {"condition verdict", criterion2},
        {"valuation bound along Phi_N", criterion3},
        {"pole bound nu_k <= k mu", criterion4},
        {"norm algebra", criterion5},
        {"forward check and uniqueness", criterion6},
        {"inversion bound", criterion7},
        {"numeric convergence and demo", criterion8},
        {"oracle equivalence (forced linear)", criterion9},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first << "): " << o.detail
                  << std::endl;
    }
    std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << std::endl;
    return failed ? 1 : 0;
}
