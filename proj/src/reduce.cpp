#include <exoseries/reduce.hpp>

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Eigenvalues>

namespace exoseries
{

LaurentPoly clean(const LaurentPoly& value, const LaurentPoly& majorant, Real rel_tol)
{
    if (value.is_zero()) return value;
    std::vector<Complex> cs(value.coeffs().begin(), value.coeffs().end());
    for (int e = value.lead(); e <= value.top(); ++e) {
        auto& c = cs[static_cast<std::size_t>(e - value.lead())];
        if (std::abs(c) <= rel_tol * std::abs(majorant[e])) c = Complex{};
    }
    return LaurentPoly(value.lead(), std::move(cs), value.precision());
}

Valuation residual_valuation(const OdeExpr& f, const ExoticSeries& y, std::optional<int> out_k_max, Real rel_tol)
{
    const ExoticSeries s = substitute(f, y, out_k_max, SubstituteMode::value);
    const ExoticSeries maj = substitute(f, abs_series(y), out_k_max, SubstituteMode::majorant);
    return valuation(s, maj, rel_tol);
}

LeadingData leading_data(const OdeExpr& f, const ExoticSeries& prefix, const Tolerances& tol)
{
    const int n = f.order();
    std::vector<ExoticSeries> values;
    std::vector<ExoticSeries> majorants;
    LeadingData out;
    out.first_grade.resize(static_cast<std::size_t>(n) + 1);
    std::vector<int> lower(static_cast<std::size_t>(n) + 1);
    for (int j = 0; j <= n; ++j) {
        const OdeExpr df = partial(f, j);
        values.push_back(substitute(df, prefix));
        majorants.push_back(substitute(df, prefix, std::nullopt, SubstituteMode::majorant));
        const Valuation v = valuation(values.back(), majorants.back(), tol.residual_tol);
        out.first_grade[static_cast<std::size_t>(j)] = v.value;
        lower[static_cast<std::size_t>(j)] = v.lower_bound;
    }
    if (!out.first_grade[static_cast<std::size_t>(n)])
        throw MethodInapplicable("dF/dy" + std::to_string(n) + " vanishes identically along the prefix");

    out.m = kExact;
    for (const auto& g : out.first_grade)
        if (g) out.m = std::min(out.m, *g);
    for (int j = 0; j <= n; ++j) {
        const auto& g = out.first_grade[static_cast<std::size_t>(j)];
        if (!g && lower[static_cast<std::size_t>(j)] <= out.m)
            throw InsufficientReliability("reduce",
                                          "dF/dy" + std::to_string(j) + " along the prefix is unknown at grade "
                                              + std::to_string(out.m),
                                          out.m);
    }
    for (int j = 0; j <= n; ++j) {
        const auto idx = static_cast<std::size_t>(j);
        if (out.first_grade[idx] == out.m)
            out.a.push_back(clean(values[idx].term(out.m), majorants[idx].term(out.m), tol.residual_tol));
        else
            out.a.push_back(LaurentPoly{});
    }
    return out;
}

std::vector<Complex> indicial_coefficients(const LeadingData& lead)
{
    const int n = lead.order();
    const LaurentPoly& an = lead.a[static_cast<std::size_t>(n)];
    if (an.is_zero()) throw ConditionViolated("condition violated: a_n vanishes at the leading grade");
    const int o = ord0(an);
    std::vector<Complex> out;
    for (int j = 0; j <= n; ++j) {
        const LaurentPoly& aj = lead.a[static_cast<std::size_t>(j)];
        if (!aj.is_zero() && ord0(aj) < o)
            throw ConditionViolated("condition violated: ord0 a_" + std::to_string(j) + " = " + std::to_string(ord0(aj))
                                    + " < ord0 a_n = " + std::to_string(o));
        if (aj.is_zero() && aj.precision() <= o)
            throw InsufficientReliability("reduce", "a_" + std::to_string(j) + " is not reliable at t^" + std::to_string(o),
                                          o + 1);
        out.push_back(aj[o] / an[o]);
    }
    return out;
}

std::vector<Complex> indicial_roots(const std::vector<Complex>& coefficients)
{
    const int n = static_cast<int>(coefficients.size()) - 1;
    if (n < 1) throw Error("reduce", "indicial polynomial of degree < 1");
    const Complex cn = coefficients.back();
    if (cn == Complex{}) throw Error("reduce", "indicial polynomial has a vanishing leading coefficient");
    if (n == 1) return {-coefficients[0] / cn};
    using Mat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;
    Mat comp = Mat::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = Complex(1);
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -coefficients[static_cast<std::size_t>(i)] / cn;
    Eigen::ComplexEigenSolver<Mat> solver(comp, false);
    if (solver.info() != Eigen::Success) throw Error("reduce", "indicial root computation failed");
    std::vector<Complex> roots;
    for (int i = 0; i < n; ++i) roots.push_back(solver.eigenvalues()(i));
    std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return roots;
}

Real min_root_distance(const std::vector<Complex>& zeta, int k, int N, Real gamma)
{
    Real best = std::numeric_limits<Real>::infinity();
    for (const Complex& z : zeta) {
        const Complex lambda = (z - Real(k + N)) / Complex(0, gamma);
        best = std::min(best, std::abs(lambda - std::round(lambda.real())));
    }
    return best;
}

NChoice test_N(const LeadingData& lead, int k_max, Real gamma, int N, Real root_tol)
{
    NChoice c;
    c.N = N;
    c.zeta = indicial_roots(indicial_coefficients(lead));
    // beyond this grade |Im lambda| = (k+N-Re zeta)/|gamma| stays above root_tol
    Real worst = -std::numeric_limits<Real>::infinity();
    for (const Complex& z : c.zeta) worst = std::max(worst, z.real());
    const Real need = worst - N + std::abs(gamma) * root_tol;
    int through = std::max(1, k_max);
    if (need >= through + 1) through = static_cast<int>(std::floor(need)) + 1;
    c.checked_through = through;
    c.asymptotic_ok = true;
    c.admissible = true;
    for (int k = 1; k <= through; ++k) {
        const Real d = min_root_distance(c.zeta, k, N, gamma);
        c.per_k.push_back({k, d});
        if (!(d > root_tol)) c.admissible = false;
    }
    return c;
}

NChoice choose_N(const LeadingData& lead, int k_max, Real gamma, std::optional<int> N_min, Real root_tol)
{
    const int lo = N_min.value_or(lead.m + 1);
    std::vector<int> rejected;
    for (int N = lo; N <= lo + 64; ++N) {
        NChoice c = test_N(lead, k_max, gamma, N, root_tol);
        if (c.admissible) {
            c.rejected = std::move(rejected);
            return c;
        }
        rejected.push_back(N);
    }
    throw Error("reduce", "no admissible N in [" + std::to_string(lo) + ", " + std::to_string(lo + 64) + "]");
}

NPlan plan_N(const OdeExpr& f, const ExoticSeries& prefix, const LeadingData& lead, int k_max, const Tolerances& tol)
{
    NPlan plan;
    const Valuation v = residual_valuation(f, prefix, std::nullopt, tol.residual_tol);
    plan.residual_valuation = v.lower_bound;
    plan.N_sup = sat_add(v.lower_bound, -lead.m - 1);
    plan.roots = choose_N(lead, k_max, prefix.gamma(), std::nullopt, tol.root_tol);
    plan.N = plan.roots.N;
    if (plan.N <= plan.N_sup) return plan;

    NChoice at_m = test_N(lead, k_max, prefix.gamma(), lead.m, tol.root_tol);
    if (at_m.admissible && lead.m <= plan.N_sup) {
        at_m.rejected = plan.roots.rejected;
        plan.roots = std::move(at_m);
        plan.N = lead.m;
        plan.relaxed = true;
        return plan;
    }
    throw InsufficientReliability("reduce",
                                  "prefix too short: N = " + std::to_string(plan.N) + " needs val F(x, prefix) >= "
                                      + std::to_string(lead.m + plan.N + 1) + ", found "
                                      + std::to_string(v.lower_bound),
                                  lead.m + plan.N + 1);
}

namespace
{

using Key = std::vector<int>;
using SeriesPoly = std::map<Key, ExoticSeries>;

int key_degree(const Key& k)
{
    int d = 0;
    for (int e : k) d += e;
    return d;
}

void accumulate(SeriesPoly& into, const Key& key, const ExoticSeries& s)
{
    auto it = into.find(key);
    if (it == into.end())
        into.emplace(key, s);
    else
        it->second = it->second + s;
}

SeriesPoly multiply(const SeriesPoly& a, const SeriesPoly& b)
{
    SeriesPoly out;
    for (const auto& [ka, sa] : a) {
        for (const auto& [kb, sb] : b) {
            Key k(ka.size());
            for (std::size_t i = 0; i < k.size(); ++i) k[i] = ka[i] + kb[i];
            accumulate(out, k, mul(sa, sb));
        }
    }
    return out;
}

Real binomial(int n, int k)
{
    Real r = 1;
    for (int i = 1; i <= k; ++i) r = r * Real(n - k + i) / Real(i);
    return r;
}

// y_j = delta^j phi + x^N sum_i C(j,i) N^{j-i} u_i, expanded polynomially
// in the u_i with exotic coefficients.
SeriesPoly expand(const std::vector<TaylorTerm>& terms, const ExoticSeries& phi, int N, int n, SubstituteMode mode)
{
    const Real gamma = phi.gamma();
    const Key zero_key(static_cast<std::size_t>(n) + 1, 0);
    std::vector<SeriesPoly> ys;
    for (int j = 0; j <= n; ++j) {
        SeriesPoly y;
        ExoticSeries base = mode == SubstituteMode::majorant ? abs_delta_power(phi, j) : delta_power(phi, j);
        if (!base.is_zero()) y.emplace(zero_key, std::move(base));
        for (int i = 0; i <= j; ++i) {
            Real c = binomial(j, i) * std::pow(Real(N), j - i);
            if (mode == SubstituteMode::majorant) c = std::abs(c);
            if (c == 0) continue;
            Key k = zero_key;
            k[static_cast<std::size_t>(i)] = 1;
            y.emplace(k, ExoticSeries::monomial(gamma, N, LaurentPoly::constant(Complex(c))));
        }
        ys.push_back(std::move(y));
    }

    SeriesPoly total;
    for (const auto& term : terms) {
        SeriesPoly prod;
        prod.emplace(zero_key, ExoticSeries::monomial(gamma, 0, LaurentPoly::constant(Complex(1))));
        for (std::size_t j = 0; j < term.y_powers.size(); ++j)
            for (int e = 0; e < term.y_powers[j]; ++e) prod = multiply(prod, ys[j]);
        const LaurentPoly c = mode == SubstituteMode::majorant ? abs_coefficients(term.coeff) : term.coeff;
        for (const auto& [k, s] : prod) accumulate(total, k, scale(s, c, term.x_power));
    }
    return total;
}

} // namespace

ReducedEquation reduce(const OdeExpr& f, const ExoticSeries& prefix, int N, const ReduceOptions& opts)
{
    const Tolerances& tol = opts.tol;
    const int n = f.order();
    const LeadingData lead = leading_data(f, prefix, tol);
    indicial_coefficients(lead);

    // prefix cut at grade N, as an exact finite sum in x
    ExoticSeries phi(prefix.gamma(), std::min(prefix.k_min(), N), kExact);
    for (const auto& [k, p] : prefix.terms())
        if (k <= N) phi.set(k, p);

    const auto terms = taylor_terms(f);
    const SeriesPoly value = expand(terms, phi, N, n, SubstituteMode::value);
    const SeriesPoly major = expand(terms, abs_series(phi), N, n, SubstituteMode::majorant);

    const int shift = lead.m + N;
    const LaurentPoly& an = lead.a[static_cast<std::size_t>(n)];
    const LaurentPoly inv_an = an.is_exact() && an.coeffs().size() > 1 ? invert(an, opts.t_window) : invert(an);

    ReducedEquation out;
    out.gamma = prefix.gamma();
    out.N = N;
    out.m = lead.m;
    out.raw_a = lead.a;
    std::vector<LaurentPoly> op(static_cast<std::size_t>(n) + 1);

    for (const auto& [key, s] : value) {
        const int deg = key_degree(key);
        auto mit = major.find(key);
        for (const auto& [g, raw] : s.terms()) {
            const LaurentPoly maj = mit == major.end() ? LaurentPoly{} : mit->second.term(g);
            const LaurentPoly v = clean(raw, maj, tol.residual_tol);
            if (v.is_zero() && v.is_exact()) continue;
            if (g < shift || (g == shift && deg != 1)) {
                if (v.is_zero()) continue;
                if (deg == 0)
                    throw ReductionError("val F(x, Phi_N) = " + std::to_string(g) + " < m + N + 1 = "
                                             + std::to_string(shift + 1),
                                         g);
                throw ReductionError("not of the form sum a_j (delta+N)^j u = x M: nonlinear or lower-grade term at x^"
                                         + std::to_string(g),
                                     g);
            }
            if (g == shift) {
                const auto i = static_cast<std::size_t>(std::find(key.begin(), key.end(), 1) - key.begin());
                op[i] = v;
                continue;
            }
            TaylorTerm t;
            t.x_power = g - shift - 1;
            t.y_powers = key;
            t.coeff = -(v * inv_an);
            if (!t.coeff.is_zero() || !t.coeff.is_exact()) out.M.push_back(std::move(t));
        }
    }

    // the linear part must match the derivatives along the prefix
    for (int i = 0; i <= n; ++i) {
        LaurentPoly expected;
        LaurentPoly maj;
        for (int j = i; j <= n; ++j) {
            const Real c = binomial(j, i) * std::pow(Real(N), j - i);
            if (c == 0) continue;
            expected += lead.a[static_cast<std::size_t>(j)] * Complex(c);
            maj += abs_coefficients(lead.a[static_cast<std::size_t>(j)]) * Complex(std::abs(c));
        }
        const LaurentPoly diff = (op[static_cast<std::size_t>(i)] - expected);
        if (!negligible(diff, maj + abs_coefficients(op[static_cast<std::size_t>(i)]), Real(1e-8)))
            throw ReductionError("linear part at x^" + std::to_string(shift) + " differs from sum_j a_j (delta+N)^j",
                                 shift);
    }

    for (int j = 0; j <= n; ++j) {
        if (j == n)
            out.a.push_back(LaurentPoly::constant(Complex(1)));
        else
            out.a.push_back(lead.a[static_cast<std::size_t>(j)] * inv_an);
    }
    out.mu = 0;
    for (const auto& t : out.M)
        if (!t.coeff.is_zero()) out.mu = std::max(out.mu, -t.coeff.lead());
    std::stable_sort(out.M.begin(), out.M.end(), [](const TaylorTerm& a, const TaylorTerm& b) {
        return a.x_power != b.x_power ? a.x_power < b.x_power : a.y_powers < b.y_powers;
    });
    return out;
}

} // namespace exoseries
