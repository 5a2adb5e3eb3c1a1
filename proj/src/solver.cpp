#include <exoseries/solver.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace exoseries
{

LaurentPoly apply_operator(const ReducedEquation& eq, int k, const LaurentPoly& c)
{
    LaurentPoly out;
    for (int j = 0; j <= eq.order(); ++j) {
        const LaurentPoly& aj = eq.a[static_cast<std::size_t>(j)];
        if (aj.is_zero() && aj.is_exact()) continue;
        out += aj * shifted_op(c, k + eq.N, eq.gamma, j);
    }
    return out;
}

namespace
{

constexpr Real kEps = std::numeric_limits<Real>::epsilon();

LaurentPoly moduli(const LaurentPoly& f, Real scale = 1)
{
    LaurentPoly out = abs_coefficients(f);
    if (scale != 1) out *= Complex(scale);
    return out;
}

// Zero the leading coefficients of f that do not exceed their error bound.
LaurentPoly drop_unresolved_lead(const LaurentPoly& f, const LaurentPoly& err)
{
    int first = f.lead();
    while (first <= f.top() && std::abs(f[first]) <= std::abs(err[first])) ++first;
    if (first == f.lead()) return f;
    if (first > f.top()) return LaurentPoly::zero(f.precision());
    const auto& cs = f.coeffs();
    return LaurentPoly(first, std::vector<Complex>(cs.begin() + (first - f.lead()), cs.end()), f.precision());
}

// Zero the leading coefficients whose largest modulus on r <= |t| <= R is at
// most rel_tol times that of the largest term; the dropped moduli move into
// the error bound when one is given.
LaurentPoly drop_negligible_lead(const LaurentPoly& f, const NormParams& p, Real rel_tol, LaurentPoly* err = nullptr)
{
    if (f.is_zero()) return f;
    const auto size = [&](int e) { return std::abs(f[e]) * std::pow(e < 0 ? p.r : p.R, e); };
    Real top = 0;
    for (int e = f.lead(); e <= f.top(); ++e) top = std::max(top, size(e));
    int first = f.lead();
    while (first <= f.top() && size(first) <= rel_tol * top) ++first;
    if (first == f.lead()) return f;
    const auto& cs = f.coeffs();
    if (err) {
        std::vector<Complex> dropped(cs.begin(), cs.begin() + (first - f.lead()));
        *err += moduli(LaurentPoly(f.lead(), std::move(dropped), f.precision()));
    }
    return LaurentPoly(first, std::vector<Complex>(cs.begin() + (first - f.lead()), cs.end()), f.precision());
}

struct Solved {
    LaurentPoly c;
    LaurentPoly err;
};

// Triangular recurrence with a running bound on the rounding error of each
// coefficient. With flush set, leading coefficients that do not exceed their
// own bound are set to zero.
Solved solve_tracked(const ReducedEquation& eq, int k, const LaurentPoly& rhs, const LaurentPoly* rhs_err,
                     const SolverOptions& opts, bool flush)
{
    const int n = eq.order();
    const bool err_lower = rhs_err && !rhs_err->is_zero() && (rhs.is_zero() || rhs_err->lead() < rhs.lead());
    if (rhs.is_zero() && !err_lower) return {LaurentPoly::zero(rhs.precision()), LaurentPoly::zero(rhs.precision())};

    const int lead = err_lower ? rhs_err->lead() : rhs.lead();
    const int rhs_top = std::max(rhs.top(), rhs_err ? rhs_err->top() : rhs.top());
    int min_a_prec = kExact;
    bool constant_a = true;
    for (const auto& aj : eq.a) {
        min_a_prec = std::min(min_a_prec, aj.precision());
        if (!aj.is_zero() && (aj.lead() != 0 || aj.top() != 0)) constant_a = false;
    }
    int hi;  // last exponent computed
    int precision = std::min(rhs.precision(), sat_add(lead, min_a_prec));
    if (precision >= kExact) {
        if (constant_a) {
            hi = rhs_top;
        } else {
            precision = lead + opts.t_window + 1;
            hi = precision - 1;
        }
    } else {
        hi = precision - 1;
    }
    if (hi < lead) return {LaurentPoly::zero(precision), LaurentPoly::zero(precision)};

    const int width = hi - lead + 1;
    const auto idx = [](int i) { return static_cast<std::size_t>(i); };
    const Real kN = Real(k + eq.N);
    // zp[i][j] = (k+N+i gamma (lead+i))^j
    std::vector<std::vector<Complex>> zp(idx(width), std::vector<Complex>(idx(n) + 1));
    for (int i = 0; i < width; ++i) {
        const Complex z(kN, eq.gamma * Real(lead + i));
        Complex p(1);
        for (int j = 0; j <= n; ++j) {
            zp[idx(i)][idx(j)] = p;
            p *= z;
        }
    }

    std::vector<Complex> c(idx(width)), err(idx(width));
    std::vector<Real> cerr(idx(width));
    bool leading = flush;
    for (int i = 0; i < width; ++i) {
        const int e = lead + i;
        Complex acc = rhs[e];
        Real mag = std::abs(acc);
        Real bound = rhs_err ? std::abs((*rhs_err)[e]) : Real(0);
        for (int s = 1; s <= i; ++s) {
            const Complex ce = c[idx(i - s)];
            const Real ee = cerr[idx(i - s)];
            if (ce == Complex{} && ee == 0) continue;
            Complex w{};
            Real wabs = 0;
            for (int j = 0; j <= n; ++j) {
                const Complex a = eq.a[idx(j)][s];
                w += a * zp[idx(i - s)][idx(j)];
                wabs += std::abs(a) * std::abs(zp[idx(i - s)][idx(j)]);
            }
            acc -= w * ce;
            mag += wabs * std::abs(ce);
            bound += wabs * ee;
        }
        Complex d{};
        for (int j = 0; j <= n; ++j) d += eq.a[idx(j)][0] * zp[idx(i)][idx(j)];
        const Real scale = std::max<Real>(1, std::pow(std::abs(Complex(kN, eq.gamma * Real(e))), n));
        if (std::abs(d) < opts.tol.div_tol * scale) throw NearResonance(k, e, std::abs(d));
        c[idx(i)] = acc / d;
        bound = (bound + kEps * Real(i + 2 + n) * mag) / std::abs(d) + kEps * std::abs(c[idx(i)]);
        if (leading && std::abs(c[idx(i)]) <= bound) {
            bound += std::abs(c[idx(i)]);
            c[idx(i)] = Complex{};
        } else
            leading = false;
        cerr[idx(i)] = bound;
        err[idx(i)] = bound;
    }
    return {LaurentPoly(lead, std::move(c), precision), LaurentPoly(lead, std::move(err), precision)};
}

} // namespace

LaurentPoly solve_ck(const ReducedEquation& eq, int k, const LaurentPoly& rhs, const SolverOptions& opts)
{
    return solve_tracked(eq, k, rhs, nullptr, opts, false).c;
}

RecursionState::RecursionState(ReducedEquation eq, NormParams norm, SolverOptions opts)
    : eq_(std::move(eq)), norm_(norm), opts_(opts), dpsi_(static_cast<std::size_t>(eq_.order()) + 1)
{
    if (eq_.a.empty()) throw Error("solver", "reduced equation without operator");
}

RecursionState RecursionState::resume(ReducedEquation eq, NormParams norm, SolverOptions opts,
                                      std::vector<LaurentPoly> solved, std::vector<Real> forward,
                                      std::vector<LaurentPoly> errors)
{
    RecursionState s(std::move(eq), norm, opts);
    s.c_ = std::move(solved);
    if (forward.size() != s.c_.size()) forward.assign(s.c_.size(), std::numeric_limits<Real>::quiet_NaN());
    s.forward_ = std::move(forward);
    if (errors.size() != s.c_.size()) {
        errors.clear();
        for (const auto& ck : s.c_) errors.push_back(moduli(ck, kEps));
    }
    s.err_ = std::move(errors);
    return s;
}

const LaurentPoly& RecursionState::c(int k) const
{
    if (k < 1 || k > solved_through()) throw Error("solver", "c_" + std::to_string(k) + " has not been solved");
    return c_[static_cast<std::size_t>(k - 1)];
}

Real RecursionState::forward_residual(int k) const
{
    c(k);
    return forward_[static_cast<std::size_t>(k - 1)];
}

const LaurentPoly& RecursionState::error_bound(int k) const
{
    c(k);
    return err_[static_cast<std::size_t>(k - 1)];
}

const RecursionState::Tracked& RecursionState::dpsi(int j, int l)
{
    auto& cache = dpsi_[static_cast<std::size_t>(j)];
    auto it = cache.find(l);
    if (it != cache.end()) return it->second;
    Tracked t{shifted_op(c(l), l, eq_.gamma, j), abs_shifted_op(c(l), l, eq_.gamma, j),
              abs_shifted_op(error_bound(l), l, eq_.gamma, j)};
    t.e += moduli(t.a, kEps * Real(j + 1));
    return cache.emplace(l, std::move(t)).first->second;
}

RecursionState::Tracked RecursionState::product(const std::vector<int>& key, int s)
{
    const int d = static_cast<int>(key.size());
    if (s < d) return {};
    if (d == 1) return dpsi(key[0], s);
    auto& memo = products_[key];
    auto it = memo.find(s);
    if (it != memo.end()) return it->second;
    const std::vector<int> head(key.begin(), key.end() - 1);
    const int last = key.back();
    Tracked acc;
    int terms = 0;
    for (int a = d - 1; a <= s - 1; ++a) {
        const Tracked h = product(head, a);
        if (h.v.is_zero() && h.v.is_exact() && h.e.is_zero()) continue;
        const Tracked& g = dpsi(last, s - a);
        const LaurentPoly aa = h.a * g.a;
        const Real rho = kEps * Real(2 + std::min(h.v.coeffs().size(), g.v.coeffs().size()));
        acc.v += h.v * g.v;
        acc.e += h.a * g.e + h.e * (g.a + g.e) + moduli(aa, rho);
        acc.a += aa;
        ++terms;
    }
    acc.e += moduli(acc.a, kEps * Real(terms));
    return memo.emplace(s, std::move(acc)).first->second;
}

RecursionState::Tracked RecursionState::build_rhs(int k)
{
    Tracked acc;
    for (const auto& term : eq_.M) {
        const int s = k - 1 - term.x_power;
        if (s < 0) continue;
        std::vector<int> key;
        for (std::size_t j = 0; j < term.y_powers.size(); ++j)
            for (int e = 0; e < term.y_powers[j]; ++e) key.push_back(static_cast<int>(j));
        const LaurentPoly cabs = moduli(term.coeff);
        if (key.empty()) {
            if (s == 0) {
                acc.v += term.coeff;
                acc.a += cabs;
                acc.e += moduli(cabs, kEps);
            }
            continue;
        }
        const Tracked p = product(key, s);
        if (p.v.is_zero() && p.v.is_exact() && p.e.is_zero()) continue;
        const LaurentPoly pa = cabs * p.a;
        acc.v += term.coeff * p.v;
        acc.e += cabs * p.e + moduli(pa, kEps * Real(4));
        acc.a += pa;
    }
    return acc;
}

LaurentPoly RecursionState::rhs(int k)
{
    c(k);
    auto it = rhs_cache_.find(k);
    if (it != rhs_cache_.end()) return it->second;
    return rhs_cache_.emplace(k, build_rhs(k).v).first->second;
}

void RecursionState::extend(int K)
{
    for (int k = solved_through() + 1; k <= K; ++k) {
        Tracked r = build_rhs(k);
        const LaurentPoly r_err = r.e + moduli(r.a, kEps);
        // leading terms below the rounding bound or the annulus resolution
        // would otherwise set the pole order
        Solved sol = solve_tracked(eq_, k, r.v, &r_err, opts_, true);
        LaurentPoly ck = drop_negligible_lead(sol.c, norm_, opts_.tol.zero_tol, &sol.err);
        r.v = drop_negligible_lead(drop_unresolved_lead(r.v, r_err), norm_, opts_.tol.zero_tol);

        LaurentPoly diff = apply_operator(eq_, k, ck) - r.v;
        diff = diff.truncated(std::min(ck.precision(), r.v.precision()));
        const Real rel = norm(diff, norm_) / std::max<Real>(1, norm(r.v, norm_));
        if (!(rel <= opts_.forward_tol))
            throw Error("solver", "forward check failed at k=" + std::to_string(k) + ": relative residual "
                                      + std::to_string(static_cast<double>(rel)));
        if (!ck.is_zero()) {
            const int nu = std::max(0, -ck.lead());
            if (nu > k * eq_.mu)
                throw Error("solver", "pole order " + std::to_string(nu) + " of c_" + std::to_string(k)
                                          + " exceeds k*mu = " + std::to_string(k * eq_.mu));
        }
        rhs_cache_.emplace(k, r.v);
        c_.push_back(std::move(ck));
        err_.push_back(std::move(sol.err));
        forward_.push_back(rel);
    }
}

ExoticSeries RecursionState::psi() const
{
    ExoticSeries out(eq_.gamma, 1, solved_through());
    for (int k = 1; k <= solved_through(); ++k) out.set(k, c(k));
    return out;
}

std::vector<PoleEntry> RecursionState::pole_profile() const
{
    std::vector<PoleEntry> out;
    for (int k = 1; k <= solved_through(); ++k) {
        const LaurentPoly& ck = c(k);
        out.push_back({k, ck.is_zero() ? 0 : std::max(0, -ck.lead()), k * eq_.mu});
    }
    return out;
}

RecursionState solve_through(ReducedEquation eq, int K, NormParams norm, SolverOptions opts)
{
    RecursionState s(std::move(eq), norm, opts);
    s.extend(K);
    return s;
}

ExoticSeries assemble(const ExoticSeries& prefix, const RecursionState& state)
{
    const int N = state.equation().N;
    ExoticSeries phi(prefix.gamma(), std::min(prefix.k_min(), N), kExact);
    for (const auto& [k, p] : prefix.terms())
        if (k <= N) phi.set(k, p);
    return phi + scale(state.psi(), LaurentPoly::constant(Complex(1)), N);
}

} // namespace exoseries
