#include <exoseries/exotic.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace exoseries
{

ExoticSeries::ExoticSeries(Real gamma, int k_min, int k_max) : gamma_(gamma), k_min_(k_min), k_max_(k_max)
{
    if (gamma == 0 || !std::isfinite(gamma)) throw Error("exotic", "gamma must be a nonzero real");
}

ExoticSeries ExoticSeries::monomial(Real gamma, int k, LaurentPoly p, int k_max)
{
    ExoticSeries s(gamma, k, std::max(k, k_max));
    s.set(k, std::move(p));
    return s;
}

LaurentPoly ExoticSeries::term(int k) const
{
    auto it = terms_.find(k);
    return it == terms_.end() ? LaurentPoly{} : it->second;
}

void ExoticSeries::set(int k, LaurentPoly p)
{
    if (k > k_max_) throw Error("exotic", "grade " + std::to_string(k) + " lies beyond k_max");
    if (k < k_min_) k_min_ = k;
    if (p.is_zero() && p.is_exact()) {
        terms_.erase(k);
        return;
    }
    terms_[k] = std::move(p);
}

int ExoticSeries::effective_valuation() const noexcept
{
    for (const auto& [k, p] : terms_)
        if (!p.is_zero()) return k;
    return sat_add(k_max_, 1);
}

ExoticSeries ExoticSeries::truncated(int k_max) const
{
    ExoticSeries out(gamma_, k_min_, std::min(k_max_, k_max));
    for (const auto& [k, p] : terms_)
        if (k <= out.k_max_) out.terms_.emplace(k, p);
    return out;
}

SectorSpec::SectorSpec(Real lo, Real hi, Real rad) : arg_lo(lo), arg_hi(hi), radius(rad)
{
    if (!(lo < hi)) throw Error("exotic", "sector requires arg_lo < arg_hi");
    if (!(hi - lo < 2 * std::numbers::pi_v<Real>)) throw Error("exotic", "sector opening must be below 2*pi");
    if (!(rad > 0)) throw Error("exotic", "sector radius must be positive");
}

Complex exotic_t(const XPoint& x, Real gamma)
{
    if (!(x.modulus > 0)) throw Error("exotic", "x^{i gamma} needs x != 0");
    return std::exp(Complex(0, gamma) * Complex(std::log(x.modulus), x.arg));
}

namespace
{

void check_gamma(const ExoticSeries& a, const ExoticSeries& b)
{
    if (a.gamma() != b.gamma()) throw Error("exotic", "gamma mismatch between exotic series");
}

ExoticSeries combine(const ExoticSeries& a, const ExoticSeries& b, Real sign)
{
    check_gamma(a, b);
    ExoticSeries out(a.gamma(), std::min(a.k_min(), b.k_min()), std::min(a.k_max(), b.k_max()));
    for (const auto& [k, p] : a.terms())
        if (k <= out.k_max()) out.set(k, p);
    for (const auto& [k, p] : b.terms()) {
        if (k > out.k_max()) continue;
        LaurentPoly q = out.term(k);
        if (sign > 0)
            q += p;
        else
            q -= p;
        out.set(k, std::move(q));
    }
    return out;
}

} // namespace

ExoticSeries operator+(const ExoticSeries& a, const ExoticSeries& b) { return combine(a, b, 1); }
ExoticSeries operator-(const ExoticSeries& a, const ExoticSeries& b) { return combine(a, b, -1); }

ExoticSeries operator*(const ExoticSeries& a, Complex c)
{
    ExoticSeries out(a.gamma(), a.k_min(), a.k_max());
    for (const auto& [k, p] : a.terms()) out.set(k, p * c);
    return out;
}

ExoticSeries mul(const ExoticSeries& a, const ExoticSeries& b, int cap)
{
    check_gamma(a, b);
    const int va = a.effective_valuation();
    const int vb = b.effective_valuation();
    int k_max = std::min({sat_add(a.k_max(), vb), sat_add(b.k_max(), va), cap});
    ExoticSeries out(a.gamma(), a.k_min() + b.k_min(), k_max);
    std::map<int, LaurentPoly> acc;
    for (const auto& [ka, pa] : a.terms()) {
        for (const auto& [kb, pb] : b.terms()) {
            const int k = ka + kb;
            if (k > k_max) break;
            auto [it, fresh] = acc.try_emplace(k, pa * pb);
            if (!fresh) it->second += pa * pb;
        }
    }
    for (auto& [k, p] : acc) out.set(k, std::move(p));
    return out;
}

ExoticSeries scale(const ExoticSeries& a, const LaurentPoly& c, int r)
{
    ExoticSeries out(a.gamma(), a.k_min() + r, sat_add(a.k_max(), r));
    for (const auto& [k, p] : a.terms()) out.set(k + r, p * c);
    return out;
}

ExoticSeries delta(const ExoticSeries& a) { return delta_power(a, 1); }

ExoticSeries delta_power(const ExoticSeries& a, int j)
{
    if (j < 0) throw Error("exotic", "negative power of delta");
    ExoticSeries out(a.gamma(), a.k_min(), a.k_max());
    for (const auto& [k, p] : a.terms()) out.set(k, shifted_op(p, k, a.gamma(), j));
    return out;
}

ExoticSeries abs_series(const ExoticSeries& a) { return abs_delta_power(a, 0); }

ExoticSeries abs_delta_power(const ExoticSeries& a, int j)
{
    ExoticSeries out(a.gamma(), a.k_min(), a.k_max());
    for (const auto& [k, p] : a.terms()) out.set(k, abs_shifted_op(p, k, a.gamma(), j));
    return out;
}

Valuation valuation(const ExoticSeries& a)
{
    for (const auto& [k, p] : a.terms())
        if (!p.is_zero()) return {k, k};
    return {std::nullopt, sat_add(a.k_max(), 1)};
}

Valuation valuation(const ExoticSeries& a, const ExoticSeries& majorant, Real rel_tol)
{
    for (const auto& [k, p] : a.terms()) {
        if (p.is_zero()) continue;
        if (!negligible(p, majorant.term(k), rel_tol)) return {k, k};
    }
    return {std::nullopt, sat_add(a.k_max(), 1)};
}

ExoticSeries rescale(const ExoticSeries& a, Real lambda)
{
    if (!(lambda > 0)) throw Error("exotic", "rescale factor must be positive");
    ExoticSeries out(a.gamma(), a.k_min(), a.k_max());
    for (const auto& [k, p] : a.terms()) out.set(k, p * Complex(std::pow(lambda, -k)));
    return out;
}

Complex eval_at(const ExoticSeries& a, const XPoint& x, const SectorSpec& sector)
{
    if (!sector.contains_arg(x.arg) || !(x.modulus > 0) || x.modulus > sector.radius)
        throw OutsideDomain("outside domain of certified convergence: |x| = " + std::to_string(static_cast<double>(x.modulus))
                            + ", arg x = " + std::to_string(static_cast<double>(x.arg)));
    const Complex t = exotic_t(x, a.gamma());
    Complex sum{};
    for (const auto& [k, p] : a.terms()) sum += p.eval(t) * std::polar(std::pow(x.modulus, k), k * x.arg);
    return sum;
}

TruncatedNorm norm_Hj(const ExoticSeries& a, int j, int N, const NormParams& p)
{
    if (j < 0) throw Error("exotic", "norm_Hj index must be nonnegative");
    TruncatedNorm out{0, a.k_max(), kExact};
    for (const auto& [k, pk] : a.terms()) {
        out.value += norm(shifted_op(pk, k + N, a.gamma(), j), p);
        out.min_trunc_L = std::min(out.min_trunc_L, pk.trunc_L());
    }
    return out;
}

ExoticSeries substitute_terms(const std::vector<TaylorTerm>& terms, const std::vector<ExoticSeries>& ys, Real gamma,
                              std::optional<int> out_k_max, SubstituteMode mode)
{
    const int out_cap = out_k_max.value_or(kExact);
    std::vector<int> vals;
    for (const auto& y : ys) {
        if (y.gamma() != gamma) throw Error("exotic", "gamma mismatch in substitution");
        vals.push_back(y.effective_valuation());
    }

    ExoticSeries total(gamma, 0, out_cap);
    bool first = true;
    for (const auto& term : terms) {
        if (term.y_powers.size() > ys.size()) throw Error("exotic", "substitution needs values for every y_j");
        std::vector<int> factors;
        for (std::size_t j = 0; j < term.y_powers.size(); ++j)
            for (int e = 0; e < term.y_powers[j]; ++e) factors.push_back(static_cast<int>(j));

        // the grade cap after i factors accounts for the smallest grades the
        // remaining factors can contribute
        auto cap_after = [&](std::size_t i) {
            if (out_cap >= kExact) return kExact;
            long long c = static_cast<long long>(out_cap) - term.x_power;
            for (std::size_t q = i; q < factors.size(); ++q) {
                if (vals[static_cast<std::size_t>(factors[q])] >= kExact) return kExact;
                c -= vals[static_cast<std::size_t>(factors[q])];
            }
            return static_cast<int>(std::clamp<long long>(c, -kExact, kExact));
        };

        ExoticSeries prod = ExoticSeries::monomial(gamma, 0, LaurentPoly::constant(Complex(1)));
        for (std::size_t i = 0; i < factors.size(); ++i)
            prod = mul(prod, ys[static_cast<std::size_t>(factors[i])], cap_after(i + 1));
        const LaurentPoly c = mode == SubstituteMode::majorant ? abs_coefficients(term.coeff) : term.coeff;
        ExoticSeries contrib = scale(prod, c, term.x_power);
        if (first) {
            total = contrib.truncated(out_cap);
            first = false;
        } else {
            total = total + contrib;
        }
    }
    if (first) total = ExoticSeries(gamma, 0, out_cap);
    if (out_k_max && total.k_max() < *out_k_max) {
        int worst = kExact;
        for (const auto& y : ys) worst = std::min(worst, y.k_max());
        const int needed = sat_add(worst, *out_k_max - total.k_max());
        throw InsufficientReliability("exotic",
                                      "substitution reliable only through grade " + std::to_string(total.k_max())
                                          + "; needs K >= " + std::to_string(needed),
                                      needed);
    }
    return total.truncated(out_cap);
}

ExoticSeries substitute(const OdeExpr& f, const ExoticSeries& theta, std::optional<int> out_k_max, SubstituteMode mode)
{
    std::vector<ExoticSeries> ys;
    for (int j = 0; j <= f.order(); ++j)
        ys.push_back(mode == SubstituteMode::majorant ? abs_delta_power(theta, j) : delta_power(theta, j));
    return substitute_terms(taylor_terms(f), ys, theta.gamma(), out_k_max, mode);
}

} // namespace exoseries
