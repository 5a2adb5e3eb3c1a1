#include <exoseries/laurent.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace exoseries
{

Tolerances& default_tolerances() noexcept
{
    static Tolerances tol;
    return tol;
}

LaurentPoly::LaurentPoly(int lead, std::vector<Complex> coeffs, int precision)
    : lead_(lead), coeffs_(std::move(coeffs)), precision_(precision)
{
    for (const auto& c : coeffs_) {
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw Error("laurent", "non-finite Laurent coefficient");
    }
    normalize();
}

LaurentPoly LaurentPoly::zero(int precision)
{
    LaurentPoly f;
    f.precision_ = precision;
    return f;
}

LaurentPoly LaurentPoly::constant(Complex c, int precision) { return monomial(c, 0, precision); }

LaurentPoly LaurentPoly::monomial(Complex c, int exponent, int precision)
{
    return LaurentPoly(exponent, {c}, precision);
}

int LaurentPoly::trunc_L() const noexcept
{
    if (is_exact()) return kExact;
    return precision_ - effective_lead() - 1;
}

Complex LaurentPoly::leading_coefficient() const
{
    if (is_zero()) throw Error("laurent", "leading coefficient of the zero series");
    return coeffs_.front();
}

Complex LaurentPoly::operator[](int e) const noexcept
{
    if (e < lead_ || e > top()) return Complex{};
    return coeffs_[static_cast<std::size_t>(e - lead_)];
}

void LaurentPoly::normalize()
{
    // drop everything at or above the precision
    if (!is_exact() && !coeffs_.empty()) {
        const long long keep = static_cast<long long>(precision_) - lead_;
        if (keep <= 0) {
            coeffs_.clear();
        } else if (keep < static_cast<long long>(coeffs_.size())) {
            coeffs_.resize(static_cast<std::size_t>(keep));
        }
    }
    const Complex zero{};
    auto first = std::find_if(coeffs_.begin(), coeffs_.end(), [&](const Complex& c) { return c != zero; });
    if (first == coeffs_.end()) {
        coeffs_.clear();
        lead_ = 0;
        return;
    }
    lead_ += static_cast<int>(first - coeffs_.begin());
    coeffs_.erase(coeffs_.begin(), first);
    auto last = std::find_if(coeffs_.rbegin(), coeffs_.rend(), [&](const Complex& c) { return c != zero; });
    coeffs_.erase(last.base(), coeffs_.end());
}

LaurentPoly LaurentPoly::truncated(int precision) const
{
    LaurentPoly f = *this;
    f.precision_ = std::min(precision_, precision);
    f.normalize();
    return f;
}

LaurentPoly LaurentPoly::shifted(int s) const
{
    LaurentPoly f = *this;
    if (!f.is_zero()) f.lead_ += s;
    f.precision_ = sat_add(precision_, s);
    return f;
}

Complex LaurentPoly::eval(Complex t) const
{
    if (is_zero()) return {};
    Complex acc{};
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * t + *it;
    return acc * std::pow(t, lead_);
}

LaurentPoly LaurentPoly::operator-() const
{
    LaurentPoly f = *this;
    for (auto& c : f.coeffs_) c = -c;
    return f;
}

LaurentPoly& LaurentPoly::accumulate(const LaurentPoly& g, Real sign)
{
    const int prec = std::min(precision_, g.precision_);
    if (g.is_zero()) {
        precision_ = prec;
        normalize();
        return *this;
    }
    if (is_zero()) {
        *this = g;
        if (sign < 0)
            for (auto& c : coeffs_) c = -c;
        precision_ = prec;
        normalize();
        return *this;
    }
    const int lo = std::min(lead_, g.lead_);
    const int hi = std::min(std::max(top(), g.top()), prec == kExact ? kExact : prec - 1);
    if (hi < lo) {
        coeffs_.clear();
        lead_ = 0;
        precision_ = prec;
        return *this;
    }
    const Real tol = default_tolerances().zero_tol;
    std::vector<Complex> out(static_cast<std::size_t>(hi - lo + 1));
    for (int e = lo; e <= hi; ++e) {
        const Complex a = (*this)[e];
        const Complex b = sign * g[e];
        const Complex s = a + b;
        // flush cancellation to rounding level
        const Real scale = std::abs(a) + std::abs(b);
        out[static_cast<std::size_t>(e - lo)] = (std::abs(s) <= tol * scale) ? Complex{} : s;
    }
    lead_ = lo;
    coeffs_ = std::move(out);
    precision_ = prec;
    normalize();
    return *this;
}

LaurentPoly& LaurentPoly::operator+=(const LaurentPoly& g) { return accumulate(g, Real(1)); }
LaurentPoly& LaurentPoly::operator-=(const LaurentPoly& g) { return accumulate(g, Real(-1)); }

LaurentPoly& LaurentPoly::operator*=(Complex c)
{
    if (c == Complex{}) {
        coeffs_.clear();
        lead_ = 0;
        // c * O(t^p) stays O(t^p)
        return *this;
    }
    for (auto& x : coeffs_) x *= c;
    return *this;
}

LaurentPoly operator*(const LaurentPoly& f, const LaurentPoly& g)
{
    const int prec = std::min(sat_add(f.precision_, g.effective_lead()), sat_add(g.precision_, f.effective_lead()));
    if (f.is_zero() || g.is_zero()) return LaurentPoly::zero(prec);
    const int lo = f.lead_ + g.lead_;
    int hi = f.top() + g.top();
    if (prec != kExact) hi = std::min(hi, prec - 1);
    if (hi < lo) return LaurentPoly::zero(prec);
    std::vector<Complex> out(static_cast<std::size_t>(hi - lo + 1));
    const int nf = static_cast<int>(f.coeffs_.size());
    const int ng = static_cast<int>(g.coeffs_.size());
    for (int i = 0; i < nf && i <= hi - lo; ++i) {
        const Complex fi = f.coeffs_[static_cast<std::size_t>(i)];
        const int jmax = std::min(ng - 1, hi - lo - i);
        for (int j = 0; j <= jmax; ++j) out[static_cast<std::size_t>(i + j)] += fi * g.coeffs_[static_cast<std::size_t>(j)];
    }
    return LaurentPoly(lo, std::move(out), prec);
}

LaurentPoly invert(const LaurentPoly& f, std::optional<int> trunc_L)
{
    if (f.is_zero()) throw Error("laurent", "ill-conditioned inversion: zero series");
    // compare the leading coefficient against the first few coefficients
    const auto cs = f.coeffs();
    Real scale = 0;
    for (std::size_t i = 0; i < std::min<std::size_t>(cs.size(), 8); ++i) scale = std::max(scale, std::abs(cs[i]));
    const Complex f0 = cs.front();
    if (std::abs(f0) <= default_tolerances().zero_tol * scale)
        throw Error("laurent", "ill-conditioned inversion: leading coefficient below zero_tol");

    int window;
    if (f.is_exact()) {
        if (!trunc_L) {
            if (cs.size() == 1) return LaurentPoly::monomial(Complex(1) / f0, -f.lead());
            throw Error("laurent", "inverting an exact non-monomial series requires a truncation order");
        }
        window = *trunc_L;
    } else {
        window = f.trunc_L();
        if (trunc_L) window = std::min(window, *trunc_L);
    }
    if (window < 0) return LaurentPoly::zero(-f.lead());
    std::vector<Complex> g(static_cast<std::size_t>(window) + 1);
    g[0] = Complex(1) / f0;
    for (int i = 1; i <= window; ++i) {
        Complex acc{};
        const int smax = std::min(i, static_cast<int>(cs.size()) - 1);
        for (int s = 1; s <= smax; ++s) acc += cs[static_cast<std::size_t>(s)] * g[static_cast<std::size_t>(i - s)];
        g[static_cast<std::size_t>(i)] = -acc / f0;
    }
    return LaurentPoly(-f.lead(), std::move(g), -f.lead() + window + 1);
}

LaurentPoly divide(const LaurentPoly& f, const LaurentPoly& g, std::optional<int> trunc_L)
{
    return f * invert(g, trunc_L);
}

namespace
{

template <typename Fn>
LaurentPoly map_coefficients(const LaurentPoly& f, Fn fn)
{
    if (f.is_zero()) return f;
    std::vector<Complex> out(f.coeffs().begin(), f.coeffs().end());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(f.lead() + static_cast<int>(i), out[i]);
    return LaurentPoly(f.lead(), std::move(out), f.precision());
}

Complex ipow(Complex z, int j)
{
    Complex acc(1);
    for (int i = 0; i < j; ++i) acc *= z;
    return acc;
}

} // namespace

LaurentPoly shifted_op(const LaurentPoly& f, int k_plus_N, Real gamma, int j)
{
    if (j < 0) throw Error("laurent", "shifted_op power must be nonnegative");
    if (j == 0) return f;
    return map_coefficients(f, [&](int e, Complex c) {
        return c * ipow(Complex(static_cast<Real>(k_plus_N), gamma * static_cast<Real>(e)), j);
    });
}

LaurentPoly inverse_shifted_op(const LaurentPoly& f, int k_plus_N, Real gamma, int j)
{
    if (j < 0) throw Error("laurent", "inverse_shifted_op power must be nonnegative");
    if (j == 0) return f;
    const Real tol = default_tolerances().zero_tol;
    return map_coefficients(f, [&](int e, Complex c) {
        const Complex d = ipow(Complex(static_cast<Real>(k_plus_N), gamma * static_cast<Real>(e)), j);
        if (std::abs(d) <= tol) throw Error("laurent", "inverse_shifted_op: divisor vanishes at exponent " + std::to_string(e));
        return c / d;
    });
}

LaurentPoly abs_coefficients(const LaurentPoly& f)
{
    return map_coefficients(f, [](int, Complex c) { return Complex(std::abs(c)); });
}

LaurentPoly abs_shifted_op(const LaurentPoly& f, int k_plus_N, Real gamma, int j)
{
    if (j == 0) return abs_coefficients(f);
    return map_coefficients(f, [&](int e, Complex c) {
        const Real m = std::abs(Complex(static_cast<Real>(k_plus_N), gamma * static_cast<Real>(e)));
        return Complex(std::abs(c) * std::pow(m, j));
    });
}

Real norm(const LaurentPoly& f, const NormParams& p)
{
    if (f.is_zero()) return 0;
    const int nu = std::max(0, -f.lead());
    // (1/r^nu) sum_{e >= -nu} |f_e| R^{e + nu}
    Real acc = 0;
    Real w = std::pow(p.R, f.lead() + nu);
    for (const auto& c : f.coeffs()) {
        acc += std::abs(c) * w;
        w *= p.R;
    }
    return acc / std::pow(p.r, nu);
}

Real max_abs(const LaurentPoly& f)
{
    Real m = 0;
    for (const auto& c : f.coeffs()) m = std::max(m, std::abs(c));
    return m;
}

int ord0(const LaurentPoly& f)
{
    if (f.is_zero()) throw Error("laurent", "undefined order: zero series");
    return f.lead();
}

bool negligible(const LaurentPoly& f, const LaurentPoly& majorant, Real tol)
{
    const Real floor = std::numeric_limits<Real>::min();
    for (int e = f.lead(); e <= f.top(); ++e) {
        const Real v = std::abs(f[e]);
        if (v > tol * std::abs(majorant[e]) + floor) return false;
    }
    return true;
}

void write_csv(std::ostream& os, const LaurentPoly& f)
{
    os << "exponent,re,im\n";
    const auto old = os.precision(17);
    for (int e = f.lead(); e <= f.top(); ++e) os << e << ',' << f[e].real() << ',' << f[e].imag() << '\n';
    os.precision(old);
}

std::string to_string(const LaurentPoly& f)
{
    std::ostringstream os;
    os.precision(6);
    if (f.is_zero()) {
        os << "0";
    } else {
        bool first = true;
        for (int e = f.lead(); e <= f.top(); ++e) {
            if (f[e] == Complex{}) continue;
            if (!first) os << " + ";
            first = false;
            os << '(' << f[e].real() << (f[e].imag() < 0 ? "-" : "+") << std::abs(f[e].imag()) << "i)";
            if (e != 0) os << "*t^" << e;
        }
    }
    if (!f.is_exact()) os << " + O(t^" << f.precision() << ')';
    return os.str();
}

} // namespace exoseries
