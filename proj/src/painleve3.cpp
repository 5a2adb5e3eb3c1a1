#include <exoseries/painleve3.hpp>

#include <algorithm>
#include <cmath>

namespace exoseries
{

void P3Params::validate() const
{
    if (gamma == 0 || !std::isfinite(gamma)) throw Error("painleve3", "gamma must be a nonzero real");
    if (C == Complex{}) throw Error("painleve3", "C must be nonzero");
}

std::string p3_equation_text() { return "-y0*y2 + y1^2 + a*x*y0^3 + b*x*y0 + c*x^2*y0^4 + d*x^2"; }

ParamMap p3_param_map(const P3Params& p)
{
    return {{"a", p.a}, {"b", p.b}, {"c", p.c}, {"d", p.d}, {"C", p.C}, {"gamma", Complex(p.gamma)}};
}

OdeExpr p3_equation(const P3Params& p)
{
    p.validate();
    return parse_ode(p3_equation_text(), p3_param_map(p));
}

LaurentPoly p3_leading_numerator(const P3Params& p)
{
    return LaurentPoly::monomial(Real(-4) * p.C * (p.gamma * p.gamma), 1);
}

LaurentPoly p3_leading_denominator(const P3Params& p)
{
    const Real g = p.gamma;
    return LaurentPoly(0, {p.C * p.C, Real(-4) * p.a * p.C, Real(4) * (p.c * (g * g) + p.a * p.a)});
}

LaurentPoly p3_leading_coefficient(const P3Params& p, int trunc_L)
{
    p.validate();
    return divide(p3_leading_numerator(p), p3_leading_denominator(p), trunc_L);
}

ExoticSeries p3_leading(const P3Params& p, int trunc_L)
{
    return ExoticSeries::monomial(p.gamma, -1, p3_leading_coefficient(p, trunc_L));
}

PrefixSource p3_prefix(const P3Params& p)
{
    p.validate();
    return [p](int trunc_L) { return p3_leading(p, trunc_L); };
}

NormParams p3_default_norm(const P3Params& p)
{
    const LaurentPoly q = p3_leading_denominator(p);
    const Complex q0 = q[0], q1 = q[1], q2 = q[2];
    Real rho = -1;
    if (std::abs(q2) > 0) {
        const Complex disc = std::sqrt(q1 * q1 - Real(4) * q2 * q0);
        rho = std::min(std::abs((-q1 + disc) / (Real(2) * q2)), std::abs((-q1 - disc) / (Real(2) * q2)));
    } else if (std::abs(q1) > 0) {
        rho = std::abs(q0 / q1);
    }
    const Real R = rho > 0 ? Real(0.5) * rho : Real(0.5);
    return NormParams(R / 2, R);
}

CertifyConfig p3_default_config(const P3Params& p, int K, int L_base)
{
    CertifyConfig cfg;
    cfg.K = K;
    cfg.L_base = L_base;
    cfg.norm = p3_default_norm(p);
    return cfg;
}

CertifyResult p3_demo(const P3Params& p, int K, int L_base)
{
    return certify(p3_equation(p), p3_prefix(p), p3_default_config(p, K, L_base));
}

} // namespace exoseries
