#ifndef EXOSERIES_PAINLEVE3_HPP
#define EXOSERIES_PAINLEVE3_HPP

#include <string>

#include <exoseries/certify.hpp>
#include <exoseries/common.hpp>
#include <exoseries/expr.hpp>
#include <exoseries/laurent.hpp>

namespace exoseries
{

// Third Painleve equation in the form
//   -y y'' + y'^2 + a x y^3 + b x y + c x^2 y^4 + d x^2 = 0,  y_j = delta^j y,
// with the exotic family y ~ p(x^{i gamma}) / x.
struct P3Params {
    Real gamma = 1;
    Complex C{1, 0};
    Complex a{1, 0};
    Complex b{1, 0};
    Complex c{1, 0};
    Complex d{1, 0};

    void validate() const;
};

std::string p3_equation_text();
ParamMap p3_param_map(const P3Params& p);
OdeExpr p3_equation(const P3Params& p);

// p(t) = -4 C gamma^2 t / Q(t),  Q(t) = 4(c gamma^2 + a^2) t^2 - 4 a C t + C^2.
LaurentPoly p3_leading_numerator(const P3Params& p);
LaurentPoly p3_leading_denominator(const P3Params& p);
LaurentPoly p3_leading_coefficient(const P3Params& p, int trunc_L);

// Single-term exotic series p(t) x^{-1}, finite in x.
ExoticSeries p3_leading(const P3Params& p, int trunc_L);

// p3_leading regenerated per t-window.
PrefixSource p3_prefix(const P3Params& p);

// R = half the smallest modulus of a root of Q (0.5 without roots), r = R/2.
NormParams p3_default_norm(const P3Params& p);

CertifyConfig p3_default_config(const P3Params& p, int K, int L_base);
CertifyResult p3_demo(const P3Params& p, int K = 30, int L_base = 40);

} // namespace exoseries

#endif
