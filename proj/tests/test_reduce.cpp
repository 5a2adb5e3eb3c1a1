#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <exoseries/painleve3.hpp>
#include <exoseries/reduce.hpp>

using namespace exoseries;

namespace
{

ExoticSeries empty_prefix(Real gamma = 1) { return ExoticSeries(gamma, 0, kExact); }

bool near(Complex a, Complex b, Real tol = 1e-10) { return std::abs(a - b) <= tol * std::max<Real>(1, std::abs(b)); }

} // namespace

TEST_CASE("leading data of the Painleve family")
{
    const P3Params p;
    const LeadingData lead = leading_data(p3_equation(p), p3_leading(p, 40));
    CHECK(lead.m == -1);
    REQUIRE(lead.order() == 2);
    for (int j = 0; j <= 2; ++j) CHECK(ord0(lead.a[static_cast<std::size_t>(j)]) == 1);
    CHECK(near(lead.a[2][1], Complex(4)));
    CHECK(near(lead.a[1][1], Complex(8, -8)));
    CHECK(near(lead.a[0][1], Complex(0, -8)));

    const auto coeffs = indicial_coefficients(lead);
    CHECK(near(coeffs[2], Complex(1)));
    CHECK(near(coeffs[1], Complex(2, -2)));
    CHECK(near(coeffs[0], Complex(0, -2)));
}

TEST_CASE("indicial roots of a monic polynomial")
{
    // z^2 + 3z + 2
    const auto r = indicial_roots({Complex(2), Complex(3), Complex(1)});
    REQUIRE(r.size() == 2);
    std::vector<Real> re{r[0].real(), r[1].real()};
    std::sort(re.begin(), re.end());
    CHECK(re[0] == doctest::Approx(-2));
    CHECK(re[1] == doctest::Approx(-1));
    CHECK(std::abs(r[0].imag()) < 1e-12);

    // (z - i)(z + 2i) = z^2 + i z + 2
    const auto s = indicial_roots({Complex(2), Complex(0, 1), Complex(1)});
    for (const Complex z : s) CHECK(std::abs(z * z + Complex(0, 1) * z + Complex(2)) < 1e-12);
}

TEST_CASE("condition violated when a lower coefficient starts earlier in t")
{
    // dF/dy1 = t, dF/dy0 = 1: ord0 a_0 = 0 < ord0 a_1 = 1
    const OdeExpr f = parse_ode("t*y1 + y0 - x", {});
    const LeadingData lead = leading_data(f, empty_prefix());
    CHECK(lead.m == 0);
    CHECK_THROWS_AS(indicial_coefficients(lead), ConditionViolated);
}

TEST_CASE("vanishing top coefficient makes the construction inapplicable")
{
    const OdeExpr f = parse_ode("y0*y1 - x", {});
    CHECK_THROWS_AS(leading_data(f, empty_prefix()), MethodInapplicable);
}

TEST_CASE("choice of N skips integer roots")
{
    // a_1 z + a_0 with root z = 2: k + N = 2 resonates
    const OdeExpr f = parse_ode("y1 - 2*y0 - x", {});
    const LeadingData lead = leading_data(f, empty_prefix());
    const NChoice c = choose_N(lead, 10, 1.0);
    CHECK(c.admissible);
    CHECK(c.N == 2);
    REQUIRE(c.rejected.size() == 1);
    CHECK(c.rejected[0] == 1);
    CHECK(c.asymptotic_ok);
    CHECK(c.checked_through >= 10);

    const NChoice bad = test_N(lead, 10, 1.0, 1);
    CHECK_FALSE(bad.admissible);

    // non-integer root is admissible at once
    const LeadingData lead2 = leading_data(parse_ode("y1 + 0.5*y0 - x", {}), empty_prefix());
    const NChoice c2 = choose_N(lead2, 10, 1.0);
    CHECK(c2.N == 1);
    CHECK(c2.rejected.empty());
    CHECK(min_root_distance(c2.zeta, 1, 1, 1.0) > 0.4);
}

TEST_CASE("reduction of a linear equation with a pole in t")
{
    const OdeExpr f = parse_ode("y1 + y0 - x*t^-1*y0 - x", {});
    const ExoticSeries prefix = empty_prefix();
    const LeadingData lead = leading_data(f, prefix);
    const NPlan plan = plan_N(f, prefix, lead, 10);
    CHECK(plan.relaxed);
    CHECK(plan.N == 0);
    const ReducedEquation eq = reduce(f, prefix, plan.N);
    CHECK(eq.m == 0);
    CHECK(eq.mu == 1);
    REQUIRE(eq.order() == 1);
    CHECK(eq.a[1] == LaurentPoly::constant(1));
    CHECK(eq.a[0] == LaurentPoly::constant(1));
    // M = t^-1 u_0 + 1
    REQUIRE(eq.M.size() == 2);
    bool saw_const = false, saw_u0 = false;
    for (const auto& term : eq.M) {
        CHECK(term.x_power == 0);
        if (term.degree() == 0) {
            saw_const = true;
            CHECK(term.coeff == LaurentPoly::constant(1));
        } else {
            saw_u0 = true;
            CHECK(term.y_powers[0] == 1);
            CHECK(term.coeff == LaurentPoly::monomial(1, -1));
        }
    }
    CHECK(saw_const);
    CHECK(saw_u0);
}

TEST_CASE("resonant linear equation cannot be reduced")
{
    // a_1 z + a_0 = z - 1 vanishes at k + N = 1; the solution carries x log x
    const OdeExpr f = parse_ode("y1 - y0 - x", {});
    const ExoticSeries prefix = empty_prefix();
    const LeadingData lead = leading_data(f, prefix);
    CHECK_THROWS_AS(plan_N(f, prefix, lead, 10), Error);
}

TEST_CASE("reduction rejects a prefix with a large residual")
{
    const P3Params p;
    const OdeExpr f = p3_equation(p);
    // F(x, p/x) starts at x^0; m + N + 1 = 1 needs more
    try {
        reduce(f, p3_leading(p, 40), 1);
        FAIL("expected ReductionError");
    } catch (const ReductionError& e) {
        CHECK(e.offending_order() == 0);
        CHECK(std::string(e.what()).find("m + N + 1") != std::string::npos);
    }
}

TEST_CASE("reduction of the Painleve family at N = 0")
{
    const P3Params p;
    const OdeExpr f = p3_equation(p);
    const ExoticSeries prefix = p3_leading(p, 60);
    const LeadingData lead = leading_data(f, prefix);
    const NPlan plan = plan_N(f, prefix, lead, 20);
    CHECK(plan.N == 0);
    CHECK(plan.N_sup == 0);
    CHECK(plan.residual_valuation == 0);
    const ReducedEquation eq = reduce(f, prefix, plan.N);
    CHECK(eq.m == -1);
    CHECK(eq.mu == 1);
    CHECK(eq.a[2] == LaurentPoly::constant(1));
    CHECK(near(eq.a[1][0], Complex(2, -2)));
    CHECK(near(eq.a[0][0], Complex(0, -2)));
    // normalized a_j = raw a_j / raw a_n
    const LaurentPoly check = eq.a[1] * eq.raw_a[2] - eq.raw_a[1];
    CHECK(max_abs(check.truncated(40)) < 1e-10);
    for (const auto& term : eq.M) CHECK(term.x_power >= 0);
}

TEST_CASE("residual valuation along the leading term")
{
    const P3Params p;
    const OdeExpr f = p3_equation(p);
    const Valuation v = residual_valuation(f, p3_leading(p, 60), 3);
    CHECK(v.at_least(0));
    CHECK(v.value == 0);
}

TEST_CASE("clean drops only negligible coefficients")
{
    const LaurentPoly v(0, {1e-14, 0.5});
    const LaurentPoly m(0, {1.0, 1.0});
    const LaurentPoly c = clean(v, m, 1e-10);
    CHECK(c.lead() == 1);
    CHECK(c[1] == Complex(0.5));
}
