#include <doctest.h>

#include <cmath>

#include "probmotion/error.hpp"
#include "probmotion/gaussmath.hpp"

using namespace probmotion;

namespace {

// Composite Simpson integration — the independent oracle for every CDF here.
template <typename F>
double simpson(F f, double lo, double hi, int intervals) {
    // intervals must be even
    const double h = (hi - lo) / intervals;
    double s = f(lo) + f(hi);
    for (int i = 1; i < intervals; ++i) s += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

double cdf_oracle(double x) {
    return simpson([](double t) { return gauss::normal_pdf(t); }, -12.0, x, 20000);
}

double chi_pdf(double r, double dof) {
    // r^{d-1} e^{-r^2/2} / (2^{d/2-1} Gamma(d/2))
    const double log_pdf = (dof - 1.0) * std::log(r) - 0.5 * r * r -
                           (0.5 * dof - 1.0) * std::log(2.0) - std::lgamma(0.5 * dof);
    return std::exp(log_pdf);
}

}  // namespace

TEST_CASE("normal pdf and cdf match integration oracle") {
    CHECK(gauss::normal_pdf(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
    const double xs[] = {-3.0, -1.0, -0.5, 0.0, 0.3, 1.0, 2.5};
    for (double x : xs) CHECK(std::fabs(gauss::normal_cdf(x) - cdf_oracle(x)) < 1e-9);
    CHECK(gauss::normal_cdf(0.0) == 0.5);
    // symmetry
    CHECK(std::fabs(gauss::normal_cdf(1.3) + gauss::normal_cdf(-1.3) - 1.0) < 1e-15);
}

TEST_CASE("normal quantile inverts the cdf") {
    for (double x = -5.0; x <= 5.0; x += 0.37)
        CHECK(std::fabs(gauss::normal_quantile(gauss::normal_cdf(x)) - x) < 1e-9);

    // Known two-sided 95% point.
    CHECK(std::fabs(gauss::normal_quantile(0.975) - 1.959963984540054) < 1e-9);
    // The median maps to exactly zero — mean samples rely on this being exact.
    CHECK(gauss::normal_quantile(0.5) == 0.0);

    // strictly increasing
    double prev = gauss::normal_quantile(0.001);
    for (double p = 0.011; p < 1.0; p += 0.01) {
        const double q = gauss::normal_quantile(p);
        CHECK(q > prev);
        prev = q;
    }

    CHECK_THROWS_AS(gauss::normal_quantile(0.0), Error);
    CHECK_THROWS_AS(gauss::normal_quantile(1.0), Error);
    CHECK_THROWS_AS(gauss::normal_quantile(-0.2), Error);
}

TEST_CASE("regularized gamma P against erf identity") {
    // P(1/2, x) = erf(sqrt(x))
    for (double x = 0.1; x < 9.0; x += 0.37)
        CHECK(std::fabs(gauss::regularized_gamma_p(0.5, x) - std::erf(std::sqrt(x))) < 1e-12);
    // P(1, x) = 1 - e^{-x}
    for (double x = 0.1; x < 9.0; x += 0.53)
        CHECK(std::fabs(gauss::regularized_gamma_p(1.0, x) - (1.0 - std::exp(-x))) < 1e-12);
    CHECK(gauss::regularized_gamma_p(2.5, 0.0) == 0.0);
    CHECK(gauss::regularized_gamma_p(3.0, 200.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("chi cdf matches integration oracle across dimensions") {
    const double dofs[] = {1.0, 2.0, 3.0, 8.0, 24.0};
    const double radii[] = {0.3, 1.0, 2.0, 4.0, 6.5};
    for (double d : dofs)
        for (double r : radii) {
            const double oracle =
                simpson([d](double t) { return chi_pdf(t, d); }, 1e-12, r, 20000);
            CHECK(std::fabs(gauss::chi_cdf(r, d) - oracle) < 1e-9);
        }
    // dof = 2 has the closed form 1 - exp(-r^2/2).
    for (double r = 0.2; r < 5.0; r += 0.41)
        CHECK(std::fabs(gauss::chi_cdf(r, 2.0) - (1.0 - std::exp(-0.5 * r * r))) < 1e-12);
    CHECK(gauss::chi_cdf(0.0, 5.0) == 0.0);
    CHECK(gauss::chi_cdf(-1.0, 5.0) == 0.0);
}
