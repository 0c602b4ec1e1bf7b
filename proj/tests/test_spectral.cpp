#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dropshape/errors.hpp"
#include "dropshape/nonlocal.hpp"
#include "dropshape/quadrature.hpp"
#include "dropshape/spectral.hpp"

using namespace dropshape;
constexpr double kPi = std::numbers::pi;

namespace {
KernelFamily exp_family(double eps) { return {build_kernel(Family::exponential, {}, 2), eps}; }

SphericalField cos3() {
    SphericalField f(2, 3);
    f.set(3, 1, std::sqrt(kPi));
    return f;
}

// For u = cos(3 theta): int (u(theta) - u(theta + D))^2 dtheta = 2 pi (1 - cos 3D), so Q reduces to
// a single adaptive integral over the gap D.
double q_cos3_oracle(const KernelFamily& fam) {
    auto f = [&](double D) {
        const double chord = 2.0 * std::sin(0.5 * D);
        return 2.0 * kPi * (1.0 - std::cos(3.0 * D)) / (chord * chord) * derived_kernel(fam, Derived::eta_eps, chord);
    };
    double total = 0.0;
    double a = 0.0;
    for (double b : {fam.eps, 4.0 * fam.eps, 16.0 * fam.eps, kPi}) {
        if (b <= a) continue;
        total += integrate(f, a, std::min(b, kPi), 1e-12).value;
        a = std::min(b, kPi);
    }
    return 2.0 * total;
}
}  // namespace

TEST_CASE("basis functions") {
    CHECK(harmonic_multiplicity(2, 0) == 1);
    CHECK(harmonic_multiplicity(2, 4) == 2);
    CHECK(harmonic_multiplicity(3, 1) == 3);
    CHECK(harmonic_eigenvalue(3, 2) == 6.0);
    const SphereGrid g = SphereGrid::for_degree(2, 3);
    std::vector<double> s(g.size());
    for (int q = 0; q < g.n_azimuth; ++q) s[q] = std::cos(3.0 * g.theta(0, q));
    const SphericalField f = expand(s, g, 3);
    CHECK(f.coeff(3, 1) == doctest::Approx(std::sqrt(kPi)).epsilon(1e-13));
    for (int k = 0; k <= 3; ++k)
        for (int i = 1; i <= harmonic_multiplicity(2, k); ++i)
            if (!(k == 3 && i == 1)) CHECK(std::abs(f.coeff(k, i)) < 1e-13);
}

TEST_CASE("x1 on the sphere is a pure degree-one field") {
    const SphereGrid g = SphereGrid::for_degree(3, 4);
    std::vector<double> s(g.size());
    for (int p = 0; p < g.n_polar; ++p)
        for (int q = 0; q < g.n_azimuth; ++q)
            s[p * g.n_azimuth + q] = std::sin(g.theta(p, q)) * std::cos(g.phi(q));
    const SphericalField f = expand(s, g, 4);
    // int_{S^2} x1^2 = 4 pi / 3.
    CHECK(f.coeff(1, 3) == doctest::Approx(std::sqrt(4.0 * kPi / 3.0)).epsilon(1e-12));
    CHECK(f.l2_norm_sq() == doctest::Approx(4.0 * kPi / 3.0).epsilon(1e-12));
}

TEST_CASE("round trip and Parseval") {
    std::mt19937_64 rng(11);
    for (int n : {2, 3}) {
        const SphericalField f = random_field(n, 8, rng, false);
        const SphereGrid g = SphereGrid::for_degree(n, 8);
        const std::vector<double> s = synthesize(f, g);
        const SphericalField back = expand(s, g, 8);
        double err = 0.0;
        for (int k = 0; k <= 8; ++k)
            for (int i = 1; i <= harmonic_multiplicity(n, k); ++i)
                err = std::max(err, std::abs(back.coeff(k, i) - f.coeff(k, i)));
        CHECK(err <= 1e-10);
        CHECK(grid_integral_abs_pow(s, g, 2.0) == doctest::Approx(f.l2_norm_sq()).epsilon(1e-8));
    }
    SphereGrid coarse = SphereGrid::for_degree(2, 8);
    coarse.n_azimuth = 10;
    CHECK_THROWS_AS(expand(std::vector<double>(10, 0.0), coarse, 8), ValidationError);
}

TEST_CASE("nonlocal quadratic form converges to the Dirichlet energy") {
    const SphericalField f = cos3();
    double prev_gap = 1e300;
    for (double eps : {0.2, 0.1, 0.05}) {
        const QuadraticFormReport r = nonlocal_form_Q(f, exp_family(eps));
        CHECK(r.h1_seminorm == doctest::Approx(9.0 * kPi));
        // Linear interpolation of the quotient costs O(h^2) ~ 4e-6 relative at N = 1024.
        CHECK(r.q_value == doctest::Approx(q_cos3_oracle(exp_family(eps))).epsilon(2e-5));
        const double gap = std::abs(r.q_value - 9.0 * kPi);
        CHECK(gap < prev_gap);
        prev_gap = gap;
        CHECK_FALSE(r.lipschitz_warning);
    }
    CHECK(prev_gap < 0.1 * 9.0 * kPi);

    SphericalField c(2, 1);
    c.set(0, 1, 2.0);
    CHECK(nonlocal_form_Q(c, exp_family(0.1)).q_value == doctest::Approx(0.0).scale(1.0));

    SphericalField one(2, 1);
    one.set(1, 1, std::sqrt(kPi));
    const QuadraticFormReport r1 = nonlocal_form_Q(one, exp_family(0.05));
    CHECK(r1.q_value <= 1.1 * kPi);
}

TEST_CASE("quadratic form gap shrinks for every kernel family") {
    for (Family fam : {Family::gaussian, Family::compact_bump, Family::truncated_riesz}) {
        const RadialKernel k = build_kernel(fam, {}, 2);
        double prev = 1e300;
        for (double eps : {0.2, 0.1, 0.05}) {
            const double q = std::abs(nonlocal_form_Q(cos3(), {k, eps}).q_eta_hat);
            CHECK(q < prev);
            prev = q;
        }
    }
}

TEST_CASE("constraint checks and the spectral gap") {
    const ConstraintReport c3 = constraint_checks(cos3(), 0.02);
    CHECK(c3.gap == doctest::Approx(3.0 * kPi));
    CHECK(c3.applicable);
    CHECK(c3.gap_nonnegative);

    SphericalField one(2, 1);
    one.set(1, 1, std::sqrt(kPi));
    const ConstraintReport c1 = constraint_checks(one, 0.02);
    CHECK(c1.gap == doctest::Approx(-kPi));
    CHECK_FALSE(c1.applicable);

    SphericalField d2(3, 2);
    d2.set(2, 3, 1.0);
    CHECK(constraint_checks(d2, 0.02).gap == doctest::Approx(0.5));

    std::mt19937_64 rng(5);
    for (int n : {2, 3})
        for (int trial = 0; trial < 20; ++trial) {
            const SphericalField f = random_field(n, 6, rng, true);
            const ConstraintReport r = constraint_checks(f, 0.01);
            CHECK(r.gap >= 0.0);
            CHECK(r.applicable);
        }
}

TEST_CASE("volume identity for constrained shapes") {
    std::mt19937_64 rng(9);
    const CenteredField cf = random_centered_field(6, 0.02, rng);
    CHECK(area(cf.shape) == doctest::Approx(kPi).epsilon(1e-12));
    CHECK(barycenter(cf.shape).norm() < 1e-8);
    const ConstraintReport r = constraint_checks(cf.u, cf.t);
    // In the plane the volume expansion is exact at second order.
    CHECK(r.volume_residual <= 1e-10);
    const NearlySphericalDecomposition ns = nearly_spherical_decompose(cf.shape);
    CHECK(ns.t <= cf.t);
}

TEST_CASE("field and shape conversions") {
    std::mt19937_64 rng(3);
    const SphericalField f = random_field(2, 5, rng, true);
    const StarShape2D E = shape_from_field(f, 0.01);
    const SphericalField g = field_from_shape(E, 0.01);
    for (int k = 0; k <= 5; ++k)
        for (int i = 1; i <= harmonic_multiplicity(2, k); ++i) CHECK(g.coeff(k, i) == doctest::Approx(f.coeff(k, i)));
    const SphereGrid grid = SphereGrid::for_degree(2, 5);
    const std::vector<double> s = synthesize(f, grid);
    for (int q = 0; q < grid.n_azimuth; q += 7) CHECK(E.R(grid.theta(0, q)) == doctest::Approx(1.0 + 0.01 * s[q]));

    const SphericalField h = field_from_json(field_to_json(f));
    CHECK(h.degree() == 5);
    CHECK(h.coeff(3, 2) == f.coeff(3, 2));
    CHECK_THROWS_AS(field_from_json(nlohmann::json::parse(R"({"n": 2, "L": 1, "coeffs": [[4, 1, 0.5]]})")),
                    ValidationError);
}

TEST_CASE("deficit checks for cos(3 theta)") {
    const DeficitReport r = deficit_checks(0.02, cos3(), exp_family(0.05), 0.5);
    CHECK(r.bracket_holds);
    CHECK(r.decomposition_residual <= 1e-6);
    CHECK(r.energy_bound_holds);

    const DeficitReport zero = deficit_checks(0.02, SphericalField(2, 2), exp_family(0.05), 0.5);
    CHECK(std::abs(zero.perimeter_deficit) < 1e-12);
    CHECK(std::abs(zero.energy_deficit) < 1e-12);
    CHECK(zero.energy_bound == 0.0);
    CHECK(zero.energy_bound_holds);
}

TEST_CASE("psi reduces to the disk for constant fields") {
    SphericalField c(2, 0);
    c.set(0, 1, 0.5 * std::sqrt(2.0 * kPi));  // u = 1/2
    const KernelFamily f = exp_family(0.05);
    const PolarTerms pt = polar_terms(shape_from_field(c, 0.02), f);
    CHECK(pt.cross_term == 0.0);
    const double direct = per_slicing(from_fourier({0.0, 0.0}, 1.01, {}), f).value;
    CHECK(pt.psi == doctest::Approx(direct).epsilon(1e-4));
}
