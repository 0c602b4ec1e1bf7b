#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "dropshape/errors.hpp"
#include "dropshape/nonlocal.hpp"
#include "dropshape/parallel.hpp"
#include "dropshape/quadrature.hpp"

using namespace dropshape;
constexpr double kPi = std::numbers::pi;

namespace {
KernelFamily exp_family(double eps) { return {build_kernel(Family::exponential, {}, 2), eps}; }

StarShape2D peanut() { return from_fourier({0.0, 0.0}, 1.0, {{2, 0.1, 0.0}}); }

// Per(B_R) = 2 int G_eps(h) (|B| - |B cap (B + h)|) dh by adaptive quadrature on the raw profile.
double disk_oracle(double R, const KernelFamily& fam) {
    auto f = [&](double rho) {
        double lens = 0.0;
        if (rho < 2.0 * R)
            lens = 2.0 * R * R * std::acos(rho / (2.0 * R)) - 0.5 * rho * std::sqrt(4.0 * R * R - rho * rho);
        return fam.G(rho) * rho * (kPi * R * R - lens);
    };
    const double head = integrate(f, 0.0, 2.0 * R, 1e-13).value;
    const double tail = integrate_to_infinity(f, 2.0 * R, fam.eps, 1e-13).value;
    return 4.0 * kPi * (head + tail);
}

StarShape2D random_shape(std::mt19937_64& rng, int K) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<Mode> modes;
    for (int k = 2; k <= K; ++k) modes.push_back({k, 0.05 * U(rng) / (k * k), 0.05 * U(rng) / (k * k)});
    return from_fourier({0.0, 0.0}, 1.0, modes);
}
}  // namespace

TEST_CASE("disk covariogram formula matches direct quadrature") {
    for (double eps : {0.5, 0.1, 0.05}) {
        const KernelFamily f = exp_family(eps);
        for (double R : {0.6, 1.0, 1.4}) CHECK(per_disk(R, f) == doctest::Approx(disk_oracle(R, f)).epsilon(1e-10));
    }
}

TEST_CASE("three methods agree on the unit disk") {
    const KernelFamily f = exp_family(0.1);
    const StarShape2D D = unit_disk();
    const double ref = disk_oracle(1.0, f);
    for (PerMethod m : {PerMethod::slicing, PerMethod::area, PerMethod::polar}) {
        const EnergyReport r = per_nonlocal(D, f, m);
        CHECK(r.per_nonlocal > 0.0);
        CHECK(r.per_nonlocal < 2.0 * kPi);
        CHECK(r.per_nonlocal == doctest::Approx(ref).epsilon(1e-6));
        CHECK(r.per_local == doctest::Approx(2.0 * kPi).epsilon(1e-12));
    }
}

TEST_CASE("methods agree on perturbed disks") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 3; ++trial) {
        const StarShape2D E = random_shape(rng, 8);
        for (double eps : {0.5, 0.05}) {
            const KernelFamily f = exp_family(eps);
            const double s = per_slicing(E, f).value;
            const double a = per_area(E, f).value;
            const double p = per_polar(E, f).value;
            CHECK(a == doctest::Approx(s).epsilon(1e-5));
            CHECK(p == doctest::Approx(s).epsilon(1e-5));
            CHECK(s <= local_perimeter(E));
        }
    }
}

TEST_CASE("other kernel families agree across methods") {
    const StarShape2D E = peanut();
    for (Family fam : {Family::gaussian, Family::compact_bump, Family::truncated_riesz}) {
        const KernelFamily f{build_kernel(fam, {}, 2), 0.1};
        const double s = per_slicing(E, f).value;
        CHECK(per_area(E, f).value == doctest::Approx(s).epsilon(1e-4));
        CHECK(per_polar(E, f).value == doctest::Approx(s).epsilon(1e-4));
        CHECK(per_slicing(unit_disk(), f).value == doctest::Approx(per_disk(1.0, f)).epsilon(1e-6));
    }
}

TEST_CASE("nonlocal perimeter increases toward the perimeter as eps shrinks") {
    double prev = 0.0;
    for (double eps : {0.4, 0.2, 0.1, 0.05}) {
        const double v = per_slicing(unit_disk(), exp_family(eps)).value;
        CHECK(v > prev);
        CHECK(v < 2.0 * kPi);
        prev = v;
    }
    CHECK(2.0 * kPi - prev < 0.1 * 2.0 * kPi);
}

TEST_CASE("tiny sets have vanishing nonlocal perimeter") {
    const StarShape2D E = from_fourier({0.0, 0.0}, 1e-9, {});
    CHECK(std::abs(per_slicing(E, exp_family(0.1)).value) < 1e-12);
    CHECK(std::abs(per_area(E, exp_family(0.1)).value) < 1e-12);
}

TEST_CASE("invariance under rigid motions") {
    const KernelFamily f = exp_family(0.1);
    const StarShape2D E = from_fourier({0.0, 0.0}, 1.0, {{2, 0.08, 0.0}, {3, 0.0, 0.02}});
    const StarShape2D moved = translate(E, {0.7, -0.3});
    const double beta = 0.37;
    std::vector<Mode> turned;
    for (const Mode& m : E.modes())
        turned.push_back({m.k, m.a * std::cos(m.k * beta) - m.b * std::sin(m.k * beta),
                          m.a * std::sin(m.k * beta) + m.b * std::cos(m.k * beta)});
    const StarShape2D rotated = from_fourier({0.0, 0.0}, 1.0, turned);
    const double s = per_slicing(E, f).value;
    CHECK(per_slicing(moved, f).value == doctest::Approx(s).epsilon(1e-9));
    CHECK(per_slicing(rotated, f).value == doctest::Approx(s).epsilon(1e-8));
    CHECK(per_area(moved, f).value == doctest::Approx(per_area(E, f).value).epsilon(1e-9));
}

TEST_CASE("p-tilde on the disk") {
    const StarShape2D D = unit_disk();
    SUBCASE("matches the radial derivative of the disk formula") {
        for (double eps : {0.5, 0.1}) {
            const KernelFamily f = exp_family(eps);
            const double h = 1e-4;
            const double dPer = (disk_oracle(1.0 + h, f) - disk_oracle(1.0 - h, f)) / (2.0 * h);
            CHECK(p_tilde(D, f) == doctest::Approx(2.0 * disk_oracle(1.0, f) - dPer).epsilon(1e-6));
        }
    }
    SUBCASE("bounded by the perimeter") {
        const double small = p_tilde(D, exp_family(0.05));
        CHECK(small <= 2.0 * kPi);
        CHECK(small >= 0.8 * 2.0 * kPi);
        const double large = p_tilde(D, exp_family(10.0));
        CHECK(large >= 0.0);
        CHECK(large <= 2.0 * kPi);
    }
    SUBCASE("converged in the quadrature sizes") {
        const KernelFamily f = exp_family(0.05);
        CHECK(p_tilde(peanut(), f) == doctest::Approx(p_tilde(peanut(), f, {1024, 256})).epsilon(1e-10));
    }
}

TEST_CASE("scaling identity for d/dt Per(tE)") {
    for (const auto& r : scaling_derivative_check(unit_disk(), exp_family(0.2), {1.0})) {
        CHECK(std::abs(r.residual) <= 1e-3 * r.per);
        // At t = 1: P-tilde = n Per - d/dt Per.
        CHECK(r.p_tilde == doctest::Approx(2.0 * r.per - r.finite_difference).epsilon(1e-5));
    }
    for (const auto& r : scaling_derivative_check(peanut(), exp_family(0.1), {0.8, 1.2}))
        CHECK(std::abs(r.residual) <= 1e-3 * r.per);
}

TEST_CASE("Gamow rescaling identity") {
    const KernelFamily f = exp_family(0.5);
    const GamowCheck g = gamow_equivalence_check(unit_disk(), f, 0.5);
    CHECK(g.relative <= 1e-6);
    const GamowCheck p = gamow_equivalence_check(peanut(), exp_family(0.25), 0.9);
    CHECK(p.relative <= 1e-5);
    const GamowCheck one = gamow_equivalence_check(peanut(), exp_family(1.0), 0.3);
    CHECK(one.relative <= 1e-6);
}

TEST_CASE("energy reports") {
    const StarShape2D D = unit_disk();
    const EnergyReport r = energy(D, exp_family(0.1), 0.5);
    CHECK(r.f_gamma > 0.5 * 2.0 * kPi);
    CHECK(r.f_gamma < 2.0 * kPi);
    CHECK(r.critical >= 0.0);
    CHECK(r.f_gamma == doctest::Approx((1.0 - r.gamma) * r.per_local + r.gamma * r.critical).epsilon(1e-12));
    const EnergyReport tiny = energy(D, exp_family(0.1), 1e-12);
    CHECK(std::abs(tiny.f_gamma - 2.0 * kPi) < 1e-9);
    CHECK_THROWS_AS(energy(D, exp_family(0.1), 1.0), ValidationError);

    const auto j = energy_report_to_json(r);
    CHECK(j.at("method") == "slicing");
    CHECK(j.at("per_nonlocal").get<double>() == r.per_nonlocal);
}

TEST_CASE("convexified and rescaled peanut has lower energy") {
    const KernelFamily f = exp_family(0.05);
    const StarShape2D P = scale_to_area(from_fourier({0.0, 0.0}, 1.0, {{2, 0.3, 0.0}}), kPi);
    REQUIRE_FALSE(is_convex(P));
    const StarShape2D H = scale_to_area(convex_hull(P).shape, kPi);
    CHECK(energy(H, f, 0.5).f_gamma < energy(P, f, 0.5).f_gamma);
}

TEST_CASE("preconditions") {
    const KernelFamily f = exp_family(0.1);
    const StarShape2D big = from_fourier({0.0, 0.0}, 1.6, {});
    CHECK_THROWS_AS(per_polar(big, f), ValidationError);
    CHECK_NOTHROW(per_slicing(big, f));
    try {
        per_slicing(unit_disk(), exp_family(-1.0));
        FAIL("expected a ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()) == "epsilon must be positive");
    }
    CHECK_THROWS_AS(method_from_name("spectral"), ValidationError);
}

TEST_CASE("results do not depend on the thread count") {
    const StarShape2D E = peanut();
    const KernelFamily f = exp_family(0.1);
    set_thread_count(1);
    const double one = per_slicing(E, f).value;
    const double area_one = per_area(E, f).value;
    set_thread_count(3);
    CHECK(per_slicing(E, f).value == one);
    CHECK(per_area(E, f).value == area_one);
    set_thread_count(0);
}

TEST_CASE("slice dump and batch evaluation") {
    std::ostringstream os;
    SlicingOptions opt;
    opt.directions = 4;
    opt.offsets = 8;
    opt.dump = &os;
    per_slicing(unit_disk(), exp_family(0.1), opt);
    std::istringstream in(os.str());
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 1 + 4 * 8);

    nlohmann::json list = nlohmann::json::array();
    list.push_back({{"shape", shape_to_json(unit_disk())},
                    {"kernel", {{"family", "exponential"}, {"params", nlohmann::json::object()}, {"n", 2}}},
                    {"epsilon", 0.1},
                    {"gamma", 0.5},
                    {"method", "polar"}});
    const auto out = evaluate_batch(list, "");
    REQUIRE(out.size() == 1);
    CHECK(out[0].at("method") == "polar");
    CHECK(out[0].at("per_nonlocal").get<double>() == doctest::Approx(disk_oracle(1.0, exp_family(0.1))).epsilon(1e-8));
}
