// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers as arguments to run
// a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dropshape/kernels.hpp"
#include "dropshape/nonlocal.hpp"
#include "dropshape/onedim.hpp"
#include "dropshape/optimize.hpp"
#include "dropshape/quadrature.hpp"
#include "dropshape/shapes2d.hpp"
#include "dropshape/spectral.hpp"

using namespace dropshape;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

KernelFamily family(Family f, double eps) { return {build_kernel(f, {}, 2), eps}; }

const std::vector<Family> kFamilies{Family::exponential, Family::gaussian, Family::compact_bump,
                                    Family::truncated_riesz, Family::bessel};

// Per(B_R) = 4 pi int_0^inf G_eps(rho) rho (|B_R| - |B_R cap (B_R + rho e)|) drho, by adaptive
// quadrature of the disk covariogram.
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

StarShape2D random_near_ball(std::mt19937_64& rng, int K, double amp) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<Mode> modes;
    for (int k = 2; k <= K; ++k) modes.push_back({k, amp * U(rng) / (k * k), amp * U(rng) / (k * k)});
    return from_fourier({0.0, 0.0}, 1.0, modes);
}

StarShape2D peanut() { return from_fourier({0.0, 0.0}, 1.0, {{2, 0.1, 0.0}}); }

Outcome criterion1() {
    Outcome o;
    double worst_moment = 0.0, worst_rho = 0.0;
    for (Family f : kFamilies) {
        const RadialKernel k = build_kernel(f, {}, 2);
        worst_moment = std::max(worst_moment, std::abs(moment(k, 1).value - 0.5 * kPi));
        for (double eps : {1.0, 0.1}) worst_rho = std::max(worst_rho, std::abs(rho_first_moment({k, eps}) - 1.0));
    }
    o.pass = worst_moment <= 1e-8 && worst_rho <= 1e-8;
    o.detail = fmt("max |I1 - pi/2| = %.2e, max |int |t| rho - 1| = %.2e", worst_moment, worst_rho);
    return o;
}

// Up to four intervals in [-3, 3].
IntervalUnion random_union(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> count(1, 4);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    const int m = count(rng);
    std::vector<double> ends(2 * m);
    for (double& e : ends) e = U(rng);
    std::sort(ends.begin(), ends.end());
    std::vector<std::pair<double, double>> pieces;
    for (int i = 0; i < m; ++i) pieces.emplace_back(ends[2 * i], ends[2 * i + 1]);
    return IntervalUnion(pieces);
}

Outcome criterion2() {
    Outcome o;
    std::mt19937_64 rng(2);
    double worst = 0.0;
    for (Family f : {Family::exponential, Family::gaussian})
        for (int i = 0; i < 25; ++i) {
            const KernelFamily fam = family(f, i % 2 ? 0.5 : 1.0);
            const IntervalUnion J = random_union(rng);
            const double closed = crit1_closed_form(J, fam);
            const double brute = J.boundary_points() - per1_bruteforce(J, fam);
            worst = std::max(worst, std::abs(closed - brute));
        }
    const KernelFamily e = family(Family::exponential, 1.0);
    const double j0 = std::abs(tail_integral_J(e, 0.0) - 0.5);
    const double j1 = std::abs(4.0 * tail_integral_J(e, 1.0) - 3.0 / std::numbers::e);
    o.pass = worst <= 1e-6 && j0 <= 1e-10 && j1 <= 1e-10;
    o.detail = fmt("50 unions max error %.2e; |J(0) - 1/2| = %.1e, |4J(1) - 3/e| = %.1e", worst, j0, j1);
    return o;
}

// Evaluations shared by criteria 3 and 4.
struct MethodRun {
    double worst_rel = 0.0;
    int bound_violations = 0;
    int evaluations = 0;
    double seconds = 0.0;
};

const MethodRun& method_run() {
    static MethodRun run = [] {
        MethodRun r;
        const auto t0 = std::chrono::steady_clock::now();
        std::mt19937_64 rng(3);
        std::vector<StarShape2D> shapes;
        for (int i = 0; i < 20; ++i) shapes.push_back(random_near_ball(rng, 8, 0.05));
        for (Family f : {Family::exponential, Family::gaussian})
            for (double eps : {0.5, 0.1, 0.05})
                for (const StarShape2D& E : shapes) {
                    const KernelFamily fam = family(f, eps);
                    const double P = local_perimeter(E);
                    const double v[3] = {per_slicing(E, fam).value, per_area(E, fam).value, per_polar(E, fam).value};
                    for (double x : v) {
                        ++r.evaluations;
                        if (!(x >= 0.0 && x <= P)) ++r.bound_violations;
                    }
                    const double lo = std::min({v[0], v[1], v[2]}), hi = std::max({v[0], v[1], v[2]});
                    r.worst_rel = std::max(r.worst_rel, (hi - lo) / std::abs(v[0]));
                }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return r;
    }();
    return run;
}

Outcome criterion3() {
    const MethodRun& r = method_run();
    Outcome o;
    o.pass = r.worst_rel <= 1e-3 && r.seconds < 600.0;
    o.detail = fmt("max relative spread %.2e over %g evaluations in %.0f s", r.worst_rel, r.evaluations, r.seconds);
    return o;
}

Outcome criterion4() {
    const MethodRun& r = method_run();
    Outcome o;
    bool decreasing = true;
    double prev_gap = kInf, gap = 0.0, worst_oracle = 0.0;
    for (double eps : {0.4, 0.2, 0.1, 0.05}) {
        const KernelFamily fam = family(Family::exponential, eps);
        const double v = per_slicing(unit_disk(), fam).value;
        worst_oracle = std::max(worst_oracle, std::abs(v - disk_oracle(1.0, fam)) / v);
        gap = (2.0 * kPi - v) / (2.0 * kPi);
        decreasing = decreasing && gap < prev_gap && gap > 0.0;
        prev_gap = gap;
    }
    o.pass = r.bound_violations == 0 && decreasing && gap < 0.1 && worst_oracle <= 1e-6;
    o.detail = fmt("%g bound violations; disk gap at eps=0.05 is %.2f%%, disk vs covariogram %.1e",
                   r.bound_violations, 100.0 * gap, worst_oracle);
    if (!decreasing) o.detail += "; gap not decreasing";
    return o;
}

Outcome criterion5() {
    Outcome o;
    double worst_scaling = 0.0;
    for (const StarShape2D& E : {unit_disk(), peanut()})
        for (const ScalingRow& r : scaling_derivative_check(E, family(Family::exponential, 0.1), {0.8, 1.0, 1.2}))
            worst_scaling = std::max(worst_scaling, std::abs(r.residual) / std::abs(r.per));
    std::mt19937_64 rng(5);
    std::vector<StarShape2D> shapes{unit_disk(), peanut()};
    for (int i = 0; i < 3; ++i) shapes.push_back(random_near_ball(rng, 6, 0.3));
    double worst_gamow = 0.0;
    const double eps[5] = {0.5, 0.25, 1.0, 0.5, 0.25};
    const double gam[5] = {0.5, 0.9, 0.3, 0.7, 0.5};
    for (int i = 0; i < 5; ++i)
        worst_gamow = std::max(worst_gamow,
                               gamow_equivalence_check(shapes[i], family(Family::exponential, eps[i]), gam[i]).relative);
    o.pass = worst_scaling <= 1e-3 && worst_gamow <= 1e-5;
    o.detail = fmt("scaling residual / Per max %.2e; Gamow relative residual max %.2e", worst_scaling, worst_gamow);
    return o;
}

Outcome criterion6() {
    Outcome o;
    std::mt19937_64 rng(6);
    const KernelFamily fam = family(Family::exponential, 0.05);
    double lo = kInf, hi = 0.0;
    int n = 0;
    while (n < 10) {
        const StarShape2D E = random_near_ball(rng, 6, 0.1);
        const GeometryReport g = measure(E);
        if (!g.is_convex || g.r_min < 0.95 || g.r_max > 1.05) continue;
        const double ratio = p_tilde(E, fam) / g.local_perimeter;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        ++n;
    }
    o.pass = hi <= 1.0 && lo >= 0.8;
    o.detail = fmt("P-tilde / P in [%.6f, %.6f] on 10 convex shapes", lo, hi);
    return o;
}

Outcome criterion7() {
    Outcome o;
    std::mt19937_64 rng(7);
    const std::vector<StarShape2D> nonconvex = random_nonconvex_shapes(10, rng);
    const KernelFamily fam = family(Family::exponential, 0.1);
    double worst_margin = kInf;
    for (const StarShape2D& E : nonconvex) {
        const StarShape2D H = convex_hull(E).shape;
        const double crit_E = local_perimeter(E) - per_slicing(E, fam).value;
        const double crit_H = local_perimeter(H) - per_slicing(H, fam).value;
        worst_margin = std::min(worst_margin, (crit_E - crit_H) / local_perimeter(E));
    }
    const KernelFamily small = family(Family::exponential, 0.05);
    int scaled_fail = 0, convex = 0;
    while (convex < 10) {
        const StarShape2D E = scale_to_area(random_near_ball(rng, 6, 0.1), kPi);
        if (!is_convex(E)) continue;
        ++convex;
        const double F = energy(E, small, 0.5).f_gamma;
        for (double t : {0.6, 0.8, 0.95})
            if (!(energy(dilate(E, t), small, 0.5).f_gamma < F)) ++scaled_fail;
    }
    // Hull energies carry the hull refit error, about 1e-8 of the perimeter.
    o.pass = worst_margin >= -1e-6 && scaled_fail == 0;
    o.detail = fmt("min (E(E) - E(co E)) / P = %.2e on 10 nonconvex shapes; %g of 30 scalings fail to decrease F",
                   worst_margin, scaled_fail);
    return o;
}

Outcome criterion8() {
    Outcome o;
    std::mt19937_64 rng(8);
    double parseval = 0.0;
    for (int n : {2, 3})
        for (int i = 0; i < 5; ++i) {
            const SphericalField f = random_field(n, 8, rng, false);
            const SphereGrid grid = SphereGrid::for_degree(n, 8);
            const std::vector<double> s = synthesize(f, grid);
            parseval = std::max(parseval, std::abs(grid_integral_abs_pow(s, grid, 2.0) - f.l2_norm_sq()) / f.l2_norm_sq());
        }

    SphericalField c3(2, 3);
    c3.set(3, 1, std::sqrt(kPi));  // cos(3 theta)
    bool monotone = true;
    double prev = 0.0, q = 0.0;
    for (double eps : {0.4, 0.2, 0.1, 0.05}) {
        q = nonlocal_form_Q(c3, family(Family::exponential, eps)).q_value;
        monotone = monotone && q > prev && q <= 9.0 * kPi;
        prev = q;
    }
    const double bbm_gap = (9.0 * kPi - q) / (9.0 * kPi);

    double gap_err = 0.0;
    int negative = 0;
    for (int n : {2, 3})
        for (int i = 0; i < 100; ++i) {
            const SphericalField f = random_field(n, 10, rng, true);
            double expected = 0.0;
            for (int k = 2; k <= 10; ++k)
                for (int j = 1; j <= harmonic_multiplicity(n, k); ++j) {
                    const double a = f.coeff(k, j);
                    expected += (0.5 * k * (k + n - 2) - (n - 1) - 0.5) * a * a;
                }
            const ConstraintReport r = constraint_checks(f, 0.01);
            gap_err = std::max(gap_err, std::abs(r.gap - expected));
            if (r.gap < 0.0 || !r.gap_nonnegative) ++negative;
        }
    o.pass = parseval <= 1e-8 && monotone && bbm_gap < 0.1 && gap_err <= 1e-12 && negative == 0;
    o.detail = fmt("Parseval %.1e; Q(cos 3t) gap to 9 pi at eps=0.05 %.2f%%; spectral gap error %.1e", parseval,
                   100.0 * bbm_gap, gap_err);
    if (!monotone) o.detail += "; Q not monotone";
    if (negative) o.detail += "; negative gap";
    return o;
}

Outcome criterion9() {
    Outcome o;
    std::mt19937_64 rng(9);
    const KernelFamily fam = family(Family::exponential, 0.05);
    int bracket_fail = 0, bound_fail = 0, cases = 0;
    double max_t = 0.0;
    while (cases < 30) {
        const CenteredField cf = random_centered_field(6, 0.015, rng);
        if (cf.t > 0.02 || cf.t <= 0.0) continue;
        ++cases;
        max_t = std::max(max_t, cf.t);
        for (double gamma : {0.3, 0.5, 0.7}) {
            const DeficitReport r = deficit_checks(cf.t, cf.u, fam, gamma);
            if (!r.bracket_holds) ++bracket_fail;
            if (!r.energy_bound_holds) ++bound_fail;
        }
    }
    SphericalField half(2, 0);
    half.set(0, 1, 0.5 * std::sqrt(2.0 * kPi));  // u = 1/2
    const double psi = polar_terms(shape_from_field(half, 0.02), fam).psi;
    const double psi_err = std::abs(psi - disk_oracle(1.01, fam)) / disk_oracle(1.01, fam);
    o.pass = bracket_fail == 0 && bound_fail == 0 && psi_err <= 1e-4;
    o.detail = fmt("%g bracket and %g energy bound failures over 90 checks (t <= %.3f)", bracket_fail, bound_fail,
                   max_t) +
               fmt("; psi vs disk %.1e", psi_err);
    return o;
}

Outcome criterion10() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(10);
    const auto inits = random_inits(5, 8, 0.1, rng);
    const KernelFamily fam = family(Family::exponential, 0.1);
    const double f_disk = energy(scale_to_area(unit_disk(), kPi), fam, 0.5).f_gamma;
    double worst_h1 = 0.0, worst_gap = kInf;
    for (const StarShape2D& E : inits) {
        const OptimizerReport r = minimize(E, fam, 0.5);
        worst_h1 = std::max(worst_h1, r.u_h1);
        worst_gap = std::min(worst_gap, r.f_final - f_disk);
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.pass = worst_h1 <= 1e-3 && worst_gap >= -1e-6 && seconds < 1200.0;
    o.detail = fmt("max ||u||_H1 %.2e, min F - F(disk) %.2e, %.0f s", worst_h1, worst_gap, seconds);
    return o;
}

Outcome criterion11() {
    Outcome o;
    KernelParams p;
    p.kappa = kPi * kPi;
    p.alpha = 1.0;
    const RadialKernel k = build_kernel(Family::bessel, p, 2);
    // First moment of 2 gamma B with gamma = 1/2, straight from the unnormalized profile.
    auto f = [&](double r) { return 2.0 * kPi * r * r * std::abs(k.raw_g(r)); };
    const double scale = std::sqrt(p.kappa);
    const double I = integrate(f, 0.0, scale, 1e-12).value + integrate_to_infinity(f, scale, scale, 1e-12).value;
    const double rel = std::abs(I - kPi) / kPi;
    o.pass = rel <= 0.01;
    o.detail = fmt("first moment %.8f vs pi, relative error %.1e", I, rel);
    return o;
}
}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"kernel normalization", criterion1},
        {"1D closed forms", criterion2},
        {"method agreement", criterion3},
        {"perimeter bounds", criterion4},
        {"scaling and Gamow identities", criterion5},
        {"P-tilde bracket", criterion6},
        {"convexification and scaling decrease", criterion7},
        {"spectral suite", criterion8},
        {"deficit suite", criterion9},
        {"disk minimality", criterion10},
        {"Bessel threshold", criterion11},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failed;
        std::printf("%s %2d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                    o.detail.c_str(), s);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
