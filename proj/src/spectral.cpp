#include "dropshape/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dropshape/errors.hpp"
#include "dropshape/nonlocal.hpp"
#include "dropshape/parallel.hpp"
#include "dropshape/quadrature.hpp"

namespace dropshape {

namespace {
constexpr double kPi = std::numbers::pi;

void check_dimension(int n) {
    if (n != 2 && n != 3) throw ValidationError("spherical fields are supported for n = 2 and n = 3");
}
}  // namespace

int harmonic_multiplicity(int n, int k) {
    check_dimension(n);
    if (k < 0) throw ValidationError("harmonic degree must be nonnegative");
    if (n == 2) return k == 0 ? 1 : 2;
    return 2 * k + 1;
}

double harmonic_eigenvalue(int n, int k) { return static_cast<double>(k) * (k + n - 2); }

SphericalField::SphericalField(int n, int L) : n_(n), L_(L) {
    check_dimension(n);
    if (L < 0) throw ValidationError("field degree must be nonnegative");
    a_.resize(L + 1);
    for (int k = 0; k <= L; ++k) a_[k].assign(harmonic_multiplicity(n, k), 0.0);
}

double SphericalField::coeff(int k, int i) const {
    if (k < 0 || k > L_ || i < 1 || i > static_cast<int>(a_[k].size())) return 0.0;
    return a_[k][i - 1];
}

void SphericalField::set(int k, int i, double v) {
    if (k < 0 || k > L_ || i < 1 || i > static_cast<int>(a_[k].size()))
        throw ValidationError("harmonic index (" + std::to_string(k) + ", " + std::to_string(i) + ") out of range");
    a_[k][i - 1] = v;
}

double SphericalField::l2_norm_sq() const {
    double s = 0.0;
    for (const auto& row : a_)
        for (double v : row) s += v * v;
    return s;
}

double SphericalField::grad_norm_sq() const {
    double s = 0.0;
    for (int k = 1; k <= L_; ++k)
        for (double v : a_[k]) s += harmonic_eigenvalue(n_, k) * v * v;
    return s;
}

double harmonic(int n, int k, int i, double theta, double phi) {
    const int d = harmonic_multiplicity(n, k);
    if (i < 1 || i > d) throw ValidationError("harmonic index out of range");
    if (n == 2) {
        if (k == 0) return 1.0 / std::sqrt(2.0 * kPi);
        return (i == 1 ? std::cos(k * theta) : std::sin(k * theta)) / std::sqrt(kPi);
    }
    const int m = i - k - 1;
    const unsigned am = static_cast<unsigned>(std::abs(m));
    // std::sph_legendre carries the Condon-Shortley phase; undo it so Y_1 is +x, +y, +z.
    const double p = (am % 2 ? -1.0 : 1.0) * std::sph_legendre(static_cast<unsigned>(k), am, theta);
    if (m == 0) return p;
    return std::sqrt(2.0) * p * (m > 0 ? std::cos(am * phi) : std::sin(am * phi));
}

SphereGrid SphereGrid::for_degree(int n, int L) {
    check_dimension(n);
    SphereGrid g;
    g.n = n;
    if (n == 2) {
        g.n_polar = 1;
        g.n_azimuth = std::max(8 * L, 16);
    } else {
        g.n_polar = 2 * L + 2;
        g.n_azimuth = 4 * L + 4;
    }
    return g;
}

double SphereGrid::theta(int p, int q) const {
    if (n == 2) return 2.0 * kPi * q / n_azimuth;
    return std::acos(gauss_legendre(n_polar).x[p]);
}

double SphereGrid::phi(int q) const { return 2.0 * kPi * q / n_azimuth; }

double SphereGrid::weight(int p) const {
    if (n == 2) return 2.0 * kPi / n_azimuth;
    return gauss_legendre(n_polar).w[p] * 2.0 * kPi / n_azimuth;
}

std::vector<double> synthesize(const SphericalField& f, const SphereGrid& grid) {
    if (grid.n != f.dimension()) throw ValidationError("grid and field dimensions differ");
    std::vector<double> out(grid.size(), 0.0);
    for (int p = 0; p < grid.n_polar; ++p)
        for (int q = 0; q < grid.n_azimuth; ++q) {
            const double th = grid.theta(p, q), ph = grid.phi(q);
            double v = 0.0;
            for (int k = 0; k <= f.degree(); ++k)
                for (int i = 1; i <= harmonic_multiplicity(f.dimension(), k); ++i) {
                    const double a = f.coeff(k, i);
                    if (a != 0.0) v += a * harmonic(f.dimension(), k, i, th, ph);
                }
            out[static_cast<std::size_t>(p) * grid.n_azimuth + q] = v;
        }
    return out;
}

SphericalField expand(const std::vector<double>& samples, const SphereGrid& grid, int L) {
    if (samples.size() != grid.size()) throw ValidationError("sample count does not match the grid");
    // Products of two degree-L harmonics must be integrated exactly.
    if (grid.n_azimuth < 2 * L + 1 || (grid.n == 3 && grid.n_polar < L + 1))
        throw ValidationError("grid under-resolves degree " + std::to_string(L) + " (aliasing)");
    SphericalField f(grid.n, L);
    for (int k = 0; k <= L; ++k)
        for (int i = 1; i <= harmonic_multiplicity(grid.n, k); ++i) {
            double s = 0.0;
            for (int p = 0; p < grid.n_polar; ++p)
                for (int q = 0; q < grid.n_azimuth; ++q)
                    s += grid.weight(p) * samples[static_cast<std::size_t>(p) * grid.n_azimuth + q] *
                         harmonic(grid.n, k, i, grid.theta(p, q), grid.phi(q));
            f.set(k, i, s);
        }
    return f;
}

double grid_integral_abs_pow(const std::vector<double>& samples, const SphereGrid& grid, double p) {
    std::vector<double> terms(samples.size());
    for (std::size_t j = 0; j < samples.size(); ++j)
        terms[j] = grid.weight(static_cast<int>(j / grid.n_azimuth)) * std::pow(std::abs(samples[j]), p);
    return ordered_sum(terms);
}

double grid_integral(const std::vector<double>& samples, const SphereGrid& grid) {
    std::vector<double> terms(samples.size());
    for (std::size_t j = 0; j < samples.size(); ++j)
        terms[j] = grid.weight(static_cast<int>(j / grid.n_azimuth)) * samples[j];
    return ordered_sum(terms);
}

QuadraticFormReport nonlocal_form_Q(const SphericalField& f, const KernelFamily& fam, int N) {
    if (f.dimension() != 2) throw ValidationError("nonlocal_form_Q is implemented on S^1 only");
    if (fam.dimension() != 2) throw ValidationError("nonlocal_form_Q needs a planar kernel");
    if (!(fam.eps > 0.0)) throw ValidationError("epsilon must be positive");
    if (N < 2 * f.degree() + 2) throw ValidationError("grid under-resolves the field");
    SphereGrid grid;
    grid.n_azimuth = N;
    const std::vector<double> u = synthesize(f, grid);
    const double h = 2.0 * kPi / N;
    // Product trapezoid in the angular gap: the difference quotient (u(x) - u(y))^2/|x - y|^2 is
    // smooth and interpolated linearly between grid gaps, while eta_eps(|x - y|) is integrated
    // exactly against each hat function. At zero gap the quotient is u'^2.
    auto eta = [&](double gap) {
        const double chord = 2.0 * std::abs(std::sin(0.5 * gap));
        return chord > 0.0 ? derived_kernel(fam, Derived::eta_eps, chord) : 0.0;
    };
    std::vector<double> W = parallel_map(N / 2 + 1, [&](std::size_t d) {
        const double c = h * static_cast<double>(d);
        auto left = [&](double s) { return (1.0 - (c - s) / h) * eta(s); };
        auto right = [&](double s) { return (1.0 - (s - c) / h) * eta(s); };
        const double rw = integrate(right, c, c + h, 1e-11).value;
        if (d == 0) return 2.0 * rw;
        return integrate(left, c - h, c, 1e-11).value + rw;
    });
    std::vector<double> du(N, 0.0);
    for (int j = 0; j < N; ++j) {
        const double th = 2.0 * kPi * j / N;
        for (int k = 1; k <= f.degree(); ++k)
            du[j] += k * (-f.coeff(k, 1) * std::sin(k * th) + f.coeff(k, 2) * std::cos(k * th)) / std::sqrt(kPi);
    }
    std::vector<double> rows = parallel_map(N, [&](std::size_t j) {
        double acc = du[j] * du[j] * W[0];
        for (int d = 1; d < N; ++d) {
            const double chord = 2.0 * std::sin(kPi * d / N);
            const double q = (u[j] - u[(j + d) % N]) / chord;
            acc += q * q * W[std::min(d, N - d)];
        }
        return acc;
    });
    double max_quotient = 0.0;
    for (int j = 0; j < N; ++j) {
        const double q = (u[j] - u[(j + 1) % N]) / (2.0 * std::sin(kPi / N));
        max_quotient = std::max(max_quotient, q * q);
    }
    QuadraticFormReport r;
    r.q_value = h * ordered_sum(rows);
    r.h1_seminorm = f.grad_norm_sq();
    r.ratio = r.h1_seminorm > 0.0 ? r.q_value / r.h1_seminorm : 0.0;
    r.q_eta_hat = r.h1_seminorm > 0.0 ? r.ratio - 1.0 : 0.0;
    r.lipschitz_warning = max_quotient > 1e6;
    return r;
}

ConstraintReport constraint_checks(const SphericalField& f, double t) {
    if (!(t > 0.0)) throw ValidationError("t must be positive");
    const int n = f.dimension();
    const SphereGrid grid = SphereGrid::for_degree(n, std::max(f.degree(), 4));
    const std::vector<double> u = synthesize(f, grid);
    const double int_u = grid_integral(u, grid);
    const double int_u2 = f.l2_norm_sq();
    const double int_u3 = grid_integral_abs_pow(u, grid, 3.0);
    ConstraintReport r;
    r.volume_residual = std::abs(t * int_u + (n - 1) * 0.5 * t * t * int_u2);
    r.volume_scale = t * t * t * int_u3;
    r.c_hat = r.volume_scale > 0.0 ? r.volume_residual / r.volume_scale : 0.0;
    r.gap = 0.5 * f.grad_norm_sq() - (n - 1) * int_u2 - 0.5 * int_u2;
    r.a0_sq = f.coeff(0, 1) * f.coeff(0, 1);
    for (int i = 1; i <= harmonic_multiplicity(n, 1); ++i) r.a1_sq += f.coeff(1, i) * f.coeff(1, i);
    r.applicable = r.a0_sq <= int_u2 / (4.0 * n) && r.a1_sq <= int_u2 / (2.0 * (n + 1));
    r.gap_nonnegative = r.gap >= -1e-12 * std::max(1.0, int_u2);
    return r;
}

StarShape2D shape_from_field(const SphericalField& u, double t) {
    if (u.dimension() != 2) throw ValidationError("planar shapes need an S^1 field");
    std::vector<double> a(u.degree() + 1, 0.0), b(u.degree() + 1, 0.0);
    for (int k = 1; k <= u.degree(); ++k) {
        a[k] = t * u.coeff(k, 1) / std::sqrt(kPi);
        b[k] = t * u.coeff(k, 2) / std::sqrt(kPi);
    }
    return with_coefficients({0.0, 0.0}, 1.0 + t * u.coeff(0, 1) / std::sqrt(2.0 * kPi), a, b);
}

SphericalField field_from_shape(const StarShape2D& E, double t) {
    if (!(t > 0.0)) throw ValidationError("t must be positive");
    const int K = std::max(E.max_mode(), 0);
    SphericalField u(2, K);
    u.set(0, 1, (E.r0() - 1.0) * std::sqrt(2.0 * kPi) / t);
    for (int k = 1; k <= K; ++k) {
        u.set(k, 1, E.a(k) * std::sqrt(kPi) / t);
        u.set(k, 2, E.b(k) * std::sqrt(kPi) / t);
    }
    return u;
}

DeficitReport deficit_checks(double t, const SphericalField& u, const KernelFamily& fam, double gamma) {
    if (!(t >= 0.0 && t < 0.5)) throw ValidationError("deficit checks need t in [0, 1/2)");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("gamma must lie in (0, 1)");
    if (u.dimension() != 2) throw ValidationError("deficit checks are implemented for n = 2");
    DeficitReport r;
    r.t = t;
    r.u_l2_sq = u.l2_norm_sq();
    r.grad_sq = u.grad_norm_sq();
    const StarShape2D E = shape_from_field(u, t);
    const double tol = 1e-12;
    r.perimeter_deficit = local_perimeter(E) - 2.0 * kPi;
    r.bracket_lower = t * t / 10.0 * (r.u_l2_sq + r.grad_sq);
    r.bracket_upper = 3.0 * t * t / 5.0 * r.grad_sq;
    r.bracket_holds = r.perimeter_deficit >= r.bracket_lower - tol && r.perimeter_deficit <= r.bracket_upper + tol;

    r.per_nonlocal = per_slicing(E, fam).value;
    const PolarTerms pt = polar_terms(E, fam);
    r.cross_term = pt.cross_term;
    r.psi = pt.psi;
    r.decomposition_residual = std::abs(r.per_nonlocal - pt.cross_term - pt.psi);

    // Per(E_t) - Per(B_1) = t^2 phi + (psi - Per(B_1)), the second part summed as differences.
    const int N = 1024;
    const double disk = per_disk(1.0, fam);
    std::vector<double> diffs = parallel_map(N, [&](std::size_t i) {
        return per_disk(E.R(2.0 * kPi * static_cast<double>(i) / N), fam) - disk;
    });
    const double per_deficit = pt.cross_term + ordered_sum(diffs) / N;
    r.energy_deficit = r.perimeter_deficit - gamma * per_deficit;
    r.energy_bound = t * t / 16.0 * (1.0 - gamma) * (r.grad_sq + r.u_l2_sq);
    r.energy_bound_holds = r.energy_deficit >= r.energy_bound - tol;
    return r;
}

SphericalField random_field(int n, int L, std::mt19937_64& rng, bool zero_low_modes) {
    SphericalField f(n, L);
    std::normal_distribution<double> N01(0.0, 1.0);
    for (int k = zero_low_modes ? 2 : 0; k <= L; ++k)
        for (int i = 1; i <= harmonic_multiplicity(n, k); ++i) f.set(k, i, N01(rng) / ((1.0 + k) * (1.0 + k)));
    return f;
}

CenteredField random_centered_field(int K, double amplitude, std::mt19937_64& rng) {
    if (K < 2) throw ValidationError("random fields need K >= 2");
    std::normal_distribution<double> N01(0.0, 1.0);
    std::vector<Mode> modes;
    for (int k = 2; k <= K; ++k) modes.push_back({k, amplitude * N01(rng) / (k * k), amplitude * N01(rng) / (k * k)});
    StarShape2D E = recenter(from_fourier({0.0, 0.0}, 1.0, modes));
    E = scale_to_area(translate(E, E.center() * -1.0), kPi);
    const int M = boundary_grid_size(E);
    double sup = 0.0, lip = 0.0;
    for (int j = 0; j < M; ++j) {
        const RadialSample s = E.eval(2.0 * kPi * j / M);
        sup = std::max(sup, std::abs(s.R - 1.0));
        lip = std::max(lip, std::abs(s.dR));
    }
    CenteredField out;
    out.t = sup + lip;
    out.shape = E;
    out.u = field_from_shape(E, out.t);
    return out;
}

SphericalField field_from_json(const nlohmann::json& j) {
    try {
        const int n = j.at("n").get<int>();
        const int L = j.at("L").get<int>();
        SphericalField f(n, L);
        for (const auto& c : j.at("coeffs")) {
            if (!c.is_array() || c.size() != 3) throw ValidationError("field coefficients must be [k, i, a] triples");
            f.set(c[0].get<int>(), c[1].get<int>(), c[2].get<double>());
        }
        return f;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed field JSON: ") + e.what());
    }
}

nlohmann::json field_to_json(const SphericalField& f) {
    nlohmann::json coeffs = nlohmann::json::array();
    for (int k = 0; k <= f.degree(); ++k)
        for (int i = 1; i <= harmonic_multiplicity(f.dimension(), k); ++i)
            if (f.coeff(k, i) != 0.0) coeffs.push_back({k, i, f.coeff(k, i)});
    return {{"n", f.dimension()}, {"L", f.degree()}, {"coeffs", coeffs}};
}

}  // namespace dropshape
