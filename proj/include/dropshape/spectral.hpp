#pragma once

#include <random>
#include <vector>

#include <json.hpp>

#include "dropshape/kernels.hpp"
#include "dropshape/shapes2d.hpp"

namespace dropshape {

/// Number of independent harmonics of degree k on S^{n-1} (n = 2 or 3).
int harmonic_multiplicity(int n, int k);
/// Laplace-Beltrami eigenvalue l_k = k (k + n - 2).
double harmonic_eigenvalue(int n, int k);

/// Coefficients a_k^i of a function on S^{n-1} in an orthonormal real basis, degrees k <= L.
/// n = 2: Y_0 = 1/sqrt(2 pi), Y_k^1 = cos(k theta)/sqrt(pi), Y_k^2 = sin(k theta)/sqrt(pi).
/// n = 3: real spherical harmonics, index i = m + k + 1 for order m in [-k, k]
/// (m > 0 cosine type, m < 0 sine type), so Y_1^3, Y_1^1, Y_1^2 are proportional to x, y, z.
class SphericalField {
public:
    SphericalField() = default;
    SphericalField(int n, int L);

    int dimension() const { return n_; }
    int degree() const { return L_; }
    double coeff(int k, int i) const;
    void set(int k, int i, double v);

    double l2_norm_sq() const;
    double grad_norm_sq() const;

private:
    int n_ = 2, L_ = 0;
    std::vector<std::vector<double>> a_;
};

/// Value of the basis function Y_k^i at a point given by its polar angle theta (n = 2) or by
/// (theta, phi) with theta the colatitude (n = 3).
double harmonic(int n, int k, int i, double theta, double phi = 0.0);

/// Sampling grid: n = 2 uses n_azimuth uniform angles; n = 3 uses n_polar Gauss-Legendre nodes in
/// cos(theta) times n_azimuth uniform longitudes, stored polar-major.
struct SphereGrid {
    int n = 2;
    int n_polar = 1;
    int n_azimuth = 16;

    std::size_t size() const { return static_cast<std::size_t>(n_polar) * n_azimuth; }
    /// Default grid for degree L: 8L points on S^1, (2L+2) x (4L+4) on S^2.
    static SphereGrid for_degree(int n, int L);
    double theta(int p, int q) const;  // polar angle on S^1, colatitude on S^2
    double phi(int q) const;           // longitude on S^2
    double weight(int p) const;
};

std::vector<double> synthesize(const SphericalField& f, const SphereGrid& grid);
/// Projection onto degrees <= L; throws ValidationError if the grid aliases degree L.
SphericalField expand(const std::vector<double>& samples, const SphereGrid& grid, int L);
/// Grid quadrature of the integral of |samples|^p over the sphere.
double grid_integral_abs_pow(const std::vector<double>& samples, const SphereGrid& grid, double p);
double grid_integral(const std::vector<double>& samples, const SphereGrid& grid);

struct QuadraticFormReport {
    double q_value = 0.0;
    double h1_seminorm = 0.0;  // ||grad u||^2
    double ratio = 0.0;
    double q_eta_hat = 0.0;    // ratio - 1
    bool lipschitz_warning = false;
};

/// Q_eps(u) = int int (u(x) - u(y))^2 / |x - y|^2 eta_eps(|x - y|) on S^1 x S^1, N x N trapezoid.
QuadraticFormReport nonlocal_form_Q(const SphericalField& f, const KernelFamily& fam, int N = 1024);

struct ConstraintReport {
    double volume_residual = 0.0;  // |t int u + (n-1) t^2/2 int u^2|
    double volume_scale = 0.0;     // t^3 int |u|^3
    double c_hat = 0.0;
    double gap = 0.0;              // 1/2 ||grad u||^2 - (n-1)||u||^2 - 1/2 ||u||^2
    double a0_sq = 0.0;
    double a1_sq = 0.0;
    bool applicable = false;       // low modes small enough for the gap argument
    bool gap_nonnegative = false;
};

ConstraintReport constraint_checks(const SphericalField& f, double t);

struct DeficitReport {
    double t = 0.0;
    double u_l2_sq = 0.0;
    double grad_sq = 0.0;
    double perimeter_deficit = 0.0;  // P(E_t) - 2 pi
    double bracket_lower = 0.0;      // t^2/10 (||u||^2 + ||grad u||^2)
    double bracket_upper = 0.0;      // 3 t^2/5 ||grad u||^2
    bool bracket_holds = false;
    double per_nonlocal = 0.0;       // by slicing
    double cross_term = 0.0;         // t^2 phi_eps(t)
    double psi = 0.0;                // psi_eps(t)
    double decomposition_residual = 0.0;
    double energy_deficit = 0.0;     // F(E_t) - F(B_1)
    double energy_bound = 0.0;       // t^2/16 (1 - gamma)(||grad u||^2 + ||u||^2)
    bool energy_bound_holds = false;
};

DeficitReport deficit_checks(double t, const SphericalField& u, const KernelFamily& fam, double gamma);

/// Boundary (1 + t u(theta)) e(theta) about the origin (n = 2).
StarShape2D shape_from_field(const SphericalField& u, double t);
/// u = (R - 1)/t from the Fourier coefficients of E about its center.
SphericalField field_from_shape(const StarShape2D& E, double t);

/// Random coefficients with a_k ~ N(0, 1)/(1 + k)^2 for k <= L; modes 0 and 1 are left at zero
/// when zero_low_modes is set.
SphericalField random_field(int n, int L, std::mt19937_64& rng, bool zero_low_modes);

struct CenteredField {
    double t = 0.0;
    SphericalField u;
    StarShape2D shape;
};

/// A random planar shape R = 1 + w with |E| = pi and barycenter at the origin, written as 1 + t u
/// with t = ||w||_inf + ||w'||_inf so that u and u' are bounded by 1. amplitude scales w before
/// the constraints are enforced.
CenteredField random_centered_field(int K, double amplitude, std::mt19937_64& rng);

SphericalField field_from_json(const nlohmann::json& j);
nlohmann::json field_to_json(const SphericalField& f);

}  // namespace dropshape
