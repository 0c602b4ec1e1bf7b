#pragma once

#include <cmath>
#include <vector>

#include <json.hpp>

namespace dropshape {

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double norm() const { return std::hypot(x, y); }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

struct Mode {
    int k = 0;
    double a = 0.0, b = 0.0;
};

/// Radial function and its first two derivatives at one angle.
struct RadialSample {
    double R, dR, d2R;
};

/// Star-shaped planar set {center + r e(theta) : 0 <= r < R(theta)} with
/// R(theta) = r0 + sum_k a_k cos(k theta) + b_k sin(k theta).
class StarShape2D {
public:
    StarShape2D() = default;

    Vec2 center() const { return center_; }
    double r0() const { return r0_; }
    int max_mode() const { return static_cast<int>(a_.size()) - 1; }
    double a(int k) const { return k < static_cast<int>(a_.size()) ? a_[k] : 0.0; }
    double b(int k) const { return k < static_cast<int>(b_.size()) ? b_[k] : 0.0; }
    std::vector<Mode> modes() const;

    double R(double theta) const;
    RadialSample eval(double theta) const;
    /// Point on the boundary at polar angle theta.
    Vec2 boundary(double theta) const;
    /// d/dtheta of boundary(theta).
    Vec2 tangent(double theta) const;

    friend StarShape2D from_fourier(Vec2 center, double r0, const std::vector<Mode>& modes);
    friend StarShape2D with_coefficients(Vec2 center, double r0, std::vector<double> a, std::vector<double> b);

private:
    Vec2 center_;
    double r0_ = 1.0;
    std::vector<double> a_{0.0}, b_{0.0};  // index 0 unused
};

/// Builds and validates a shape (R > 0 on a 2048-point grid). Mode 0 is folded into r0 and
/// repeated modes are summed.
StarShape2D from_fourier(Vec2 center, double r0, const std::vector<Mode>& modes);
StarShape2D with_coefficients(Vec2 center, double r0, std::vector<double> a, std::vector<double> b);
inline StarShape2D unit_disk() { return from_fourier({0.0, 0.0}, 1.0, {}); }

struct GeometryReport {
    double area = 0.0;
    double local_perimeter = 0.0;
    Vec2 barycenter;
    double r_min = 0.0, r_max = 0.0;
    bool is_convex = false;
};

/// Number of grid points used for boundary quadratures of E.
int boundary_grid_size(const StarShape2D& E, int minimum = 2048);

GeometryReport measure(const StarShape2D& E);
double area(const StarShape2D& E);
double local_perimeter(const StarShape2D& E);
Vec2 barycenter(const StarShape2D& E);
bool is_convex(const StarShape2D& E);

StarShape2D dilate(const StarShape2D& E, double lambda);
StarShape2D translate(const StarShape2D& E, Vec2 v);
StarShape2D scale_to_area(const StarShape2D& E, double target);
/// Same set, re-parametrized about its barycenter and refit to K modes
/// (default: max(K_E, 32)).
StarShape2D recenter(const StarShape2D& E, int K = -1);
/// The set E re-sampled by ray casting about a new interior point p and refit to K modes.
StarShape2D resample_about(const StarShape2D& E, Vec2 p, int K);
/// Fourier fit of radial samples R(2 pi j / N), j < N, truncated to K modes.
StarShape2D fit_radial_samples(Vec2 center, const std::vector<double>& radii, int K);

struct HullResult {
    StarShape2D shape;
    double polygon_perimeter = 0.0;
    std::vector<Vec2> polygon;
};

HullResult convex_hull(const StarShape2D& E);

struct NearlySphericalDecomposition {
    double t = 0.0;
    std::vector<double> u_samples;
    double sup_norm = 0.0;
    double lip_norm = 0.0;
    bool centered = false;
    bool valid = false;
    double gradient_bound = 0.0;  // 2 (1 + t|u|)/(1 - t|u|) (t|u|)^{1/2}
    bool gradient_bound_holds = false;
};

NearlySphericalDecomposition nearly_spherical_decompose(const StarShape2D& E);

/// max over the boundary grid of |nu_E - x/|x||, with x measured from the center.
double normal_deviation(const StarShape2D& E);

/// ||R - 1||_{H^1(S^1)} about the center.
double h1_distance_to_unit_circle(const StarShape2D& E);

StarShape2D shape_from_json(const nlohmann::json& j);
nlohmann::json shape_to_json(const StarShape2D& E);

}  // namespace dropshape
