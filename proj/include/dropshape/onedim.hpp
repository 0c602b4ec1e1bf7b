#pragma once

#include <utility>
#include <vector>

#include "dropshape/kernels.hpp"
#include "dropshape/shapes2d.hpp"

namespace dropshape {

/// Finite union of disjoint open intervals; endpoints may be +-infinity.
class IntervalUnion {
public:
    IntervalUnion() = default;
    /// Sorts, merges overlapping or touching pieces and drops empty ones.
    explicit IntervalUnion(std::vector<std::pair<double, double>> pieces);

    const std::vector<std::pair<double, double>>& pieces() const { return pieces_; }
    std::size_t size() const { return pieces_.size(); }
    bool empty() const { return pieces_.empty(); }
    bool bounded() const;
    /// Number of finite endpoints, the local 1D perimeter.
    int boundary_points() const;
    /// Smallest interval containing the union.
    IntervalUnion hull() const;
    /// Open complement components.
    std::vector<std::pair<double, double>> complement() const;

private:
    std::vector<std::pair<double, double>> pieces_;
};

/// J(d) = int_d^inf (tau - d) rho_eps(tau) dtau, from the cached radial moment tables.
double tail_integral_J(const KernelFamily& fam, double d);
/// The same quantity by direct adaptive quadrature (no tables).
double tail_integral_J_quadrature(const KernelFamily& fam, double d);

/// Critical 1D energy via the closed forms: 4 J(b - a) for an interval and the
/// complement-component decomposition for unions.
double crit1_closed_form(const IntervalUnion& J, const KernelFamily& fam);
/// Per^1 = P^1 - E^1 from the closed form.
double per1_closed_form(const IntervalUnion& J, const KernelFamily& fam);
/// Per^1 by nested adaptive quadrature of 2 int_J int_{J^c} rho_eps(s - t).
double per1_bruteforce(const IntervalUnion& J, const KernelFamily& fam, double rel_tol = 1e-10);

/// Finds the intersections of lines with a fixed direction sigma and a star shape. The
/// boundary height h(psi) = <gamma(psi) - c, sigma_perp> is split into monotone arcs once, so
/// each slice only needs bracketed root polishing.
class DirectionSlicer {
public:
    DirectionSlicer(const StarShape2D& E, Vec2 sigma);

    /// Offsets (along sigma_perp, absolute coordinates) for which the line meets E.
    double offset_min() const { return hmin_ + base_; }
    double offset_max() const { return hmax_ + base_; }

    struct Slice {
        std::vector<std::pair<double, double>> intervals;  // along sigma, absolute coordinate s
        bool tangency_dropped = false;
    };
    /// E_{sigma,y} = {s : y sigma_perp + s sigma in E}.
    Slice slice(double y) const;
    /// Slices for a sorted list of offsets; root searches start from the previous offset's roots.
    std::vector<Slice> slice_all(const std::vector<double>& ys) const;

private:
    struct Arc {
        double psi0, psi1;  // psi1 may exceed 2 pi
        double h0, h1;
    };
    double height(double psi) const;
    double height_derivative(double psi) const;
    std::pair<double, double> height_and_derivative(double psi) const;
    double root_on_arc(const Arc& a, double v, double guess) const;
    Slice slice_impl(double y, std::vector<double>* guesses) const;
    bool inside(Vec2 p) const;

    const StarShape2D* E_;
    Vec2 sigma_, perp_;
    double base_;  // <c, sigma_perp>
    double hmin_ = 0.0, hmax_ = 0.0;
    std::vector<Arc> arcs_;
};

struct SliceResult {
    IntervalUnion J;
    bool tangency_dropped = false;
};

SliceResult slice_star_shape(const StarShape2D& E, Vec2 sigma, double y);

}  // namespace dropshape
