#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "dropshape/kernels.hpp"
#include "dropshape/shapes2d.hpp"

namespace dropshape {

enum class PerMethod { area, slicing, polar };

std::string method_name(PerMethod m);
PerMethod method_from_name(const std::string& name);

struct SlicingOptions {
    int directions = 256;  // on the half circle
    int offsets = 512;
    std::ostream* dump = nullptr;  // optional CSV of every slice
};

struct AreaOptions {
    int angles = 128;        // outer trapezoid in the polar angle about the center
    int panel_nodes = 8;     // Gauss-Legendre nodes per depth panel
    int boundary_nodes = 64; // sinh-graded rule along the boundary
};

struct PolarOptions {
    int nodes = 1024;
};

struct QuadratureOptions {
    SlicingOptions slicing;
    AreaOptions area;
    PolarOptions polar;
};

struct PerValue {
    double value = 0.0;
    double error_estimate = 0.0;
};

struct EnergyReport {
    PerMethod method = PerMethod::slicing;
    double per_nonlocal = 0.0;
    double per_local = 0.0;
    double critical = 0.0;  // P - Per_G
    double f_gamma = 0.0;   // P - gamma Per_G
    double gamma = 0.0;
    double epsilon = 0.0;
    double quadrature_error_estimate = 0.0;
};

nlohmann::json energy_report_to_json(const EnergyReport& r);

PerValue per_slicing(const StarShape2D& E, const KernelFamily& fam, const SlicingOptions& opt = {});
PerValue per_area(const StarShape2D& E, const KernelFamily& fam, const AreaOptions& opt = {});
PerValue per_polar(const StarShape2D& E, const KernelFamily& fam, const PolarOptions& opt = {});

/// Per_{G_eps}(E) by the requested method, wrapped in a report with gamma = 0.
EnergyReport per_nonlocal(const StarShape2D& E, const KernelFamily& fam, PerMethod method = PerMethod::slicing,
                          const QuadratureOptions& opt = {});

/// Full report with the critical energy P - Per and F = P - gamma Per.
EnergyReport energy(const StarShape2D& E, const KernelFamily& fam, double gamma,
                    PerMethod method = PerMethod::slicing, const QuadratureOptions& opt = {});

/// Per_{G_eps}(B_R) through the covariogram of the disk.
double per_disk(double R, const KernelFamily& fam);

/// Pieces of the polar decomposition Per(E) = T + (1/2pi) int Per(B_{R(theta)}) dtheta about the
/// center of E; with R = 1 + t u, T = t^2 phi_eps(t).
struct PolarTerms {
    double t = 0.0;
    double cross_term = 0.0;  // t^2 phi
    double psi = 0.0;
};
PolarTerms polar_terms(const StarShape2D& E, const KernelFamily& fam, int nodes = 1024);

/// int_E G_eps * 1_E, i.e. the self-interaction double integral over E x E.
double self_interaction(const StarShape2D& E, const KernelFamily& fam, const AreaOptions& opt = {});

struct PTildeOptions {
    int outer = 256;
    int inner = 96;
};

/// P-tilde_{G_eps}(E) = 2 int_E int_{dE} G_eps(x - y) (y - x) . nu(y) dH(y) dx.
double p_tilde(const StarShape2D& E, const KernelFamily& fam, const PTildeOptions& opt = {});

struct ScalingRow {
    double t = 0.0;
    double per = 0.0;
    double finite_difference = 0.0;
    double rhs = 0.0;  // (n/t) Per - (1/t) P-tilde
    double p_tilde = 0.0;
    double residual = 0.0;
};

std::vector<ScalingRow> scaling_derivative_check(const StarShape2D& E, const KernelFamily& fam,
                                                 const std::vector<double>& t_grid, double h = 1e-3,
                                                 const QuadratureOptions& opt = {});

struct GamowCheck {
    double lhs = 0.0;  // P(E) - gamma Per_{G_eps}(E)
    double rhs = 0.0;  // eps [P(F) + 2 gamma int_{FxF} G] - 2 gamma ||G|| eps |F|
    double residual = 0.0;
    double relative = 0.0;
};

GamowCheck gamow_equivalence_check(const StarShape2D& E, const KernelFamily& fam, double gamma);

/// Evaluates a JSON list of {"shape", "kernel", "epsilon", "gamma", "method"} entries. A string
/// "shape" is read as a file path relative to base_dir.
nlohmann::json evaluate_batch(const nlohmann::json& list, const std::string& base_dir);

}  // namespace dropshape
