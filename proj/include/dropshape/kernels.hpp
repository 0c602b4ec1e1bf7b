#pragma once

#include <array>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

namespace dropshape {

enum class Family { exponential, gaussian, compact_bump, truncated_riesz, bessel };

std::string family_name(Family f);
Family family_from_name(const std::string& name);

/// Family parameters. `radius` is used by compact_bump and truncated_riesz, `exponent`
/// by truncated_riesz (profile r^{-(n-exponent)}), `kappa` and `alpha` by bessel.
struct KernelParams {
    double radius = 1.0;
    double exponent = 0.5;
    double kappa = 1.0;
    double alpha = 1.0;
};

/// Cumulative radial moments head_p(s) = int_0^s r^p g(r) dr and tail_p(s) = int_s^inf r^p g(r) dr
/// for p = 0..3, tabulated once per kernel and interpolated with quintic Hermite pieces
/// (the first two derivatives follow from g and g').
class RadialMomentTable {
public:
    static constexpr int kMaxPower = 3;

    RadialMomentTable(const std::function<double(double)>& g, const std::function<double(double)>& dg,
                      const std::vector<double>& breaks, double support, double length_scale);

    double head(int p, double s) const;
    double tail(int p, double s) const;
    double total(int p) const { return total_[p]; }
    double cutoff() const { return x_.back(); }

private:
    double interp(const std::vector<double>& f, int p, double sign, double s, std::size_t i) const;
    std::size_t cell(double s) const;

    std::vector<double> x_;
    std::vector<double> gx_, dgx_;  // g and g' at the nodes
    std::array<std::vector<double>, kMaxPower + 1> head_, tail_;
    std::array<double, kMaxPower + 1> total_{};
    std::array<double, kMaxPower + 1> head_exponent_{};  // local power law below the first node
};

/// Radial kernel G(x) = g(|x|) in dimension n, normalized so that its first moment equals 1/K_{1,n}.
class RadialKernel {
public:
    RadialKernel(Family family, const KernelParams& params, int n);

    int dimension() const { return n_; }
    Family family() const { return family_; }
    const KernelParams& params() const { return params_; }
    double scale_factor() const { return scale_; }

    double g(double r) const { return scale_ * raw_g(r); }
    double dg(double r) const { return scale_ * raw_dg(r); }

    /// Profile before normalization.
    double raw_g(double r) const;
    double raw_dg(double r) const;

    /// Radius beyond which g vanishes identically (infinity if not compactly supported).
    double support() const;
    /// Points where g is only C^1; quadratures split there.
    std::vector<double> breakpoints() const;
    /// Natural length of the profile.
    double length_scale() const;

    /// ||G||_{L^1(R^n)}.
    double l1_norm() const;

    /// Radial moment tables of the normalized profile, built on first use.
    const RadialMomentTable& moments() const;

private:
    Family family_;
    KernelParams params_;
    int n_;
    double scale_ = 1.0;
    double bessel_const_ = 0.0;
    struct Cache;
    std::shared_ptr<Cache> cache_;
};

/// A kernel together with a concentration scale eps.
struct KernelFamily {
    RadialKernel base;
    double eps = 1.0;

    int dimension() const { return base.dimension(); }
    /// G_eps(r) = eps^{-(n+1)} g(r / eps).
    double G(double r) const;
};

enum class Derived { G_eps, eta_eps, rho_eps, k_eps };

/// Gamma(n/2) / (sqrt(pi) Gamma((n+1)/2)).
double k1n_constant(int n);
/// Surface area of S^{n-1}.
double sphere_area(int n);
/// Volume of the unit ball in R^m.
double ball_volume(int m);

RadialKernel build_kernel(Family family, const KernelParams& params, int n);

struct MomentResult {
    double value = 0.0;
    bool finite = true;
};

/// I_G^k = |S^{n-1}| int_0^inf r^{n-1+k} |d^{k-1}g/dr^{k-1}| dr, k in {1, 2}.
MomentResult moment(const RadialKernel& kernel, int k, double rel_tol = 1e-10);

double derived_kernel(const KernelFamily& fam, Derived which, double r);

/// int_R |t| rho_eps(t) dt by adaptive quadrature (equals 1 for a normalized kernel).
double rho_first_moment(const KernelFamily& fam);

/// |S^{n-2}| int_0^inf eta_eps(r) r^{n-2} dr (equals n-1 for a normalized kernel).
double eta_mass(const KernelFamily& fam);

struct HypothesisReport {
    bool h1 = false;
    double h1_min_sample = 0.0;
    bool h2 = false;
    double first_moment = 0.0;
    double first_moment_target = 0.0;
    bool h3 = false;
    double second_moment = 0.0;
    bool second_moment_finite = false;
    double tail_slope = std::numeric_limits<double>::quiet_NaN();
    std::string tail_note;
    std::vector<double> tcond_eps;
    std::vector<double> tcond_sup;
    bool tcond_decreasing = false;
    bool tcond_vanishing = false;
};

HypothesisReport check_hypotheses(const RadialKernel& kernel);

RadialKernel kernel_from_json(const nlohmann::json& j);
nlohmann::json kernel_to_json(const RadialKernel& k);
nlohmann::json hypothesis_report_to_json(const HypothesisReport& r);

/// Raw Bessel potential value by the subordination integral; exposed for testing.
/// Returns int_0^inf exp(-s - a/s) s^{beta-1} ds.
double subordination_integral(double a, double beta, int nodes = 200);

}  // namespace dropshape
