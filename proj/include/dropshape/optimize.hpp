#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include "dropshape/kernels.hpp"
#include "dropshape/shapes2d.hpp"

namespace dropshape {

struct OptimizerConfig {
    int K = 8;
    double step = 1.0;
    int max_iters = 60;
    double grad_tol = 1e-5;
    double area_target = 3.14159265358979323846;
    double fd_step = 1e-5;
    std::uint64_t seed = 1;
    int search_directions = 128;  // slicing resolution during the search
};

struct OptimizerReport {
    StarShape2D final_shape;
    std::vector<double> trace;  // F at accepted iterates (search resolution)
    double f_final = 0.0;       // F at full resolution
    double u_h1 = 0.0;          // ||R - 1||_{H^1} about the barycenter
    double delta_hat = 0.0;     // max(1 - r_min, r_max - 1)
    double grad_norm = 0.0;     // sup norm of the last gradient
    int iterations = 0;
    bool converged = false;
};

/// F_{gamma, G_eps} = P - gamma Per_{G_eps} of the set with Fourier modes 2..K given by x
/// (cosines then sines) after rescaling to area_target.
double coefficient_energy(const std::vector<double>& x, const KernelFamily& fam, double gamma,
                          const OptimizerConfig& cfg);
/// Central finite-difference gradient of coefficient_energy at the modes of E.
std::vector<double> fd_gradient(const StarShape2D& E, const KernelFamily& fam, double gamma,
                                const OptimizerConfig& cfg);

OptimizerReport minimize(const StarShape2D& init, const KernelFamily& fam, double gamma,
                         const OptimizerConfig& cfg = {});

/// Perturbed disks R = 1 + sum_k (a_k cos k theta + b_k sin k theta), k = 2..K, with
/// |a_k|, |b_k| <= amplitude / k.
std::vector<StarShape2D> random_inits(int count, int K, double amplitude, std::mt19937_64& rng);

struct SweepRow {
    double eps = 0.0;
    double gamma = 0.0;
    int init_id = 0;
    int iters = 0;
    double f_final = 0.0;
    double f_disk_gap = 0.0;
    double u_h1 = 0.0;
    double delta_hat = 0.0;
    bool converged = false;
};

std::vector<SweepRow> sweep(const RadialKernel& kernel, double gamma, const std::vector<double>& eps_grid,
                            const std::vector<StarShape2D>& inits, const OptimizerConfig& cfg = {});
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

struct ConvexificationRow {
    int shape_id = 0;
    bool convex_input = false;
    double critical_shape = 0.0;  // E(E) = P - Per on E scaled to area pi
    double critical_hull = 0.0;   // E(co(E))
    double critical_margin = 0.0; // E(E) - E(co(E))
    double f_shape = 0.0;
    double f_scaled_hull = 0.0;   // F(co(E) rescaled to area pi)
    double f_margin = 0.0;        // F(E) - F(scaled hull)
    bool critical_ok = false;     // margin >= -1e-3 P(E)
    bool f_ok = false;            // margin > 0
};

std::vector<ConvexificationRow> convexification_experiment(const std::vector<StarShape2D>& shapes,
                                                           const RadialKernel& kernel, double gamma, double eps);

/// Star shapes with a single large mode that are not convex.
std::vector<StarShape2D> random_nonconvex_shapes(int count, std::mt19937_64& rng);

}  // namespace dropshape
