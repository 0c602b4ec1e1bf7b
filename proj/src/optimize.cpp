#include "dropshape/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "dropshape/csv.hpp"
#include "dropshape/errors.hpp"
#include "dropshape/nonlocal.hpp"
#include "dropshape/parallel.hpp"

namespace dropshape {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kArmijo = 1e-4;

void check_config(const OptimizerConfig& cfg) {
    if (cfg.K < 2) throw ValidationError("optimizer needs K >= 2");
    if (!(cfg.step > 0.0)) throw ValidationError("optimizer step must be positive");
    if (!(cfg.fd_step > 0.0)) throw ValidationError("fd_step must be positive");
    if (!(cfg.area_target > 0.0)) throw ValidationError("area target must be positive");
    if (cfg.max_iters < 0) throw ValidationError("max_iters must be nonnegative");
}

// Layout of the parameter vector: a_2..a_K then b_2..b_K.
StarShape2D shape_of(const std::vector<double>& x, int K) {
    std::vector<Mode> modes;
    for (int k = 2; k <= K; ++k) modes.push_back({k, x[k - 2], x[K - 1 + k - 2]});
    return from_fourier({0.0, 0.0}, 1.0, modes);
}

std::vector<double> params_of(const StarShape2D& E, int K) {
    std::vector<double> x(2 * (K - 1));
    for (int k = 2; k <= K; ++k) {
        x[k - 2] = E.a(k) / E.r0();
        x[K - 1 + k - 2] = E.b(k) / E.r0();
    }
    return x;
}

double energy_at(const StarShape2D& E, const KernelFamily& fam, double gamma, int directions) {
    SlicingOptions opt;
    opt.directions = directions;
    return local_perimeter(E) - gamma * per_slicing(E, fam, opt).value;
}

// Project onto the constraint set: fix the area, move the center to the barycenter, drop mode 1.
std::vector<double> project(const std::vector<double>& x, const OptimizerConfig& cfg) {
    const StarShape2D E = scale_to_area(shape_of(x, cfg.K), cfg.area_target);
    return params_of(recenter(E, cfg.K), cfg.K);
}

double full_energy(const StarShape2D& E, const KernelFamily& fam, double gamma) {
    return energy_at(E, fam, gamma, SlicingOptions{}.directions);
}
}  // namespace

double coefficient_energy(const std::vector<double>& x, const KernelFamily& fam, double gamma,
                          const OptimizerConfig& cfg) {
    if (x.size() != static_cast<std::size_t>(2 * (cfg.K - 1))) throw ValidationError("parameter vector has the wrong size");
    const StarShape2D E = scale_to_area(shape_of(x, cfg.K), cfg.area_target);
    return energy_at(E, fam, gamma, cfg.search_directions);
}

namespace {
std::vector<double> gradient_at(const std::vector<double>& x, const KernelFamily& fam, double gamma,
                                const OptimizerConfig& cfg) {
    return parallel_map(x.size(), [&](std::size_t i) {
        std::vector<double> up = x, down = x;
        up[i] += cfg.fd_step;
        down[i] -= cfg.fd_step;
        return (coefficient_energy(up, fam, gamma, cfg) - coefficient_energy(down, fam, gamma, cfg)) /
               (2.0 * cfg.fd_step);
    });
}
}  // namespace

std::vector<double> fd_gradient(const StarShape2D& E, const KernelFamily& fam, double gamma,
                                const OptimizerConfig& cfg) {
    check_config(cfg);
    return gradient_at(params_of(recenter(E, cfg.K), cfg.K), fam, gamma, cfg);
}

OptimizerReport minimize(const StarShape2D& init, const KernelFamily& fam, double gamma, const OptimizerConfig& cfg) {
    check_config(cfg);
    if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("gamma must lie in (0, 1)");
    const int K = cfg.K;
    std::vector<double> x = params_of(recenter(scale_to_area(init, cfg.area_target), K), K);
    double F = coefficient_energy(x, fam, gamma, cfg);
    OptimizerReport rep;
    rep.trace.push_back(F);

    // Diagonal preconditioner from the second variation at the disk, about pi (1 - gamma) k^2.
    std::vector<double> scale(x.size());
    for (int k = 2; k <= K; ++k) scale[k - 2] = scale[K - 1 + k - 2] = 1.0 / (kPi * (1.0 - gamma) * k * k);

    for (int it = 0; it < cfg.max_iters; ++it) {
        const std::vector<double> g = gradient_at(x, fam, gamma, cfg);
        rep.grad_norm = 0.0;
        for (double v : g) rep.grad_norm = std::max(rep.grad_norm, std::abs(v));
        if (rep.grad_norm <= cfg.grad_tol) {
            rep.converged = true;
            break;
        }
        std::vector<double> d(x.size());
        double slope = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            d[i] = -scale[i] * g[i];
            slope += g[i] * d[i];
        }
        bool accepted = false;
        for (double alpha = cfg.step; alpha > 1e-10; alpha *= 0.5) {
            std::vector<double> trial(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + alpha * d[i];
            double Ft;
            try {
                trial = project(trial, cfg);
                Ft = coefficient_energy(trial, fam, gamma, cfg);
            } catch (const ValidationError&) {
                continue;
            } catch (const NumericError&) {
                continue;
            }
            if (Ft <= F + kArmijo * alpha * slope) {
                x = trial;
                F = Ft;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        rep.iterations = it + 1;
        rep.trace.push_back(F);
    }

    rep.final_shape = scale_to_area(shape_of(x, K), cfg.area_target);
    rep.f_final = full_energy(rep.final_shape, fam, gamma);
    const StarShape2D centered = recenter(rep.final_shape);
    rep.u_h1 = h1_distance_to_unit_circle(centered);
    const GeometryReport geo = measure(centered);
    rep.delta_hat = std::max(1.0 - geo.r_min, geo.r_max - 1.0);
    return rep;
}

std::vector<StarShape2D> random_inits(int count, int K, double amplitude, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<StarShape2D> out;
    for (int c = 0; c < count; ++c) {
        std::vector<Mode> modes;
        for (int k = 2; k <= K; ++k) modes.push_back({k, amplitude * U(rng) / k, amplitude * U(rng) / k});
        out.push_back(from_fourier({0.0, 0.0}, 1.0, modes));
    }
    return out;
}

std::vector<SweepRow> sweep(const RadialKernel& kernel, double gamma, const std::vector<double>& eps_grid,
                            const std::vector<StarShape2D>& inits, const OptimizerConfig& cfg) {
    std::vector<double> eps = eps_grid;
    for (double e : eps)
        if (!(e > 0.0 && e <= 1.0)) throw ValidationError("sweep needs eps in (0, 1]");
    std::sort(eps.begin(), eps.end());
    std::vector<SweepRow> rows;
    for (double e : eps) {
        const KernelFamily fam{kernel, e};
        const double f_disk = full_energy(scale_to_area(unit_disk(), cfg.area_target), fam, gamma);
        for (std::size_t i = 0; i < inits.size(); ++i) {
            const OptimizerReport r = minimize(inits[i], fam, gamma, cfg);
            SweepRow row;
            row.eps = e;
            row.gamma = gamma;
            row.init_id = static_cast<int>(i);
            row.iters = r.iterations;
            row.f_final = r.f_final;
            row.f_disk_gap = r.f_final - f_disk;
            row.u_h1 = r.u_h1;
            row.delta_hat = r.delta_hat;
            row.converged = r.converged;
            rows.push_back(row);
        }
    }
    return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    write_csv_row(os, {"eps", "gamma", "init_id", "iters", "f_final", "f_disk_gap", "u_h1", "delta_hat", "converged"});
    for (const SweepRow& r : rows)
        write_csv_row(os, {format_number(r.eps), format_number(r.gamma), std::to_string(r.init_id),
                           std::to_string(r.iters), format_number(r.f_final), format_number(r.f_disk_gap),
                           format_number(r.u_h1), format_number(r.delta_hat), r.converged ? "true" : "false"});
}

std::vector<ConvexificationRow> convexification_experiment(const std::vector<StarShape2D>& shapes,
                                                           const RadialKernel& kernel, double gamma, double eps) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("gamma must lie in (0, 1)");
    const KernelFamily fam{kernel, eps};
    std::vector<ConvexificationRow> rows;
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        const StarShape2D E = scale_to_area(shapes[i], kPi);
        const StarShape2D H = convex_hull(E).shape;
        const StarShape2D Hs = scale_to_area(H, kPi);
        const double perE = per_slicing(E, fam).value;
        const double perH = per_slicing(H, fam).value;
        const double perHs = per_slicing(Hs, fam).value;
        ConvexificationRow r;
        r.shape_id = static_cast<int>(i);
        r.convex_input = is_convex(E);
        const double PE = local_perimeter(E);
        r.critical_shape = PE - perE;
        r.critical_hull = local_perimeter(H) - perH;
        r.critical_margin = r.critical_shape - r.critical_hull;
        r.f_shape = PE - gamma * perE;
        r.f_scaled_hull = local_perimeter(Hs) - gamma * perHs;
        r.f_margin = r.f_shape - r.f_scaled_hull;
        r.critical_ok = r.critical_margin >= -1e-3 * PE;
        r.f_ok = r.f_margin > 0.0;
        rows.push_back(r);
    }
    return rows;
}

std::vector<StarShape2D> random_nonconvex_shapes(int count, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> mode(2, 5);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<StarShape2D> out;
    while (static_cast<int>(out.size()) < count) {
        const int k = mode(rng);
        const double amp = 0.1 + 0.25 * U(rng);
        const double phase = 2.0 * kPi * U(rng);
        const int k2 = mode(rng);
        const double amp2 = 0.03 * U(rng);
        std::vector<Mode> modes{{k, amp * std::cos(phase), amp * std::sin(phase)}};
        if (k2 != k) modes.push_back({k2, amp2, -amp2});
        const StarShape2D E = from_fourier({0.0, 0.0}, 1.0, modes);
        if (!is_convex(E)) out.push_back(E);
    }
    return out;
}

}  // namespace dropshape
