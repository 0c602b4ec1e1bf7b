#include "dropshape/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <queue>
#include <stdexcept>

namespace dropshape {

namespace {

GaussRule make_gauss_legendre(int n) {
    GaussRule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        double p0 = 1.0, p1 = 0.0;
        for (int j = 0; j < n; ++j) {
            const double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        rule.x[i] = -z;
        rule.x[n - 1 - i] = z;
        rule.w[i] = rule.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return rule;
}

// 15-point Kronrod abscissae and weights, with the 7-point Gauss weights.
constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

}  // namespace

const GaussRule& gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
    static std::mutex mu;
    static std::map<int, std::unique_ptr<GaussRule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<GaussRule>(make_gauss_legendre(n));
    return *slot;
}

QuadResult gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double rk = fc * kWgk[7];
    double rg = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const double fsum = f(c - dx) + f(c + dx);
        rk += kWgk[j] * fsum;
        if (j % 2 == 1) rg += kWg[j / 2] * fsum;
    }
    QuadResult r;
    r.value = rk * h;
    r.error = std::abs((rk - rg) * h);
    return r;
}

QuadResult integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                     double abs_tol, int max_intervals) {
    struct Seg {
        double a, b, value, error;
        bool operator<(const Seg& o) const { return error < o.error; }
    };
    if (a == b) return {};
    std::priority_queue<Seg> heap;
    QuadResult first = gk15(f, a, b);
    heap.push({a, b, first.value, first.error});
    double total = first.value, err = first.error;
    int count = 1;
    while (err > std::max(abs_tol, rel_tol * std::abs(total))) {
        if (count >= max_intervals) break;
        Seg s = heap.top();
        heap.pop();
        const double m = 0.5 * (s.a + s.b);
        if (m <= s.a || m >= s.b) {
            // Interval cannot be split further in floating point.
            heap.push({s.a, s.b, s.value, 0.0});
            err -= s.error;
            continue;
        }
        QuadResult l = gk15(f, s.a, m), r = gk15(f, m, s.b);
        total += l.value + r.value - s.value;
        err += l.error + r.error - s.error;
        heap.push({s.a, m, l.value, l.error});
        heap.push({m, s.b, r.value, r.error});
        ++count;
    }
    // Re-sum to avoid drift from incremental updates.
    double sum = 0.0, esum = 0.0;
    std::vector<Seg> segs;
    while (!heap.empty()) {
        segs.push_back(heap.top());
        heap.pop();
    }
    std::sort(segs.begin(), segs.end(), [](const Seg& x, const Seg& y) { return x.a < y.a; });
    for (const Seg& s : segs) {
        sum += s.value;
        esum += s.error;
    }
    QuadResult out;
    out.value = sum;
    out.error = esum;
    out.converged = esum <= std::max(abs_tol, rel_tol * std::abs(sum)) * 10.0;
    return out;
}

QuadResult integrate_to_infinity(const std::function<double(double)>& f, double a, double scale,
                                 double rel_tol) {
    QuadResult out;
    double lo = a, width = scale;
    double sum = 0.0, esum = 0.0;
    int small_panels = 0;
    for (int panel = 0; panel < 200; ++panel) {
        const double hi = lo + width;
        QuadResult p = integrate(f, lo, hi, rel_tol * 0.1, 1e-300);
        sum += p.value;
        esum += p.error;
        if (std::abs(p.value) <= rel_tol * 1e-2 * std::abs(sum) || (sum == 0.0 && p.value == 0.0)) {
            if (++small_panels >= 2) {
                out.value = sum;
                out.error = esum;
                out.converged = true;
                return out;
            }
        } else {
            small_panels = 0;
        }
        lo = hi;
        width *= 2.0;
        if (lo > 1e15) break;
    }
    out.value = sum;
    out.error = esum;
    out.converged = false;
    return out;
}

QuadResult integrate_from_zero(const std::function<double(double)>& f, double b, double rel_tol) {
    // x = b v^4 removes singularities up to x^{-3/4} and smooths milder ones.
    auto g = [&](double v) {
        if (v <= 0.0) return 0.0;
        const double v3 = v * v * v;
        return f(b * v3 * v) * 4.0 * b * v3;
    };
    return integrate(g, 0.0, 1.0, rel_tol, 1e-300);
}

}  // namespace dropshape
