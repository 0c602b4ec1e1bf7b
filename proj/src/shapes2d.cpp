#include "dropshape/shapes2d.hpp"

#include <algorithm>
#include <numbers>

#include "dropshape/errors.hpp"

namespace dropshape {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void validate(const StarShape2D& E) {
    const int N = boundary_grid_size(E);
    for (int j = 0; j < N; ++j) {
        const double r = E.R(kTwoPi * j / N);
        if (!(r > 0.0) || !std::isfinite(r)) throw ValidationError("invalid shape: R(theta) <= 0 on the grid");
    }
}
}  // namespace

std::vector<Mode> StarShape2D::modes() const {
    std::vector<Mode> out;
    for (int k = 1; k <= max_mode(); ++k)
        if (a_[k] != 0.0 || b_[k] != 0.0) out.push_back({k, a_[k], b_[k]});
    return out;
}

double StarShape2D::R(double theta) const {
    const double c1 = std::cos(theta), s1 = std::sin(theta);
    double ck = 1.0, sk = 0.0, r = r0_;
    for (int k = 1; k <= max_mode(); ++k) {
        const double cn = ck * c1 - sk * s1;
        sk = sk * c1 + ck * s1;
        ck = cn;
        r += a_[k] * ck + b_[k] * sk;
    }
    return r;
}

RadialSample StarShape2D::eval(double theta) const {
    const double c1 = std::cos(theta), s1 = std::sin(theta);
    double ck = 1.0, sk = 0.0;
    RadialSample out{r0_, 0.0, 0.0};
    for (int k = 1; k <= max_mode(); ++k) {
        const double cn = ck * c1 - sk * s1;
        sk = sk * c1 + ck * s1;
        ck = cn;
        const double c = a_[k] * ck + b_[k] * sk;
        out.R += c;
        out.dR += k * (b_[k] * ck - a_[k] * sk);
        out.d2R -= k * k * c;
    }
    return out;
}

Vec2 StarShape2D::boundary(double theta) const {
    const double r = R(theta);
    return {center_.x + r * std::cos(theta), center_.y + r * std::sin(theta)};
}

Vec2 StarShape2D::tangent(double theta) const {
    const RadialSample s = eval(theta);
    const double c = std::cos(theta), n = std::sin(theta);
    return {s.dR * c - s.R * n, s.dR * n + s.R * c};
}

StarShape2D from_fourier(Vec2 center, double r0, const std::vector<Mode>& modes) {
    int K = 0;
    for (const Mode& m : modes) {
        if (m.k < 0) throw ValidationError("mode index must be nonnegative");
        K = std::max(K, m.k);
    }
    std::vector<double> a(K + 1, 0.0), b(K + 1, 0.0);
    for (const Mode& m : modes) {
        if (m.k == 0) {
            r0 += m.a;
        } else {
            a[m.k] += m.a;
            b[m.k] += m.b;
        }
    }
    return with_coefficients(center, r0, std::move(a), std::move(b));
}

StarShape2D with_coefficients(Vec2 center, double r0, std::vector<double> a, std::vector<double> b) {
    if (a.empty()) a.push_back(0.0);
    if (b.size() < a.size()) b.resize(a.size(), 0.0);
    if (a.size() < b.size()) a.resize(b.size(), 0.0);
    a[0] = b[0] = 0.0;
    while (a.size() > 1 && a.back() == 0.0 && b.back() == 0.0) {
        a.pop_back();
        b.pop_back();
    }
    StarShape2D E;
    E.center_ = center;
    E.r0_ = r0;
    E.a_ = std::move(a);
    E.b_ = std::move(b);
    validate(E);
    return E;
}

int boundary_grid_size(const StarShape2D& E, int minimum) {
    return std::max(minimum, 32 * (E.max_mode() + 1));
}

double area(const StarShape2D& E) {
    double s = E.r0() * E.r0() * 2.0;
    for (int k = 1; k <= E.max_mode(); ++k) s += E.a(k) * E.a(k) + E.b(k) * E.b(k);
    return 0.5 * kPi * s;
}

double local_perimeter(const StarShape2D& E) {
    const int N = boundary_grid_size(E);
    double s = 0.0;
    for (int j = 0; j < N; ++j) {
        const RadialSample r = E.eval(kTwoPi * j / N);
        s += std::hypot(r.R, r.dR);
    }
    return s * kTwoPi / N;
}

Vec2 barycenter(const StarShape2D& E) {
    const int N = boundary_grid_size(E);
    double mx = 0.0, my = 0.0;
    for (int j = 0; j < N; ++j) {
        const double th = kTwoPi * j / N;
        const double r = E.R(th);
        mx += r * r * r * std::cos(th);
        my += r * r * r * std::sin(th);
    }
    const double w = kTwoPi / N / (3.0 * area(E));
    return {E.center().x + mx * w, E.center().y + my * w};
}

bool is_convex(const StarShape2D& E) {
    const int N = std::max(2048, 64 * (E.max_mode() + 1));
    for (int j = 0; j < N; ++j) {
        const RadialSample r = E.eval(kTwoPi * j / N);
        if (r.R * r.R + 2.0 * r.dR * r.dR - r.R * r.d2R < -1e-8) return false;
    }
    return true;
}

GeometryReport measure(const StarShape2D& E) {
    GeometryReport g;
    g.area = area(E);
    g.local_perimeter = local_perimeter(E);
    g.barycenter = barycenter(E);
    const int N = boundary_grid_size(E);
    g.r_min = std::numeric_limits<double>::infinity();
    g.r_max = 0.0;
    for (int j = 0; j < N; ++j) {
        const double r = E.R(kTwoPi * j / N);
        g.r_min = std::min(g.r_min, r);
        g.r_max = std::max(g.r_max, r);
    }
    g.is_convex = is_convex(E);
    return g;
}

StarShape2D dilate(const StarShape2D& E, double lambda) {
    if (!(lambda > 0.0)) throw ValidationError("dilation factor must be positive");
    std::vector<double> a(E.max_mode() + 1), b(E.max_mode() + 1);
    for (int k = 1; k <= E.max_mode(); ++k) {
        a[k] = lambda * E.a(k);
        b[k] = lambda * E.b(k);
    }
    return with_coefficients(E.center() * lambda, lambda * E.r0(), a, b);
}

StarShape2D translate(const StarShape2D& E, Vec2 v) {
    std::vector<double> a(E.max_mode() + 1), b(E.max_mode() + 1);
    for (int k = 1; k <= E.max_mode(); ++k) {
        a[k] = E.a(k);
        b[k] = E.b(k);
    }
    return with_coefficients(E.center() + v, E.r0(), a, b);
}

StarShape2D scale_to_area(const StarShape2D& E, double target) {
    if (!(target > 0.0)) throw ValidationError("target area must be positive");
    return dilate(E, std::sqrt(target / area(E)));
}

StarShape2D fit_radial_samples(Vec2 center, const std::vector<double>& radii, int K) {
    const int N = static_cast<int>(radii.size());
    if (N <= 2 * K) throw ValidationError("too few radial samples for the requested modes");
    std::vector<double> a(K + 1, 0.0), b(K + 1, 0.0);
    double r0 = 0.0;
    for (int j = 0; j < N; ++j) r0 += radii[j];
    r0 /= N;
    for (int j = 0; j < N; ++j) {
        const double th = kTwoPi * j / N;
        const double c1 = std::cos(th), s1 = std::sin(th);
        double ck = 1.0, sk = 0.0;
        for (int k = 1; k <= K; ++k) {
            const double cn = ck * c1 - sk * s1;
            sk = sk * c1 + ck * s1;
            ck = cn;
            a[k] += radii[j] * ck;
            b[k] += radii[j] * sk;
        }
    }
    for (int k = 1; k <= K; ++k) {
        a[k] *= 2.0 / N;
        b[k] *= 2.0 / N;
    }
    return with_coefficients(center, r0, a, b);
}

StarShape2D resample_about(const StarShape2D& E, Vec2 p, int K) {
    const int N = std::max(512, 16 * (K + 1));
    const Vec2 off = p - E.center();
    double rmax = 0.0;
    for (int j = 0; j < 256; ++j) rmax = std::max(rmax, E.R(kTwoPi * j / 256));
    const double shi = 2.0 * (rmax + off.norm()) + 1e-12;
    auto f = [&](double s, Vec2 e) {
        const Vec2 q = off + e * s;
        const double r = q.norm();
        if (r == 0.0) return -E.R(0.0);
        return r - E.R(std::atan2(q.y, q.x));
    };
    if (f(0.0, {1.0, 0.0}) >= 0.0) throw NumericError("resampling point lies outside the shape");
    std::vector<double> radii(N);
    for (int j = 0; j < N; ++j) {
        const double th = kTwoPi * j / N;
        const Vec2 e{std::cos(th), std::sin(th)};
        // Coarse scan to detect loss of star-shapedness, then bisection on the crossing.
        constexpr int kScan = 48;
        int changes = 0;
        double lo = 0.0, hi = shi;
        double prev = f(0.0, e);
        for (int i = 1; i <= kScan; ++i) {
            const double s = shi * i / kScan;
            const double v = f(s, e);
            if ((prev < 0.0) != (v < 0.0)) {
                if (changes == 0) {
                    lo = shi * (i - 1) / kScan;
                    hi = s;
                }
                ++changes;
            }
            prev = v;
        }
        if (changes != 1) throw NumericError("shape is not star-shaped about the new center");
        for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
            const double m = 0.5 * (lo + hi);
            (f(m, e) < 0.0 ? lo : hi) = m;
        }
        radii[j] = 0.5 * (lo + hi);
    }
    return fit_radial_samples(p, radii, K);
}

StarShape2D recenter(const StarShape2D& E, int K) {
    StarShape2D cur = E;
    if (K < 1) K = std::max(E.max_mode(), 32);
    for (int it = 0; it < 20; ++it) {
        const Vec2 b = barycenter(cur);
        if ((b - cur.center()).norm() <= 1e-9) return cur;
        cur = resample_about(cur, b, K);
    }
    if ((barycenter(cur) - cur.center()).norm() <= 1e-9) return cur;
    throw NumericError("recentering did not converge");
}

HullResult convex_hull(const StarShape2D& E) {
    constexpr int kSamples = 4096;
    std::vector<Vec2> pts(kSamples);
    for (int j = 0; j < kSamples; ++j) pts[j] = E.boundary(kTwoPi * j / kSamples);
    std::sort(pts.begin(), pts.end(), [](Vec2 p, Vec2 q) { return p.x < q.x || (p.x == q.x && p.y < q.y); });
    std::vector<Vec2> hull(2 * kSamples);
    int k = 0;
    for (int i = 0; i < kSamples; ++i) {
        while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    for (int i = kSamples - 2, lower = k + 1; i >= 0; --i) {
        while (k >= lower && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);

    HullResult out;
    for (std::size_t i = 0; i < hull.size(); ++i) out.polygon_perimeter += (hull[(i + 1) % hull.size()] - hull[i]).norm();

    // Order vertices by polar angle about the center.
    const Vec2 c = E.center();
    std::vector<std::pair<double, Vec2>> byang;
    for (Vec2 v : hull) {
        double a = std::atan2(v.y - c.y, v.x - c.x);
        if (a < 0.0) a += kTwoPi;
        byang.push_back({a, v});
    }
    std::sort(byang.begin(), byang.end(), [](const auto& p, const auto& q) { return p.first < q.first; });
    out.polygon.reserve(byang.size());
    for (const auto& pa : byang) out.polygon.push_back(pa.second);

    const int M = static_cast<int>(byang.size());
    std::vector<double> radii(kSamples);
    for (int j = 0; j < kSamples; ++j) {
        const double th = kTwoPi * j / kSamples;
        auto it = std::upper_bound(byang.begin(), byang.end(), th,
                                   [](double v, const auto& p) { return v < p.first; });
        const int hi = static_cast<int>(it - byang.begin()) % M;
        const int lo = (hi - 1 + M) % M;
        const Vec2 v0 = byang[lo].second, v1 = byang[hi].second;
        const Vec2 e{std::cos(th), std::sin(th)}, d = v1 - v0;
        radii[j] = cross(v0 - c, d) / cross(e, d);
    }
    out.shape = fit_radial_samples(c, radii, std::max(E.max_mode(), 64));
    return out;
}

NearlySphericalDecomposition nearly_spherical_decompose(const StarShape2D& E) {
    NearlySphericalDecomposition d;
    const int N = boundary_grid_size(E);
    std::vector<double> w(N), dw(N);
    double t = 0.0, lip = 0.0;
    for (int j = 0; j < N; ++j) {
        const RadialSample r = E.eval(kTwoPi * j / N);
        w[j] = r.R - 1.0;
        dw[j] = r.dR;
        t = std::max(t, std::abs(w[j]));
        lip = std::max(lip, std::abs(r.dR));
    }
    d.t = t;
    d.u_samples.assign(N, 0.0);
    if (t > 0.0) {
        for (int j = 0; j < N; ++j) d.u_samples[j] = w[j] / t;
        d.sup_norm = 1.0;
        d.lip_norm = lip / t;
    }
    const Vec2 off = barycenter(E) - E.center();
    d.centered = off.norm() * area(E) <= 1e-8;
    d.valid = t < 0.5 && d.sup_norm <= 1.0 + 1e-12 && d.lip_norm <= 1.0 + 1e-12;
    const double tu = t * d.sup_norm;
    d.gradient_bound = tu < 1.0 ? 2.0 * (1.0 + tu) / (1.0 - tu) * std::sqrt(tu) : std::numeric_limits<double>::infinity();
    d.gradient_bound_holds = lip <= d.gradient_bound + 1e-12;
    return d;
}

double normal_deviation(const StarShape2D& E) {
    const int N = boundary_grid_size(E);
    double worst = 0.0;
    for (int j = 0; j < N; ++j) {
        const RadialSample r = E.eval(kTwoPi * j / N);
        const double cosang = r.R / std::hypot(r.R, r.dR);
        worst = std::max(worst, std::sqrt(std::max(0.0, 2.0 - 2.0 * cosang)));
    }
    return worst;
}

double h1_distance_to_unit_circle(const StarShape2D& E) {
    double s = kTwoPi * (E.r0() - 1.0) * (E.r0() - 1.0);
    for (int k = 1; k <= E.max_mode(); ++k) s += kPi * (1.0 + double(k) * k) * (E.a(k) * E.a(k) + E.b(k) * E.b(k));
    return std::sqrt(s);
}

StarShape2D shape_from_json(const nlohmann::json& j) {
    try {
        Vec2 c;
        if (j.contains("center")) {
            const auto& v = j.at("center");
            if (!v.is_array() || v.size() != 2) throw ValidationError("shape center must be [x, y]");
            c = {v[0].get<double>(), v[1].get<double>()};
        }
        const double r0 = j.value("r0", 1.0);
        std::vector<Mode> modes;
        if (j.contains("modes"))
            for (const auto& m : j.at("modes")) {
                if (!m.is_array() || m.size() != 3) throw ValidationError("each mode must be [k, a, b]");
                modes.push_back({m[0].get<int>(), m[1].get<double>(), m[2].get<double>()});
            }
        return from_fourier(c, r0, modes);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed shape file: ") + e.what());
    }
}

nlohmann::json shape_to_json(const StarShape2D& E) {
    nlohmann::json modes = nlohmann::json::array();
    for (const Mode& m : E.modes()) modes.push_back({m.k, m.a, m.b});
    return {{"center", {E.center().x, E.center().y}}, {"r0", E.r0()}, {"modes", modes}};
}

}  // namespace dropshape
