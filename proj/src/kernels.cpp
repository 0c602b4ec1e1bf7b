#include "dropshape/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "dropshape/errors.hpp"
#include "dropshape/quadrature.hpp"

namespace dropshape {

namespace {

constexpr double kPi = std::numbers::pi;

// Integral of f over (0, support) split at the given breakpoints; the piece touching 0
// uses a substitution that tolerates integrable power singularities.
QuadResult integrate_radial(const std::function<double(double)>& f, double length,
                            double support, std::vector<double> breaks, double rel_tol) {
    breaks.push_back(length);
    if (std::isfinite(support)) breaks.push_back(support);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::remove_if(breaks.begin(), breaks.end(),
                                [&](double b) { return b <= 0.0 || b > support; }),
                 breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    QuadResult out;
    QuadResult first = integrate_from_zero(f, breaks.front(), rel_tol * 0.1);
    out.value = first.value;
    out.error = first.error;
    out.converged = first.converged;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        QuadResult p = integrate(f, breaks[i], breaks[i + 1], rel_tol * 0.1);
        out.value += p.value;
        out.error += p.error;
        out.converged = out.converged && p.converged;
    }
    if (!std::isfinite(support)) {
        QuadResult t = integrate_to_infinity(f, breaks.back(), length, rel_tol * 0.1);
        out.value += t.value;
        out.error += t.error;
        out.converged = out.converged && t.converged;
    }
    return out;
}

double smoothstep_taper(double z) { return 1.0 - z * z * (3.0 - 2.0 * z); }

}  // namespace

// ---------------------------------------------------------------------------------------------

std::string family_name(Family f) {
    switch (f) {
        case Family::exponential: return "exponential";
        case Family::gaussian: return "gaussian";
        case Family::compact_bump: return "compact_bump";
        case Family::truncated_riesz: return "truncated_riesz";
        case Family::bessel: return "bessel";
    }
    return "unknown";
}

Family family_from_name(const std::string& name) {
    for (Family f : {Family::exponential, Family::gaussian, Family::compact_bump,
                     Family::truncated_riesz, Family::bessel})
        if (family_name(f) == name) return f;
    throw ValidationError("unknown kernel family '" + name + "'");
}

double k1n_constant(int n) {
    if (n < 1) throw ValidationError("k1n_constant: n must be at least 1");
    return std::tgamma(0.5 * n) / (std::sqrt(kPi) * std::tgamma(0.5 * (n + 1)));
}

double sphere_area(int n) { return 2.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n); }

double ball_volume(int m) { return std::pow(kPi, 0.5 * m) / std::tgamma(0.5 * m + 1.0); }

double subordination_integral(double a, double beta, int nodes) {
    // s = e^v turns the integral into int exp(phi(v)) dv with phi concave.
    auto phi = [&](double v) { return -std::exp(v) - a * std::exp(-v) + beta * v; };
    auto dphi = [&](double v) { return -std::exp(v) + a * std::exp(-v) + beta; };
    double lo = -1.0, hi = 1.0;
    while (dphi(lo) <= 0.0) lo = 2.0 * lo - 1.0;
    while (dphi(hi) >= 0.0) hi = 2.0 * hi + 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * (1.0 + std::abs(lo)); ++it) {
        const double m = 0.5 * (lo + hi);
        (dphi(m) > 0.0 ? lo : hi) = m;
    }
    const double vstar = 0.5 * (lo + hi);
    const double pstar = phi(vstar);
    constexpr double kDrop = 46.0;  // e^{-46} ~ 1e-20 relative to the peak
    double dl = 0.5, dr = 0.5;
    while (phi(vstar - dl) > pstar - kDrop) dl *= 1.3;
    while (phi(vstar + dr) > pstar - kDrop) dr *= 1.3;
    const double va = vstar - dl, vb = vstar + dr;
    const GaussRule& rule = gauss_legendre(nodes);
    const double c = 0.5 * (va + vb), h = 0.5 * (vb - va);
    double sum = 0.0;
    for (int i = 0; i < nodes; ++i) sum += rule.w[i] * std::exp(phi(c + h * rule.x[i]) - pstar);
    return std::exp(pstar) * sum * h;
}

// ---------------------------------------------------------------------------------------------

RadialMomentTable::RadialMomentTable(const std::function<double(double)>& g,
                                     const std::function<double(double)>& dg, const std::vector<double>& breaks,
                                     double support, double length_scale) {
    const double L = length_scale;
    const double x0 = 1e-9 * L;
    double smax;
    if (std::isfinite(support)) {
        smax = support;
    } else {
        double peak = 0.0;
        smax = L;
        for (double s = 1e-3 * L; s < 2.0 * L; s *= 1.1) peak = std::max(peak, std::pow(s, 4) * g(s));
        while (smax < 1e4 * L) {
            const double v = std::pow(smax, 4) * g(smax);
            peak = std::max(peak, v);
            if (smax > 2.0 * L && v < 1e-19 * peak) break;
            smax *= 1.05;
        }
    }
    const double xg = 0.5 * std::min(L, smax);
    for (double s = x0; s < xg; s *= 1.02) x_.push_back(s);
    const double h = std::isfinite(support) ? 0.005 * L : 0.01 * L;
    const auto cells = static_cast<std::size_t>(std::ceil((smax - xg) / h));
    for (std::size_t i = 0; i <= cells; ++i) x_.push_back(xg + (smax - xg) * double(i) / double(cells));
    for (double b : breaks)
        if (b > x0 && b < smax) x_.push_back(b);
    std::sort(x_.begin(), x_.end());
    std::vector<double> merged;
    for (double s : x_)
        if (merged.empty() || s - merged.back() > 1e-9 * s) merged.push_back(s);
    merged.back() = smax;
    x_ = std::move(merged);

    const std::size_t N = x_.size();
    gx_.resize(N);
    dgx_.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        gx_[i] = g(x_[i]);
        dgx_[i] = dg(x_[i]);
    }

    // Per-cell integrals of r^p g for every p, sharing kernel evaluations.
    const GaussRule& rule = gauss_legendre(20);
    std::vector<std::array<double, kMaxPower + 1>> cell(N - 1);
    for (std::size_t i = 0; i + 1 < N; ++i) {
        const double c = 0.5 * (x_[i] + x_[i + 1]), hh = 0.5 * (x_[i + 1] - x_[i]);
        std::array<double, kMaxPower + 1> acc{};
        for (std::size_t q = 0; q < rule.x.size(); ++q) {
            const double r = c + hh * rule.x[q];
            double v = rule.w[q] * g(r) * hh;
            for (int p = 0; p <= kMaxPower; ++p) {
                acc[p] += v;
                v *= r;
            }
        }
        cell[i] = acc;
    }

    // Local power law g ~ r^{-beta} below the first node.
    const double g0 = gx_[0];
    const double g1 = g(x0 * 1.001);
    const double beta = (g0 > 0.0 && g1 > 0.0) ? -std::log(g1 / g0) / std::log(1.001) : 0.0;

    for (int p = 0; p <= kMaxPower; ++p) {
        auto& H = head_[p];
        auto& T = tail_[p];
        H.assign(N, 0.0);
        T.assign(N, 0.0);
        const double q = p + 1.0 - beta;
        head_exponent_[p] = q;
        H[0] = q > 0.0 ? std::pow(x0, p + 1.0) * g0 / q : 0.0;
        for (std::size_t i = 0; i + 1 < N; ++i) H[i + 1] = H[i] + cell[i][p];
        double beyond = 0.0;
        if (!std::isfinite(support)) {
            const int pp = p;
            beyond = integrate_to_infinity([&](double r) { return std::pow(r, pp) * g(r); }, smax, L,
                                           1e-10)
                         .value;
        }
        T[N - 1] = beyond;
        for (std::size_t i = N - 1; i > 0; --i) T[i - 1] = T[i] + cell[i - 1][p];
        total_[p] = H[N - 1] + beyond;
    }
}

std::size_t RadialMomentTable::cell(double s) const {
    const auto it = std::upper_bound(x_.begin(), x_.end(), s);
    return static_cast<std::size_t>(it - x_.begin()) - 1;
}

double RadialMomentTable::interp(const std::vector<double>& f, int p, double sign, double s,
                                 std::size_t i) const {
    const double a = x_[i], b = x_[i + 1];
    const double h = b - a;
    const double t = (s - a) / h;
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    // f' = sign r^p g and f'' = sign (p r^{p-1} g + r^p g').
    auto d1 = [&](double r, std::size_t j) { return sign * std::pow(r, p) * gx_[j]; };
    auto d2 = [&](double r, std::size_t j) {
        const double lower = p > 0 ? p * std::pow(r, p - 1) * gx_[j] : 0.0;
        return sign * (lower + std::pow(r, p) * dgx_[j]);
    };
    const double h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5, h1 = t - 6 * t3 + 8 * t4 - 3 * t5;
    const double h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
    const double h3 = 10 * t3 - 15 * t4 + 6 * t5, h4 = -4 * t3 + 7 * t4 - 3 * t5;
    const double h5 = 0.5 * t3 - t4 + 0.5 * t5;
    return h0 * f[i] + h1 * h * d1(a, i) + h2 * h * h * d2(a, i) + h3 * f[i + 1] + h4 * h * d1(b, i + 1) +
           h5 * h * h * d2(b, i + 1);
}

double RadialMomentTable::head(int p, double s) const {
    if (s <= 0.0) return 0.0;
    if (s >= x_.back()) return total_[p] - tail_[p].back();
    if (s < x_.front()) return head_[p][0] * std::pow(s / x_.front(), head_exponent_[p]);
    return interp(head_[p], p, 1.0, s, cell(s));
}

double RadialMomentTable::tail(int p, double s) const {
    if (s >= x_.back()) return 0.0;
    if (s < x_.front()) return total_[p] - head(p, s);
    return interp(tail_[p], p, -1.0, s, cell(s));
}

// ---------------------------------------------------------------------------------------------

struct RadialKernel::Cache {
    std::once_flag once;
    std::unique_ptr<RadialMomentTable> table;
};

RadialKernel::RadialKernel(Family family, const KernelParams& params, int n)
    : family_(family), params_(params), n_(n), cache_(std::make_shared<Cache>()) {
    if (n < 2 || n > 3) throw ValidationError("kernel dimension must be 2 or 3");
    switch (family) {
        case Family::compact_bump:
            if (!(params.radius > 0.0)) throw ValidationError("compact_bump radius must be positive");
            break;
        case Family::truncated_riesz:
            if (!(params.radius > 0.0)) throw ValidationError("truncated_riesz radius must be positive");
            if (!(params.exponent > 0.0 && params.exponent < n))
                throw ValidationError("truncated_riesz exponent must lie in (0, n)");
            break;
        case Family::bessel:
            if (!(params.kappa > 0.0) || !(params.alpha > 0.0))
                throw ValidationError("bessel kernel needs kappa > 0 and alpha > 0");
            bessel_const_ = std::pow(4.0 * kPi * params.kappa, -0.5 * n) / std::tgamma(0.5 * params.alpha);
            break;
        default:
            break;
    }
    if (family == Family::bessel) {
        // Consistency of the subordination rule at a few radii.
        for (double r : {1e-3, 0.1, 1.0, 10.0}) {
            const double rr = r * length_scale();
            const double a = rr * rr / (4.0 * params.kappa), beta = 0.5 * (params.alpha - n);
            const double v1 = subordination_integral(a, beta, 200), v2 = subordination_integral(a, beta, 120);
            if (!std::isfinite(v1) || std::abs(v1 - v2) > 1e-9 * std::abs(v1) + 1e-300)
                throw NumericError("bessel subordination quadrature did not converge at r=" + std::to_string(rr));
        }
    }
    QuadResult m = integrate_radial([&](double r) { return std::pow(r, n_) * raw_g(r); }, length_scale(),
                                    support(), breakpoints(), 1e-13);
    const double first = sphere_area(n_) * m.value;
    if (!m.converged || !std::isfinite(first) || first <= 0.0)
        throw NumericError("kernel first moment is not finite; cannot normalize");
    scale_ = 1.0 / (k1n_constant(n_) * first);
}

double RadialKernel::support() const {
    switch (family_) {
        case Family::compact_bump:
        case Family::truncated_riesz: return params_.radius;
        default: return std::numeric_limits<double>::infinity();
    }
}

std::vector<double> RadialKernel::breakpoints() const {
    if (family_ == Family::truncated_riesz) return {0.9 * params_.radius, params_.radius};
    if (family_ == Family::compact_bump) return {params_.radius};
    return {};
}

double RadialKernel::length_scale() const {
    switch (family_) {
        case Family::compact_bump:
        case Family::truncated_riesz: return params_.radius;
        case Family::bessel: return std::sqrt(params_.kappa);
        default: return 1.0;
    }
}

double RadialKernel::raw_g(double r) const {
    switch (family_) {
        case Family::exponential: return std::exp(-r);
        case Family::gaussian: return std::exp(-r * r);
        case Family::compact_bump: {
            const double x = r / params_.radius;
            return x < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0;
        }
        case Family::truncated_riesz: {
            const double R = params_.radius;
            if (r >= R) return 0.0;
            const double p = std::pow(r, -(n_ - params_.exponent));
            if (r <= 0.9 * R) return p;
            return p * smoothstep_taper((r - 0.9 * R) / (0.1 * R));
        }
        case Family::bessel: {
            const double a = r * r / (4.0 * params_.kappa);
            return bessel_const_ * subordination_integral(a, 0.5 * (params_.alpha - n_));
        }
    }
    return 0.0;
}

double RadialKernel::raw_dg(double r) const {
    switch (family_) {
        case Family::exponential: return -std::exp(-r);
        case Family::gaussian: return -2.0 * r * std::exp(-r * r);
        case Family::compact_bump: {
            const double R = params_.radius, x = r / R;
            if (x >= 1.0) return 0.0;
            const double d = 1.0 - x * x;
            return std::exp(-1.0 / d) * (-2.0 * x / R) / (d * d);
        }
        case Family::truncated_riesz: {
            const double R = params_.radius, s = n_ - params_.exponent;
            if (r >= R) return 0.0;
            const double p = std::pow(r, -s), dp = -s * p / r;
            if (r <= 0.9 * R) return dp;
            const double z = (r - 0.9 * R) / (0.1 * R);
            const double w = smoothstep_taper(z), dw = -6.0 * z * (1.0 - z) / (0.1 * R);
            return dp * w + p * dw;
        }
        case Family::bessel: {
            const double a = r * r / (4.0 * params_.kappa);
            return -bessel_const_ * (r / (2.0 * params_.kappa)) *
                   subordination_integral(a, 0.5 * (params_.alpha - n_) - 1.0);
        }
    }
    return 0.0;
}

double RadialKernel::l1_norm() const {
    QuadResult m = integrate_radial([&](double r) { return std::pow(r, n_ - 1) * g(r); }, length_scale(),
                                    support(), breakpoints(), 1e-12);
    return sphere_area(n_) * m.value;
}

const RadialMomentTable& RadialKernel::moments() const {
    std::call_once(cache_->once, [&] {
        cache_->table = std::make_unique<RadialMomentTable>([this](double r) { return g(r); },
                                                             [this](double r) { return dg(r); }, breakpoints(),
                                                             support(), length_scale());
    });
    return *cache_->table;
}

double KernelFamily::G(double r) const {
    const int n = base.dimension();
    return std::pow(eps, -(n + 1)) * base.g(r / eps);
}

RadialKernel build_kernel(Family family, const KernelParams& params, int n) {
    return RadialKernel(family, params, n);
}

MomentResult moment(const RadialKernel& kernel, int k, double rel_tol) {
    if (k != 1 && k != 2) throw ValidationError("moment order must be 1 or 2");
    const int n = kernel.dimension();
    std::function<double(double)> f;
    if (k == 1)
        f = [&](double r) { return std::pow(r, n) * kernel.g(r); };
    else
        f = [&](double r) { return std::pow(r, n + 1) * std::abs(kernel.dg(r)); };
    QuadResult q = integrate_radial(f, kernel.length_scale(), kernel.support(), kernel.breakpoints(), rel_tol);
    MomentResult out;
    if (!q.converged || !std::isfinite(q.value)) {
        out.value = std::numeric_limits<double>::infinity();
        out.finite = false;
        return out;
    }
    out.value = sphere_area(n) * q.value;
    return out;
}

double derived_kernel(const KernelFamily& fam, Derived which, double r) {
    if (!(r > 0.0)) throw ValidationError("derived_kernel: r must be positive");
    if (!(fam.eps > 0.0)) throw ValidationError("epsilon must be positive");
    const int n = fam.dimension();
    const double e = fam.eps, x = r / e;
    switch (which) {
        case Derived::G_eps: return fam.G(r);
        case Derived::eta_eps: return std::pow(e, -(n - 1)) * 2.0 * x * x * fam.base.g(x);
        case Derived::rho_eps: return ball_volume(n - 1) * std::pow(r, n - 1) * fam.G(r);
        case Derived::k_eps: return std::pow(e, -(n + 1)) * x * std::abs(fam.base.dg(x));
    }
    return 0.0;
}

double rho_first_moment(const KernelFamily& fam) {
    const double e = fam.eps;
    std::vector<double> br = fam.base.breakpoints();
    for (double& b : br) b *= e;
    auto f = [&](double t) { return t * derived_kernel(fam, Derived::rho_eps, t); };
    QuadResult q = integrate_radial(f, e * fam.base.length_scale(), e * fam.base.support(), br, 1e-12);
    return 2.0 * q.value;
}

double eta_mass(const KernelFamily& fam) {
    const int n = fam.dimension();
    const double e = fam.eps;
    std::vector<double> br = fam.base.breakpoints();
    for (double& b : br) b *= e;
    auto f = [&](double r) { return derived_kernel(fam, Derived::eta_eps, r) * std::pow(r, n - 2); };
    QuadResult q = integrate_radial(f, e * fam.base.length_scale(), e * fam.base.support(), br, 1e-12);
    return sphere_area(n - 1) * q.value;
}

HypothesisReport check_hypotheses(const RadialKernel& kernel) {
    HypothesisReport rep;
    const int n = kernel.dimension();
    const double L = kernel.length_scale();
    const double top = std::min(kernel.support(), 100.0 * L);
    rep.h1_min_sample = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 2000; ++i) {
        const double r = 1e-6 * L * std::pow(top / (1e-6 * L), i / 1999.0);
        rep.h1_min_sample = std::min(rep.h1_min_sample, kernel.g(r));
    }
    rep.h1 = rep.h1_min_sample >= 0.0;

    rep.first_moment_target = 1.0 / k1n_constant(n);
    rep.first_moment = moment(kernel, 1).value;
    rep.h2 = std::abs(rep.first_moment - rep.first_moment_target) <= 1e-10 * rep.first_moment_target;

    MomentResult m2 = moment(kernel, 2);
    rep.second_moment = m2.value;
    rep.second_moment_finite = m2.finite;
    bool tail_ok;
    if (kernel.support() <= 8.0) {
        tail_ok = true;
        rep.tail_note = "compact support inside the fit window";
    } else {
        std::vector<double> lx, ly;
        for (int i = 0; i < 64; ++i) {
            const double r = 8.0 * std::pow(8.0, i / 63.0);
            const double d = std::abs(kernel.dg(r));
            if (d > 1e-290) {
                lx.push_back(std::log(r));
                ly.push_back(std::log(d));
            }
        }
        if (lx.size() < 2) {
            tail_ok = true;
            rep.tail_note = "derivative underflows on the fit window (super-polynomial decay)";
        } else {
            const double m = static_cast<double>(lx.size());
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            for (std::size_t i = 0; i < lx.size(); ++i) {
                sx += lx[i];
                sy += ly[i];
                sxx += lx[i] * lx[i];
                sxy += lx[i] * ly[i];
            }
            rep.tail_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
            tail_ok = rep.tail_slope <= -(n + 1) + 0.1;
            rep.tail_note = "least-squares slope of log|g'| on [8, 64]";
        }
    }
    rep.h3 = m2.finite && tail_ok;

    rep.tcond_eps = {0.2, 0.1, 0.05, 0.025};
    for (double e : rep.tcond_eps) {
        KernelFamily fam{kernel, e};
        double sup = 0.0;
        for (int i = 1; i < 400; ++i) {
            const double r = 0.5 + 1.5 * i / 400.0;
            sup = std::max(sup, derived_kernel(fam, Derived::eta_eps, r));
        }
        rep.tcond_sup.push_back(sup);
    }
    rep.tcond_decreasing = true;
    bool nonincreasing = true;
    for (std::size_t i = 1; i < rep.tcond_sup.size(); ++i) {
        if (!(rep.tcond_sup[i] < rep.tcond_sup[i - 1])) rep.tcond_decreasing = false;
        if (rep.tcond_sup[i] > rep.tcond_sup[i - 1]) nonincreasing = false;
    }
    const double first = rep.tcond_sup.front(), last = rep.tcond_sup.back();
    rep.tcond_vanishing = nonincreasing && (last == 0.0 || last <= 1e-3 * first);
    return rep;
}

RadialKernel kernel_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("family")) throw ValidationError("kernel spec needs a 'family' field");
    const Family fam = family_from_name(j.at("family").get<std::string>());
    const int n = j.value("n", 2);
    KernelParams p;
    if (j.contains("params")) {
        const auto& q = j.at("params");
        p.radius = q.value("radius", p.radius);
        p.kappa = q.value("kappa", p.kappa);
        if (fam == Family::truncated_riesz)
            p.exponent = q.value("exponent", q.value("alpha", p.exponent));
        else
            p.alpha = q.value("alpha", p.alpha);
    }
    return build_kernel(fam, p, n);
}

nlohmann::json kernel_to_json(const RadialKernel& k) {
    nlohmann::json params = nlohmann::json::object();
    switch (k.family()) {
        case Family::compact_bump: params["radius"] = k.params().radius; break;
        case Family::truncated_riesz:
            params["radius"] = k.params().radius;
            params["exponent"] = k.params().exponent;
            break;
        case Family::bessel:
            params["kappa"] = k.params().kappa;
            params["alpha"] = k.params().alpha;
            break;
        default: break;
    }
    return {{"family", family_name(k.family())}, {"n", k.dimension()}, {"params", params},
            {"scale_factor", k.scale_factor()}};
}

nlohmann::json hypothesis_report_to_json(const HypothesisReport& r) {
    nlohmann::json j;
    j["h1"] = r.h1;
    j["h1_min_sample"] = r.h1_min_sample;
    j["h2"] = r.h2;
    j["first_moment"] = r.first_moment;
    j["first_moment_target"] = r.first_moment_target;
    j["h3"] = r.h3;
    j["second_moment"] = r.second_moment_finite ? nlohmann::json(r.second_moment) : nlohmann::json("inf");
    j["tail_slope"] = std::isnan(r.tail_slope) ? nlohmann::json(nullptr) : nlohmann::json(r.tail_slope);
    j["tail_note"] = r.tail_note;
    j["tcond_eps"] = r.tcond_eps;
    j["tcond_sup"] = r.tcond_sup;
    j["tcond_decreasing"] = r.tcond_decreasing;
    j["tcond_vanishing"] = r.tcond_vanishing;
    return j;
}

}  // namespace dropshape
