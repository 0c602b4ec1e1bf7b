#include "dropshape/onedim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dropshape/errors.hpp"
#include "dropshape/quadrature.hpp"

namespace dropshape {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kTangencyTol = 1e-8;
}  // namespace

IntervalUnion::IntervalUnion(std::vector<std::pair<double, double>> pieces) {
    std::erase_if(pieces, [](const auto& p) { return !(p.first < p.second); });
    std::sort(pieces.begin(), pieces.end());
    for (const auto& p : pieces) {
        if (!pieces_.empty() && p.first <= pieces_.back().second)
            pieces_.back().second = std::max(pieces_.back().second, p.second);
        else
            pieces_.push_back(p);
    }
}

bool IntervalUnion::bounded() const {
    return pieces_.empty() || (std::isfinite(pieces_.front().first) && std::isfinite(pieces_.back().second));
}

int IntervalUnion::boundary_points() const {
    int n = 0;
    for (const auto& p : pieces_) n += std::isfinite(p.first) + std::isfinite(p.second);
    return n;
}

IntervalUnion IntervalUnion::hull() const {
    if (pieces_.empty()) return {};
    return IntervalUnion({{pieces_.front().first, pieces_.back().second}});
}

std::vector<std::pair<double, double>> IntervalUnion::complement() const {
    std::vector<std::pair<double, double>> out;
    double left = -kInf;
    for (const auto& p : pieces_) {
        if (left < p.first) out.push_back({left, p.first});
        left = p.second;
    }
    if (left < kInf) out.push_back({left, kInf});
    return out;
}

double tail_integral_J(const KernelFamily& fam, double d) {
    if (d < 0.0) throw ValidationError("tail_integral_J: d must be nonnegative");
    if (!std::isfinite(d)) return 0.0;
    const int n = fam.dimension();
    const RadialMomentTable& t = fam.base.moments();
    const double x = d / fam.eps;
    const double v = ball_volume(n - 1) * (t.tail(n, x) - x * t.tail(n - 1, x));
    return std::max(v, 0.0);
}

double tail_integral_J_quadrature(const KernelFamily& fam, double d) {
    if (d < 0.0) throw ValidationError("tail_integral_J: d must be nonnegative");
    auto f = [&](double tau) { return (tau - d) * derived_kernel(fam, Derived::rho_eps, tau); };
    const double L = fam.eps * fam.base.length_scale();
    const double sup = fam.eps * fam.base.support();
    if (d >= sup) return 0.0;
    std::vector<double> cuts{d};
    for (double b : fam.base.breakpoints())
        if (fam.eps * b > d) cuts.push_back(fam.eps * b);
    double sum = 0.0;
    if (d == 0.0) {
        const double first = std::min(L, cuts.size() > 1 ? cuts[1] : L);
        sum += integrate_from_zero(f, first, 1e-13).value;
        cuts[0] = first;
    }
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) sum += integrate(f, cuts[i], cuts[i + 1], 1e-13).value;
    if (std::isfinite(sup)) {
        if (cuts.back() < sup) sum += integrate(f, cuts.back(), sup, 1e-13).value;
    } else {
        sum += integrate_to_infinity(f, cuts.back(), L, 1e-13).value;
    }
    return sum;
}

double crit1_closed_form(const IntervalUnion& J, const KernelFamily& fam) {
    if (J.empty()) return 0.0;
    auto Jf = [&](double d) { return tail_integral_J(fam, d); };
    const auto C = J.complement();
    double total = 0.0;
    for (const auto& c : C)
        if (std::isfinite(c.first) && std::isfinite(c.second)) total += 4.0 * Jf(c.second - c.first);
    // Cross terms between complement components i < j (each counted twice in the i != j sum).
    for (std::size_t i = 0; i < C.size(); ++i)
        for (std::size_t j = i + 1; j < C.size(); ++j) {
            const double p = C[i].first, q = C[i].second, r = C[j].first, w = C[j].second;
            const double cross_term = Jf(r - q) - Jf(r - p) - Jf(w - q) + Jf(w - p);
            total += 4.0 * cross_term;
        }
    return total;
}

double per1_closed_form(const IntervalUnion& J, const KernelFamily& fam) {
    return J.boundary_points() - crit1_closed_form(J, fam);
}

double per1_bruteforce(const IntervalUnion& J, const KernelFamily& fam, double rel_tol) {
    if (!J.bounded()) throw ValidationError("per1_bruteforce needs a bounded union");
    if (J.empty()) return 0.0;
    auto rho = [&](double tau) {
        const double a = std::abs(tau);
        return a > 0.0 ? derived_kernel(fam, Derived::rho_eps, a) : 0.0;
    };
    const auto C = J.complement();
    const double L = fam.eps * fam.base.length_scale();
    // inner(s) = int over J^c of rho(t - s) dt for s inside J.
    auto inner = [&](double s) {
        double v = 0.0;
        for (const auto& c : C) {
            auto f = [&](double t) { return rho(t - s); };
            if (!std::isfinite(c.first)) {
                // int_{-inf}^{c.second} rho(t - s) dt = int_{s - c.second}^{inf} rho
                v += integrate_to_infinity([&](double u) { return rho(u); }, s - c.second, L, rel_tol).value;
            } else if (!std::isfinite(c.second)) {
                v += integrate_to_infinity([&](double u) { return rho(u); }, c.first - s, L, rel_tol).value;
            } else {
                v += integrate(f, c.first, c.second, rel_tol).value;
            }
        }
        return v;
    };
    double total = 0.0;
    for (const auto& p : J.pieces()) total += integrate(inner, p.first, p.second, rel_tol).value;
    return 2.0 * total;
}

// ---------------------------------------------------------------------------------------------

DirectionSlicer::DirectionSlicer(const StarShape2D& E, Vec2 sigma) : E_(&E) {
    const double nrm = sigma.norm();
    if (!(nrm > 0.0)) throw ValidationError("slice direction must be nonzero");
    sigma_ = sigma * (1.0 / nrm);
    perp_ = {-sigma_.y, sigma_.x};
    base_ = dot(E.center(), perp_);

    auto hpp = [&](double psi) {
        const RadialSample r = E_->eval(psi);
        const double c = std::cos(psi), s = std::sin(psi);
        const double er = c * perp_.x + s * perp_.y, et = -s * perp_.x + c * perp_.y;
        return (r.d2R - r.R) * er + 2.0 * r.dR * et;
    };
    const int N = std::max(64, 16 * (E.max_mode() + 1));
    std::vector<double> crit;
    double prev = height_derivative(0.0);
    for (int i = 1; i <= N; ++i) {
        const double a = kTwoPi * (i - 1) / N, b = kTwoPi * i / N;
        const double cur = height_derivative(b);
        if ((prev > 0.0) != (cur > 0.0)) {
            double lo = a, hi = b, flo = prev;
            double x = 0.5 * (lo + hi);
            for (int it = 0; it < 80; ++it) {
                const double fx = height_derivative(x);
                if ((fx > 0.0) == (flo > 0.0)) {
                    lo = x;
                    flo = fx;
                } else {
                    hi = x;
                }
                const double d2 = hpp(x);
                double nx = d2 != 0.0 ? x - fx / d2 : 0.5 * (lo + hi);
                if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
                if (std::abs(nx - x) < 1e-15 || hi - lo < 1e-15) {
                    x = nx;
                    break;
                }
                x = nx;
            }
            crit.push_back(std::fmod(x, kTwoPi));
        }
        prev = cur;
    }
    std::sort(crit.begin(), crit.end());
    if (crit.size() < 2) throw NumericError("slicer: boundary height has fewer than two critical points");
    hmin_ = kInf;
    hmax_ = -kInf;
    for (std::size_t i = 0; i < crit.size(); ++i) {
        const double p0 = crit[i];
        const double p1 = i + 1 < crit.size() ? crit[i + 1] : crit[0] + kTwoPi;
        Arc arc{p0, p1, height(p0), height(p1)};
        hmin_ = std::min(hmin_, arc.h0);
        hmax_ = std::max(hmax_, arc.h0);
        arcs_.push_back(arc);
    }
}

double DirectionSlicer::height(double psi) const {
    return E_->R(psi) * (std::cos(psi) * perp_.x + std::sin(psi) * perp_.y);
}

double DirectionSlicer::height_derivative(double psi) const {
    return height_and_derivative(psi).second;
}

std::pair<double, double> DirectionSlicer::height_and_derivative(double psi) const {
    const RadialSample r = E_->eval(psi);
    const double c = std::cos(psi), s = std::sin(psi);
    const double along = c * perp_.x + s * perp_.y;
    return {r.R * along, r.dR * along + r.R * (-s * perp_.x + c * perp_.y)};
}

bool DirectionSlicer::inside(Vec2 p) const {
    const Vec2 q = p - E_->center();
    return q.norm() < E_->R(std::atan2(q.y, q.x));
}

double DirectionSlicer::root_on_arc(const Arc& a, double v, double guess) const {
    const bool increasing = a.h1 > a.h0;
    double lo = a.psi0, hi = a.psi1;
    double x = (guess > lo && guess < hi) ? guess : lo + (hi - lo) * (v - a.h0) / (a.h1 - a.h0);
    const double tol = 1e-15 * (std::abs(hmax_) + std::abs(hmin_));
    for (int it = 0; it < 100; ++it) {
        const auto [h, d] = height_and_derivative(x);
        const double f = h - v;
        if (std::abs(f) <= tol) break;
        if ((f < 0.0) == increasing)
            lo = x;
        else
            hi = x;
        double nx = d != 0.0 ? x - f / d : 0.5 * (lo + hi);
        if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
        const double step = std::abs(nx - x);
        x = nx;
        if (step < 1e-14 || hi - lo < 1e-14) break;
    }
    return x;
}

DirectionSlicer::Slice DirectionSlicer::slice_impl(double y, std::vector<double>* guesses) const {
    Slice out;
    const double v = y - base_;
    if (!(v > hmin_ && v < hmax_)) return out;
    std::vector<double> s;
    const Vec2 c = E_->center();
    for (std::size_t ai = 0; ai < arcs_.size(); ++ai) {
        const Arc& a = arcs_[ai];
        const double lo_h = std::min(a.h0, a.h1), hi_h = std::max(a.h0, a.h1);
        if (!(v > lo_h && v < hi_h)) continue;
        const double x = root_on_arc(a, v, guesses ? (*guesses)[ai] : -1e300);
        if (guesses) (*guesses)[ai] = x;
        const double r = E_->R(x);
        s.push_back(dot(c, sigma_) + r * (std::cos(x) * sigma_.x + std::sin(x) * sigma_.y));
    }
    std::sort(s.begin(), s.end());
    const Vec2 foot = perp_ * y;
    std::vector<std::pair<double, double>> raw;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const double mid = 0.5 * (s[i] + s[i + 1]);
        if (!inside(foot + sigma_ * mid)) continue;
        if (!raw.empty() && raw.back().second == s[i])
            raw.back().second = s[i + 1];
        else
            raw.push_back({s[i], s[i + 1]});
    }
    // Near-tangent structure: drop vanishing intervals and close vanishing gaps.
    for (const auto& iv : raw) {
        if (iv.second - iv.first < kTangencyTol) {
            out.tangency_dropped = true;
            continue;
        }
        if (!out.intervals.empty() && iv.first - out.intervals.back().second < kTangencyTol) {
            out.tangency_dropped = true;
            out.intervals.back().second = iv.second;
        } else {
            out.intervals.push_back(iv);
        }
    }
    return out;
}

DirectionSlicer::Slice DirectionSlicer::slice(double y) const { return slice_impl(y, nullptr); }

std::vector<DirectionSlicer::Slice> DirectionSlicer::slice_all(const std::vector<double>& ys) const {
    std::vector<double> guesses(arcs_.size(), -1e300);
    std::vector<Slice> out;
    out.reserve(ys.size());
    for (double y : ys) out.push_back(slice_impl(y, &guesses));
    return out;
}

SliceResult slice_star_shape(const StarShape2D& E, Vec2 sigma, double y) {
    DirectionSlicer d(E, sigma);
    DirectionSlicer::Slice s = d.slice(y);
    return {IntervalUnion(s.intervals), s.tangency_dropped};
}

}  // namespace dropshape
