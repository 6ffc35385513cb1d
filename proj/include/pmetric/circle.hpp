#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pmetric/model.hpp"
#include "pmetric/roots.hpp"

namespace pmetric {

// ---------------------------------------------------------------------------
// Circle arithmetic. Points are lift values; reduction mod 1 happens only here.

inline double frac(double x) { return x - std::floor(x); }

inline double circle_distance(double x, double y) {
    const double d = frac(x - y);
    return std::min(d, 1.0 - d);
}

/// Length of the intersection of two arcs given as lift intervals of length <= 1.
inline double arc_overlap(const Interval& a, const Interval& b) {
    const double shift = std::floor(a.lo() - b.lo());
    double total = 0.0;
    for (double n = shift - 1.0; n <= shift + 2.0; n += 1.0) {
        total += std::max(0.0, std::min(a.hi(), b.hi() + n) - std::max(a.lo(), b.lo() + n));
    }
    return total;
}

/// Arc with lo reduced into [0, 1).
inline Interval normalized_arc(const Interval& a) {
    const double n = std::floor(a.lo());
    return Interval(a.lo() - n, a.hi() - n);
}

/// True when the open arc contains the circle point x.
inline bool arc_contains(const Interval& a, double x) {
    const double t = a.lo() + frac(x - a.lo());
    return t > a.lo() && t < a.hi();
}

/// True when `inner` lies in `outer` up to tol.
inline bool arc_inside(const Interval& inner, const Interval& outer, double tol = 1e-12) {
    const double n = std::round((outer.lo() + outer.hi() - inner.lo() - inner.hi()) / 2.0);
    return inner.lo() + n >= outer.lo() - tol && inner.hi() + n <= outer.hi() + tol;
}

/// Distance from the arc to the circle point x; 0 when x is inside or an endpoint.
inline double arc_distance(const Interval& a, double x) {
    if (arc_contains(a, x)) return 0.0;
    return std::min(circle_distance(a.lo(), x), circle_distance(a.hi(), x));
}

// ---------------------------------------------------------------------------
// Lifts

/// Degree-one lift F(x+1) = F(x) + 1 of a circle homeomorphism with the
/// critical point (if any) at 0.
class CircleMapLift {
public:
    struct Callbacks {
        std::function<double(double)> value;
        std::function<Jet(double)> jet;
        std::function<double(double, double)> increment;
    };

    CircleMapLift(std::string family, double parameter, Callbacks cb, double critical_exponent, Interval close_arc,
                  Interval remote_arc, double remote_min_derivative)
        : family_(std::move(family)), parameter_(parameter), cb_(std::make_shared<Callbacks>(std::move(cb))),
          critical_exponent_(critical_exponent), close_arc_(close_arc), remote_arc_(remote_arc),
          remote_min_derivative_(remote_min_derivative) {}

    [[nodiscard]] const std::string& family() const noexcept { return family_; }
    [[nodiscard]] double parameter() const noexcept { return parameter_; }
    [[nodiscard]] double critical_exponent() const noexcept { return critical_exponent_; }
    [[nodiscard]] bool has_critical_point() const noexcept { return critical_exponent_ > 1.0; }
    [[nodiscard]] const Interval& close_arc() const noexcept { return close_arc_; }
    [[nodiscard]] const Interval& remote_arc() const noexcept { return remote_arc_; }
    [[nodiscard]] double remote_min_derivative() const noexcept { return remote_min_derivative_; }

    [[nodiscard]] double operator()(double x) const { return cb_->value(x); }
    [[nodiscard]] Jet jet(double x) const { return cb_->jet(x); }
    [[nodiscard]] double derivative(double x) const { return cb_->jet(x).d1; }
    [[nodiscard]] double increment(double x, double h) const { return cb_->increment(x, h); }

    [[nodiscard]] double inverse(double y) const {
        const double guess = y - (cb_->value(0.0));
        double lo = guess - 1.0, hi = guess + 1.0;
        while (cb_->value(lo) > y) lo -= 1.0;
        while (cb_->value(hi) < y) hi += 1.0;
        return newton_bisect(cb_->value, [this](double x) { return derivative(x); }, y, lo, hi, guess);
    }

    /// F^n(x) for n >= 0, F^{-|n|}(x) otherwise.
    [[nodiscard]] double iterate(double x, long long n) const {
        for (long long i = 0; i < n; ++i) x = cb_->value(x);
        for (long long i = 0; i < -n; ++i) x = inverse(x);
        return x;
    }

    /// max |F(x+1) - F(x) - 1| on a grid.
    [[nodiscard]] double degree_defect(std::size_t points = 257) const {
        double worst = 0.0;
        for (double x : linspace(-1.0, 1.0, points)) worst = std::max(worst, std::abs(cb_->value(x + 1.0) - cb_->value(x) - 1.0));
        return worst;
    }

    /// F restricted to the lift interval J, shifted by an integer so the image starts in [0, 1).
    [[nodiscard]] MapDescriptor restricted(const Interval& J) const;
    /// Image of the lift interval J with the same integer shift as restricted(J).
    [[nodiscard]] Interval image_arc(const Interval& J) const {
        const double y = cb_->value(J.lo());
        const double n = std::floor(y);
        return Interval(y - n, y - n + cb_->increment(J.lo(), J.length()));
    }

private:
    std::string family_;
    double parameter_;
    std::shared_ptr<const Callbacks> cb_;
    double critical_exponent_;
    Interval close_arc_;
    Interval remote_arc_;
    double remote_min_derivative_;
};

namespace detail {

/// x -> F(x) - shift on a lift interval, with Newton inverses.
class CircleStageNode final : public MapNode {
public:
    CircleStageNode(CircleMapLift f, Interval domain, Interval image, double shift)
        : MapNode(domain, image), f_(std::move(f)), shift_(shift) {}

    [[nodiscard]] MapKind kind() const noexcept override { return MapKind::SmoothSampled; }
    [[nodiscard]] double value(double x) const override { return f_(x) - shift_; }
    [[nodiscard]] Jet jet(double x) const override {
        Jet j = f_.jet(x);
        j.v -= shift_;
        return j;
    }
    [[nodiscard]] double increment(double x, double h) const override { return f_.increment(x, h); }
    [[nodiscard]] double inverse(double y) const override {
        if (y <= image().lo()) return domain().lo();
        if (y >= image().hi()) return domain().hi();
        const double guess = domain().lo() + (y - image().lo()) / image().length() * domain().length();
        return newton_bisect([this](double x) { return value(x); }, [this](double x) { return f_.derivative(x); }, y,
                             domain().lo(), domain().hi(), guess);
    }
    [[nodiscard]] double inverse_increment(double y, double k) const override {
        if (k == 0.0) return 0.0;
        const double x0 = inverse(y);
        const double d0 = f_.derivative(x0);
        const double guess = d0 > 0.0 ? k / d0 : 0.0;
        auto inc = [this, x0](double h) { return f_.increment(x0, h); };
        auto dinc = [this, x0](double h) { return f_.derivative(x0 + h); };
        if (k > 0.0) return newton_bisect(inc, dinc, k, 0.0, domain().hi() - x0 + 1e-9 * domain().length(), guess);
        return newton_bisect(inc, dinc, k, domain().lo() - x0 - 1e-9 * domain().length(), 0.0, guess);
    }

private:
    CircleMapLift f_;
    double shift_;
};

}  // namespace detail

inline MapDescriptor CircleMapLift::restricted(const Interval& J) const {
    const double y = cb_->value(J.lo());
    const double n = std::floor(y);
    return MapDescriptor(std::make_shared<detail::CircleStageNode>(*this, J, image_arc(J), n));
}

inline CircleMapLift rigid_rotation(double omega) {
    CircleMapLift::Callbacks cb;
    cb.value = [omega](double x) { return x + omega; };
    cb.jet = [omega](double x) { return Jet{x + omega, 1.0, 0.0, 0.0}; };
    cb.increment = [](double, double h) { return h; };
    return CircleMapLift("rigid", omega, std::move(cb), 1.0, Interval(-0.25, 0.25), Interval(0.2, 0.8), 1.0);
}

/// x + omega - sin(2 pi x) / (2 pi): cubic critical point at 0, S < 0 everywhere.
inline CircleMapLift arnold_critical(double omega) {
    constexpr double tau = 2.0 * std::numbers::pi;
    CircleMapLift::Callbacks cb;
    cb.value = [omega](double x) { return x + omega - std::sin(tau * x) / tau; };
    cb.jet = [omega](double x) {
        const double s = std::sin(tau * x), c = std::cos(tau * x);
        return Jet{x + omega - s / tau, 1.0 - c, tau * s, tau * tau * c};
    };
    cb.increment = [](double x, double h) {
        return h - std::cos(tau * x + std::numbers::pi * h) * std::sin(std::numbers::pi * h) / std::numbers::pi;
    };
    return CircleMapLift("arnold", omega, std::move(cb), 3.0, Interval(-0.25, 0.25), Interval(0.2, 0.8),
                         1.0 - std::cos(tau * 0.2));
}

/// Arnold lift with an asymmetric factor: F' = (1 - cos 2 pi x)(1 + eps sin 2 pi x), |eps| < 1.
inline CircleMapLift asymmetric_arnold(double omega, double eps) {
    if (!(std::abs(eps) < 1.0)) throw DomainError("asymmetric Arnold lift needs |eps| < 1");
    constexpr double tau = 2.0 * std::numbers::pi;
    constexpr double pi = std::numbers::pi;
    CircleMapLift::Callbacks cb;
    cb.value = [omega, eps](double x) {
        const double s = std::sin(tau * x), c = std::cos(tau * x);
        return x + omega - s / tau + eps * (-c / tau - s * s / (2.0 * tau)) + eps / tau;
    };
    cb.jet = [omega, eps](double x) {
        const double s = std::sin(tau * x), c = std::cos(tau * x);
        const double v = x + omega - s / tau + eps * (-c / tau - s * s / (2.0 * tau)) + eps / tau;
        return Jet{v, (1.0 - c) * (1.0 + eps * s), tau * (s + eps * s * s + eps * c - eps * c * c),
                   tau * tau * (c + 4.0 * eps * s * c - eps * s)};
    };
    cb.increment = [eps](double x, double h) {
        const double A = tau * x + pi * h;
        const double sh = std::sin(pi * h);
        return h - std::cos(A) * sh / pi + eps * (std::sin(A) * sh / pi - std::sin(2.0 * A) * std::sin(tau * h) / (2.0 * tau));
    };
    const double d = (1.0 - std::cos(tau * 0.2)) * (1.0 - std::abs(eps));
    return CircleMapLift("asymmetric_arnold", omega, std::move(cb), 3.0, Interval(-0.25, 0.25), Interval(0.2, 0.8), d);
}

using CircleFamily = std::function<CircleMapLift(double)>;

// ---------------------------------------------------------------------------
// Continued fractions

/// rho = 1/(a_0 + 1/(a_1 + ...)); q_{-1} = 0, q_0 = 1, q_{n+1} = a_n q_n + q_{n-1}, same for p
/// with p_{-1} = 1, p_0 = 0. Vectors p, q hold indices 0..depth.
struct ContinuedFraction {
    std::vector<long long> a;
    std::vector<long long> p;
    std::vector<long long> q;

    static ContinuedFraction from_quotients(std::vector<long long> quotients) {
        ContinuedFraction cf;
        cf.a = std::move(quotients);
        long long pm = 1, qm = 0, pn = 0, qn = 1;
        cf.p.push_back(pn);
        cf.q.push_back(qn);
        for (long long an : cf.a) {
            if (an < 1) throw DomainError("partial quotients must be positive");
            const long long pp = an * pn + pm, qq = an * qn + qm;
            pm = pn, qm = qn, pn = pp, qn = qq;
            cf.p.push_back(pn);
            cf.q.push_back(qn);
        }
        return cf;
    }

    [[nodiscard]] std::size_t depth() const noexcept { return a.size(); }
    [[nodiscard]] double value() const { return static_cast<double>(p.back()) / static_cast<double>(q.back()); }
};

inline ContinuedFraction constant_quotients(long long value, std::size_t depth) {
    return ContinuedFraction::from_quotients(std::vector<long long>(depth, value));
}

struct RotationResult {
    double rho = 0.0;
    ContinuedFraction cf;
    /// |F^{q_n}(0) - p_n| for n = 0..depth.
    std::vector<double> closest_returns;
    bool returns_decreasing = false;
};

namespace detail {

enum class SbMove { Left, Right };

/// Stern-Brocot walk driven by sign(F^q(0) - p); `decide` receives (p, q, F^q(0) - p)
/// and returns false to stop.
template <class Decide>
void stern_brocot_walk(const CircleMapLift& f, long long max_q, Decide&& decide) {
    long long pl = 0, ql = 1, pr = 1, qr = 0;
    std::vector<double> orbit{0.0};
    while (true) {
        const long long p = pl + pr, q = ql + qr;
        if (q > max_q) throw DepthError("Stern-Brocot walk exceeded q = " + std::to_string(max_q));
        while (static_cast<long long>(orbit.size()) <= q) orbit.push_back(f(orbit.back()));
        const double v = orbit[static_cast<std::size_t>(q)] - static_cast<double>(p);
        const std::optional<SbMove> move = decide(p, q, v);
        if (!move) return;
        if (*move == SbMove::Right) {
            pl = p, ql = q;
        } else {
            pr = p, qr = q;
        }
    }
}

}  // namespace detail

/// Partial quotients a_0..a_{depth-1} from the ordering of the critical orbit against p/q.
inline RotationResult rotation_number(const CircleMapLift& f, std::size_t depth, double tol = 1e-12,
                                      long long max_q = 10000000) {
    const double f0 = f(0.0);
    if (!(f0 > 0.0 && f0 < 1.0)) throw DomainError("rotation_number expects 0 < F(0) < 1");
    std::vector<long long> runs;
    std::optional<detail::SbMove> current;
    long long run = 0;
    detail::stern_brocot_walk(f, max_q, [&](long long p, long long q, double v) -> std::optional<detail::SbMove> {
        if (std::abs(v) < tol) throw RationalRotationError(p, q);
        const detail::SbMove move = v > 0.0 ? detail::SbMove::Right : detail::SbMove::Left;
        if (current && *current == move) {
            ++run;
        } else {
            if (current) runs.push_back(run);
            if (runs.size() == depth) return std::nullopt;
            current = move;
            run = 1;
        }
        return move;
    });
    RotationResult r;
    r.cf = ContinuedFraction::from_quotients(runs);
    r.rho = r.cf.value();
    double x = 0.0;
    long long t = 0;
    for (std::size_t n = 0; n < r.cf.q.size(); ++n) {
        for (; t < r.cf.q[n]; ++t) x = f(x);
        r.closest_returns.push_back(std::abs(x - static_cast<double>(r.cf.p[n])));
    }
    r.returns_decreasing = true;
    for (std::size_t n = 2; n < r.closest_returns.size(); ++n) {
        if (!(r.closest_returns[n] < r.closest_returns[n - 1])) r.returns_decreasing = false;
    }
    return r;
}

/// Parameter in [lo, hi] whose rotation number is [prefix..., 1, 1, ...], by bisection.
inline double find_parameter(const CircleFamily& family, const std::vector<long long>& prefix, double lo, double hi,
                             double tol = 1e-14, long long max_q = 200000) {
    // Target direction of Stern-Brocot step s: runs alternate starting with Left.
    std::vector<long long> runs = prefix;
    auto target_move = [&runs](std::size_t step) {
        std::size_t r = 0;
        long long remaining = static_cast<long long>(step);
        while (true) {
            const long long len = r < runs.size() ? runs[r] : 1;
            if (remaining < len) break;
            remaining -= len;
            ++r;
        }
        return r % 2 == 0 ? detail::SbMove::Left : detail::SbMove::Right;
    };
    // -1: rho < target, +1: rho > target, 0: undecided within max_q.
    auto compare = [&](double omega) {
        int verdict = 0;
        std::size_t step = 0;
        try {
            detail::stern_brocot_walk(family(omega), max_q,
                                      [&](long long, long long, double v) -> std::optional<detail::SbMove> {
                                          const detail::SbMove t = target_move(step++);
                                          if (std::abs(v) < 1e-15) {
                                              verdict = t == detail::SbMove::Right ? -1 : 1;
                                              return std::nullopt;
                                          }
                                          const detail::SbMove m = v > 0.0 ? detail::SbMove::Right : detail::SbMove::Left;
                                          if (m != t) {
                                              verdict = m == detail::SbMove::Left ? -1 : 1;
                                              return std::nullopt;
                                          }
                                          return m;
                                      });
        } catch (const DepthError&) {
            verdict = 0;
        }
        return verdict;
    };
    if (compare(lo) >= 0 || compare(hi) <= 0) throw ConvergenceError("target rotation number not bracketed by the parameter range");
    while (hi - lo > tol) {
        const double mid = lo + (hi - lo) / 2.0;
        if (mid <= lo || mid >= hi) break;
        const int c = compare(mid);
        if (c < 0) {
            lo = mid;
        } else if (c > 0) {
            hi = mid;
        } else {
            return mid;
        }
    }
    return lo + (hi - lo) / 2.0;
}

// ---------------------------------------------------------------------------
// Critical orbit with its combinatorics

class CircleSystem {
public:
    CircleSystem(CircleMapLift f, std::size_t depth) : f_(std::move(f)) {
        rotation_ = rotation_number(f_, depth);
        const auto n = static_cast<std::size_t>(q(static_cast<int>(depth)) + q(static_cast<int>(depth) - 1)) + 1;
        orbit_.reserve(n);
        orbit_.push_back(0.0);
        while (orbit_.size() < n) orbit_.push_back(f_(orbit_.back()));
    }

    [[nodiscard]] const CircleMapLift& map() const noexcept { return f_; }
    [[nodiscard]] const ContinuedFraction& cf() const noexcept { return rotation_.cf; }
    [[nodiscard]] const RotationResult& rotation() const noexcept { return rotation_; }
    [[nodiscard]] int depth() const noexcept { return static_cast<int>(rotation_.cf.depth()); }

    [[nodiscard]] long long q(int n) const {
        if (n == -1) return 0;
        check(n);
        return rotation_.cf.q[static_cast<std::size_t>(n)];
    }
    [[nodiscard]] long long p(int n) const {
        if (n == -1) return 1;
        check(n);
        return rotation_.cf.p[static_cast<std::size_t>(n)];
    }
    [[nodiscard]] long long a(int n) const {
        if (n < 0 || n >= depth()) throw DepthError("partial quotient index " + std::to_string(n) + " not computed");
        return rotation_.cf.a[static_cast<std::size_t>(n)];
    }

    /// x_t = F^t(0) on the lift.
    [[nodiscard]] double orbit(long long t) const {
        if (t < 0 || t >= static_cast<long long>(orbit_.size())) throw DepthError("orbit index beyond computed depth");
        return orbit_[static_cast<std::size_t>(t)];
    }

    /// I_n: arc between 0 and x_{q_n} - p_n.
    [[nodiscard]] Interval closest_return_arc(int n) const {
        const double x = orbit(q(n)) - static_cast<double>(p(n));
        return x > 0.0 ? Interval(0.0, x) : Interval(x, 0.0);
    }

private:
    void check(int n) const {
        if (n < 0 || n > depth()) throw DepthError("continued fraction index " + std::to_string(n) + " not computed");
    }

    CircleMapLift f_;
    RotationResult rotation_;
    std::vector<double> orbit_;
};

// ---------------------------------------------------------------------------
// Dynamical partitions

enum class ElementKind { Lengthy, Short };

inline const char* to_string(ElementKind k) noexcept { return k == ElementKind::Lengthy ? "lengthy" : "short"; }

struct PartitionElement {
    /// Lift interval with lo in [0, 1).
    Interval arc;
    ElementKind kind = ElementKind::Lengthy;
    long long orbit_index = 0;
};

struct DynamicalPartition {
    int k = 0;
    /// Sorted by arc.lo.
    std::vector<PartitionElement> elements;
    /// max(|sum of lengths - 1|, largest gap or overlap between neighbours).
    double tiling_defect = 0.0;
    std::size_t lengthy_count = 0;
    std::size_t short_count = 0;

};

namespace detail {

inline double tiling_defect(const std::vector<PartitionElement>& el) {
    double total = 0.0, worst = 0.0;
    for (std::size_t i = 0; i < el.size(); ++i) {
        total += el[i].arc.length();
        const double next_lo = i + 1 < el.size() ? el[i + 1].arc.lo() : el.front().arc.lo() + 1.0;
        worst = std::max(worst, std::abs(next_lo - el[i].arc.hi()));
    }
    return std::max(worst, std::abs(total - 1.0));
}

inline PartitionElement orbit_element(const CircleSystem& sys, long long i, int n, ElementKind kind) {
    const double u = sys.orbit(i);
    const double v = sys.orbit(i + sys.q(n)) - static_cast<double>(sys.p(n));
    const double shift = std::floor(std::min(u, v));
    return {Interval(std::min(u, v) - shift, std::max(u, v) - shift), kind, i};
}

}  // namespace detail

/// D_k, k >= 1: q_k images of I_{k-1} (lengthy) and q_{k-1} images of I_k (short).
inline DynamicalPartition dynamical_partition(const CircleSystem& sys, int k, double tol = 1e-8) {
    if (k < 1 || k > sys.depth()) throw DepthError("partition order " + std::to_string(k) + " outside 1.." + std::to_string(sys.depth()));
    DynamicalPartition d;
    d.k = k;
    for (long long i = 0; i < sys.q(k); ++i) d.elements.push_back(detail::orbit_element(sys, i, k - 1, ElementKind::Lengthy));
    for (long long i = 0; i < sys.q(k - 1); ++i) d.elements.push_back(detail::orbit_element(sys, i, k, ElementKind::Short));
    d.lengthy_count = static_cast<std::size_t>(sys.q(k));
    d.short_count = static_cast<std::size_t>(sys.q(k - 1));
    std::sort(d.elements.begin(), d.elements.end(),
              [](const PartitionElement& x, const PartitionElement& y) { return x.arc.lo() < y.arc.lo(); });
    d.tiling_defect = detail::tiling_defect(d.elements);
    if (!(d.tiling_defect < tol)) {
        std::ostringstream os;
        os << "partition of order " << k << " does not tile the circle (defect " << d.tiling_defect << ")";
        throw DepthError(os.str());
    }
    return d;
}

/// Excess total length when lengthy elements are counted as a_k q_k images instead of q_k.
inline double literal_count_excess(const CircleSystem& sys, int k) {
    const long long count = sys.a(k) * sys.q(k);
    double total = 0.0;
    for (long long i = 0; i < count; ++i) total += detail::orbit_element(sys, i, k - 1, ElementKind::Lengthy).arc.length();
    for (long long i = 0; i < sys.q(k - 1); ++i) total += detail::orbit_element(sys, i, k, ElementKind::Short).arc.length();
    return total - 1.0;
}

struct RefinementReport {
    bool refines = true;
    /// For every lengthy element of the coarse partition: number of lengthy and short children.
    std::vector<std::pair<std::size_t, std::size_t>> lengthy_children;
    /// Every short element of the coarse partition reappears as a lengthy element of the fine one.
    bool short_promoted = true;
};

/// Checks that `fine` refines `coarse` and records how coarse elements split.
inline RefinementReport check_refinement(const DynamicalPartition& coarse, const DynamicalPartition& fine,
                                         double tol = 1e-10) {
    RefinementReport r;
    std::vector<std::pair<std::size_t, std::size_t>> children(coarse.elements.size());
    for (const auto& e : fine.elements) {
        // Coarse elements are sorted by lo; the parent is the last one starting at or before e.
        auto it = std::upper_bound(coarse.elements.begin(), coarse.elements.end(), e.arc.lo() + tol,
                                   [](double x, const PartitionElement& c) { return x < c.arc.lo(); });
        const std::size_t idx = it == coarse.elements.begin() ? coarse.elements.size() - 1
                                                               : static_cast<std::size_t>(it - coarse.elements.begin()) - 1;
        if (!arc_inside(e.arc, coarse.elements[idx].arc, tol)) {
            r.refines = false;
            continue;
        }
        (e.kind == ElementKind::Lengthy ? children[idx].first : children[idx].second)++;
    }
    for (std::size_t i = 0; i < coarse.elements.size(); ++i) {
        const auto& c = coarse.elements[i];
        if (c.kind == ElementKind::Lengthy) {
            r.lengthy_children.push_back(children[i]);
            continue;
        }
        const bool found = std::any_of(fine.elements.begin(), fine.elements.end(), [&](const PartitionElement& e) {
            return e.kind == ElementKind::Lengthy && e.orbit_index == c.orbit_index && e.arc.lo() == c.arc.lo() &&
                   e.arc.hi() == c.arc.hi();
        });
        if (!found) r.short_promoted = false;
    }
    return r;
}

struct BoundedGeometry {
    /// Largest ratio of lengths of two adjacent elements of D_k.
    double adjacent_ratio = 0.0;
    /// Largest ratio of an element of D_k to the extreme elements of D_{k+1} inside it.
    double extreme_ratio = 0.0;
};

inline BoundedGeometry bounded_geometry(const DynamicalPartition& coarse, const DynamicalPartition& fine) {
    BoundedGeometry g;
    const auto& el = coarse.elements;
    for (std::size_t i = 0; i < el.size(); ++i) {
        const double a = el[i].arc.length(), b = el[(i + 1) % el.size()].arc.length();
        g.adjacent_ratio = std::max({g.adjacent_ratio, a / b, b / a});
        double first = 0.0, last = 0.0, first_lo = 2.0, last_hi = -1.0;
        for (const auto& e : fine.elements) {
            if (!arc_inside(e.arc, el[i].arc, 1e-10)) continue;
            const double n = std::round((el[i].arc.lo() + el[i].arc.hi() - e.arc.lo() - e.arc.hi()) / 2.0);
            if (e.arc.lo() + n < first_lo) first_lo = e.arc.lo() + n, first = e.arc.length();
            if (e.arc.hi() + n > last_hi) last_hi = e.arc.hi() + n, last = e.arc.length();
        }
        if (first > 0.0) g.extreme_ratio = std::max({g.extreme_ratio, a / first, a / last});
    }
    return g;
}

// ---------------------------------------------------------------------------
// Fineness, symmetric neighbourhoods, coarseness

namespace detail {

/// True when f^{q_i}(J) meets J, with J a proper arc.
inline bool return_meets(const CircleMapLift& f, const Interval& J, long long qi) {
    double a = J.lo();
    double len = J.length();
    for (long long s = 0; s < qi; ++s) {
        len = f.increment(a, len);
        a = f(a);
    }
    if (len >= 1.0) return true;
    const double n = std::floor(J.lo() - (a + len)) + 1.0;  // smallest integer with a + len + n > J.lo
    return a + n < J.hi();
}

}  // namespace detail

/// j = max{i : f^{q_i}(J) misses J} + 1, computed as the first i whose image meets J.
inline int fineness_order(const CircleSystem& sys, const Interval& J) {
    if (!(J.length() < 1.0)) throw DomainError("fineness needs a proper arc");
    for (int i = 0; i <= sys.depth(); ++i) {
        if (detail::return_meets(sys.map(), J, sys.q(i))) return i;
    }
    throw DepthError("no return of the arc within the computed continued-fraction depth");
}

/// fineness_order(J) >= lambda, without iterating past q_{lambda - 1}.
inline bool fineness_at_least(const CircleSystem& sys, const Interval& J, int lambda) {
    if (!(J.length() < 1.0)) throw DomainError("fineness needs a proper arc");
    if (lambda - 1 > sys.depth()) throw DepthError("fineness " + std::to_string(lambda) + " beyond computed depth");
    for (int i = 0; i < lambda; ++i) {
        if (detail::return_meets(sys.map(), J, sys.q(i))) return false;
    }
    return true;
}

/// l < 0 with f'(l) = f'(r), searched inside the close arc.
inline double slaved_left_endpoint(const CircleMapLift& f, double r) {
    const double target = f.derivative(r);
    const double lo = f.close_arc().lo();
    if (f.derivative(lo) < target) throw DomainError("derivative level not reached on the left part of the close arc");
    // f' decreases on (close.lo, 0).
    return bisect_increasing([&f](double x) { return -f.derivative(x); }, -target, lo, 0.0);
}

struct SymmetricNeighborhood {
    Interval U;
    int fineness = 0;
    /// |P_U(0)|: Poincare distance of the critical point from the midpoint of U.
    double critical_offset = 0.0;
};

/// U = (l, r) with f'(l) = f'(r) and fineness lambda, r near the top of its admissible range.
inline SymmetricNeighborhood symmetric_neighborhood(const CircleSystem& sys, int lambda) {
    const CircleMapLift& f = sys.map();
    auto make = [&](double r) {
        const double l = f.has_critical_point() ? slaved_left_endpoint(f, r) : -r;
        return Interval(l, r);
    };
    double lo = 1e-9, hi = f.close_arc().hi();
    if (f.has_critical_point() && f.derivative(hi) > f.derivative(f.close_arc().lo())) {
        // Largest r whose derivative level is still attained on the left.
        hi = bisect_increasing([&f](double x) { return f.derivative(x); }, f.derivative(f.close_arc().lo()), 0.0, hi);
    }
    if (!fineness_at_least(sys, make(lo), lambda)) throw DepthError("fineness " + std::to_string(lambda) + " not reachable");
    if (fineness_at_least(sys, make(hi), lambda)) {
        throw DomainError("fineness " + std::to_string(lambda) + " is reached by the whole close arc");
    }
    while (hi - lo > 1e-13) {
        const double mid = lo + (hi - lo) / 2.0;
        (fineness_at_least(sys, make(mid), lambda) ? lo : hi) = mid;
    }
    SymmetricNeighborhood s;
    s.U = make(lo * (1.0 - 1e-8));
    s.fineness = fineness_order(sys, s.U);
    if (s.fineness != lambda) {
        throw DomainError("fineness jumps over " + std::to_string(lambda) + " (got " + std::to_string(s.fineness) + ")");
    }
    s.critical_offset = std::abs(poincare_coordinate(s.U, 0.0));
    return s;
}

/// c_j(V) = sum over elements not inside V of (|I| / dist(I, 0))^2; inf when such an element touches 0.
inline double coarseness(const DynamicalPartition& d, const std::vector<Interval>& V, double tol = 1e-12) {
    double sum = 0.0;
    for (const auto& e : d.elements) {
        const bool inside = std::any_of(V.begin(), V.end(), [&](const Interval& v) { return arc_inside(e.arc, v, tol); });
        if (inside) continue;
        const double dist = arc_distance(e.arc, 0.0);
        if (dist <= 0.0) return std::numeric_limits<double>::infinity();
        const double r = e.arc.length() / dist;
        sum += r * r;
    }
    return sum;
}

/// The two elements of D_k adjacent to 0, as one lift arc.
inline Interval adjacent_union(const DynamicalPartition& d) {
    return Interval(d.elements.back().arc.lo() - 1.0, d.elements.front().arc.hi());
}

// ---------------------------------------------------------------------------
// Chains and first returns

struct ChainOfIntervals {
    /// Consecutive images, each normalized to lo in [0, 1).
    std::vector<Interval> intervals;
    bool disjoint = false;
    /// Minimum fineness over the intervals (0 when not measured).
    int fineness = 0;

    [[nodiscard]] std::size_t maps() const noexcept { return intervals.empty() ? 0 : intervals.size() - 1; }
};

inline ChainOfIntervals build_chain(const CircleMapLift& f, const Interval& seed, std::size_t m, bool require_disjoint = true) {
    ChainOfIntervals c;
    Interval cur = normalized_arc(seed);
    for (std::size_t t = 0; t <= m; ++t) {
        if (arc_contains(cur, 0.0)) throw ChainError("chain interval " + std::to_string(t) + " contains the critical point");
        c.intervals.push_back(cur);
        if (t < m) cur = f.image_arc(cur);
    }
    std::vector<std::size_t> order(c.intervals.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return c.intervals[x].lo() < c.intervals[y].lo(); });
    c.disjoint = true;
    for (std::size_t k = 0; k < order.size() && order.size() > 1; ++k) {
        const std::size_t i = order[k], j = order[(k + 1) % order.size()];
        const double tol = 1e-9 * std::min(c.intervals[i].length(), c.intervals[j].length());
        if (arc_overlap(c.intervals[i], c.intervals[j]) > tol) {
            c.disjoint = false;
            if (require_disjoint) {
                throw ChainError("chain intervals " + std::to_string(std::min(i, j)) + " and " +
                                 std::to_string(std::max(i, j)) + " overlap");
            }
        }
    }
    return c;
}

inline void measure_fineness(const CircleSystem& sys, ChainOfIntervals& c) {
    int best = std::numeric_limits<int>::max();
    for (const auto& J : c.intervals) best = std::min(best, fineness_order(sys, J));
    c.fineness = best;
}

/// Stage maps of a chain: stage t maps intervals[t] onto intervals[t+1].
inline std::vector<MapDescriptor> chain_stages(const CircleMapLift& f, const ChainOfIntervals& c) {
    std::vector<MapDescriptor> out;
    for (std::size_t t = 0; t + 1 < c.intervals.size(); ++t) out.push_back(f.restricted(c.intervals[t]));
    return out;
}

struct ReturnBranch {
    Interval domain;
    long long return_time = 0;
    /// f^{return_time} on the branch domain, as a composition of restricted lifts.
    MapDescriptor map;
    bool lands_inside = false;
};

struct FirstReturnReport {
    Interval J;
    std::vector<ReturnBranch> branches;
    /// Total length of all intermediate images f^s(branch), s < return time.
    double covering_length = 0.0;
    bool intermediate_disjoint = false;
};

/// First return to J = union of the two elements of D_k adjacent to 0.
inline FirstReturnReport first_return_map(const CircleSystem& sys, int k) {
    const CircleMapLift& f = sys.map();
    const Interval left = sys.closest_return_arc(k - 1), right = sys.closest_return_arc(k);
    FirstReturnReport rep;
    rep.J = Interval(std::min(left.lo(), right.lo()), std::max(left.hi(), right.hi()));
    const long long max_t = sys.q(sys.depth());
    std::vector<Interval> pieces;
    for (const Interval& P : {left, right}) {
        ReturnBranch b;
        b.domain = P;
        std::vector<MapDescriptor> stages;
        Interval cur = P;
        long long t = 0;
        while (true) {
            pieces.push_back(cur);
            stages.push_back(f.restricted(cur));
            cur = f.image_arc(cur);
            ++t;
            if (t > max_t) throw DepthError("return time beyond continued-fraction depth");
            if (arc_overlap(cur, rep.J) > 1e-9 * cur.length()) break;
        }
        b.return_time = t;
        b.lands_inside = arc_inside(cur, rep.J, 1e-10);
        b.map = compose(stages);
        rep.branches.push_back(std::move(b));
    }
    for (const auto& p : pieces) rep.covering_length += p.length();
    rep.intermediate_disjoint = true;
    for (std::size_t i = 0; i < pieces.size(); ++i)
        for (std::size_t j = i + 1; j < pieces.size(); ++j)
            if (arc_overlap(pieces[i], pieces[j]) > 1e-9 * std::min(pieces[i].length(), pieces[j].length()))
                rep.intermediate_disjoint = false;
    return rep;
}

}  // namespace pmetric
