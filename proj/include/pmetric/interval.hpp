#pragma once

#include <cmath>
#include <sstream>
#include <string>

#include "pmetric/error.hpp"

namespace pmetric {

/// Open interval (lo, hi) of the real line with lo < hi.
class Interval {
public:
    constexpr Interval() = default;
    Interval(double lo, double hi) : lo_(lo), hi_(hi) {
        if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
            std::ostringstream os;
            os << "invalid interval (" << lo << ", " << hi << ")";
            throw DomainError(os.str());
        }
    }

    [[nodiscard]] constexpr double lo() const noexcept { return lo_; }
    [[nodiscard]] constexpr double hi() const noexcept { return hi_; }
    [[nodiscard]] constexpr double length() const noexcept { return hi_ - lo_; }
    [[nodiscard]] constexpr double midpoint() const noexcept { return 0.5 * (lo_ + hi_); }

    [[nodiscard]] constexpr bool contains_open(double x) const noexcept { return lo_ < x && x < hi_; }
    [[nodiscard]] constexpr bool contains_closed(double x) const noexcept { return lo_ <= x && x <= hi_; }
    /// Whether `inner` lies in this interval up to `tol` at either end.
    [[nodiscard]] constexpr bool contains(const Interval& inner, double tol = 0.0) const noexcept {
        return inner.lo_ >= lo_ - tol && inner.hi_ <= hi_ + tol;
    }

    /// Point at normalized coordinate u in [0, 1].
    [[nodiscard]] constexpr double at(double u) const noexcept { return lo_ + u * (hi_ - lo_); }
    [[nodiscard]] constexpr double normalized(double x) const noexcept { return (x - lo_) / (hi_ - lo_); }

    friend constexpr bool operator==(const Interval&, const Interval&) = default;

private:
    double lo_ = 0.0;
    double hi_ = 1.0;
};

inline std::string to_string(const Interval& i) {
    std::ostringstream os;
    os.precision(17);
    os << "(" << i.lo() << ", " << i.hi() << ")";
    return os.str();
}

/// Four points p1 < p2 < p3 < p4.
struct PointQuadruple {
    double p1, p2, p3, p4;
};

namespace detail {

inline void check_quadruple(const PointQuadruple& q) {
    const double span = q.p4 - q.p1;
    const double floor = 1e-13 * std::abs(span);
    if (!(span > 0.0) || !(q.p2 - q.p1 > floor) || !(q.p3 - q.p2 > floor) || !(q.p4 - q.p3 > floor)) {
        std::ostringstream os;
        os.precision(17);
        os << "degenerate quadruple (" << q.p1 << ", " << q.p2 << ", " << q.p3 << ", " << q.p4 << ")";
        throw DegenerateError(os.str());
    }
}

}  // namespace detail

/// Cr(a,b,c,d) = (b-a)(d-c) / ((c-a)(d-b)).
inline double cross_ratio_Cr(const PointQuadruple& q) {
    detail::check_quadruple(q);
    return ((q.p2 - q.p1) * (q.p4 - q.p3)) / ((q.p3 - q.p1) * (q.p4 - q.p2));
}

/// CR(a,b,c,d) = (d-c)(b-a) / ((c-b)(d-a)).
inline double cross_ratio_CR(const PointQuadruple& q) {
    detail::check_quadruple(q);
    return ((q.p4 - q.p3) * (q.p2 - q.p1)) / ((q.p3 - q.p2) * (q.p4 - q.p1));
}

/// Poincare coordinate on (0,1) from the two gaps u = x - 0 and 1 - x.
/// Passing gaps separately keeps full relative accuracy near both ends.
inline double logit_from_gaps(double lo_gap, double hi_gap) noexcept {
    return std::log(lo_gap) - std::log(hi_gap);
}

/// Normalized point of the unit interval with both gaps, so that points
/// within 1e-300 of either end keep their relative accuracy.
struct UnitPoint {
    double lo_gap;  ///< u
    double hi_gap;  ///< 1 - u
};

/// Inverse of the (0,1) Poincare coordinate.
inline UnitPoint unit_point_from_coordinate(double gamma) noexcept {
    if (gamma >= 0.0) {
        const double e = std::exp(-gamma);
        return {1.0 / (1.0 + e), e / (1.0 + e)};
    }
    const double e = std::exp(gamma);
    return {e / (1.0 + e), 1.0 / (1.0 + e)};
}

/// Poincare coordinate of x in I; -log Cr(lo, mid, x, hi) = log((x-lo)/(hi-x)).
inline double poincare_coordinate(const Interval& interval, double x) {
    if (!interval.contains_open(x)) {
        std::ostringstream os;
        os.precision(17);
        os << "point " << x << " not inside " << to_string(interval);
        throw DomainError(os.str());
    }
    return logit_from_gaps(x - interval.lo(), interval.hi() - x);
}

/// Point of I whose Poincare coordinate is gamma.
inline double poincare_coordinate_inverse(const Interval& interval, double gamma) noexcept {
    const UnitPoint u = unit_point_from_coordinate(gamma);
    return u.lo_gap <= u.hi_gap ? interval.lo() + u.lo_gap * interval.length()
                                : interval.hi() - u.hi_gap * interval.length();
}

/// Poincare distance |log Cr(lo, x, y, hi)| between two interior points.
inline double poincare_distance(const Interval& interval, double x, double y) {
    return std::abs(poincare_coordinate(interval, x) - poincare_coordinate(interval, y));
}

}  // namespace pmetric
