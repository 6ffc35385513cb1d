#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "pmetric/grid.hpp"
#include "pmetric/interval.hpp"
#include "pmetric/map.hpp"

namespace pmetric {

/// Density of the nonlinearity form f''/f' dx at a point.
struct FormValue {
    double coefficient = 0.0;
};

/// The affine map from I onto (0,1).
inline MapDescriptor affine_normalizer(const Interval& interval) { return affine(interval, Interval(0.0, 1.0)); }

inline double evaluate(const MapDescriptor& m, double x) { return m(x); }

namespace detail {

inline Jet regular_jet(const MapDescriptor& m, double x) {
    const Jet j = m.jet(x);
    if (!(j.d1 > 0.0)) {
        std::ostringstream os;
        os.precision(17);
        os << "derivative " << j.d1 << " not positive at " << x;
        throw CriticalPointError(os.str());
    }
    return j;
}

}  // namespace detail

/// f''/f' at x.
inline FormValue nonlinearity(const MapDescriptor& m, double x) {
    const Jet j = detail::regular_jet(m, x);
    return {j.d2 / j.d1};
}

/// f'''/f' - (3/2)(f''/f')^2 at x.
inline double schwarzian(const MapDescriptor& m, double x) {
    const Jet j = detail::regular_jet(m, x);
    const double n = j.d2 / j.d1;
    return j.d3 / j.d1 - 1.5 * n * n;
}

/// Integral of the nonlinearity over J, i.e. log m'(J.hi) - log m'(J.lo).
inline double nonlinearity_integral(const MapDescriptor& m, const Interval& sub) {
    // The antiderivative is only valid without a critical point inside J.
    for (double x : linspace(sub.lo(), sub.hi(), 33)) (void)detail::regular_jet(m, x);
    return std::log(m.jet(sub.hi()).d1) - std::log(m.jet(sub.lo()).d1);
}

/// Poincare model map P(m) = P_J o m o P_I^{-1} evaluated at gamma.
inline double poincare_model(const MapDescriptor& m, double gamma) {
    const UnitPoint v = m.forward_unit(unit_point_from_coordinate(gamma));
    return logit_from_gaps(v.lo_gap, v.hi_gap);
}

/// Inverse of the Poincare model map, P(m)^{-1}(gamma) = P(m^{-1})(gamma).
inline double poincare_model_inverse(const MapDescriptor& m, double gamma) {
    const UnitPoint u = m.backward_unit(unit_point_from_coordinate(gamma));
    return logit_from_gaps(u.lo_gap, u.hi_gap);
}

inline LineMap model_map(const MapDescriptor& m) {
    return [m](double g) { return poincare_model(m, g); };
}

inline LineMap model_map_inverse(const MapDescriptor& m) {
    return [m](double g) { return poincare_model_inverse(m, g); };
}

/// Grid estimate of sup |P(m) - id| with its argmax.
inline SupEstimate distortion_norm_estimate(const MapDescriptor& m, const GridSpec& grid = {}) {
    return grid_sup_abs([&m](double g) { return poincare_model(m, g) - g; }, grid);
}

/// Poincare distortion norm D(m) = ||P(m) - id||_C0 on the guarded grid.
inline double distortion_norm(const MapDescriptor& m, const GridSpec& grid = {}) {
    return distortion_norm_estimate(m, grid).value;
}

/// sup |log(f'(x)/f'(y))| over the closed domain, computed as max log f' - min log f'.
inline double classical_distortion_norm(const MapDescriptor& m, std::size_t points = 4097) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double x : linspace(m.domain().lo(), m.domain().hi(), points)) {
        const double l = std::log(detail::regular_jet(m, x).d1);
        lo = std::min(lo, l);
        hi = std::max(hi, l);
    }
    return hi - lo;
}

/// |m((x,y))| / |(x,y)|.
inline double rho(const MapDescriptor& m, double x, double y) {
    if (!(x < y) || !m.domain().contains_closed(x) || !m.domain().contains_closed(y)) {
        std::ostringstream os;
        os.precision(17);
        os << "rho needs x < y in " << to_string(m.domain()) << ", got " << x << ", " << y;
        throw DomainError(os.str());
    }
    return m.increment(x, y - x) / (y - x);
}

struct KoebeReport {
    bool schwarzian_nonnegative = true;
    double min_schwarzian = 0.0;
    /// max |n(x)| min(x - a, d - x) / 2; the Koebe principle says <= 1.
    double pointwise_ratio = 0.0;
    /// max |log(f'(y)/f'(z))| / (2 |log Cr(a,y,z,d)|); also <= 1.
    double integrated_ratio = 0.0;
    std::size_t points = 0;

    [[nodiscard]] bool passes(double tol = 1e-6) const {
        return schwarzian_nonnegative && pointwise_ratio <= 1.0 + tol && integrated_ratio <= 1.0 + tol;
    }
};

/// Checks both forms of the Koebe bound on an interior grid of `points` nodes.
/// A negative Schwarzian is reported through the precondition flag.
inline KoebeReport koebe_check(const MapDescriptor& m, std::size_t points = 257, double schwarzian_tol = 1e-9) {
    KoebeReport rep;
    rep.points = points;
    const double a = m.domain().lo();
    const double d = m.domain().hi();
    std::vector<double> xs(points);
    std::vector<double> logd(points);
    rep.min_schwarzian = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points; ++i) {
        const double x = a + (d - a) * (static_cast<double>(i) + 0.5) / static_cast<double>(points);
        xs[i] = x;
        const Jet j = detail::regular_jet(m, x);
        const double n = j.d2 / j.d1;
        const double s = j.d3 / j.d1 - 1.5 * n * n;
        rep.min_schwarzian = std::min(rep.min_schwarzian, s);
        // Relative slack: finite-difference Schwarzians carry noise of order n^2 * tol.
        if (s < -schwarzian_tol * (1.0 + n * n)) rep.schwarzian_nonnegative = false;
        rep.pointwise_ratio = std::max(rep.pointwise_ratio, std::abs(n) * std::min(x - a, d - x) / 2.0);
        logd[i] = std::log(j.d1);
    }
    for (std::size_t i = 0; i < points; ++i) {
        for (std::size_t k = i + 1; k < points; ++k) {
            const double cr = cross_ratio_Cr({a, xs[i], xs[k], d});
            const double denom = 2.0 * std::abs(std::log(cr));
            rep.integrated_ratio = std::max(rep.integrated_ratio, std::abs(logd[i] - logd[k]) / denom);
        }
    }
    return rep;
}

}  // namespace pmetric
