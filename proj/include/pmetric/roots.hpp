#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "pmetric/error.hpp"

namespace pmetric {

/// Bisection for an increasing function on [lo, hi]; returns x with fn(x) ~ target.
inline double bisect_increasing(const std::function<double(double)>& fn, double target, double lo, double hi,
                                double xtol = 0.0, int max_iter = 200) {
    double flo = fn(lo) - target;
    double fhi = fn(hi) - target;
    if (flo > 0.0 || fhi < 0.0) {
        std::ostringstream os;
        os.precision(17);
        os << "target " << target << " not bracketed by [" << lo << ", " << hi << "]";
        throw ConvergenceError(os.str());
    }
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    for (int i = 0; i < max_iter; ++i) {
        const double mid = lo + (hi - lo) / 2.0;
        if (mid <= lo || mid >= hi || hi - lo <= xtol) return mid;
        const double fm = fn(mid) - target;
        if (fm == 0.0) return mid;
        (fm < 0.0 ? lo : hi) = mid;
    }
    return lo + (hi - lo) / 2.0;
}

/// Solve fn(x) = target for an increasing line map, expanding a bracket around guess.
inline double invert_increasing(const std::function<double(double)>& fn, double target, double guess,
                                double step = 1.0) {
    double lo = guess - step;
    double hi = guess + step;
    for (int i = 0; fn(lo) > target; ++i) {
        if (i > 60) throw ConvergenceError("no lower bracket for line-map inverse");
        step *= 2.0;
        lo = guess - step;
    }
    for (int i = 0; fn(hi) < target; ++i) {
        if (i > 60) throw ConvergenceError("no upper bracket for line-map inverse");
        step *= 2.0;
        hi = guess + step;
    }
    return bisect_increasing(fn, target, lo, hi);
}

/// Newton iteration safeguarded by bisection for an increasing fn on [lo, hi]
/// with fn(lo) <= target <= fn(hi).
inline double newton_bisect(const std::function<double(double)>& fn, const std::function<double(double)>& dfn,
                            double target, double lo, double hi, double guess, int max_iter = 100) {
    double x = std::clamp(guess, lo, hi);
    for (int i = 0; i < max_iter; ++i) {
        const double r = fn(x) - target;
        if (r == 0.0) return x;
        (r < 0.0 ? lo : hi) = x;
        const double d = dfn(x);
        double next = d > 0.0 ? x - r / d : lo + (hi - lo) / 2.0;
        if (!(next > lo && next < hi)) next = lo + (hi - lo) / 2.0;
        if (std::abs(next - x) <= 4e-16 * std::max(std::abs(x), std::abs(hi - lo)) || next == lo || next == hi) {
            return next;
        }
        x = next;
    }
    return x;
}

}  // namespace pmetric
