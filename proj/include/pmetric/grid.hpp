#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace pmetric {

/// A homeomorphism of the real line (a Poincare model map or a composite of them).
using LineMap = std::function<double(double)>;

/// Sampling of the Poincare line used for every C0 estimate.
///
/// Poincare coordinates blow up logarithmically at the interval ends, so the
/// line is truncated to normalized coordinates [eps_guard, 1 - eps_guard],
/// i.e. |gamma| <= log((1 - eps_guard) / eps_guard).
struct GridSpec {
    std::size_t points = 4096;
    std::size_t refine_points = 64;
    double eps_guard = 1e-9;

    [[nodiscard]] double guard_range() const { return std::log((1.0 - eps_guard) / eps_guard); }

    [[nodiscard]] std::vector<double> nodes() const {
        const double r = guard_range();
        std::vector<double> out(points);
        if (points == 1) {
            out[0] = 0.0;
            return out;
        }
        for (std::size_t i = 0; i < points; ++i) {
            out[i] = -r + 2.0 * r * static_cast<double>(i) / static_cast<double>(points - 1);
        }
        return out;
    }
};

/// Grid supremum of |fn| together with where it was attained.
struct SupEstimate {
    double value = 0.0;
    double argmax = 0.0;
    std::size_t evaluations = 0;
};

/// sup |fn(gamma)| over the guarded grid, followed by one refinement pass of
/// `refine_points` nodes over the two cells around the coarse argmax.
inline SupEstimate grid_sup_abs(const std::function<double(double)>& fn, const GridSpec& grid = {}) {
    const std::vector<double> xs = grid.nodes();
    SupEstimate best;
    std::size_t best_index = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double v = std::abs(fn(xs[i]));
        ++best.evaluations;
        if (v > best.value || i == 0) {
            best.value = v;
            best.argmax = xs[i];
            best_index = i;
        }
    }
    if (grid.refine_points > 0 && xs.size() >= 2) {
        const double left = xs[best_index == 0 ? 0 : best_index - 1];
        const double right = xs[std::min(best_index + 1, xs.size() - 1)];
        for (std::size_t k = 0; k < grid.refine_points; ++k) {
            const double g = left + (right - left) * (static_cast<double>(k) + 0.5) /
                                        static_cast<double>(grid.refine_points);
            const double v = std::abs(fn(g));
            ++best.evaluations;
            if (v > best.value) {
                best.value = v;
                best.argmax = g;
            }
        }
    }
    return best;
}

/// Evenly spaced points of [lo, hi] including both ends.
inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = 0.5 * (lo + hi);
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return out;
}

}  // namespace pmetric
