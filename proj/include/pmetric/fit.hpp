#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "pmetric/error.hpp"

namespace pmetric {

enum class DecayModel { Exponential, ExpSqrt };

inline const char* to_string(DecayModel m) noexcept { return m == DecayModel::Exponential ? "exp" : "exp-sqrt"; }

/// y ~ K1 * K2^x (Exponential) or K1 * K2^sqrt(x) (ExpSqrt), fitted in log space.
struct DecayFit {
    std::vector<double> xs;
    std::vector<double> ys;
    DecayModel model = DecayModel::Exponential;
    double K1 = std::numeric_limits<double>::quiet_NaN();
    double K2 = std::numeric_limits<double>::quiet_NaN();
    /// RMS of log-residuals.
    double residual = std::numeric_limits<double>::quiet_NaN();

    [[nodiscard]] bool strictly_decreasing() const {
        for (std::size_t i = 1; i < ys.size(); ++i)
            if (!(ys[i] < ys[i - 1])) return false;
        return true;
    }
    [[nodiscard]] bool pass(double max_residual) const { return K2 < 1.0 && residual <= max_residual; }
    [[nodiscard]] double predict(double x) const {
        return K1 * std::pow(K2, model == DecayModel::Exponential ? x : std::sqrt(x));
    }
};

inline DecayFit fit_decay(std::vector<double> xs, std::vector<double> ys, DecayModel model) {
    if (xs.size() != ys.size()) throw DomainError("decay fit needs matching xs and ys");
    if (xs.size() < 2) throw DomainError("decay fit needs at least two points");
    DecayFit fit;
    fit.model = model;
    const auto n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::vector<double> us(xs.size()), ls(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(ys[i] > 0.0) || !std::isfinite(ys[i])) throw DomainError("decay fit needs positive finite values");
        if (model == DecayModel::ExpSqrt && xs[i] < 0.0) throw DomainError("exp-sqrt fit needs nonnegative xs");
        us[i] = model == DecayModel::Exponential ? xs[i] : std::sqrt(xs[i]);
        ls[i] = std::log(ys[i]);
        sx += us[i];
        sy += ls[i];
        sxx += us[i] * us[i];
        sxy += us[i] * ls[i];
    }
    const double den = n * sxx - sx * sx;
    if (!(std::abs(den) > 0.0)) throw DomainError("decay fit needs distinct xs");
    const double slope = (n * sxy - sx * sy) / den;
    const double icept = (sy - slope * sx) / n;
    fit.K1 = std::exp(icept);
    fit.K2 = std::exp(slope);
    double ss = 0.0;
    for (std::size_t i = 0; i < us.size(); ++i) {
        const double r = ls[i] - (icept + slope * us[i]);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    fit.xs = std::move(xs);
    fit.ys = std::move(ys);
    return fit;
}

}  // namespace pmetric
