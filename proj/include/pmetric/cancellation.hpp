#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pmetric/composition.hpp"

namespace pmetric {

/// sigma_i o H_i with H_i = h_i o g_i and h_i linear-fractional.
struct CancellationStage {
    MapDescriptor g;
    MapDescriptor h;
    MapDescriptor sigma;
};

namespace detail {

/// Constant displacement of a linear-fractional map in the Poincare model.
inline double lf_displacement(const MapDescriptor& h) {
    switch (h.kind()) {
        case MapKind::Affine: return 0.0;
        case MapKind::LinearFractional:
            return -std::log(static_cast<const LinearFractionalNode&>(h.node()).parameter());
        default: throw CompositionError(std::string("H factor h must be linear-fractional, got ") + to_string(h.kind()));
    }
}

}  // namespace detail

class CancellationDecomposition {
public:
    explicit CancellationDecomposition(std::vector<CancellationStage> stages) : stages_(std::move(stages)) {
        if (stages_.empty()) throw CompositionError("cancellation decomposition needs at least one stage");
        std::vector<MapDescriptor> chain;
        for (const auto& s : stages_) {
            deltas_.push_back(detail::lf_displacement(s.h));
            chain.insert(chain.end(), {s.g, s.h, s.sigma});
        }
        full_ = compose(std::move(chain));
    }

    [[nodiscard]] std::size_t size() const noexcept { return stages_.size(); }
    [[nodiscard]] const std::vector<CancellationStage>& stages() const noexcept { return stages_; }
    [[nodiscard]] const std::vector<double>& deltas() const noexcept { return deltas_; }
    [[nodiscard]] const MapDescriptor& map() const noexcept { return full_; }

    /// As a standard composition with h-stages H_i = h_i o g_i.
    [[nodiscard]] StandardComposition as_standard() const {
        std::vector<CompositionStage> out;
        for (const auto& s : stages_) out.push_back({compose(s.g, s.h), s.sigma});
        return StandardComposition(std::move(out), false);
    }

    /// P(sigma_m) P(h_m) ... P(sigma_1) P(h_1)(x): the model with every g removed.
    [[nodiscard]] double stripped_model(double x) const {
        for (const auto& s : stages_) x = poincare_model(s.sigma, poincare_model(s.h, x));
        return x;
    }

    /// Standard composition with h-stages g_i and sigma-stages s_i = sigma_i o h_i.
    [[nodiscard]] StandardComposition g_first() const {
        std::vector<CompositionStage> out;
        for (const auto& s : stages_) out.push_back({s.g, compose(s.h, s.sigma)});
        return StandardComposition(std::move(out), false);
    }

private:
    std::vector<CancellationStage> stages_;
    std::vector<double> deltas_;
    MapDescriptor full_;
};

/// D~ = sum of D(g_j).
inline double d_tilde(const CancellationDecomposition& d, const GridSpec& grid = {}) {
    double sum = 0.0;
    for (const auto& s : d.stages()) sum += distortion_norm(s.g, grid);
    return sum;
}

/// max over j of |delta_1 + ... + delta_j|.
inline double delta_max(const std::vector<double>& deltas) {
    double sum = 0.0, best = 0.0;
    for (double v : deltas) {
        sum += v;
        best = std::max(best, std::abs(sum));
    }
    return best;
}

inline double delta_max(const CancellationDecomposition& d) { return delta_max(d.deltas()); }

/// S_m(x) = P(sigma_m) o ... o P(sigma_1)(x).
inline double sigma_composition(const CancellationDecomposition& d, double x) {
    for (const auto& s : d.stages()) x = poincare_model(s.sigma, x);
    return x;
}

struct CancellationReport {
    double D_tilde = 0.0;
    double Delta = 0.0;
    /// sup |P(f) - S_m| on the guarded grid.
    double gap = 0.0;
    double bound = 0.0;
    bool pass = false;
    /// Same with every g_i removed; bounded by 2 Delta.
    double gap_reduced = 0.0;
    bool reduced_pass = false;
    /// sup |G - id| where P(f) = G o P(s_m) o ... o P(s_1), s_i = sigma_i o h_i; bounded by D~.
    double reduction_residual = 0.0;
    bool reduction_pass = false;
    double sum_abs_delta = 0.0;
    double tolerance = 0.0;
};

inline CancellationReport cancellation_verify(const CancellationDecomposition& d, const GridSpec& grid = {},
                                              double tolerance = 1e-9) {
    CancellationReport r;
    r.tolerance = tolerance;
    r.D_tilde = d_tilde(d, grid);
    r.Delta = delta_max(d);
    for (double v : d.deltas()) r.sum_abs_delta += std::abs(v);
    r.bound = r.D_tilde + 2.0 * r.Delta;

    const MapDescriptor f = d.map();
    const auto S = [&d](double x) { return sigma_composition(d, x); };
    r.gap = grid_sup_abs([&](double x) { return poincare_model(f, x) - S(x); }, grid).value;
    r.pass = r.gap <= r.bound + tolerance;

    r.gap_reduced = grid_sup_abs([&](double x) { return d.stripped_model(x) - S(x); }, grid).value;
    r.reduced_pass = r.gap_reduced <= 2.0 * r.Delta + tolerance;

    // G = gbar_m o ... o gbar_1 from the reshuffled g-first composition.
    const Reshuffled rs = reshuffle(d.g_first());
    r.reduction_residual = grid_sup_abs(
                               [&](double x) {
                                   double y = x;
                                   for (const auto& gb : rs.h_bar) y = gb(y);
                                   return y - x;
                               },
                               grid)
                               .value;
    r.reduction_pass = r.reduction_residual <= r.D_tilde + tolerance;
    return r;
}

// ---------------------------------------------------------------------------
// Constructed decompositions

struct DecompositionOptions {
    /// Half-width of the nonlinearity (times domain length) of g stages; 0 gives affine g.
    double g_strength = 0.1;
    /// Restrict sigma stages to linear-fractional maps.
    bool mobius_sigmas = false;
};

/// Decomposition with prescribed displacements, random g and sigma stages.
inline CancellationDecomposition decomposition_with_deltas(Rng& rng, const std::vector<double>& deltas,
                                                           const DecompositionOptions& opt = {}) {
    std::vector<CancellationStage> stages;
    Interval current = random_interval(rng);
    for (double delta : deltas) {
        const Interval y = random_interval(rng);
        const Interval z = random_interval(rng);
        const Interval w = random_interval(rng);
        MapDescriptor g = opt.g_strength > 0.0
                              ? constant_nonlinearity(current, y, opt.g_strength * rng.uniform(-1.0, 1.0) / current.length())
                              : affine(current, y);
        MapDescriptor h = linear_fractional_with_displacement(y, z, delta);
        MapDescriptor sigma = opt.mobius_sigmas ? linear_fractional(z, w, rng.log_uniform(0.3, 3.0))
                                                : random_sigma(rng, z, w);
        stages.push_back({std::move(g), std::move(h), std::move(sigma)});
        current = w;
    }
    return CancellationDecomposition(std::move(stages));
}

/// Displacements of alternating sign and fixed magnitude.
inline std::vector<double> alternating_deltas(std::size_t m, double amplitude) {
    std::vector<double> out(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = (i % 2 == 0) ? amplitude : -amplitude;
    return out;
}

inline constexpr std::uint64_t kCancellationSuiteSeed = 20240612;

/// The frozen suite: m uniform in 1..20, displacements uniform in [-0.3, 0.3].
inline std::vector<CancellationDecomposition> cancellation_suite(std::uint64_t seed, std::size_t count,
                                                                 std::size_t max_stages = 20) {
    Rng rng(seed);
    std::vector<CancellationDecomposition> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const auto m = static_cast<std::size_t>(rng.integer(1, static_cast<std::int64_t>(max_stages)));
        std::vector<double> deltas(m);
        for (double& v : deltas) v = rng.uniform(-0.3, 0.3);
        DecompositionOptions opt;
        opt.g_strength = rng.uniform(0.0, 0.4);
        out.push_back(decomposition_with_deltas(rng, deltas, opt));
    }
    return out;
}

}  // namespace pmetric
