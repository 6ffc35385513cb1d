#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pmetric/cancellation.hpp"
#include "pmetric/circle.hpp"
#include "pmetric/fit.hpp"

namespace pmetric {

/// Pieces of a ∩ b, expressed in the lift frame of a.
inline std::vector<Interval> arc_intersection(const Interval& a, const Interval& b) {
    std::vector<Interval> out;
    const double shift = std::floor(a.lo() - b.lo());
    for (double n = shift - 1.0; n <= shift + 2.0; n += 1.0) {
        const double lo = std::max(a.lo(), b.lo() + n), hi = std::min(a.hi(), b.hi() + n);
        if (hi > lo) out.emplace_back(lo, hi);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Approximate maps

/// phi: f on chain intervals inside U, affine with the same image elsewhere.
struct ApproximateMap {
    ChainOfIntervals chain;
    Interval U;
    std::vector<bool> kept;
    /// f restricted to chain interval t.
    std::vector<MapDescriptor> f_stages;
    std::vector<MapDescriptor> phi_stages;
    MapDescriptor iterate;
    MapDescriptor composed;
    std::size_t kept_count = 0;

    [[nodiscard]] std::size_t maps() const noexcept { return f_stages.size(); }
};

inline ApproximateMap approximate(const CircleMapLift& f, const ChainOfIntervals& chain, const Interval& U,
                                  double symmetry_tol = 1e-8) {
    const double dl = f.derivative(U.lo()), dr = f.derivative(U.hi());
    if (!(U.contains_open(0.0)) || std::abs(dl - dr) > symmetry_tol * std::max(dl, dr)) {
        throw DomainError("neighbourhood " + to_string(U) + " is not symmetric around the critical point");
    }
    if (chain.maps() == 0) throw DomainError("approximate map needs a chain with at least one map");
    ApproximateMap a{chain, U, {}, chain_stages(f, chain), {}, {}, {}, 0};
    for (std::size_t t = 0; t < a.f_stages.size(); ++t) {
        const bool keep = arc_inside(chain.intervals[t], U, 0.0);
        a.kept.push_back(keep);
        a.kept_count += keep ? 1 : 0;
        const auto& s = a.f_stages[t];
        a.phi_stages.push_back(keep ? s : affine(s.domain(), s.image()));
    }
    a.iterate = compose(a.f_stages);
    a.composed = compose(a.phi_stages);
    return a;
}

/// sup |P(f^m) - P(phi)| on the Poincare line of the first chain interval.
inline double pure_singularity_gap(const ApproximateMap& a, const GridSpec& grid = {}) {
    return grid_sup_abs([&a](double x) { return poincare_model(a.iterate, x) - poincare_model(a.composed, x); }, grid)
        .value;
}

// ---------------------------------------------------------------------------
// Cancellation structure along the chain

struct HPrescription {
    MapDescriptor h;
    MapDescriptor g;
    double delta = 0.0;
};

/// h linear-fractional with P(h)(x) = x - (1/2) int N(H), g = h^{-1} o H.
inline HPrescription h_prescription(const MapDescriptor& H) {
    const double delta = -0.5 * nonlinearity_integral(H, H.domain());
    MapDescriptor h = linear_fractional_with_displacement(H.domain(), H.image(), delta);
    MapDescriptor g = compose(H, inverse(h));
    return {std::move(h), std::move(g), delta};
}

/// Decomposition of phi^{-1}-style inverse chain J_m -> J_0: kept stages become sigma = f^{-1},
/// the others H = f^{-1} = h o g by prescription. Stage order is application order.
inline CancellationDecomposition circle_decomposition(const ApproximateMap& a) {
    std::vector<CancellationStage> stages;
    for (std::size_t t = a.maps(); t-- > 0;) {
        MapDescriptor H = inverse(a.f_stages[t]);
        if (a.kept[t]) {
            const Interval d = H.domain();
            stages.push_back({identity(d), identity(d), std::move(H)});
            continue;
        }
        const Interval img = H.image();
        HPrescription p = h_prescription(H);
        stages.push_back({std::move(p.g), std::move(p.h), identity(img)});
    }
    return CancellationDecomposition(std::move(stages));
}

/// max over partial unions C of the non-kept chain intervals (application order of the
/// inverse chain) of |1/2 int_C N f|.
inline double delta_circle(const CircleMapLift& f, const ApproximateMap& a) {
    double sum = 0.0, best = 0.0;
    for (std::size_t t = a.maps(); t-- > 0;) {
        if (a.kept[t]) continue;
        const Interval& J = a.chain.intervals[t];
        sum += 0.5 * (std::log(f.derivative(J.hi())) - std::log(f.derivative(J.lo())));
        best = std::max(best, std::abs(sum));
    }
    return best;
}

/// sup |P(f^{-m}) - S_m| on the Poincare line of the last chain interval.
inline double inverse_gap(const CancellationDecomposition& d, const GridSpec& grid = {}) {
    const MapDescriptor f = d.map();
    return grid_sup_abs([&](double x) { return poincare_model(f, x) - sigma_composition(d, x); }, grid).value;
}

// ---------------------------------------------------------------------------
// Densities

struct DensityProfile {
    int j = 0;
    /// E(chi | I) per element of D_j; NaN where |I ∩ U~| = 0.
    std::vector<double> values;
    /// |I ∩ U~| per element.
    std::vector<double> weights;
    std::vector<bool> disjoint_from_U;
    double E_chi = 0.0;
    double U_tilde_measure = 0.0;
    std::size_t straddling = 0;
    double v_j = 0.0;
    /// Normalized integral of |E(chi | D_j) - E(chi)| over U~.
    double L1_deviation = 0.0;
    /// max |E(chi | I) - E(chi)| over elements disjoint from U.
    double max_deviation = 0.0;
    double tower_defect = 0.0;
    /// int chi n split as t1 + t2, t2 = t2a + t2b; n the nonlinearity of f.
    double term_total = 0.0;
    double t1 = 0.0;
    double t2 = 0.0;
    double t2a = 0.0;
    double t2b = 0.0;
};

inline DensityProfile density_profile(const CircleSystem& sys, const ApproximateMap& a, int j, int lambda, int kappa,
                                      std::size_t subgrid = 16) {
    if (!(lambda < j && j < kappa)) {
        throw DepthError("density order " + std::to_string(j) + " outside (" + std::to_string(lambda) + ", " +
                         std::to_string(kappa) + ")");
    }
    const CircleMapLift& f = sys.map();
    const DynamicalPartition D = dynamical_partition(sys, j);
    const Interval& U = a.U;

    std::vector<Interval> outside;     // chain intervals not inside U
    std::vector<Interval> straddle_u;  // their parts inside U
    for (std::size_t t = 0; t < a.chain.intervals.size(); ++t) {
        const Interval& C = a.chain.intervals[t];
        if (arc_inside(C, U, 0.0)) continue;
        outside.push_back(C);
        const auto parts = arc_intersection(C, U);
        for (const auto& p : parts) straddle_u.push_back(p);
    }
    // |X ∩ U~| for an arc X.
    auto tilde_measure = [&](const Interval& X) {
        double w = X.length() - arc_overlap(X, U);
        for (const auto& p : straddle_u) w += arc_overlap(X, p);
        return w;
    };
    auto chain_measure = [&](const Interval& X) {
        double c = 0.0;
        for (const auto& C : outside) c += arc_overlap(X, C);
        return c;
    };

    DensityProfile p;
    p.j = j;
    for (const auto& C : outside) {
        if (arc_overlap(C, U) > 0.0) ++p.straddling;
    }
    p.U_tilde_measure = 1.0 - U.length();
    for (const auto& s : straddle_u) p.U_tilde_measure += s.length();
    double chain_total = 0.0;
    for (const auto& C : outside) {
        chain_total += C.length();
        p.term_total += std::log(f.derivative(C.hi())) - std::log(f.derivative(C.lo()));
    }
    p.E_chi = chain_total / p.U_tilde_measure;

    std::vector<double> cond_n(D.elements.size(), 0.0);
    std::vector<double> chain_in(D.elements.size(), 0.0);
    double vmax = 0.0, vmin = std::numeric_limits<double>::infinity(), tower = 0.0;
    for (std::size_t i = 0; i < D.elements.size(); ++i) {
        const Interval& I = D.elements[i].arc;
        const double w = tilde_measure(I);
        const double c = chain_measure(I);
        p.weights.push_back(w);
        p.disjoint_from_U.push_back(arc_overlap(I, U) == 0.0);
        chain_in[i] = c;
        const double e = w > 0.0 ? c / w : std::numeric_limits<double>::quiet_NaN();
        p.values.push_back(e);
        if (w > 0.0) {
            tower += c;
            p.L1_deviation += std::abs(e - p.E_chi) * w;
            double sw = 0.0, sn = 0.0;
            for (std::size_t s = 0; s < subgrid; ++s) {
                const double lo = I.lo() + I.length() * static_cast<double>(s) / static_cast<double>(subgrid);
                const Interval cell(lo, lo + I.length() / static_cast<double>(subgrid));
                const double cw = tilde_measure(cell);
                if (!(cw > 0.0)) continue;
                const Jet jt = f.jet(0.5 * (cell.lo() + cell.hi()));
                if (!(jt.d1 > 0.0)) continue;
                sw += cw;
                sn += cw * jt.d2 / jt.d1;
            }
            cond_n[i] = sw > 0.0 ? sn / sw : 0.0;
        }
        if (p.disjoint_from_U.back()) {
            vmax = std::max(vmax, e);
            vmin = std::min(vmin, e);
            p.max_deviation = std::max(p.max_deviation, std::abs(e - p.E_chi));
        }
    }
    p.L1_deviation /= p.U_tilde_measure;
    p.tower_defect = std::abs(tower / p.U_tilde_measure - p.E_chi);
    p.v_j = vmin > 0.0 && std::isfinite(vmin) ? vmax / vmin - 1.0 : std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < D.elements.size(); ++i) {
        if (!(p.weights[i] > 0.0)) continue;
        p.t2 += cond_n[i] * chain_in[i];
        p.t2a += (p.values[i] - p.E_chi) * cond_n[i] * p.weights[i];
        p.t2b += p.E_chi * cond_n[i] * p.weights[i];
    }
    p.t1 = p.term_total - p.t2;
    return p;
}

// ---------------------------------------------------------------------------
// Chains used by the experiment

/// Chains of D_kappa: short element f^i(I_kappa), 1 <= i < q_{kappa-1}, with q_kappa - 1 maps.
inline ChainOfIntervals partition_chain(const CircleSystem& sys, int kappa, long long seed_index) {
    if (kappa < 2 || kappa > sys.depth()) throw DepthError("chain order " + std::to_string(kappa) + " outside computed depth");
    if (seed_index < 1 || seed_index >= sys.q(kappa - 1)) {
        throw DepthError("chain seed index " + std::to_string(seed_index) + " outside 1.." +
                         std::to_string(sys.q(kappa - 1) - 1));
    }
    const double u = sys.orbit(seed_index);
    const double v = sys.orbit(seed_index + sys.q(kappa)) - static_cast<double>(sys.p(kappa));
    ChainOfIntervals c = build_chain(sys.map(), Interval(std::min(u, v), std::max(u, v)),
                                     static_cast<std::size_t>(sys.q(kappa) - 1));
    measure_fineness(sys, c);
    return c;
}

// ---------------------------------------------------------------------------
// Report

struct SingularityRow {
    int kappa = 0;
    int lambda = 0;
    int j = 0;
    std::size_t chains = 0;
    std::size_t stages = 0;
    std::size_t kept = 0;
    int chain_fineness = 0;
    /// Envelopes over all chains of the row.
    double delta = 0.0;
    double d_tilde = 0.0;
    double gap = 0.0;
    double cancel_gap = 0.0;
    double bound = 0.0;
    /// gap and cancel_gap within D~ + 2 Delta for every chain of the row.
    bool bound_holds = true;
    /// Density columns from the chain with seed index 1; NaN when no order lies strictly between lambda and kappa.
    double E_chi = kNaN;
    double v_j = kNaN;
    double L1_density_dev = kNaN;
    double max_density_dev = kNaN;
    double tower_defect = kNaN;
    double term_total = kNaN;
    double t1 = kNaN;
    double t2 = kNaN;
    double t2a = kNaN;
    double t2b = kNaN;

    static constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
};

struct PureSingularityOptions {
    int lambda = 3;
    int kappa_min = 4;
    int kappa_max = 9;
    /// Density order; default floor((lambda + kappa) / 2) per row.
    std::optional<int> j;
    GridSpec grid{};
    double tolerance = 1e-9;
    double max_residual = 0.5;
    /// Columns below this are treated as exact zeros.
    double zero_threshold = 1e-10;
};

struct PureSingularityReport {
    std::string family;
    double parameter = 0.0;
    Interval U;
    int lambda = 0;
    double critical_offset = 0.0;
    std::vector<SingularityRow> rows;
    bool zero_run = false;
    bool bounds_hold = true;
    bool gap_decreasing = false;
    bool dtilde_decreasing = false;
    bool delta_decreasing = false;
    std::optional<DecayFit> gap_fit;
    std::optional<DecayFit> dtilde_fit;
    std::optional<DecayFit> delta_fit;
    /// v_j and L1 deviation for j = lambda+1 .. kappa_max-1 on the kappa_max seed-1 chain.
    std::vector<std::pair<int, double>> v_curve;
    std::vector<std::pair<int, double>> density_curve;
    std::optional<DecayFit> density_fit;
    bool pass = false;
};

namespace detail {

inline bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) return false;
    return true;
}

}  // namespace detail

inline PureSingularityReport pure_singularity_report(const CircleSystem& sys, const PureSingularityOptions& opt = {}) {
    if (!(opt.kappa_min > opt.lambda)) {
        throw DomainError("pure singularity run needs kappa > lambda (got kappa = " + std::to_string(opt.kappa_min) +
                          ", lambda = " + std::to_string(opt.lambda) + ")");
    }
    if (opt.kappa_max < opt.kappa_min) throw DomainError("empty kappa range");
    if (opt.kappa_max > sys.depth()) throw DepthError("kappa range beyond computed continued-fraction depth");
    const CircleMapLift& f = sys.map();
    PureSingularityReport rep;
    rep.family = f.family();
    rep.parameter = f.parameter();
    rep.lambda = opt.lambda;
    const SymmetricNeighborhood sn = symmetric_neighborhood(sys, opt.lambda);
    rep.U = sn.U;
    rep.critical_offset = sn.critical_offset;

    for (int kappa = opt.kappa_min; kappa <= opt.kappa_max; ++kappa) {
        SingularityRow row;
        row.kappa = kappa;
        row.lambda = opt.lambda;
        row.j = opt.j.value_or((opt.lambda + kappa) / 2);
        row.chain_fineness = std::numeric_limits<int>::max();
        for (long long s = 1; s < sys.q(kappa - 1); ++s) {
            const ChainOfIntervals chain = partition_chain(sys, kappa, s);
            const ApproximateMap a = approximate(f, chain, rep.U);
            const CancellationDecomposition d = circle_decomposition(a);
            const double gap = pure_singularity_gap(a, opt.grid);
            const double cgap = inverse_gap(d, opt.grid);
            const double dt = d_tilde(d, opt.grid);
            const double dl = delta_max(d);
            ++row.chains;
            row.stages = a.maps();
            row.kept = std::max(row.kept, a.kept_count);
            row.chain_fineness = std::min(row.chain_fineness, chain.fineness);
            row.gap = std::max(row.gap, gap);
            row.cancel_gap = std::max(row.cancel_gap, cgap);
            row.d_tilde = std::max(row.d_tilde, dt);
            row.delta = std::max(row.delta, dl);
            row.bound = std::max(row.bound, dt + 2.0 * dl);
            if (gap > dt + 2.0 * dl + opt.tolerance || cgap > dt + 2.0 * dl + opt.tolerance) row.bound_holds = false;
            if (s == 1 && row.j > opt.lambda && row.j < kappa) {
                const DensityProfile p = density_profile(sys, a, row.j, opt.lambda, kappa);
                row.E_chi = p.E_chi;
                row.v_j = p.v_j;
                row.L1_density_dev = p.L1_deviation;
                row.max_density_dev = p.max_deviation;
                row.tower_defect = p.tower_defect;
                row.term_total = p.term_total;
                row.t1 = p.t1;
                row.t2 = p.t2;
                row.t2a = p.t2a;
                row.t2b = p.t2b;
            }
        }
        rep.bounds_hold = rep.bounds_hold && row.bound_holds;
        rep.rows.push_back(row);
    }

    std::vector<double> xs, gaps, dts, dls;
    for (const auto& r : rep.rows) {
        xs.push_back(static_cast<double>(r.kappa - r.lambda));
        gaps.push_back(r.gap);
        dts.push_back(r.d_tilde);
        dls.push_back(r.delta);
    }
    rep.gap_decreasing = detail::strictly_decreasing(gaps);
    rep.dtilde_decreasing = detail::strictly_decreasing(dts);
    rep.delta_decreasing = detail::strictly_decreasing(dls);
    const auto all_zero = [&](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [&](double y) { return y <= opt.zero_threshold; });
    };
    rep.zero_run = all_zero(gaps) && all_zero(dts) && all_zero(dls);
    if (rep.zero_run) {
        rep.pass = rep.bounds_hold;
        return rep;
    }

    if (xs.size() >= 2) {
        rep.gap_fit = fit_decay(xs, gaps, DecayModel::ExpSqrt);
        rep.dtilde_fit = fit_decay(xs, dts, DecayModel::Exponential);
        rep.delta_fit = fit_decay(xs, dls, DecayModel::ExpSqrt);
    }

    // Density decay in kappa - j on the deepest row.
    const int kappa = opt.kappa_max;
    if (sys.q(kappa - 1) > 1 && kappa - opt.lambda >= 3) {
        const ApproximateMap a = approximate(f, partition_chain(sys, kappa, 1), rep.U);
        std::vector<double> dx, dy;
        for (int j = kappa - 1; j > opt.lambda; --j) {
            const DensityProfile p = density_profile(sys, a, j, opt.lambda, kappa);
            rep.v_curve.emplace_back(j, p.v_j);
            rep.density_curve.emplace_back(j, p.L1_deviation);
            if (p.L1_deviation > 0.0) {
                dx.push_back(static_cast<double>(kappa - j));
                dy.push_back(p.L1_deviation);
            }
        }
        if (dx.size() >= 2) rep.density_fit = fit_decay(dx, dy, DecayModel::ExpSqrt);
    }

    const auto fit_ok = [&](const std::optional<DecayFit>& fit) { return fit && fit->pass(opt.max_residual); };
    rep.pass = rep.bounds_hold && fit_ok(rep.gap_fit) && fit_ok(rep.dtilde_fit) && fit_ok(rep.delta_fit);
    return rep;
}

// ---------------------------------------------------------------------------
// Oscillation inequality for step functions

struct OscillationCheck {
    double C1 = 0.0;
    double eps = 0.0;
    double C2 = 0.0;
    double ratio = 0.0;
    [[nodiscard]] bool holds() const { return ratio >= 1.0 + C2 * eps; }
};

/// Step functions on equal cells of [0, 1], rescaled so that int g = int h = 1.
inline OscillationCheck oscillation_check(std::vector<double> g, std::vector<double> h) {
    if (g.size() != h.size() || g.empty()) throw DomainError("step functions need equal nonempty cell counts");
    const auto n = static_cast<double>(g.size());
    double sg = 0.0, sh = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!(g[i] > 0.0) || !(h[i] > 0.0)) throw DomainError("step functions must be positive");
        sg += g[i] / n;
        sh += h[i] / n;
    }
    OscillationCheck c;
    c.C1 = std::numeric_limits<double>::infinity();
    double gmax = 0.0, gmin = std::numeric_limits<double>::infinity(), gh = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] /= sg;
        h[i] /= sh;
        c.C1 = std::min(c.C1, h[i]);
        gmax = std::max(gmax, g[i]);
        gmin = std::min(gmin, g[i]);
        gh += g[i] * h[i] / n;
    }
    c.eps = gh - 1.0;
    c.C2 = 1.0 / (2.0 * (1.0 + c.C1));
    c.ratio = gmax / gmin;
    return c;
}

}  // namespace pmetric
