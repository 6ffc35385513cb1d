#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pmetric/model.hpp"
#include "pmetric/random.hpp"
#include "pmetric/roots.hpp"

namespace pmetric {

/// One (h_i, sigma_i) pair; h_i is applied first.
struct CompositionStage {
    MapDescriptor h;
    MapDescriptor sigma;
};

/// True when S(m) >= -tol / |domain|^2 on interior sample points.
inline bool has_nonnegative_schwarzian(const MapDescriptor& m, std::size_t points = 33, double tol = 1e-6) {
    if (m.kind() == MapKind::Affine || m.kind() == MapKind::LinearFractional) return true;
    const Interval& d = m.domain();
    const double scale = 1.0 / (d.length() * d.length());
    for (std::size_t i = 0; i < points; ++i) {
        const double x = d.at((static_cast<double>(i) + 0.5) / static_cast<double>(points));
        if (schwarzian(m, x) < -tol * scale) return false;
    }
    return true;
}

/// f = sigma_m o h_m o ... o sigma_1 o h_1 on an outer domain (a,d).
class StandardComposition {
public:
    explicit StandardComposition(std::vector<CompositionStage> stages, bool check_schwarzian = true)
        : stages_(std::move(stages)) {
        if (stages_.empty()) throw CompositionError("standard composition needs at least one stage");
        std::vector<MapDescriptor> chain;
        chain.reserve(2 * stages_.size());
        for (const auto& s : stages_) {
            chain.push_back(s.h);
            chain.push_back(s.sigma);
        }
        full_ = compose(std::move(chain));
        if (check_schwarzian) {
            for (std::size_t i = 0; i < stages_.size(); ++i) {
                if (!has_nonnegative_schwarzian(stages_[i].sigma)) {
                    throw CompositionError("sigma stage " + std::to_string(i + 1) + " has negative Schwarzian");
                }
            }
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return stages_.size(); }
    [[nodiscard]] const std::vector<CompositionStage>& stages() const noexcept { return stages_; }
    [[nodiscard]] const CompositionStage& operator[](std::size_t i) const { return stages_.at(i); }
    [[nodiscard]] const Interval& domain() const { return stages_.front().h.domain(); }
    [[nodiscard]] const Interval& image() const { return stages_.back().sigma.image(); }
    [[nodiscard]] const MapDescriptor& map() const noexcept { return full_; }

    /// f_i, the first i stages; f_0 is the identity on the outer domain.
    [[nodiscard]] MapDescriptor prefix(std::size_t i) const {
        if (i > stages_.size()) throw DepthError("prefix index beyond stage count");
        if (i == 0) return identity(domain());
        std::vector<MapDescriptor> chain;
        for (std::size_t k = 0; k < i; ++k) {
            chain.push_back(stages_[k].h);
            chain.push_back(stages_[k].sigma);
        }
        return compose(std::move(chain));
    }

    /// Same composition with every stage restricted along the orbit of sub.
    [[nodiscard]] StandardComposition restricted(const Interval& sub) const {
        std::vector<CompositionStage> out;
        Interval current = sub;
        for (const auto& s : stages_) {
            MapDescriptor h = restrict_to(s.h, current);
            MapDescriptor sigma = restrict_to(s.sigma, h.image());
            current = sigma.image();
            out.push_back({std::move(h), std::move(sigma)});
        }
        return StandardComposition(std::move(out), false);
    }

private:
    std::vector<CompositionStage> stages_;
    MapDescriptor full_;
};

// ---------------------------------------------------------------------------
// d2 and d1

inline double d2_norm(const StandardComposition& c, const GridSpec& grid = {}) {
    double sum = 0.0;
    for (const auto& s : c.stages()) sum += distortion_norm(s.h, grid);
    return sum;
}

struct D1Options {
    std::size_t samples = 100000;
    std::size_t grid_points = 20;
    std::uint64_t seed = 1;
    /// Estimates above -clamp are reported as exactly 0.
    double clamp = 1e-12;
};

struct D1Estimate {
    double value = 0.0;
    std::vector<double> per_stage;
    std::size_t quadruples = 0;
};

namespace detail {

/// log[rho(a,b) rho(c,d) / (rho(a,d) rho(b,c))] for the quadruple starting at x
/// with consecutive gaps g1, g2, g3.
inline double log_cr_distortion(const MapDescriptor& h, double x, double g1, double g2, double g3) {
    const double y1 = h.increment(x, g1);
    const double y2 = h.increment(x + g1, g2);
    const double y3 = h.increment(x + g1 + g2, g3);
    return std::log(y1 / g1) + std::log(y3 / g3) - std::log(y2 / g2) - std::log((y1 + y2 + y3) / (g1 + g2 + g3));
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// inf over increasing quadruples in the domain of h of the log cross-ratio
/// distortion, truncated at 0. Random quadruples are stratified by whether the
/// outer points sit on the domain endpoints and on which gaps are collapsed
/// (the infimum is often a limit along collapsing gaps); a coarse closed grid is added.
inline double stage_d1(const MapDescriptor& h, const D1Options& opt, std::uint64_t stage_seed,
                       std::size_t* count = nullptr) {
    if (h.kind() == MapKind::Affine || h.kind() == MapKind::LinearFractional) return 0.0;
    const Interval& dom = h.domain();
    const double len = dom.length();
    const double floor = 1e-13;
    double inf = 0.0;
    std::size_t n = 0;
    auto visit = [&](double u1, double u2, double u3, double u4) {
        const double g1 = u2 - u1, g2 = u3 - u2, g3 = u4 - u3;
        if (g1 < floor || g2 < floor || g3 < floor) return;
        inf = std::min(inf, detail::log_cr_distortion(h, dom.lo() + u1 * len, g1 * len, g2 * len, g3 * len));
        ++n;
    };
    const std::size_t k = opt.grid_points;
    if (k >= 4) {
        const auto node = [k](std::size_t i) { return static_cast<double>(i) / static_cast<double>(k - 1); };
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i + 1; j < k; ++j)
                for (std::size_t l = j + 1; l < k; ++l)
                    for (std::size_t r = l + 1; r < k; ++r) visit(node(i), node(j), node(l), node(r));
    }
    Rng rng(stage_seed);
    for (std::size_t s = 0; s < opt.samples; ++s) {
        double u[4] = {rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()};
        std::sort(u, u + 4);
        if (s & 1U) u[0] = 0.0;
        if (s & 2U) u[3] = 1.0;
        switch ((s >> 2) % 3) {
            case 1: u[2] = u[1] + 1e-7 * (u[3] - u[1]); break;
            case 2:
                u[1] = u[0] + 1e-7 * (u[3] - u[0]);
                u[2] = u[3] - 1e-7 * (u[3] - u[0]);
                break;
            default: break;
        }
        visit(u[0], u[1], u[2], u[3]);
    }
    if (count) *count += n;
    return inf > -opt.clamp ? 0.0 : inf;
}

inline D1Estimate d1_estimate(const StandardComposition& c, const D1Options& opt = {}) {
    D1Estimate est;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double v = stage_d1(c[i].h, opt, detail::mix_seed(opt.seed, i), &est.quadruples);
        est.per_stage.push_back(v);
        est.value += v;
    }
    return est;
}

/// d1 = sum over h stages of the truncated cross-ratio distortion; always <= 0.
inline double d1_norm(const StandardComposition& c, const D1Options& opt = {}) { return d1_estimate(c, opt).value; }

// ---------------------------------------------------------------------------
// Normalization

namespace detail {

/// Inverse of gamma -> gamma + t (P(gamma) - gamma).
inline double t_family_inverse(const LineMap& p, double t, double y, double bracket) {
    if (t == 0.0) return y;
    return invert_increasing([&](double g) { return g + t * (p(g) - g); }, y, y, bracket);
}

}  // namespace detail

/// Factors phi_1..phi_k of h with P(phi_j) = (id + t_j D) o (id + t_{j-1} D)^{-1},
/// D = P(h) - id and t_j = j/k. All factors but the last map dom(h) to itself.
inline std::vector<MapDescriptor> split_along_t_family(const MapDescriptor& h, std::size_t k, double bracket) {
    const LineMap p = model_map(h);
    std::vector<MapDescriptor> out;
    for (std::size_t j = 1; j <= k; ++j) {
        const double t = static_cast<double>(j) / static_cast<double>(k);
        const double s = static_cast<double>(j - 1) / static_cast<double>(k);
        auto fwd = [p](double tt, double g) { return g + tt * (p(g) - g); };
        auto model = [=](double y) { return fwd(t, detail::t_family_inverse(p, s, y, bracket)); };
        auto model_inv = [=](double z) { return fwd(s, detail::t_family_inverse(p, t, z, bracket)); };
        const Interval img = j == k ? h.image() : h.domain();
        out.push_back(model_defined(h.domain(), img, model, model_inv));
    }
    return out;
}

/// Split every h with D(h) > cap into ceil(D/cap) factors, inserting identity sigmas.
inline StandardComposition normalize_split(const StandardComposition& c, double cap = std::numbers::ln2,
                                           const GridSpec& grid = {}) {
    std::vector<CompositionStage> out;
    bool changed = false;
    for (const auto& s : c.stages()) {
        const double d = distortion_norm(s.h, grid);
        if (d <= cap) {
            out.push_back(s);
            continue;
        }
        changed = true;
        const auto k = static_cast<std::size_t>(std::ceil(d / cap));
        auto factors = split_along_t_family(s.h, k, d + 1.0);
        for (std::size_t j = 0; j + 1 < k; ++j) out.push_back({factors[j], identity(s.h.domain())});
        out.push_back({factors.back(), s.sigma});
    }
    if (!changed) return c;
    return StandardComposition(std::move(out), false);
}

// ---------------------------------------------------------------------------
// Reshuffling

/// P(f) rewritten as hbar_m o ... o hbar_1 o S with S = P(sigma_m) o ... o P(sigma_1).
struct Reshuffled {
    std::vector<LineMap> h_bar;
    std::vector<LineMap> sigma_models;
    LineMap sigma_product;
    LineMap model;
};

inline Reshuffled reshuffle(const StandardComposition& c) {
    const std::size_t m = c.size();
    std::vector<MapDescriptor> sigmas;
    for (const auto& s : c.stages()) sigmas.push_back(s.sigma);
    // T_i = P(sigma_m) o ... o P(sigma_i), zero-based i.
    auto tail = [sigmas](std::size_t i, double g) {
        for (std::size_t k = i; k < sigmas.size(); ++k) g = poincare_model(sigmas[k], g);
        return g;
    };
    auto tail_inverse = [sigmas](std::size_t i, double g) {
        for (std::size_t k = sigmas.size(); k-- > i;) g = poincare_model_inverse(sigmas[k], g);
        return g;
    };
    Reshuffled r;
    for (std::size_t i = 0; i < m; ++i) {
        const MapDescriptor h = c[i].h;
        r.h_bar.push_back([=](double g) { return tail(i, poincare_model(h, tail_inverse(i, g))); });
        r.sigma_models.push_back(model_map(sigmas[i]));
    }
    r.sigma_product = [tail](double g) { return tail(0, g); };
    r.model = [hb = r.h_bar, tail](double g) {
        g = tail(0, g);
        for (const auto& f : hb) g = f(g);
        return g;
    };
    return r;
}

// ---------------------------------------------------------------------------
// Uniform bounded distortion

/// Q from the frozen calibration suite (twice the largest value it requires, rounded up).
inline constexpr double kCalibratedQ = 8.0;

/// K(d1, d2) of the simplified bound.
inline double simplified_K(double d1, double d2, double Q) { return 2.0 + 4.0 * Q * d2 * std::exp(-d1); }

struct UbdlOptions {
    double Q = kCalibratedQ;
    D1Options d1;
    GridSpec grid;
    /// Reuse a d1 estimate computed elsewhere.
    std::optional<double> d1_value;
    double tolerance = 1e-9;
};

struct UbdlBoundReport {
    double d1 = 0.0;
    double d2 = 0.0;
    double cross_ratio_term = 0.0;
    double bound_technical = 0.0;
    double bound_simplified = 0.0;
    double measured = 0.0;
    double Q_used = 0.0;
    /// Smallest Q for which the technical bound would hold here.
    double Q_needed = 0.0;
    GridSpec grid;
    std::size_t d1_quadruples = 0;
    bool pass = false;
    bool simplified_pass = false;
};

inline double ubdl_technical_bound(double d1, double d2, double Q, const PointQuadruple& q) {
    const double ratio = std::min(1.0, (q.p3 - q.p2) / std::min(q.p2 - q.p1, q.p4 - q.p3));
    return Q * d2 * std::exp(std::abs(d1)) * ratio + d2 + 2.0 * std::abs(d1 + std::log(cross_ratio_Cr(q)));
}

inline UbdlBoundReport ubdl_verify(const StandardComposition& c, const Interval& sub, const UbdlOptions& opt = {}) {
    const Interval& outer = c.domain();
    const PointQuadruple q{outer.lo(), sub.lo(), sub.hi(), outer.hi()};
    detail::check_quadruple(q);
    UbdlBoundReport r;
    r.grid = opt.grid;
    r.Q_used = opt.Q;
    if (opt.d1_value) {
        r.d1 = *opt.d1_value;
    } else {
        const D1Estimate est = d1_estimate(c, opt.d1);
        r.d1 = est.value;
        r.d1_quadruples = est.quadruples;
    }
    r.d2 = d2_norm(c, opt.grid);
    r.cross_ratio_term = std::log(cross_ratio_Cr(q));
    r.measured = distortion_norm(restrict_to(c.map(), sub), opt.grid);
    r.bound_technical = ubdl_technical_bound(r.d1, r.d2, opt.Q, q);
    r.bound_simplified = r.d1 + r.d2 + simplified_K(r.d1, r.d2, opt.Q) * std::abs(r.cross_ratio_term);
    const double base = ubdl_technical_bound(r.d1, r.d2, 0.0, q);
    const double unit = ubdl_technical_bound(r.d1, r.d2, 1.0, q) - base;
    if (r.measured <= base) {
        r.Q_needed = 0.0;
    } else {
        r.Q_needed = unit > 0.0 ? (r.measured - base) / unit : std::numeric_limits<double>::infinity();
    }
    r.pass = r.measured <= r.bound_technical + opt.tolerance;
    r.simplified_pass = r.measured <= r.bound_simplified + opt.tolerance;
    return r;
}

// ---------------------------------------------------------------------------
// Linear-fractional surrogates

/// x -> (p x + q) / (r x + s).
struct LineMobius {
    double p = 1.0, q = 0.0, r = 0.0, s = 1.0;
    [[nodiscard]] double operator()(double x) const { return (p * x + q) / (r * x + s); }
    [[nodiscard]] double denominator(double x) const { return r * x + s; }
    [[nodiscard]] double determinant() const { return p * s - q * r; }
};

/// The Mobius map sending x1, x2, x3 to y1, y2, y3.
inline LineMobius mobius_through(double x1, double x2, double x3, double y1, double y2, double y3) {
    // M_x sends (x1, x2, x3) to (0, 1, inf).
    const double a = x2 - x3, b = -x1 * (x2 - x3), c = x2 - x1, d = -x3 * (x2 - x1);
    const double e = y2 - y3, f = -y1 * (y2 - y3), g = y2 - y1, h = -y3 * (y2 - y1);
    // M_y^{-1} M_x with M_y^{-1} = [[h, -f], [-g, e]].
    return {h * a - f * c, h * b - f * d, -g * a + e * c, -g * b + e * d};
}

struct DPrimeResult {
    /// d' in (c, d], or the mirrored endpoint a' in [a, b) when reflected.
    double endpoint = 0.0;
    bool reflected = false;
    /// Per stage, distance of the surrogate orbit from the far end of image(h_i), relative to its length.
    std::vector<double> margins;
};

/// Closed-form solution of CR(a,b,c,x) = exp(d1) CR(a,b,c,d) for x.
inline double dprime_closed_form(const PointQuadruple& q, double d1) {
    const double A = std::exp(d1) * (q.p4 - q.p3) / (q.p4 - q.p1);
    return (q.p3 - A * q.p1) / (1.0 - A);
}

inline DPrimeResult extend_domain_dprime(const StandardComposition& c, const Interval& sub, double d1) {
    const Interval& outer = c.domain();
    const PointQuadruple q{outer.lo(), sub.lo(), sub.hi(), outer.hi()};
    detail::check_quadruple(q);
    DPrimeResult res;
    res.reflected = (q.p2 - q.p1) > (q.p4 - q.p3);
    // Work with the orientation where b - a <= d - c.
    const PointQuadruple w = res.reflected ? PointQuadruple{-q.p4, -q.p3, -q.p2, -q.p1} : q;
    const double target = std::exp(d1) * (w.p4 - w.p3) / (w.p4 - w.p1);
    const double len = w.p4 - w.p1;
    const double x = bisect_increasing([&](double t) { return (t - w.p3) / (t - w.p1); }, target, w.p3, w.p4,
                                       1e-15 * len);
    res.endpoint = res.reflected ? -x : x;

    // Anchors: the three marked points on the side that stays fixed.
    double anchors[3] = {q.p1, q.p2, q.p3};
    if (res.reflected) {
        anchors[0] = q.p2;
        anchors[1] = q.p3;
        anchors[2] = q.p4;
    }
    double probe = res.endpoint;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const MapDescriptor& h = c[i].h;
        double ya[3];
        for (int k = 0; k < 3; ++k) ya[k] = h(anchors[k]);
        const LineMobius g = mobius_through(anchors[0], anchors[1], anchors[2], ya[0], ya[1], ya[2]);
        const double den = g.denominator(probe);
        const bool same_branch = den * g.denominator(anchors[1]) > 0.0 && g.determinant() * den * den > 0.0;
        const Interval& img = h.image();
        const double y = same_branch ? g(probe) : std::numeric_limits<double>::quiet_NaN();
        const double margin = res.reflected ? (y - img.lo()) / img.length() : (img.hi() - y) / img.length();
        res.margins.push_back(margin);
        if (!(margin >= -1e-9)) {
            std::ostringstream os;
            os.precision(17);
            os << "linear-fractional surrogate leaves image of h at stage " << (i + 1) << " (margin " << margin << ")";
            throw CompositionError(os.str());
        }
        const double yc = std::clamp(y, img.lo(), img.hi());
        probe = c[i].sigma(yc);
        for (int k = 0; k < 3; ++k) anchors[k] = c[i].sigma(ya[k]);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Single-map estimates

struct RatioEstimateCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    [[nodiscard]] bool holds(double tol = 1e-9) const { return lhs <= rhs + tol; }
};

/// |log(rho(a,b)/rho(a,c))| against Q D(phi) min(1, (c-b)/(b-a)) on (a,c) = dom(phi).
inline RatioEstimateCheck ratio_estimate_check(const MapDescriptor& phi, double b, double Q, const GridSpec& grid = {}) {
    const double a = phi.domain().lo(), c = phi.domain().hi();
    RatioEstimateCheck r;
    r.lhs = std::abs(std::log(rho(phi, a, b) / rho(phi, a, c)));
    r.rhs = Q * distortion_norm(phi, grid) * std::min(1.0, (c - b) / (b - a));
    return r;
}

// ---------------------------------------------------------------------------
// Random suites

struct SuiteOptions {
    std::size_t min_stages = 1;
    std::size_t max_stages = 20;
    /// Scale of h nonlinearity; 0 gives affine h stages.
    double h_strength = 1.0;
};

inline Interval random_interval(Rng& rng) {
    const double lo = rng.uniform(-2.0, 2.0);
    return Interval(lo, lo + rng.log_uniform(0.2, 5.0));
}

/// Strictly inside `outer`, with both gaps at least 1% of its length.
inline Interval random_sub_interval(Rng& rng, const Interval& outer) {
    double u = rng.uniform(0.01, 0.99), v = rng.uniform(0.01, 0.99);
    if (u > v) std::swap(u, v);
    if (v - u < 0.01) v = std::min(0.99, u + 0.01), u = v - 0.01;
    return Interval(outer.at(u), outer.at(v));
}

/// u -> u + eps sin(2 pi u) / (2 pi) rescaled to dom -> img.
inline MapDescriptor wobble_map(const Interval& dom, const Interval& img, double eps) {
    const double tau = 2.0 * std::numbers::pi;
    SampledCallbacks cb;
    const double li = dom.length(), lj = img.length(), lo = dom.lo(), jlo = img.lo();
    cb.value = [=](double x) {
        const double u = (x - lo) / li;
        return jlo + lj * (u + eps * std::sin(tau * u) / tau);
    };
    cb.jet = [=](double x) {
        const double u = (x - lo) / li;
        const double s = std::sin(tau * u), c = std::cos(tau * u);
        return Jet{jlo + lj * (u + eps * s / tau), lj * (1.0 + eps * c) / li, -lj * eps * tau * s / (li * li),
                   -lj * eps * tau * tau * c / (li * li * li)};
    };
    cb.increment = [=](double x, double h) {
        const double u = (x - lo) / li, du = h / li;
        // sin(a + b) - sin(a) = 2 cos(a + b/2) sin(b/2).
        return lj * (du + eps * 2.0 * std::cos(tau * (u + du / 2.0)) * std::sin(tau * du / 2.0) / tau);
    };
    return smooth_sampled(dom, cb, img);
}

/// tan on (alpha, beta) inside (-pi/2, pi/2), rescaled to dom -> img; S = 2 > 0.
inline MapDescriptor tangent_map(const Interval& dom, const Interval& img, double alpha, double beta) {
    SampledCallbacks cb;
    cb.value = [](double x) { return std::tan(x); };
    cb.jet = [](double x) {
        const double t = std::tan(x);
        const double s = 1.0 + t * t;
        return Jet{t, s, 2.0 * t * s, 2.0 * s * (1.0 + 3.0 * t * t)};
    };
    cb.increment = [](double x, double h) { return std::sin(h) / (std::cos(x) * std::cos(x + h)); };
    const Interval window(alpha, beta);
    const MapDescriptor core = smooth_sampled(window, cb, Interval(std::tan(alpha), std::tan(beta)));
    return compose({affine(dom, window), core, affine(core.image(), img)});
}

inline MapDescriptor random_h(Rng& rng, const Interval& dom, const Interval& img, double strength) {
    if (strength <= 0.0) return affine(dom, img);
    switch (rng.integer(0, 3)) {
        case 0: return constant_nonlinearity(dom, img, strength * rng.uniform(-1.0, 1.0) / dom.length());
        case 1: return power_law(dom, img, std::exp(strength * rng.uniform(-0.5, 0.5)), rng.uniform(0.5, 3.0));
        case 2: return linear_fractional(dom, img, std::exp(strength * rng.uniform(-0.5, 0.5)));
        default: return wobble_map(dom, img, strength * rng.uniform(-0.5, 0.5));
    }
}

inline MapDescriptor random_sigma(Rng& rng, const Interval& dom, const Interval& img) {
    switch (rng.integer(0, 3)) {
        case 0: return affine(dom, img);
        case 1: return linear_fractional(dom, img, rng.log_uniform(0.3, 3.0));
        case 2: return power_law(dom, img, rng.uniform(0.3, 0.95), rng.uniform(0.05, 2.0));
        default: {
            double a = rng.uniform(-1.3, 1.3), b = rng.uniform(-1.3, 1.3);
            if (a > b) std::swap(a, b);
            if (b - a < 0.2) b = a + 0.2;
            return tangent_map(dom, img, a, b);
        }
    }
}

inline StandardComposition random_standard_composition(Rng& rng, const SuiteOptions& opt = {}) {
    const auto m = static_cast<std::size_t>(rng.integer(static_cast<std::int64_t>(opt.min_stages),
                                                        static_cast<std::int64_t>(opt.max_stages)));
    std::vector<CompositionStage> stages;
    Interval current = random_interval(rng);
    for (std::size_t i = 0; i < m; ++i) {
        const Interval mid = random_interval(rng);
        const Interval next = random_interval(rng);
        MapDescriptor h = random_h(rng, current, mid, opt.h_strength);
        MapDescriptor sigma = random_sigma(rng, mid, next);
        stages.push_back({std::move(h), std::move(sigma)});
        current = next;
    }
    return normalize_split(StandardComposition(std::move(stages)));
}

struct UbdlCase {
    StandardComposition composition;
    Interval sub;
};

/// The frozen verification suite: `count` normalized compositions with one sub-interval each.
inline std::vector<UbdlCase> ubdl_suite(std::uint64_t seed, std::size_t count, const SuiteOptions& opt = {}) {
    Rng rng(seed);
    std::vector<UbdlCase> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        StandardComposition c = random_standard_composition(rng, opt);
        const Interval sub = random_sub_interval(rng, c.domain());
        out.push_back({std::move(c), sub});
    }
    return out;
}

inline constexpr std::uint64_t kUbdlSuiteSeed = 20240611;

/// Largest Q required by any case of a suite (Q = 0 when the other terms already dominate).
inline double calibrate_Q(const std::vector<UbdlCase>& suite, const UbdlOptions& opt = {}) {
    double worst = 0.0;
    for (const auto& cs : suite) worst = std::max(worst, ubdl_verify(cs.composition, cs.sub, opt).Q_needed);
    return worst;
}

}  // namespace pmetric
