#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pmetric/error.hpp"
#include "pmetric/interval.hpp"

namespace pmetric {

/// Value and first three derivatives at a point.
struct Jet {
    double v = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    double d3 = 0.0;
};

/// Chain rule up to third order: jet of outer o inner, given the inner jet at x
/// and the outer jet at inner(x).
inline Jet chain(const Jet& inner, const Jet& outer) noexcept {
    const double a1 = inner.d1;
    return {outer.v, outer.d1 * a1, outer.d2 * a1 * a1 + outer.d1 * inner.d2,
            outer.d3 * a1 * a1 * a1 + 3.0 * outer.d2 * a1 * inner.d2 + outer.d1 * inner.d3};
}

/// Jet of the inverse map at y = f(x), given the jet of f at x.
inline Jet inverse_jet(double x, const Jet& f) noexcept {
    const double a1 = f.d1;
    return {x, 1.0 / a1, -f.d2 / (a1 * a1 * a1),
            (3.0 * f.d2 * f.d2 - a1 * f.d3) / (a1 * a1 * a1 * a1 * a1)};
}

enum class MapKind {
    Affine,
    LinearFractional,
    ConstantNonlinearity,
    PowerLaw,
    SmoothSampled,
    Composition,
    Restriction,
    Inverse,
    ModelDefined,
};

inline const char* to_string(MapKind k) noexcept {
    switch (k) {
        case MapKind::Affine: return "affine";
        case MapKind::LinearFractional: return "linear-fractional";
        case MapKind::ConstantNonlinearity: return "constant-nonlinearity";
        case MapKind::PowerLaw: return "power-law";
        case MapKind::SmoothSampled: return "smooth-sampled";
        case MapKind::Composition: return "composition";
        case MapKind::Restriction: return "restriction";
        case MapKind::Inverse: return "inverse";
        case MapKind::ModelDefined: return "model-defined";
    }
    return "unknown";
}

/// Polymorphic implementation behind MapDescriptor. Nodes are immutable.
///
/// Besides plain evaluation every node provides `increment(x, h)`, the value
/// f(x + h) - f(x) computed without cancellation. Poincare coordinates are
/// logarithms of gaps to the interval ends, so all model computations are
/// routed through increments taken at the endpoints.
class MapNode {
public:
    MapNode(Interval domain, Interval image) : domain_(domain), image_(image) {}
    virtual ~MapNode() = default;

    [[nodiscard]] const Interval& domain() const noexcept { return domain_; }
    [[nodiscard]] const Interval& image() const noexcept { return image_; }

    [[nodiscard]] virtual MapKind kind() const noexcept = 0;
    [[nodiscard]] virtual double value(double x) const = 0;
    [[nodiscard]] virtual Jet jet(double x) const = 0;

    [[nodiscard]] virtual double increment(double x, double h) const { return value(x + h) - value(x); }

    /// Preimage of y, by monotone bisection unless a closed form exists.
    [[nodiscard]] virtual double inverse(double y) const {
        double lo = domain_.lo();
        double hi = domain_.hi();
        if (y <= image_.lo()) return lo;
        if (y >= image_.hi()) return hi;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * domain_.length(); ++it) {
            const double mid = 0.5 * (lo + hi);
            if (value(mid) < y) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    }

    /// f^{-1}(y + k) - f^{-1}(y) without cancellation.
    [[nodiscard]] virtual double inverse_increment(double y, double k) const {
        if (k == 0.0) return 0.0;
        const double x0 = inverse(y);
        double lo = 0.0;
        double hi = k > 0.0 ? domain_.hi() - x0 : domain_.lo() - x0;
        if (hi == 0.0) return 0.0;
        // increment(x0, h) - k changes sign between 0 and the far end; bisect on |h|.
        const double sign = k > 0.0 ? 1.0 : -1.0;
        for (int it = 0; it < 400; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double r = sign * (increment(x0, mid) - k);
            if (r < 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
            if (std::abs(hi - lo) <= 1e-16 * std::abs(hi)) break;
        }
        return 0.5 * (lo + hi);
    }

private:
    Interval domain_;
    Interval image_;
};

/// An orientation-preserving homeomorphism between two intervals, with
/// derivatives up to order three. Cheap to copy; the node is shared.
class MapDescriptor {
public:
    MapDescriptor() = default;
    explicit MapDescriptor(std::shared_ptr<const MapNode> node) : node_(std::move(node)) {}

    [[nodiscard]] const Interval& domain() const { return node_->domain(); }
    [[nodiscard]] const Interval& image() const { return node_->image(); }
    [[nodiscard]] MapKind kind() const { return node_->kind(); }
    [[nodiscard]] const MapNode& node() const { return *node_; }
    [[nodiscard]] const std::shared_ptr<const MapNode>& node_ptr() const { return node_; }

    /// Value at x; x must lie in the closed domain.
    [[nodiscard]] double operator()(double x) const {
        check_domain(x);
        if (x == domain().lo()) return image().lo();
        if (x == domain().hi()) return image().hi();
        return node_->value(x);
    }

    [[nodiscard]] Jet jet(double x) const {
        check_domain(x);
        return node_->jet(x);
    }

    [[nodiscard]] double increment(double x, double h) const { return node_->increment(x, h); }
    [[nodiscard]] double inverse(double y) const {
        const double tol = 1e-12 * image().length();
        if (y < image().lo() - tol || y > image().hi() + tol) {
            std::ostringstream os;
            os.precision(17);
            os << "point " << y << " outside image " << to_string(image());
            throw DomainError(os.str());
        }
        if (y <= image().lo()) return domain().lo();
        if (y >= image().hi()) return domain().hi();
        return node_->inverse(y);
    }
    [[nodiscard]] double inverse_increment(double y, double k) const { return node_->inverse_increment(y, k); }

    /// Image of a normalized domain point, as gaps to the ends of the normalized image.
    [[nodiscard]] UnitPoint forward_unit(UnitPoint u) const {
        const double li = domain().length();
        const double lj = image().length();
        const double lo = u.lo_gap == 0.0 ? 0.0 : increment(domain().lo(), u.lo_gap * li) / lj;
        const double hi = u.hi_gap == 0.0 ? 0.0 : -increment(domain().hi(), -u.hi_gap * li) / lj;
        return {std::max(lo, 0.0), std::max(hi, 0.0)};
    }

    /// Preimage of a normalized image point, as gaps to the ends of the normalized domain.
    [[nodiscard]] UnitPoint backward_unit(UnitPoint v) const {
        const double li = domain().length();
        const double lj = image().length();
        const double lo = v.lo_gap == 0.0 ? 0.0 : inverse_increment(image().lo(), v.lo_gap * lj) / li;
        const double hi = v.hi_gap == 0.0 ? 0.0 : -inverse_increment(image().hi(), -v.hi_gap * lj) / li;
        return {std::max(lo, 0.0), std::max(hi, 0.0)};
    }

private:
    void check_domain(double x) const {
        const double tol = 1e-12 * domain().length();
        if (!(x >= domain().lo() - tol && x <= domain().hi() + tol)) {
            std::ostringstream os;
            os.precision(17);
            os << "point " << x << " outside domain " << to_string(domain());
            throw DomainError(os.str());
        }
    }

    std::shared_ptr<const MapNode> node_;
};

namespace detail {

/// Finite-difference jet of f at x for a map on an interval of length `len`.
/// First derivative: central step 1e-5 len. Second: central step 1e-4 len.
/// Third: central 5-point stencil at steps 1e-3 len and 5e-4 len combined by
/// Richardson extrapolation, keeping roundoff near 1e-7 relative.
template <class F>
Jet finite_difference_jet(const F& f, double x, double len) {
    const double f0 = f(x);
    const double h1 = 1e-5 * len;
    const double h2 = 1e-4 * len;
    const double d1 = (f(x + h1) - f(x - h1)) / (2.0 * h1);
    const double d2 = (f(x + h2) - 2.0 * f0 + f(x - h2)) / (h2 * h2);
    auto third = [&](double h) {
        return (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h * h * h);
    };
    const double coarse = third(4e-3 * len);
    const double fine = third(2e-3 * len);
    return {f0, d1, d2, (4.0 * fine - coarse) / 3.0};
}

/// Node defined by a normalized shape s: [0,1] -> [0,1] conjugated by the
/// affine maps of its domain and image.
class ShapeNode : public MapNode {
public:
    using MapNode::MapNode;

    [[nodiscard]] double value(double x) const override {
        return image().lo() + image().length() * s(u_of(x));
    }
    [[nodiscard]] double increment(double x, double h) const override {
        return image().length() * s_inc(u_of(x), h / domain().length());
    }
    [[nodiscard]] Jet jet(double x) const override {
        const Jet n = s_jet(u_of(x));
        const double li = domain().length();
        const double lj = image().length();
        return {image().lo() + lj * n.v, lj * n.d1 / li, lj * n.d2 / (li * li), lj * n.d3 / (li * li * li)};
    }
    [[nodiscard]] double inverse(double y) const override {
        return domain().lo() + domain().length() * s_inv((y - image().lo()) / image().length());
    }
    [[nodiscard]] double inverse_increment(double y, double k) const override {
        return domain().length() * s_inv_inc((y - image().lo()) / image().length(), k / image().length());
    }

protected:
    [[nodiscard]] double u_of(double x) const { return (x - domain().lo()) / domain().length(); }

    [[nodiscard]] virtual double s(double u) const = 0;
    [[nodiscard]] virtual double s_inc(double u, double du) const = 0;
    [[nodiscard]] virtual Jet s_jet(double u) const = 0;
    [[nodiscard]] virtual double s_inv(double v) const = 0;
    [[nodiscard]] virtual double s_inv_inc(double v, double dv) const = 0;
};

class AffineNode final : public ShapeNode {
public:
    using ShapeNode::ShapeNode;
    [[nodiscard]] MapKind kind() const noexcept override { return MapKind::Affine; }

protected:
    [[nodiscard]] double s(double u) const override { return u; }
    [[nodiscard]] double s_inc(double, double du) const override { return du; }
    [[nodiscard]] Jet s_jet(double u) const override { return {u, 1.0, 0.0, 0.0}; }
    [[nodiscard]] double s_inv(double v) const override { return v; }
    [[nodiscard]] double s_inv_inc(double, double dv) const override { return dv; }
};

/// u -> u / (k + (1 - k) u): the linear-fractional self-map of [0,1] whose
/// Poincare model is the translation by -log k.
inline double lf_value(double k, double u) { return u / (k + (1.0 - k) * u); }
inline double lf_increment(double k, double u, double du) {
    const double c = 1.0 - k;
    return k * du / ((k + c * u) * (k + c * (u + du)));
}

class LinearFractionalNode final : public ShapeNode {
public:
    LinearFractionalNode(Interval domain, Interval image, double k) : ShapeNode(domain, image), k_(k) {
        if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("linear-fractional parameter must be positive");
    }
    [[nodiscard]] MapKind kind() const noexcept override { return MapKind::LinearFractional; }
    [[nodiscard]] double parameter() const noexcept { return k_; }

protected:
    [[nodiscard]] double s(double u) const override { return lf_value(k_, u); }
    [[nodiscard]] double s_inc(double u, double du) const override { return lf_increment(k_, u, du); }
    [[nodiscard]] Jet s_jet(double u) const override {
        const double c = 1.0 - k_;
        const double d = k_ + c * u;
        return {u / d, k_ / (d * d), -2.0 * k_ * c / (d * d * d), 6.0 * k_ * c * c / (d * d * d * d)};
    }
    [[nodiscard]] double s_inv(double v) const override { return lf_value(1.0 / k_, v); }
    [[nodiscard]] double s_inv_inc(double v, double dv) const override { return lf_increment(1.0 / k_, v, dv); }

private:
    double k_;
};

/// u -> expm1(n u) / expm1(n): constant nonlinearity n on the unit interval.
class ConstantNonlinearityNode final : public ShapeNode {
public:
    ConstantNonlinearityNode(Interval domain, Interval image, double n)
        : ShapeNode(domain, image), n_(n), nn_(n * domain.length()) {
        if (!std::isfinite(nn_)) throw DomainError("nonlinearity coefficient must be finite");
        if (nn_ != 0.0) scale_ = std::expm1(nn_);
    }
    [[nodiscard]] MapKind kind() const noexcept override { return MapKind::ConstantNonlinearity; }
    [[nodiscard]] double coefficient() const noexcept { return n_; }

protected:
    [[nodiscard]] double s(double u) const override {
        return nn_ == 0.0 ? u : std::expm1(nn_ * u) / scale_;
    }
    [[nodiscard]] double s_inc(double u, double du) const override {
        return nn_ == 0.0 ? du : std::exp(nn_ * u) * std::expm1(nn_ * du) / scale_;
    }
    [[nodiscard]] Jet s_jet(double u) const override {
        if (nn_ == 0.0) return {u, 1.0, 0.0, 0.0};
        const double e = std::exp(nn_ * u) / scale_;
        return {std::expm1(nn_ * u) / scale_, nn_ * e, nn_ * nn_ * e, nn_ * nn_ * nn_ * e};
    }
    [[nodiscard]] double s_inv(double v) const override {
        return nn_ == 0.0 ? v : std::log1p(v * scale_) / nn_;
    }
    [[nodiscard]] double s_inv_inc(double v, double dv) const override {
        if (nn_ == 0.0) return dv;
        // exp(nn u') = exp(nn u) + dv * scale
        const double base = 1.0 + v * scale_;
        return std::log1p(dv * scale_ / base) / nn_;
    }

private:
    double n_;
    double nn_;
    double scale_ = 1.0;
};

/// u -> ((offset + u)^beta - offset^beta) / ((offset + 1)^beta - offset^beta).
class PowerLawNode final : public ShapeNode {
public:
    PowerLawNode(Interval domain, Interval image, double beta, double offset)
        : ShapeNode(domain, image), beta_(beta), offset_(offset) {
        if (!(beta > 0.0) || !(offset >= 0.0)) throw DomainError("power law needs beta > 0 and offset >= 0");
        base_ = std::pow(offset, beta);
        norm_ = std::pow(offset + 1.0, beta) - base_;
    }
    [[nodiscard]] MapKind kind() const noexcept override { return MapKind::PowerLaw; }
    [[nodiscard]] double exponent() const noexcept { return beta_; }
    [[nodiscard]] double offset() const noexcept { return offset_; }

protected:
    [[nodiscard]] double s(double u) const override {
        return (std::pow(offset_ + u, beta_) - base_) / norm_;
    }
    [[nodiscard]] double s_inc(double u, double du) const override {
        const double w = offset_ + u;
        if (w <= 0.0) return std::pow(std::max(du, 0.0), beta_) / norm_;
        return std::pow(w, beta_) * std::expm1(beta_ * std::log1p(du / w)) / norm_;
    }
    [[nodiscard]] Jet s_jet(double u) const override {
        const double w = offset_ + u;
        const double b = beta_;
        return {s(u), b * std::pow(w, b - 1.0) / norm_, b * (b - 1.0) * std::pow(w, b - 2.0) / norm_,
                b * (b - 1.0) * (b - 2.0) * std::pow(w, b - 3.0) / norm_};
    }
    [[nodiscard]] double s_inv(double v) const override {
        return std::pow(std::max(v * norm_ + base_, 0.0), 1.0 / beta_) - offset_;
    }
    [[nodiscard]] double s_inv_inc(double v, double dv) const override {
        const double w = s_inv(v) + offset_;
        const double big_w = std::pow(w, beta_);
        if (big_w <= 0.0) return std::pow(std::max(dv * norm_, 0.0), 1.0 / beta_);
        return w * std::expm1(std::log1p(dv * norm_ / big_w) / beta_);
    }

private:
    double beta_;
    double offset_;
    double base_ = 0.0;
    double norm_ = 1.0;
};

/// Map given by callbacks; derivatives by finite differences unless a jet
/// callback is supplied. The value callback must accept points slightly
/// outside the domain.
class SampledNode final : public MapNode {
public:
    SampledNode(Interval domain, Interval image, std::function<double(double)> value,
                std::function<Jet(double)> jet, std::function<double(double, double)> increment)
        : MapNode(domain, image), value_(std::move(value)), jet_(std::move(jet)), increment_(std::move(increment)) {}

    [[nodiscard]] MapKind kind() const noexcept override { return MapKind::SmoothSampled; }
    [[nodiscard]] double value(double x) const override { return value_(x); }

    [[nodiscard]] Jet jet(double x) const override {
        if (jet_) return jet_(x);
        return finite_difference_jet(value_, x, domain().length());
    }

    [[nodiscard]] double increment(double x, double h) const override {
        if (increment_) return increment_(x, h);
        if (std::abs(h) < 1e-4 * domain().length()) {
            const Jet j = jet(x);
            return h * (j.d1 + h * (j.d2 / 2.0 + h * j.d3 / 6.0));
        }
        return value_(x + h) - value_(x);
    }

private:
    std::function<double(double)> value_;
    std::function<Jet(double)> jet_;
    std::function<double(double, double)> increment_;
};

class CompositionNode final : public MapNode {
public:
    explicit CompositionNode(std::vector<MapDescriptor> stages)
        : MapNode(stages.front().domain(), stages.back().image()), stages_(std::move(stages)) {}

    [[nodiscard]] MapKind kind() const noexcept override { return MapKind::Composition; }
    [[nodiscard]] const std::vector<MapDescriptor>& stages() const noexcept { return stages_; }

    [[nodiscard]] double value(double x) const override {
        for (const auto& s : stages_) x = s.node().value(x);
        return x;
    }
    [[nodiscard]] double increment(double x, double h) const override {
        for (const auto& s : stages_) {
            const double y = s.node().value(x);
            h = s.node().increment(x, h);
            x = y;
        }
        return h;
    }
    [[nodiscard]] Jet jet(double x) const override {
        Jet acc{x, 1.0, 0.0, 0.0};
        for (const auto& s : stages_) acc = chain(acc, s.node().jet(acc.v));
        return acc;
    }
    [[nodiscard]] double inverse(double y) const override {
        for (auto it = stages_.rbegin(); it != stages_.rend(); ++it) y = it->node().inverse(y);
        return y;
    }
    [[nodiscard]] double inverse_increment(double y, double k) const override {
        for (auto it = stages_.rbegin(); it != stages_.rend(); ++it) {
            const double x = it->node().inverse(y);
            k = it->node().inverse_increment(y, k);
            y = x;
        }
        return k;
    }

private:
    std::vector<MapDescriptor> stages_;
};

class RestrictionNode final : public MapNode {
public:
    RestrictionNode(MapDescriptor inner, Interval sub, Interval image)
        : MapNode(sub, image), inner_(std::move(inner)) {}

    [[nodiscard]] MapKind kind() const noexcept override { return MapKind::Restriction; }
    [[nodiscard]] const MapDescriptor& inner() const noexcept { return inner_; }
    [[nodiscard]] double value(double x) const override { return inner_.node().value(x); }
    [[nodiscard]] double increment(double x, double h) const override { return inner_.node().increment(x, h); }
    [[nodiscard]] Jet jet(double x) const override { return inner_.node().jet(x); }
    [[nodiscard]] double inverse(double y) const override { return inner_.node().inverse(y); }
    [[nodiscard]] double inverse_increment(double y, double k) const override {
        return inner_.node().inverse_increment(y, k);
    }

private:
    MapDescriptor inner_;
};

class InverseNode final : public MapNode {
public:
    explicit InverseNode(MapDescriptor inner) : MapNode(inner.image(), inner.domain()), inner_(std::move(inner)) {}

    [[nodiscard]] MapKind kind() const noexcept override { return MapKind::Inverse; }
    [[nodiscard]] const MapDescriptor& inner() const noexcept { return inner_; }
    [[nodiscard]] double value(double y) const override { return inner_.node().inverse(y); }
    [[nodiscard]] double increment(double y, double k) const override { return inner_.node().inverse_increment(y, k); }
    [[nodiscard]] Jet jet(double y) const override {
        const double x = inner_.node().inverse(y);
        return inverse_jet(x, inner_.node().jet(x));
    }
    [[nodiscard]] double inverse(double x) const override { return inner_.node().value(x); }
    [[nodiscard]] double inverse_increment(double x, double h) const override { return inner_.node().increment(x, h); }

private:
    MapDescriptor inner_;
};

/// Map defined through its Poincare model: unit-interval normalization of
/// domain and image, conjugated by the (0,1) Poincare coordinate.
class ModelNode final : public MapNode {
public:
    ModelNode(Interval domain, Interval image, std::function<double(double)> model,
              std::function<double(double)> model_inverse)
        : MapNode(domain, image), model_(std::move(model)), model_inverse_(std::move(model_inverse)) {}

    [[nodiscard]] MapKind kind() const noexcept override { return MapKind::ModelDefined; }

    [[nodiscard]] double value(double x) const override {
        const UnitPoint v = forward(x);
        return v.lo_gap <= v.hi_gap ? image().lo() + v.lo_gap * image().length()
                                    : image().hi() - v.hi_gap * image().length();
    }
    [[nodiscard]] double increment(double x, double h) const override {
        const UnitPoint a = forward(x);
        const UnitPoint b = forward(x + h);
        const bool near_lo = (x - domain().lo()) <= (domain().hi() - x);
        return image().length() * (near_lo ? b.lo_gap - a.lo_gap : a.hi_gap - b.hi_gap);
    }
    [[nodiscard]] Jet jet(double x) const override {
        const double x0 = x;
        const double f0 = value(x0);
        return finite_difference_jet([&](double t) { return f0 + increment(x0, t - x0); }, x0, domain().length());
    }
    [[nodiscard]] double inverse(double y) const override {
        const UnitPoint u = backward(y);
        return u.lo_gap <= u.hi_gap ? domain().lo() + u.lo_gap * domain().length()
                                    : domain().hi() - u.hi_gap * domain().length();
    }
    [[nodiscard]] double inverse_increment(double y, double k) const override {
        const UnitPoint a = backward(y);
        const UnitPoint b = backward(y + k);
        const bool near_lo = (y - image().lo()) <= (image().hi() - y);
        return domain().length() * (near_lo ? b.lo_gap - a.lo_gap : a.hi_gap - b.hi_gap);
    }

private:
    static UnitPoint gaps(const Interval& i, double x) {
        return {std::max(x - i.lo(), 0.0) / i.length(), std::max(i.hi() - x, 0.0) / i.length()};
    }
    static UnitPoint apply(const std::function<double(double)>& fn, UnitPoint u) {
        if (u.lo_gap <= 0.0) return {0.0, 1.0};
        if (u.hi_gap <= 0.0) return {1.0, 0.0};
        return unit_point_from_coordinate(fn(logit_from_gaps(u.lo_gap, u.hi_gap)));
    }
    [[nodiscard]] UnitPoint forward(double x) const { return apply(model_, gaps(domain(), x)); }
    [[nodiscard]] UnitPoint backward(double y) const { return apply(model_inverse_, gaps(image(), y)); }

    std::function<double(double)> model_;
    std::function<double(double)> model_inverse_;
};

inline bool endpoints_match(double a, double b, double scale) {
    return std::abs(a - b) <= 1e-10 * std::max({1.0, std::abs(a), std::abs(b), scale});
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Factories
// ---------------------------------------------------------------------------

inline MapDescriptor affine(const Interval& domain, const Interval& image) {
    return MapDescriptor(std::make_shared<detail::AffineNode>(domain, image));
}

inline MapDescriptor identity(const Interval& domain) { return affine(domain, domain); }

/// Linear-fractional map domain -> image whose normalized form is
/// u -> u / (k + (1-k) u); its Poincare model translates by -log k.
inline MapDescriptor linear_fractional(const Interval& domain, const Interval& image, double k) {
    return MapDescriptor(std::make_shared<detail::LinearFractionalNode>(domain, image, k));
}

/// Linear-fractional map whose Poincare model is the translation by `displacement`.
inline MapDescriptor linear_fractional_with_displacement(const Interval& domain, const Interval& image,
                                                         double displacement) {
    return linear_fractional(domain, image, std::exp(-displacement));
}

/// x -> (p x + q) / (r x + s) restricted to `domain`; must be increasing and
/// free of poles on the closed domain.
inline MapDescriptor mobius(const Interval& domain, double p, double q, double r, double s) {
    const double det = p * s - q * r;
    const double da = r * domain.lo() + s;
    const double dd = r * domain.hi() + s;
    if (!(det > 0.0) || !(da * dd > 0.0)) throw DomainError("mobius map is not an increasing homeomorphism on domain");
    const Interval image((p * domain.lo() + q) / da, (p * domain.hi() + q) / dd);
    // g'(hi) / g'(lo) = (da / dd)^2 = k^2 for the normalized form.
    return linear_fractional(domain, image, da / dd);
}

/// Map with f''/f' = n everywhere (n measured in domain units).
inline MapDescriptor constant_nonlinearity(const Interval& domain, const Interval& image, double n) {
    return MapDescriptor(std::make_shared<detail::ConstantNonlinearityNode>(domain, image, n));
}

inline MapDescriptor power_law(const Interval& domain, const Interval& image, double beta, double offset) {
    return MapDescriptor(std::make_shared<detail::PowerLawNode>(domain, image, beta, offset));
}

/// x -> x^beta on a domain with lo >= 0.
inline MapDescriptor power_map(double beta, const Interval& domain) {
    if (domain.lo() < 0.0) throw DomainError("power_map needs a non-negative domain");
    return power_law(domain, Interval(std::pow(domain.lo(), beta), std::pow(domain.hi(), beta)), beta,
                     domain.lo() / domain.length());
}

struct SampledCallbacks {
    std::function<double(double)> value;
    std::function<Jet(double)> jet;                  ///< optional
    std::function<double(double, double)> increment; ///< optional
};

inline MapDescriptor smooth_sampled(const Interval& domain, SampledCallbacks cb,
                                    std::optional<Interval> image = std::nullopt) {
    if (!cb.value) throw DomainError("smooth_sampled requires a value callback");
    const Interval img = image ? *image : Interval(cb.value(domain.lo()), cb.value(domain.hi()));
    return MapDescriptor(std::make_shared<detail::SampledNode>(domain, img, std::move(cb.value), std::move(cb.jet),
                                                               std::move(cb.increment)));
}

/// Composition applying stages[0] first. Adjacent stages must share endpoints
/// within 1e-10 relative.
inline MapDescriptor compose(std::vector<MapDescriptor> stages) {
    if (stages.empty()) throw CompositionError("empty composition");
    if (stages.size() == 1) return stages.front();
    for (std::size_t i = 0; i + 1 < stages.size(); ++i) {
        const Interval& img = stages[i].image();
        const Interval& dom = stages[i + 1].domain();
        const double scale = std::max(img.length(), dom.length());
        if (!detail::endpoints_match(img.lo(), dom.lo(), scale) || !detail::endpoints_match(img.hi(), dom.hi(), scale)) {
            throw CompositionError("stage " + std::to_string(i) + " image " + to_string(img) +
                                   " does not match stage " + std::to_string(i + 1) + " domain " + to_string(dom));
        }
    }
    return MapDescriptor(std::make_shared<detail::CompositionNode>(std::move(stages)));
}

inline MapDescriptor compose(const MapDescriptor& first, const MapDescriptor& second) {
    return compose(std::vector<MapDescriptor>{first, second});
}

inline MapDescriptor restrict_to(const MapDescriptor& m, const Interval& sub) {
    const double tol = 1e-12 * m.domain().length();
    if (!m.domain().contains(sub, tol)) {
        throw DomainError("restriction " + to_string(sub) + " not inside domain " + to_string(m.domain()));
    }
    if (sub == m.domain()) return m;
    return MapDescriptor(std::make_shared<detail::RestrictionNode>(m, sub, Interval(m(sub.lo()), m(sub.hi()))));
}

inline MapDescriptor inverse(const MapDescriptor& m) {
    if (m.kind() == MapKind::Inverse) {
        return static_cast<const detail::InverseNode&>(m.node()).inner();
    }
    return MapDescriptor(std::make_shared<detail::InverseNode>(m));
}

/// Interval map given by its Poincare model map and the inverse of that model map.
inline MapDescriptor model_defined(const Interval& domain, const Interval& image, std::function<double(double)> model,
                                   std::function<double(double)> model_inverse) {
    return MapDescriptor(
        std::make_shared<detail::ModelNode>(domain, image, std::move(model), std::move(model_inverse)));
}

}  // namespace pmetric
