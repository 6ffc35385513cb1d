#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "pmetric/random.hpp"
#include "pmetric/singularity.hpp"

using namespace pmetric;

namespace {

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

const CircleSystem& arnold_system() {
    static const CircleSystem sys(arnold_critical(find_parameter(arnold_critical, {}, 0.55, 0.7)), 14);
    return sys;
}

const CircleSystem& rigid_system() {
    static const CircleSystem sys(rigid_rotation(kGolden), 14);
    return sys;
}

GridSpec coarse_grid() {
    GridSpec g;
    g.points = 1024;
    return g;
}

}  // namespace

TEST(DecayFit, RecoversExactModels) {
    std::vector<double> xs{1, 2, 3, 4, 5}, e, r;
    for (double x : xs) {
        e.push_back(2.0 * std::pow(0.5, x));
        r.push_back(3.0 * std::pow(0.25, std::sqrt(x)));
    }
    const auto fe = fit_decay(xs, e, DecayModel::Exponential);
    EXPECT_NEAR(fe.K1, 2.0, 1e-12);
    EXPECT_NEAR(fe.K2, 0.5, 1e-12);
    EXPECT_NEAR(fe.residual, 0.0, 1e-12);
    EXPECT_TRUE(fe.strictly_decreasing());
    EXPECT_NEAR(fe.predict(6.0), 2.0 / 64.0, 1e-12);
    const auto fr = fit_decay(xs, r, DecayModel::ExpSqrt);
    EXPECT_NEAR(fr.K1, 3.0, 1e-12);
    EXPECT_NEAR(fr.K2, 0.25, 1e-12);
    EXPECT_TRUE(fr.pass(1e-9));
}

TEST(DecayFit, RejectsBadInput) {
    EXPECT_THROW(fit_decay({1.0}, {1.0}, DecayModel::Exponential), DomainError);
    EXPECT_THROW(fit_decay({1.0, 2.0}, {1.0, 0.0}, DecayModel::Exponential), DomainError);
    EXPECT_THROW(fit_decay({1.0, 1.0}, {1.0, 0.5}, DecayModel::Exponential), DomainError);
    const auto grow = fit_decay({1.0, 2.0, 3.0}, {1.0, 2.0, 4.0}, DecayModel::Exponential);
    EXPECT_FALSE(grow.pass(1.0));
}

TEST(ArcIntersection, Pieces) {
    const auto p = arc_intersection(Interval(0.8, 1.1), Interval(-0.05, 0.05));
    ASSERT_EQ(p.size(), 1u);
    EXPECT_NEAR(p[0].lo(), 0.95, 1e-15);
    EXPECT_NEAR(p[0].hi(), 1.05, 1e-15);
    EXPECT_TRUE(arc_intersection(Interval(0.2, 0.3), Interval(0.4, 0.5)).empty());
}

TEST(PartitionChain, DisjointAndAvoidsCriticalPoint) {
    for (const CircleSystem* sys : {&rigid_system(), &arnold_system()}) {
        for (int kappa = 3; kappa <= 9; ++kappa) {
            for (long long s = 1; s < sys->q(kappa - 1); ++s) {
                const auto c = partition_chain(*sys, kappa, s);
                EXPECT_TRUE(c.disjoint);
                EXPECT_EQ(c.intervals.size(), static_cast<std::size_t>(sys->q(kappa)));
                EXPECT_GE(c.fineness, kappa);
            }
        }
        EXPECT_THROW(partition_chain(*sys, 5, 0), DepthError);
        EXPECT_THROW(partition_chain(*sys, 5, sys->q(4)), DepthError);
    }
}

TEST(Approximate, RigidRotationHasNoGap) {
    const auto& sys = rigid_system();
    const auto U = symmetric_neighborhood(sys, 3).U;
    const auto a = approximate(sys.map(), partition_chain(sys, 7, 1), U);
    EXPECT_LT(pure_singularity_gap(a, coarse_grid()), 1e-12);
    const auto d = circle_decomposition(a);
    EXPECT_LT(d_tilde(d, coarse_grid()), 1e-12);
    EXPECT_EQ(delta_max(d), 0.0);
}

TEST(Approximate, ChainInsideUIsKeptExactly) {
    const auto& f = arnold_system().map();
    const Interval U(-0.24, 0.24);
    // Only stage domains are tested against U.
    const auto chain = build_chain(f, Interval(0.02, 0.05), 1);
    const auto a = approximate(f, chain, U);
    EXPECT_EQ(a.kept_count, 1u);
    EXPECT_EQ(pure_singularity_gap(a, coarse_grid()), 0.0);
}

TEST(Approximate, MixedStagesMatchEndpoints) {
    const auto& sys = arnold_system();
    const auto U = symmetric_neighborhood(sys, 3).U;
    const auto chain = partition_chain(sys, 7, 1);
    const auto a = approximate(sys.map(), chain, U);
    EXPECT_GT(a.kept_count, 0u);
    EXPECT_LT(a.kept_count, a.maps());
    EXPECT_NEAR(a.composed.image().lo(), chain.intervals.back().lo(), 1e-10);
    EXPECT_NEAR(a.composed.image().hi(), chain.intervals.back().hi(), 1e-10);
    EXPECT_NEAR(a.iterate.image().lo(), a.composed.image().lo(), 1e-10);
    for (double x : linspace(chain.intervals[0].lo(), chain.intervals[0].hi(), 9)) {
        EXPECT_GE(a.composed(x), chain.intervals.back().lo() - 1e-12);
    }
    EXPECT_THROW(approximate(sys.map(), chain, Interval(-0.1, 0.2)), DomainError);
}

TEST(HPrescription, AffineGivesIdentityG) {
    const auto p = h_prescription(affine(Interval(0, 1), Interval(2, 5)));
    EXPECT_EQ(p.delta, 0.0);
    EXPECT_LT(distortion_norm(p.g, coarse_grid()), 1e-12);
}

TEST(HPrescription, ConstantNonlinearityDisplacement) {
    for (double n : {-1.5, -0.2, 0.3, 2.0}) {
        const auto H = constant_nonlinearity(Interval(0, 1), Interval(0, 1), n);
        const auto p = h_prescription(H);
        EXPECT_NEAR(p.delta, -n / 2.0, 1e-12);
        EXPECT_NEAR(poincare_model(p.h, 0.7) - 0.7, -n / 2.0, 1e-12);
        for (double x : linspace(0.0, 1.0, 21)) EXPECT_NEAR(p.h(p.g(x)), H(x), 1e-9);
    }
}

TEST(HPrescription, SurrogateErrorIsQuadraticInRelativeSize) {
    const auto f = arnold_critical(0.6);
    const double center = 0.35;
    std::vector<double> norms;
    for (double len : {0.04, 0.02, 0.01}) {
        const Interval J(center - len / 2.0, center + len / 2.0);
        const auto p = h_prescription(f.restricted(J));
        const double ratio = len / arc_distance(J, 0.0);
        norms.push_back(distortion_norm(p.g, coarse_grid()));
        EXPECT_LT(norms.back(), ratio * ratio);
        for (double x : linspace(J.lo(), J.hi(), 11)) EXPECT_NEAR(p.h(p.g(x)), f.restricted(J)(x), 1e-9);
    }
    EXPECT_NEAR(norms[0] / norms[1], 4.0, 0.5);
    EXPECT_NEAR(norms[1] / norms[2], 4.0, 0.5);
    EXPECT_THROW(h_prescription(f.restricted(Interval(-0.1, 0.1))), CriticalPointError);
}

TEST(CircleDecomposition, DisplacementsMatchLogDerivative) {
    const auto& sys = arnold_system();
    const auto U = symmetric_neighborhood(sys, 3).U;
    const auto a = approximate(sys.map(), partition_chain(sys, 8, 2), U);
    const auto d = circle_decomposition(a);
    ASSERT_EQ(d.size(), a.maps());
    for (std::size_t i = 0; i < d.size(); ++i) {
        const std::size_t t = a.maps() - 1 - i;
        const Interval& J = a.chain.intervals[t];
        const double expected =
            a.kept[t] ? 0.0 : 0.5 * (std::log(sys.map().derivative(J.hi())) - std::log(sys.map().derivative(J.lo())));
        EXPECT_NEAR(d.deltas()[i], expected, 1e-12);
    }
    EXPECT_NEAR(delta_circle(sys.map(), a), delta_max(d), 1e-10);
}

TEST(CircleDecomposition, CancellationBoundHoldsForEveryChain) {
    const auto& sys = arnold_system();
    const auto U = symmetric_neighborhood(sys, 3).U;
    for (int kappa = 4; kappa <= 7; ++kappa) {
        for (long long s = 1; s < sys.q(kappa - 1); ++s) {
            const auto a = approximate(sys.map(), partition_chain(sys, kappa, s), U);
            const auto d = circle_decomposition(a);
            const double bound = d_tilde(d, coarse_grid()) + 2.0 * delta_max(d);
            EXPECT_LE(pure_singularity_gap(a, coarse_grid()), bound + 1e-9);
            EXPECT_LE(inverse_gap(d, coarse_grid()), bound + 1e-9);
        }
    }
}

TEST(DensityProfile, TowerPropertyAndTermSplit) {
    const auto& sys = arnold_system();
    const auto U = symmetric_neighborhood(sys, 3).U;
    const auto a = approximate(sys.map(), partition_chain(sys, 9, 1), U);
    for (int j = 4; j <= 8; ++j) {
        const auto p = density_profile(sys, a, j, 3, 9);
        EXPECT_LT(p.tower_defect, 1e-10);
        double mean = 0.0;
        for (std::size_t i = 0; i < p.values.size(); ++i) {
            if (!(p.weights[i] > 0.0)) continue;
            EXPECT_GE(p.values[i], -1e-12);
            EXPECT_LE(p.values[i], 1.0 + 1e-12);
            mean += p.values[i] * p.weights[i];
        }
        EXPECT_NEAR(mean / p.U_tilde_measure, p.E_chi, 1e-10);
        EXPECT_NEAR(p.t1 + p.t2, p.term_total, 1e-12);
        EXPECT_NEAR(p.t2a + p.t2b, p.t2, 1e-12);
        EXPECT_GE(p.v_j, 0.0);
    }
    EXPECT_THROW(density_profile(sys, a, 3, 3, 9), DepthError);
    EXPECT_THROW(density_profile(sys, a, 9, 3, 9), DepthError);
}

TEST(DensityProfile, RigidRotationEquidistributes) {
    const auto& sys = rigid_system();
    const auto U = symmetric_neighborhood(sys, 3).U;
    double previous = std::numeric_limits<double>::infinity();
    for (int kappa = 7; kappa <= 10; ++kappa) {
        const auto a = approximate(sys.map(), partition_chain(sys, kappa, 1), U);
        const auto p = density_profile(sys, a, 5, 3, kappa);
        EXPECT_TRUE(std::isfinite(p.v_j));
        EXPECT_LT(p.v_j, previous);
        previous = p.v_j;
    }
    EXPECT_LT(previous, 0.1);
}

TEST(PureSingularity, RigidRotationIsZero) {
    PureSingularityOptions opt;
    opt.kappa_min = 4;
    opt.kappa_max = 7;
    opt.grid = coarse_grid();
    const auto r = pure_singularity_report(rigid_system(), opt);
    EXPECT_TRUE(r.zero_run);
    EXPECT_TRUE(r.pass);
    for (const auto& row : r.rows) EXPECT_LT(row.gap, 1e-12);
}

TEST(PureSingularity, ArnoldRowsSatisfyBound) {
    PureSingularityOptions opt;
    opt.kappa_min = 5;
    opt.kappa_max = 8;
    opt.grid = coarse_grid();
    const auto r = pure_singularity_report(arnold_system(), opt);
    ASSERT_EQ(r.rows.size(), 4u);
    EXPECT_TRUE(r.bounds_hold);
    EXPECT_TRUE(r.dtilde_decreasing);
    EXPECT_TRUE(r.gap_decreasing);
    ASSERT_TRUE(r.gap_fit.has_value());
    EXPECT_LT(r.gap_fit->K2, 1.0);
    EXPECT_TRUE(r.pass);
    EXPECT_NEAR(r.critical_offset, 0.0, 1e-6);
    ASSERT_TRUE(r.density_fit.has_value());
    EXPECT_LT(r.density_fit->K2, 1.0);
}

TEST(PureSingularity, RequiresKappaAboveLambda) {
    PureSingularityOptions opt;
    opt.kappa_min = 3;
    opt.kappa_max = 5;
    EXPECT_THROW(pure_singularity_report(arnold_system(), opt), DomainError);
}

TEST(OscillationInequality, HoldsOnRandomStepFunctions) {
    Rng rng(7);
    int checked = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        const auto n = static_cast<std::size_t>(rng.integer(2, 40));
        std::vector<double> g(n), h(n);
        for (std::size_t i = 0; i < n; ++i) {
            g[i] = rng.uniform(0.05, 2.0);
            h[i] = rng.uniform(0.05, 2.0);
        }
        const auto c = oscillation_check(g, h);
        if (c.eps <= 0.0) continue;
        ++checked;
        EXPECT_TRUE(c.holds()) << c.ratio << " " << c.eps << " " << c.C1;
    }
    EXPECT_GT(checked, 500);
}
