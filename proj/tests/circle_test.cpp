#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "pmetric/circle.hpp"

using namespace pmetric;

namespace {

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

double golden_arnold_parameter() {
    static const double omega = find_parameter(arnold_critical, {}, 0.55, 0.7);
    return omega;
}

/// Rotation number with the given partial quotients, followed by ones.
double rotation_value(std::vector<long long> a) {
    double x = kGolden;
    for (auto it = a.rbegin(); it != a.rend(); ++it) x = 1.0 / (static_cast<double>(*it) + x);
    return x;
}

}  // namespace

TEST(CircleArithmetic, ArcHelpers) {
    EXPECT_DOUBLE_EQ(frac(-0.25), 0.75);
    EXPECT_NEAR(circle_distance(0.95, 0.05), 0.1, 1e-15);
    EXPECT_NEAR(arc_overlap(Interval(0.9, 1.1), Interval(0.0, 0.05)), 0.05, 1e-15);
    EXPECT_NEAR(arc_overlap(Interval(0.9, 1.1), Interval(-0.05, 0.0)), 0.05, 1e-15);
    EXPECT_TRUE(arc_contains(Interval(0.9, 1.1), 0.0));
    EXPECT_FALSE(arc_contains(Interval(0.1, 0.9), 0.0));
    EXPECT_TRUE(arc_inside(Interval(1.2, 1.3), Interval(0.1, 0.4)));
    EXPECT_NEAR(arc_distance(Interval(0.2, 0.7), 0.0), 0.2, 1e-15);
    EXPECT_NEAR(arc_distance(Interval(0.2, 0.9), 0.0), 0.1, 1e-15);
}

TEST(CircleLift, FamiliesAreDegreeOne) {
    for (const auto& f : {rigid_rotation(0.3), arnold_critical(0.6), asymmetric_arnold(0.6, 0.4)}) {
        EXPECT_LT(f.degree_defect(), 1e-14) << f.family();
        for (double x : linspace(-0.9, 0.9, 37)) {
            for (double h : {1e-9, 1e-4, 0.3}) {
                EXPECT_NEAR(f.increment(x, h), f(x + h) - f(x), 1e-14) << f.family();
            }
            EXPECT_NEAR(f.inverse(f(x)), x, 1e-11) << f.family();
        }
    }
}

TEST(CircleLift, JetsMatchFiniteDifferences) {
    for (const auto& f : {arnold_critical(0.6), asymmetric_arnold(0.6, -0.5)}) {
        for (double x : linspace(-0.8, 0.8, 17)) {
            const Jet fd = detail::finite_difference_jet([&f](double t) { return f(t); }, x, 1.0);
            const Jet j = f.jet(x);
            EXPECT_NEAR(j.d1, fd.d1, 1e-7);
            EXPECT_NEAR(j.d2, fd.d2, 1e-5);
            EXPECT_NEAR(j.d3, fd.d3, 1e-3);
        }
    }
}

TEST(CircleLift, CriticalPointIsCubic) {
    const auto f = asymmetric_arnold(0.6, 0.3);
    EXPECT_DOUBLE_EQ(f.derivative(0.0), 0.0);
    EXPECT_NEAR(f.jet(0.0).d2, 0.0, 1e-15);
    EXPECT_GT(f.jet(0.0).d3, 0.0);
    for (double x : linspace(0.2, 0.8, 61)) EXPECT_GE(f.derivative(x), f.remote_min_derivative() - 1e-15);
}

TEST(CircleLift, RestrictedStageInverses) {
    const auto f = arnold_critical(0.6);
    const Interval J(0.05, 0.5);
    const MapDescriptor m = f.restricted(J);
    EXPECT_GE(m.image().lo(), 0.0);
    EXPECT_LT(m.image().lo(), 1.0);
    for (double x : linspace(J.lo(), J.hi(), 21)) {
        EXPECT_NEAR(m.inverse(m(x)), x, 1e-12);
        EXPECT_NEAR(m.inverse_increment(m(x), m.increment(x, -1e-7 * (x - J.lo()))), -1e-7 * (x - J.lo()), 1e-18);
    }
    EXPECT_NEAR(m.image().length(), f.increment(J.lo(), J.length()), 1e-15);
}

TEST(ContinuedFraction, Convergents) {
    const auto cf = ContinuedFraction::from_quotients({1, 1, 1, 1, 1, 1, 1, 1});
    EXPECT_EQ(cf.q, (std::vector<long long>{1, 1, 2, 3, 5, 8, 13, 21, 34}));
    EXPECT_EQ(cf.p, (std::vector<long long>{0, 1, 1, 2, 3, 5, 8, 13, 21}));
    const auto e = ContinuedFraction::from_quotients({2, 3, 1});
    EXPECT_EQ(e.q.back(), 9);  // 1/(2 + 1/(3 + 1)) = 4/9
    EXPECT_EQ(e.p.back(), 4);
    EXPECT_THROW(ContinuedFraction::from_quotients({1, 0}), DomainError);
}

TEST(RotationNumber, GoldenRigid) {
    const auto r = rotation_number(rigid_rotation(kGolden), 8);
    EXPECT_EQ(r.cf.a, std::vector<long long>(8, 1));
    EXPECT_EQ(r.cf.q, (std::vector<long long>{1, 1, 2, 3, 5, 8, 13, 21, 34}));
    EXPECT_NEAR(r.rho, 21.0 / 34.0, 1e-15);
    EXPECT_TRUE(r.returns_decreasing);
}

TEST(RotationNumber, RecoversPartialQuotients) {
    const std::vector<long long> a{2, 1, 3, 1, 4, 2};
    const auto r = rotation_number(rigid_rotation(rotation_value(a)), a.size());
    EXPECT_EQ(r.cf.a, a);
}

TEST(RotationNumber, RationalDetected) {
    try {
        rotation_number(rigid_rotation(1.0 / 3.0), 10);
        FAIL() << "expected RationalRotationError";
    } catch (const RationalRotationError& e) {
        EXPECT_EQ(e.period, 3);
        EXPECT_EQ(e.numerator, 1);
    }
}

TEST(FindParameter, GoldenArnold) {
    const double omega = golden_arnold_parameter();
    EXPECT_GT(omega, 0.6);
    EXPECT_LT(omega, 0.62);
    const auto r = rotation_number(arnold_critical(omega), 18);
    EXPECT_EQ(r.cf.a, std::vector<long long>(18, 1));
    EXPECT_TRUE(r.returns_decreasing);
}

TEST(FindParameter, PrefixAndRigidCheck) {
    const double omega = find_parameter(rigid_rotation, {2, 3}, 0.01, 0.99);
    EXPECT_NEAR(omega, rotation_value({2, 3}), 1e-10);
    const double w = find_parameter([](double o) { return asymmetric_arnold(o, 0.3); }, {2, 1, 2}, 0.01, 0.99);
    const auto r = rotation_number(asymmetric_arnold(w, 0.3), 12);
    EXPECT_EQ((std::vector<long long>(r.cf.a.begin(), r.cf.a.begin() + 3)), (std::vector<long long>{2, 1, 2}));
    EXPECT_THROW(find_parameter(rigid_rotation, {2}, 0.6, 0.9), ConvergenceError);
}

TEST(DynamicalPartition, ThreeDistanceOracle) {
    const CircleSystem sys(rigid_rotation(kGolden), 10);
    for (int k = 1; k <= 9; ++k) {
        const auto d = dynamical_partition(sys, k);
        std::set<long long> seen;
        std::vector<double> expected;
        for (long long i = 0; i < sys.q(k) + sys.q(k - 1); ++i) expected.push_back(frac(i * kGolden));
        std::sort(expected.begin(), expected.end());
        ASSERT_EQ(d.elements.size(), expected.size());
        for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(d.elements[i].arc.lo(), expected[i], 1e-12);
        // Two lengths only for a rotation.
        std::set<long> lengths;
        for (const auto& e : d.elements) lengths.insert(std::lround(e.arc.length() * 1e9));
        EXPECT_LE(lengths.size(), 2u);
    }
}

TEST(DynamicalPartition, TilesAndRefinesForCriticalMap) {
    const CircleSystem sys(arnold_critical(golden_arnold_parameter()), 12);
    DynamicalPartition prev = dynamical_partition(sys, 1);
    for (int k = 1; k <= 10; ++k) {
        const auto d = dynamical_partition(sys, k);
        EXPECT_LT(d.tiling_defect, 1e-8);
        EXPECT_EQ(d.lengthy_count, static_cast<std::size_t>(sys.q(k)));
        EXPECT_EQ(d.short_count, static_cast<std::size_t>(sys.q(k - 1)));
        if (k > 1) {
            const auto ref = check_refinement(prev, d);
            EXPECT_TRUE(ref.refines) << k;
            EXPECT_TRUE(ref.short_promoted) << k;
            for (const auto& [l, s] : ref.lengthy_children) {
                EXPECT_EQ(static_cast<long long>(l), sys.a(k - 1));
                EXPECT_EQ(s, 1u);
            }
        }
        prev = d;
    }
}

TEST(DynamicalPartition, LengthyElementsSplitByPartialQuotient) {
    const std::vector<long long> a{2, 3, 1, 4, 2, 1, 1, 1};
    const CircleSystem sys(rigid_rotation(rotation_value(a)), a.size());
    for (int k = 1; k + 1 <= 7; ++k) {
        const auto ref = check_refinement(dynamical_partition(sys, k), dynamical_partition(sys, k + 1));
        ASSERT_TRUE(ref.refines);
        for (const auto& [l, s] : ref.lengthy_children) {
            EXPECT_EQ(static_cast<long long>(l), sys.a(k));
            EXPECT_EQ(s, 1u);
        }
    }
    // Counting a_k q_k lengthy elements overcovers whenever a_k > 1.
    EXPECT_GT(literal_count_excess(sys, 1), 0.1);
    EXPECT_NEAR(literal_count_excess(sys, 2), 0.0, 1e-12);
}

TEST(DynamicalPartition, DepthErrors) {
    const CircleSystem sys(rigid_rotation(kGolden), 5);
    EXPECT_THROW(dynamical_partition(sys, 0), DepthError);
    EXPECT_THROW(dynamical_partition(sys, 6), DepthError);
    EXPECT_THROW((void)sys.orbit(1000), DepthError);
}

TEST(DynamicalPartition, BoundedGeometryForCriticalMap) {
    const CircleSystem sys(arnold_critical(golden_arnold_parameter()), 16);
    double worst = 0.0;
    for (int k = 2; k <= 14; ++k) {
        const auto g = bounded_geometry(dynamical_partition(sys, k), dynamical_partition(sys, k + 1));
        worst = std::max({worst, g.adjacent_ratio, g.extreme_ratio});
    }
    EXPECT_TRUE(std::isfinite(worst));
    EXPECT_LT(worst, 1e3);
}

TEST(Fineness, MonotoneInArc) {
    const CircleSystem sys(arnold_critical(golden_arnold_parameter()), 26);
    int previous = 0;
    for (double r : {0.2, 0.1, 0.05, 0.02, 0.01, 0.005}) {
        const int j = fineness_order(sys, Interval(-r, r));
        EXPECT_GE(j, previous);
        previous = j;
    }
    EXPECT_GT(previous, 3);
}

TEST(Fineness, RigidRotationMatchesClosestReturns) {
    const CircleSystem sys(rigid_rotation(kGolden), 20);
    for (int i = 2; i < 15; ++i) {
        // An arc around 0 slightly shorter than |I_i| sees its first return at i + 1.
        const double len = 0.999 * sys.closest_return_arc(i).length();
        EXPECT_EQ(fineness_order(sys, Interval(-len / 2.0, len / 2.0)), i + 1) << i;
    }
}

TEST(SymmetricNeighborhood, HasRequestedFineness) {
    const CircleSystem sys(asymmetric_arnold(find_parameter([](double o) { return asymmetric_arnold(o, 0.3); }, {},
                                                            0.5, 0.75),
                                             0.3),
                           24);
    const auto& f = sys.map();
    for (int lambda : {4, 6, 8}) {
        const auto s = symmetric_neighborhood(sys, lambda);
        EXPECT_EQ(s.fineness, lambda);
        EXPECT_NEAR(f.derivative(s.U.lo()), f.derivative(s.U.hi()), 1e-9 * f.derivative(s.U.hi()));
        // Slightly larger arcs have smaller fineness.
        const double r = s.U.hi() * (1.0 + 1e-6);
        EXPECT_LT(fineness_order(sys, Interval(slaved_left_endpoint(f, r), r)), lambda);
        EXPECT_TRUE(std::isfinite(s.critical_offset));
    }
}

TEST(Coarseness, InfiniteRightAfterFinenessAndFiniteLater) {
    const CircleSystem sys(rigid_rotation(kGolden), 24);
    const int lambda = 6;
    const auto s = symmetric_neighborhood(sys, lambda);
    const auto first = dynamical_partition(sys, lambda + 1);
    EXPECT_TRUE(std::isinf(coarseness(first, {s.U})));
    double last = std::numeric_limits<double>::infinity();
    int finite = 0;
    for (int j = lambda + 2; j <= lambda + 8; ++j) {
        const double c = coarseness(dynamical_partition(sys, j), {s.U});
        if (std::isfinite(c)) {
            ++finite;
            EXPECT_LT(c, last);
            last = c;
        }
    }
    EXPECT_GE(finite, 6);
}

TEST(Coarseness, ElementsInsideAreIgnored) {
    const CircleSystem sys(rigid_rotation(kGolden), 12);
    const auto d = dynamical_partition(sys, 6);
    EXPECT_DOUBLE_EQ(coarseness(d, {Interval(0.0, 1.0), Interval(-0.5, 0.5)}), 0.0);
    EXPECT_TRUE(std::isinf(coarseness(d, {})));
}

TEST(Chain, BuildsDisjointImages) {
    const CircleSystem sys(arnold_critical(golden_arnold_parameter()), 14);
    const int k = 8;
    const Interval seed = sys.map().image_arc(sys.closest_return_arc(k - 1));
    const auto c = build_chain(sys.map(), seed, static_cast<std::size_t>(sys.q(k) - 2));
    EXPECT_TRUE(c.disjoint);
    EXPECT_EQ(c.intervals.size(), static_cast<std::size_t>(sys.q(k) - 1));
    EXPECT_THROW(build_chain(sys.map(), seed, static_cast<std::size_t>(sys.q(k) - 1)), ChainError);
    const auto stages = chain_stages(sys.map(), c);
    for (std::size_t t = 0; t < stages.size(); ++t) {
        EXPECT_NEAR(stages[t].image().lo(), c.intervals[t + 1].lo(), 1e-15);
        EXPECT_NEAR(stages[t].image().hi(), c.intervals[t + 1].hi(), 1e-15);
    }
}

TEST(Chain, OverlapIsReported) {
    const auto f = rigid_rotation(0.1);
    try {
        build_chain(f, Interval(0.3, 0.45), 3);
        FAIL() << "expected ChainError";
    } catch (const ChainError& e) {
        EXPECT_NE(std::string(e.what()).find("overlap"), std::string::npos);
    }
}

TEST(FirstReturn, CoversCircleOnce) {
    const CircleSystem sys(arnold_critical(golden_arnold_parameter()), 14);
    for (int k = 3; k <= 10; ++k) {
        const auto r = first_return_map(sys, k);
        ASSERT_EQ(r.branches.size(), 2u);
        EXPECT_EQ(r.branches[0].return_time, sys.q(k));
        EXPECT_EQ(r.branches[1].return_time, sys.q(k - 1));
        EXPECT_TRUE(r.branches[0].lands_inside);
        EXPECT_TRUE(r.branches[1].lands_inside);
        EXPECT_NEAR(r.covering_length, 1.0, 1e-10);
        EXPECT_TRUE(r.intermediate_disjoint);
    }
}
