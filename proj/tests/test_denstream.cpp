#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "dendrift/denstream.hpp"
#include "oracles.hpp"

using namespace dendrift;

namespace {

Eigen::VectorXd pt(double x, double y) { return Eigen::Vector2d(x, y); }

DenStreamParams defaults() { return {}; }

std::vector<Eigen::VectorXd> random_points(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<Eigen::VectorXd> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(pt(u(rng), u(rng)));
    return out;
}

}  // namespace

TEST(PruningPeriod, DefaultParameters) {
    // ceil(10 * log2(2.4 / 1.4)) = ceil(7.776)
    EXPECT_EQ(pruning_period(defaults()), 8);
}

TEST(MergePoint, EmptyModelCreatesOutlier) {
    ClusterModel m(defaults());
    EXPECT_EQ(m.merge_point(pt(1, 2), 0), MergeOutcome::NewOutlier);
    ASSERT_EQ(m.outliers().size(), 1u);
    EXPECT_EQ(m.outliers()[0].center(), pt(1, 2));
    EXPECT_EQ(m.outliers()[0].weight, 1.0);
}

TEST(MergePoint, CoincidentPointAbsorbed) {
    ClusterModel m(defaults());
    m.merge_point(pt(1, 1), 0);
    EXPECT_EQ(m.merge_point(pt(1, 1), 0), MergeOutcome::AbsorbedByOutlier);
    EXPECT_EQ(m.outliers()[0].weight, 2.0);
    EXPECT_EQ(m.outliers()[0].radius(), 0.0);
}

TEST(MergePoint, FarPointOpensNewOutlier) {
    ClusterModel m(defaults());
    std::vector<Eigen::VectorXd> members{pt(0, 0), pt(0.45, 0), pt(0, 0.45)};
    for (const auto& p : members) m.merge_point(p, 0);
    ASSERT_EQ(m.potential().size(), 1u);  // weight 3 > beta*mu
    EXPECT_LT(oracle::radius(members), 0.5);
    const auto x = pt(1.6, 0);
    auto with_x = members;
    with_x.push_back(x);
    ASSERT_GT(oracle::radius(with_x), 0.5);
    EXPECT_EQ(m.merge_point(x, 0), MergeOutcome::NewOutlier);
    EXPECT_EQ(m.potential().size(), 1u);
    EXPECT_EQ(m.outliers().size(), 1u);
}

TEST(MergePoint, PromotionAboveBetaMu) {
    ClusterModel m(defaults());
    EXPECT_EQ(m.merge_point(pt(0, 0), 0), MergeOutcome::NewOutlier);
    EXPECT_EQ(m.merge_point(pt(0, 0), 0), MergeOutcome::AbsorbedByOutlier);
    EXPECT_EQ(m.merge_point(pt(0, 0), 0), MergeOutcome::Promoted);
    EXPECT_EQ(m.potential().size(), 1u);
    EXPECT_TRUE(m.outliers().empty());
    EXPECT_EQ(m.merge_point(pt(0.1, 0), 0), MergeOutcome::AbsorbedByPotential);
}

TEST(MergePoint, Errors) {
    ClusterModel m(defaults());
    m.merge_point(pt(0, 0), 5);
    EXPECT_THROW(m.merge_point(pt(0, 0), 4), TimeOrderError);
    EXPECT_THROW(m.merge_point(Eigen::Vector3d(0, 0, 0), 5), DimensionError);
    EXPECT_THROW(m.merge_point(pt(std::nan(""), 0), 5), InvalidArgument);
}

TEST(Decay, Cases) {
    auto mc = MicroCluster::from_point(pt(2, 4), 0);
    mc.absorb(pt(4, 2));
    EXPECT_EQ(decay_to(mc, 0, 0.1).weight, mc.weight);
    const auto d = decay_to(mc, 10, 0.1);
    EXPECT_NEAR(d.weight, 0.5 * mc.weight, 1e-12);
    EXPECT_NEAR((d.center() - mc.center()).norm(), 0.0, 1e-12);
    EXPECT_NEAR(d.radius(), mc.radius(), 1e-12);
    EXPECT_THROW(decay_to(d, 9, 0.1), TimeOrderError);
}

TEST(DecayProperty, Commutes) {
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<int> dt(0, 30);
    for (int trial = 0; trial < 200; ++trial) {
        auto mc = MicroCluster::from_point(random_points(rng, 1, 0, 10)[0], 0);
        for (const auto& p : random_points(rng, 4, 0, 10)) mc.absorb(p);
        const int t1 = dt(rng), t2 = t1 + dt(rng);
        const auto once = decay_to(mc, t2, 0.1);
        const auto twice = decay_to(decay_to(mc, t1, 0.1), t2, 0.1);
        EXPECT_NEAR(once.weight, twice.weight, 1e-9);
        EXPECT_NEAR((once.cf1 - twice.cf1).norm(), 0.0, 1e-9);
        EXPECT_NEAR((once.cf2 - twice.cf2).norm(), 0.0, 1e-9);
    }
}

TEST(Radius, MatchesMemberPoints) {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 100; ++trial) {
        const auto pts = random_points(rng, 2 + trial % 20, -3, 3);
        auto mc = MicroCluster::from_point(pts[0], 0);
        std::vector<Eigen::VectorXd> members{pts[0]};
        for (std::size_t i = 1; i < pts.size(); ++i) {
            EXPECT_NEAR(mc.radius_with(pts[i]), [&] {
                auto m2 = members;
                m2.push_back(pts[i]);
                return oracle::radius(m2);
            }(), 1e-9);
            mc.absorb(pts[i]);
            members.push_back(pts[i]);
            EXPECT_NEAR(mc.radius(), oracle::radius(members), 1e-9);
        }
    }
}

TEST(RadiusProperty, MergeAtCenterNeverGrows) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        const auto pts = random_points(rng, 5, 0, 1);
        auto mc = MicroCluster::from_point(pts[0], 0);
        for (std::size_t i = 1; i < pts.size(); ++i) mc.absorb(pts[i]);
        const double before = mc.radius();
        mc.absorb(mc.center());
        EXPECT_LE(mc.radius(), before + 1e-12);
    }
}

TEST(Prune, FreshOutlierSurvives) {
    EXPECT_DOUBLE_EQ(outlier_weight_limit(5, 5, 8, 0.1), 1.0);
    ClusterModel m(defaults());
    m.merge_point(pt(0, 0), 5);
    m.prune(5);
    EXPECT_EQ(m.outliers().size(), 1u);
}

TEST(Prune, FadedPotentialRemoved) {
    // weight 3 at t=0 decays to 3 * 2^(-0.1 t); below beta*mu = 2.4 once t > 3.22
    for (const auto [t, survives] : {std::pair{3, true}, std::pair{4, false}, std::pair{9, false}}) {
        ClusterModel m(defaults());
        for (int i = 0; i < 3; ++i) m.merge_point(pt(0, 0), 0);
        ASSERT_EQ(m.potential().size(), 1u);
        m.prune(t);
        EXPECT_EQ(m.potential().size(), survives ? 1u : 0u) << "t=" << t;
    }
}

TEST(Prune, HeavyModelUnchanged) {
    ClusterModel m(defaults());
    for (int i = 0; i < 50; ++i) m.merge_point(pt(0, 0), 0);
    for (int i = 0; i < 50; ++i) m.merge_point(pt(5, 5), 0);
    m.prune(1);
    EXPECT_EQ(m.potential().size(), 2u);
}

TEST(PruneProperty, PotentialsAboveFloor) {
    std::mt19937_64 rng(24);
    ClusterModel m(defaults());
    for (int t = 0; t < 40; ++t) {
        for (const auto& p : random_points(rng, 30, 0, 6)) m.merge_point(p, t);
        if (t % 8 == 0) {
            m.prune(t);
            for (const auto& mc : m.potential()) EXPECT_GE(mc.weight, 2.4);
        }
    }
}

TEST(WeightProperty, ConservedWithinInterval) {
    std::mt19937_64 rng(25);
    ClusterModel m(defaults());
    for (int t = 0; t < 30; t += 3) {
        const double prior = m.total_weight(t);
        const auto pts = random_points(rng, 40, 0, 5);
        for (const auto& p : pts) m.merge_point(p, t);
        EXPECT_NEAR(m.total_weight(t), prior + 40.0, 1e-9);
    }
}

TEST(Reset, ClearsAndBehavesFresh) {
    ClusterModel m(defaults());
    for (int i = 0; i < 5; ++i) m.merge_point(pt(i, 0), 0);
    m.reset();
    EXPECT_TRUE(m.potential().empty());
    EXPECT_TRUE(m.outliers().empty());
    m.reset();
    EXPECT_TRUE(m.empty());
    EXPECT_EQ(m.merge_point(Eigen::Vector3d(1, 1, 1), 1), MergeOutcome::NewOutlier);
}

TEST(Dbscan, SeparatedBlobs) {
    std::vector<Eigen::VectorXd> pts;
    for (double cx : {0.0, 10.0, 20.0})
        for (int i = 0; i < 4; ++i) pts.push_back(pt(cx + 0.1 * i, 0));
    std::vector<double> w(pts.size(), 1.0);
    const auto l = dbscan(pts, w, 1.0, 3.0);
    EXPECT_EQ(*std::max_element(l.begin(), l.end()), 2);
    EXPECT_EQ(std::count(l.begin(), l.end(), kNoise), 0);
}

TEST(Dbscan, CoincidentAndNoise) {
    std::vector<Eigen::VectorXd> same(5, pt(1, 1));
    std::vector<double> w(5, 1.0);
    EXPECT_EQ(dbscan(same, w, 0.1, 3.0), std::vector<int>(5, 0));
    std::vector<Eigen::VectorXd> one{pt(0, 0)};
    std::vector<double> light{2.0};
    EXPECT_EQ(dbscan(one, light, 1.0, 3.0), std::vector<int>{kNoise});
}

TEST(Dbscan, MatchesOracle) {
    std::mt19937_64 rng(26);
    std::uniform_real_distribution<double> wd(0.2, 2.5);
    for (std::size_t n : {30u, 100u}) {
        for (int trial = 0; trial < 25; ++trial) {
            const auto pts = random_points(rng, n, 0, 10);
            std::vector<double> w(n);
            for (auto& x : w) x = wd(rng);
            const auto got = dbscan(pts, w, 1.0, 3.0);
            EXPECT_TRUE(oracle::same_partition(got, oracle::dbscan(pts, w, 1.0, 3.0))) << "n=" << n;
        }
    }
}

TEST(OfflineCluster, EqualsDbscanOverCenters) {
    std::mt19937_64 rng(27);
    ClusterModel m(defaults());
    for (int t = 0; t < 12; ++t)
        for (const auto& p : random_points(rng, 60, 0, 8)) m.merge_point(p, t);
    const auto fc = m.offline_cluster();
    ASSERT_FALSE(fc.centers.empty());
    EXPECT_EQ(fc.labels, dbscan(fc.centers, fc.weights, 1.0, 3.0));
    for (std::size_t i = 0; i < fc.centers.size(); ++i) {
        EXPECT_NEAR(fc.weights[i], decay_to(m.potential()[i], 11, 0.1).weight, 1e-12);
    }
}

TEST(Snapshot, Format) {
    FinalClusters fc;
    fc.centers = {pt(1, 2.5)};
    fc.weights = {3};
    fc.labels = {0};
    std::ostringstream out;
    write_cluster_snapshot(out, fc);
    EXPECT_EQ(out.str(), "cluster_id,weight,center_f0,center_f1\n0,3,1,2.5\n");
}
