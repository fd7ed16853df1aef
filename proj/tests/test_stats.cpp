#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "popnet/config.hpp"
#include "popnet/engine.hpp"
#include "popnet/oracles.hpp"
#include "popnet/stats.hpp"

using namespace popnet;

namespace {

Ensemble from_opinions(std::vector<double> v) {
  Ensemble e;
  e.resize(v.size());
  e.v = std::move(v);
  std::fill(e.c.begin(), e.c.end(), 1.0);
  return e;
}

}  // namespace

TEST(MeanOpinion, Examples) {
  EXPECT_EQ(mean_opinion(from_opinions({-1.0, 1.0})), 0.0);
  EXPECT_EQ(mean_opinion(from_opinions({0.5, 0.5, 0.5})), 0.5);
  EXPECT_NEAR(mean_opinion(from_opinions({-0.9, -0.1, 0.4, 0.6})), 0.0, 1e-16);
}

TEST(MeanContacts, Simple) {
  auto e = from_opinions({0, 0, 0});
  e.c = {1.0, 2.0, 6.0};
  EXPECT_EQ(mean_contacts(e), 3.0);
}

TEST(LocalMass, Examples) {
  const auto same = from_opinions({0.3, 0.3, 0.3, 0.3});
  for (double rho : local_opinion_mass_all(same, 1e-9)) EXPECT_EQ(rho, 1.0);

  const auto e = from_opinions({-0.9, 0.0, 0.1, 0.9});
  const auto rho = local_opinion_mass_all(e, 0.2);
  EXPECT_EQ(rho[1], 0.5);
  EXPECT_EQ(rho, oracles::brute_force_rho(e, 0.2));

  const auto one = from_opinions({0.7});
  EXPECT_EQ(local_opinion_mass_all(one, 0.1), std::vector<double>{1.0});
}

TEST(LocalMass, ClosedBallIncludesTies) {
  // 0.25 and 0.75 differ by exactly 0.5 in binary floating point.
  const auto e = from_opinions({0.25, 0.75, -0.5});
  const auto rho = local_opinion_mass_all(e, 0.5);
  EXPECT_EQ(rho[0], 2.0 / 3.0);
  EXPECT_EQ(rho[1], 2.0 / 3.0);
  EXPECT_EQ(rho, oracles::brute_force_rho(e, 0.5));
}

TEST(LocalMass, MatchesBruteForceOnRandomEnsembles) {
  CounterStream rng(21, 0, 0);
  OpinionSortWorkspace ws;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(2000);
    std::vector<double> v(n);
    // Mix continuous values with a coarse lattice so exact ties and
    // distance-equals-radius cases occur.
    for (auto& x : v) x = rng.below(2) ? -1.0 + 2.0 * rng.uniform() : -1.0 + 0.125 * rng.below(17);
    const double r = trial % 3 == 0 ? 0.25 : 2.0 * rng.uniform();
    const auto e = from_opinions(v);
    const auto fast = local_opinion_mass_all(e, r, ws);
    const auto slow = oracles::brute_force_rho(e, r);
    ASSERT_EQ(fast, slow) << "trial " << trial << " n=" << n << " r=" << r;
    for (double rho : fast) ASSERT_GE(rho, 1.0 / double(n));
  }
}

TEST(LocalMass, HandlesNegativeZero) {
  const auto e = from_opinions({-0.0, 0.0, 0.3});
  EXPECT_EQ(local_opinion_mass_all(e, 0.3), oracles::brute_force_rho(e, 0.3));
  EXPECT_EQ(local_opinion_mass_all(e, 1e-300), oracles::brute_force_rho(e, 1e-300));
  EXPECT_THROW(local_opinion_mass_all(e, 0.0), std::invalid_argument);
}

TEST(GroupMeans, SingleGroupEqualsGlobal) {
  auto e = from_opinions({0.1, -0.4, 0.9});
  e.c = {3.0, 4.0, 8.0};
  const auto gm = group_means(e, 1);
  EXPECT_NEAR(gm.m_v[0], mean_opinion(e), 1e-16);
  EXPECT_NEAR(gm.m_c[0], mean_contacts(e), 1e-15);
}

TEST(GroupMeans, Singletons) {
  Ensemble e;
  e.resize(2);
  e.v = {0.5, -0.5};
  e.c = {200.0, 50.0};
  e.group = {0, 1};
  const auto gm = group_means(e, 2);
  EXPECT_EQ(gm.m_v, (std::vector<double>{0.5, -0.5}));
  EXPECT_EQ(gm.m_c, (std::vector<double>{200.0, 50.0}));
}

TEST(GroupMeans, TestOneInitialMeans) {
  const auto cfg = preset("test1_a");
  const auto e = initialize(cfg);
  const auto gm = group_means(e, 2);
  // Unif[150,200] has sd 50/sqrt(12); 2500 leaders. Unif[10,90]: sd 80/sqrt(12); 7500 agents.
  EXPECT_NEAR(gm.m_c[0], 175.0, 3.0 * 50.0 / std::sqrt(12.0 * 2500.0));
  EXPECT_NEAR(gm.m_c[1], 50.0, 3.0 * 80.0 / std::sqrt(12.0 * 7500.0));
  EXPECT_NEAR(gm.m_v[0], 0.5, 3.0 * 0.2 / std::sqrt(12.0 * 2500.0));
  // Group means weighted by sizes reproduce the global mean.
  const double weighted = (2500.0 * gm.m_c[0] + 7500.0 * gm.m_c[1]) / 10000.0;
  EXPECT_NEAR(weighted, mean_contacts(e), 1e-12 * mean_contacts(e));
  const double weighted_v = (2500.0 * gm.m_v[0] + 7500.0 * gm.m_v[1]) / 10000.0;
  EXPECT_NEAR(weighted_v, mean_opinion(e), 1e-12);
}

TEST(Histograms, UniformTwoBins) {
  CounterStream rng(2, 0, 0);
  std::vector<double> v(100000);
  for (auto& x : v) x = -1.0 + 2.0 * rng.uniform();
  const auto h = build_histograms(from_opinions(v), {2, 0.1, 1000.0, 4});
  const double tol = 4.0 * 0.5 / std::sqrt(100000.0);
  EXPECT_NEAR(h.v[0], 0.5, tol);
  EXPECT_NEAR(h.v[1], 0.5, tol);
}

TEST(Histograms, PointMass) {
  auto e = from_opinions(std::vector<double>(50, 0.33));
  std::fill(e.c.begin(), e.c.end(), 42.0);
  const HistogramSpec spec{10, 0.1, 1000.0, 8};
  const auto h = build_histograms(e, spec);
  EXPECT_EQ(std::count(h.v.begin(), h.v.end(), 1.0), 1);
  EXPECT_EQ(h.v[std::size_t(spec.opinion_bin(0.33))], 1.0);
  EXPECT_EQ(h.c[std::size_t(spec.contact_bin(42.0))], 1.0);
  EXPECT_EQ(std::count(h.joint.begin(), h.joint.end(), 1.0), 1);
}

TEST(Histograms, UnderAndOverflow) {
  auto e = from_opinions({-1.0, 1.0, 0.0});
  e.c = {0.01, 5000.0, 10.0};
  const HistogramSpec spec{4, 0.1, 1000.0, 8};
  const auto h = build_histograms(e, spec);
  EXPECT_NEAR(h.c[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(h.c[9], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(h.v[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(h.v[3], 1.0 / 3.0, 1e-15);
  EXPECT_EQ(spec.contact_edge(0), 0.0);
  EXPECT_DOUBLE_EQ(spec.contact_edge(1), 0.1);
  EXPECT_DOUBLE_EQ(spec.contact_edge(9), 1000.0);
}

TEST(Histograms, TestOneInitIsBimodal) {
  const auto cfg = preset("test1_a");
  const auto e = initialize(cfg);
  const HistogramSpec spec{100, 0.1, 1000.0, 80};
  const auto h = build_histograms(e, spec);
  // Bins 46..68 cover [-0.08, 0.38), strictly between the two supports.
  for (int k = 46; k < 69; ++k) EXPECT_EQ(h.v[std::size_t(k)], 0.0) << k;
  for (const auto* hist : {&h.v, &h.c, &h.joint})
    EXPECT_NEAR(std::accumulate(hist->begin(), hist->end(), 0.0), 1.0, 1e-9);
}
