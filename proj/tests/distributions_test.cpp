#include <doctest.h>

#include <stdexcept>

#include "creditlens/distributions.hpp"
#include "creditlens/mdp.hpp"
#include "creditlens/trajectory.hpp"
#include "helpers.hpp"

using namespace creditlens;

namespace {

// Chain policy that always moves left, at every step and state.
TabularPolicy always_left(const Mdp& m) {
  TabularPolicy p = uniform_policy(m);
  for (int h = 0; h < m.horizon; ++h) {
    for (int s = 0; s < m.num_states; ++s) {
      const std::size_t base =
          (static_cast<std::size_t>(h) * m.num_states + s) * m.num_actions;
      p.probs[base + 0] = 1.0;
      for (int a = 1; a < m.num_actions; ++a) p.probs[base + a] = 0.0;
    }
  }
  return p;
}

}  // namespace

TEST_SUITE("dist") {

TEST_CASE("from_atoms merges a chain of close atoms to its weighted mean") {
  const DiscreteDist d = DiscreteDist::from_atoms(
      {{2.0, 0.5}, {1.0, 0.3}, {1.0 + 5e-10, 0.2}}, 1e-9);
  REQUIRE(d.size() == 2);
  CHECK(d.values[0] == doctest::Approx(1.0 + 2e-10).epsilon(1e-15));
  CHECK(d.probs[0] == doctest::Approx(0.5));
  CHECK(d.values[1] == 2.0);
  CHECK(d.probs[1] == doctest::Approx(0.5));
}

TEST_CASE("from_atoms drops nonpositive mass and sorts") {
  const DiscreteDist d = DiscreteDist::from_atoms(
      {{3.0, 0.5}, {1.0, 0.0}, {-1.0, 0.5}, {7.0, -0.25}}, 1e-9);
  REQUIRE(d.size() == 2);
  CHECK(d.values[0] == -1.0);
  CHECK(d.values[1] == 3.0);
}

TEST_CASE("chained merging collapses transitively close atoms") {
  const DiscreteDist d = DiscreteDist::from_atoms(
      {{0.0, 0.25}, {0.9e-9, 0.25}, {1.8e-9, 0.5}}, 1e-9);
  CHECK(d.size() == 1);
  CHECK(d.probs[0] == doctest::Approx(1.0));
}

TEST_CASE("mean is the probability-weighted average") {
  const DiscreteDist d =
      DiscreteDist::from_atoms({{0.0, 0.25}, {1.0, 0.75}}, 1e-9);
  CHECK(d.mean() == doctest::Approx(0.75));
}

TEST_CASE("bandit return distributions are point masses") {
  const Mdp m = testutil::make_bandit();
  const TrajectoryTable t = enumerate_trajectories(m, uniform_policy(m));
  const ReturnDist d0 = return_distribution(t, 0, 0, 0);
  REQUIRE(d0.size() == 1);
  CHECK(d0.values[0] == 0.0);
  const ReturnDist d1 = return_distribution(t, 0, 0, 1);
  REQUIRE(d1.size() == 1);
  CHECK(d1.values[0] == 1.0);

  const ReturnDist mix = state_return_distribution(t, 0, 0);
  REQUIRE(mix.size() == 2);
  CHECK(mix.probs[0] == doctest::Approx(0.5));
  CHECK(mix.probs[1] == doctest::Approx(0.5));
}

TEST_CASE("chain return distribution conditions on the first move") {
  const Mdp m = make_chain(4, 3, 1.0, 1.0);
  const TrajectoryTable t = enumerate_trajectories(m, uniform_policy(m));
  const ReturnDist d = return_distribution(t, 0, 0, 1);
  REQUIRE(d.size() == 2);
  CHECK(d.values[0] == 0.0);
  CHECK(d.probs[0] == doctest::Approx(0.75));
  CHECK(d.values[1] == 1.0);
  CHECK(d.probs[1] == doctest::Approx(0.25));
}

TEST_CASE("zero-policy actions fall back to the forced-action rollout") {
  const Mdp m = make_chain(4, 3, 1.0, 1.0);
  const TabularPolicy left = always_left(m);
  const TrajectoryTable t = enumerate_trajectories(m, left);
  REQUIRE(t.num_rows == 1);

  // Force right at step 0; the policy afterwards still always goes left.
  const ReturnDist d = return_distribution(t, 0, 0, 1);
  REQUIRE(d.size() == 1);
  CHECK(d.values[0] == 0.0);

  // Force right at the last step from state 0: still no goal entry.
  const ReturnDist last = return_distribution(t, 2, 0, 1);
  REQUIRE(last.size() == 1);
  CHECK(last.values[0] == 0.0);
}

TEST_CASE("unreachable states raise an error naming the query") {
  const Mdp m = make_chain(4, 3, 1.0, 1.0);
  const TrajectoryTable t = enumerate_trajectories(m, always_left(m));
  CHECK_THROWS_AS(return_distribution(t, 1, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(state_return_distribution(t, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(return_distribution(t, 0, 9, 0), std::out_of_range);
  CHECK_THROWS_AS(return_distribution(t, 5, 0, 0), std::out_of_range);
}

TEST_CASE("state distribution is the policy mixture of action distributions") {
  const Mdp m = testutil::random_mdp(7);
  const TabularPolicy p = testutil::random_policy(m, 3);
  const TrajectoryTable t = enumerate_trajectories(m, p);
  const int h = m.horizon - 1;
  for (int s = 0; s < m.num_states; ++s) {
    if (t.state_visit_prob(h, s) <= 0.0) continue;
    const ReturnDist mix = state_return_distribution(t, h, s);
    double mean_of_parts = 0.0;
    for (int a = 0; a < m.num_actions; ++a) {
      mean_of_parts +=
          p.prob_at(h, s, a) * return_distribution(t, h, s, a).mean();
    }
    CHECK(mix.mean() == doctest::Approx(mean_of_parts).epsilon(1e-10));
  }
}

TEST_CASE("wasserstein1 hand values") {
  const auto delta0 = DiscreteDist::from_atoms({{0.0, 1.0}}, 1e-9);
  const auto delta1 = DiscreteDist::from_atoms({{1.0, 1.0}}, 1e-9);
  CHECK(wasserstein1(delta0, delta1) == doctest::Approx(1.0));
  CHECK(wasserstein1(delta0, delta0) == doctest::Approx(0.0));

  const auto coin = DiscreteDist::from_atoms({{0.0, 0.5}, {1.0, 0.5}}, 1e-9);
  const auto half = DiscreteDist::from_atoms({{0.5, 1.0}}, 1e-9);
  CHECK(wasserstein1(coin, half) == doctest::Approx(0.5));

  const auto left = DiscreteDist::from_atoms({{0.0, 0.5}, {2.0, 0.5}}, 1e-9);
  const auto right = DiscreteDist::from_atoms({{1.0, 0.5}, {3.0, 0.5}}, 1e-9);
  CHECK(wasserstein1(left, right) == doctest::Approx(1.0));
}

}  // TEST_SUITE
