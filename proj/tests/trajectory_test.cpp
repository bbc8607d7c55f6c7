#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "creditlens/errors.hpp"
#include "creditlens/mdp.hpp"
#include "creditlens/trajectory.hpp"
#include "helpers.hpp"

using namespace creditlens;

TEST_SUITE("trajectory") {

TEST_CASE("bandit enumerates two rows in action order") {
  const Mdp m = testutil::make_bandit();
  const TabularPolicy p = uniform_policy(m);
  CHECK(count_positive_trajectories(m, p) == 2.0);

  const TrajectoryTable t = enumerate_trajectories(m, p);
  REQUIRE(t.num_rows == 2);
  CHECK(t.probs[0] == 0.5);
  CHECK(t.probs[1] == 0.5);
  CHECK(t.action_at(0, 0) == 0);
  CHECK(t.action_at(1, 0) == 1);
  CHECK(t.reward_at(0, 0) == 0.0);
  CHECK(t.reward_at(1, 0) == 1.0);
  CHECK(t.return_at(1, 0) == 1.0);
  CHECK(t.total_probability() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("deterministic chain rows are lexicographic with exact probabilities") {
  const Mdp m = make_chain(4, 3, 1.0, 1.0);
  const TabularPolicy p = uniform_policy(m);
  CHECK(count_positive_trajectories(m, p) == 8.0);

  const TrajectoryTable t = enumerate_trajectories(m, p);
  REQUIRE(t.num_rows == 8);
  for (std::size_t i = 0; i < 8; ++i) CHECK(t.probs[i] == 0.125);

  // Actions enumerate in binary order; states follow deterministically.
  for (std::size_t i = 0; i < 8; ++i) {
    const int a0 = static_cast<int>(i >> 2) & 1;
    const int a1 = static_cast<int>(i >> 1) & 1;
    const int a2 = static_cast<int>(i) & 1;
    CHECK(t.action_at(i, 0) == a0);
    CHECK(t.action_at(i, 1) == a1);
    CHECK(t.action_at(i, 2) == a2);
    CHECK(t.state_at(i, 0) == 0);
  }
  // Only the all-right trajectory harvests the goal reward.
  CHECK(t.reward_at(7, 2) == 1.0);
  CHECK(t.return_at(7, 0) == 1.0);
  for (std::size_t i = 0; i < 7; ++i) CHECK(t.return_at(i, 0) == 0.0);
}

TEST_CASE("rebuilds are byte-identical") {
  const Mdp m = testutil::random_mdp(5);
  const TabularPolicy p = testutil::random_policy(m, 5);
  const TrajectoryTable a = enumerate_trajectories(m, p);
  const TrajectoryTable b = enumerate_trajectories(m, p);
  CHECK(a.probs == b.probs);
  CHECK(a.states == b.states);
  CHECK(a.actions == b.actions);
  CHECK(a.rewards == b.rewards);
  CHECK(a.returns == b.returns);
}

TEST_CASE("returns satisfy the backward recursion exactly") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const Mdp m = testutil::random_mdp(seed);
    const TabularPolicy p = testutil::random_policy(m, seed);
    const TrajectoryTable t = enumerate_trajectories(m, p);
    const int H = t.horizon();
    for (std::size_t i = 0; i < t.num_rows; ++i) {
      CHECK(t.return_at(i, H - 1) == t.reward_at(i, H - 1));
      for (int h = 0; h + 1 < H; ++h) {
        CHECK(t.return_at(i, h) ==
              t.reward_at(i, h) + m.discount * t.return_at(i, h + 1));
      }
      for (int h = 0; h < H; ++h) {
        CHECK(t.reward_at(i, h) ==
              m.reward_at(t.state_at(i, h), t.action_at(i, h)));
      }
    }
  }
}

TEST_CASE("budget refusal reports the exact count") {
  const Mdp m = make_chain(4, 3, 1.0, 1.0);
  const TabularPolicy p = uniform_policy(m);
  try {
    enumerate_trajectories(m, p, 7.0);
    FAIL("expected BudgetExceeded");
  } catch (const BudgetExceeded& e) {
    CHECK(e.count() == 8.0);
    CHECK(e.budget() == 7.0);
  }
}

TEST_CASE("enumerate rejects invalid inputs with the full violation list") {
  Mdp m = testutil::make_bandit();
  TabularPolicy p = uniform_policy(m);
  p.probs[0] = 0.9;  // row no longer sums to 1
  CHECK_THROWS_AS(enumerate_trajectories(m, p), ValidationError);

  m.transition = {0.5, 1.0};
  CHECK_THROWS_AS(enumerate_trajectories(m, uniform_policy(m)),
                  ValidationError);
}

TEST_CASE("visit probabilities aggregate the table") {
  const Mdp m = testutil::random_mdp(3);
  const TabularPolicy p = testutil::random_policy(m, 7);
  const TrajectoryTable t = enumerate_trajectories(m, p);
  for (int h = 0; h < m.horizon; ++h) {
    double total = 0.0;
    for (int s = 0; s < m.num_states; ++s) {
      double from_pairs = 0.0;
      for (int a = 0; a < m.num_actions; ++a) {
        from_pairs += t.pair_visit_prob(h, s, a);
      }
      CHECK(t.state_visit_prob(h, s) ==
            doctest::Approx(from_pairs).epsilon(1e-12));
      total += from_pairs;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
  // Step 0 marginal equals the initial distribution.
  for (int s = 0; s < m.num_states; ++s) {
    CHECK(t.state_visit_prob(0, s) ==
          doctest::Approx(m.initial_dist[s]).epsilon(1e-12));
  }
}

TEST_CASE("occupancy weights are discounted visit probabilities") {
  const Mdp m = testutil::random_mdp(12);
  const TabularPolicy p = testutil::random_policy(m, 12);
  const TrajectoryTable t = enumerate_trajectories(m, p);

  const Occupancy occ = occupancy(t);
  CHECK(occ.normalizer == doctest::Approx(m.discounted_mass()).epsilon(1e-12));
  double total = 0.0;
  double power = 1.0;
  for (int h = 0; h < m.horizon; ++h) {
    for (int s = 0; s < m.num_states; ++s) {
      for (int a = 0; a < m.num_actions; ++a) {
        CHECK(occ.weight_at(h, s, a) ==
              doctest::Approx(power * t.pair_visit_prob(h, s, a))
                  .epsilon(1e-12));
        total += occ.weight_at(h, s, a);
      }
    }
    power *= m.discount;
  }
  CHECK(total == doctest::Approx(occ.normalizer).epsilon(1e-9));

  // Gamma override replaces the MDP discount.
  const Occupancy undiscounted = occupancy(t, 1.0);
  CHECK(undiscounted.normalizer == doctest::Approx(m.horizon));
  CHECK(undiscounted.weight_at(0, 0, 0) ==
        doctest::Approx(t.pair_visit_prob(0, 0, 0)));
}

TEST_CASE("trajectory csv golden for the bandit") {
  const Mdp m = testutil::make_bandit();
  const TrajectoryTable t = enumerate_trajectories(m, uniform_policy(m));
  std::ostringstream os;
  write_trajectory_csv(os, t);
  CHECK(os.str() ==
        "prob,s1,a1,r1,z1\n"
        "0.5,0,0,0,0\n"
        "0.5,0,1,1,1\n");
}

}  // TEST_SUITE
