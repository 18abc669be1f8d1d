#include "annealfolio/error.hpp"
#include "annealfolio/sampler.hpp"
#include "annealfolio/serialize.hpp"
#include "testing.hpp"

#include <gtest/gtest.h>

#include <omp.h>

#include <set>

using namespace annealfolio;
using annealfolio::testing::bits_of;
using annealfolio::testing::dense_energy;

namespace {

QuboModel two_tied_minima() {
  QuboModel m(2);
  m.linear = {-1.0, -1.0};
  m.quadratic[{0, 1}] = 2.0;
  return m;
}

void expect_same(const SampleSet& a, const SampleSet& b) {
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].state, b.records[i].state);
    EXPECT_EQ(a.records[i].energy, b.records[i].energy);
    EXPECT_EQ(a.records[i].count, b.records[i].count);
  }
  EXPECT_EQ(a.seed, b.seed);
  EXPECT_EQ(a.model_n, b.model_n);
}

class ThreadCount {
 public:
  explicit ThreadCount(int n) : saved_(omp_get_max_threads()) { omp_set_num_threads(n); }
  ~ThreadCount() { omp_set_num_threads(saved_); }

 private:
  int saved_;
};

}  // namespace

TEST(schedule, validation) {
  AnnealSchedule s;
  EXPECT_NO_THROW(s.validate());
  s.t_final = s.t_initial;
  EXPECT_THROW(s.validate(), InputError);
  s = AnnealSchedule{};
  s.t_final = 0.0;
  EXPECT_THROW(s.validate(), InputError);
  s = AnnealSchedule{};
  s.sweeps = 0;
  EXPECT_THROW(s.validate(), InputError);
  s = AnnealSchedule{};
  s.restarts = 0;
  EXPECT_THROW(s.validate(), InputError);
}

TEST(schedule, endpoints_and_shape) {
  AnnealSchedule s{10.0, 0.1, 5, 1, Interpolation::geometric};
  EXPECT_DOUBLE_EQ(s.temperature(0), 10.0);
  EXPECT_NEAR(s.temperature(4), 0.1, 1e-12);
  EXPECT_NEAR(s.temperature(2), 1.0, 1e-12);
  s.interpolation = Interpolation::linear;
  EXPECT_NEAR(s.temperature(2), 5.05, 1e-12);
  for (std::size_t k = 1; k < 5; ++k) EXPECT_LT(s.temperature(k), s.temperature(k - 1));
}

TEST(schedule, default_values) {
  QuboModel m(4);
  m.linear = {0.5, -3.0, 0.0, 1.0};
  m.quadratic[{0, 3}] = 2.0;
  const AnnealSchedule s = default_schedule(m);
  EXPECT_DOUBLE_EQ(s.t_initial, 12.0);
  EXPECT_DOUBLE_EQ(s.t_final, 1e-3);
  EXPECT_EQ(s.sweeps, 1000u);
  EXPECT_EQ(s.restarts, 32u);
  EXPECT_EQ(s.interpolation, Interpolation::geometric);
  EXPECT_NO_THROW(default_schedule(QuboModel(3)).validate());
}

TEST(exhaustive, tied_minima_both_present) {
  const SampleSet s = exhaustive_solve(two_tied_minima());
  ASSERT_EQ(s.records.size(), 4u);
  EXPECT_EQ(s.records[0].energy, -1.0);
  EXPECT_EQ(s.records[1].energy, -1.0);
  EXPECT_EQ(s.records[0].state, (Bits{0, 1}));
  EXPECT_EQ(s.records[1].state, (Bits{1, 0}));
}

TEST(exhaustive, zero_model_and_single_variable) {
  const SampleSet z = exhaustive_solve(QuboModel(3));
  ASSERT_EQ(z.records.size(), 8u);
  for (const auto& r : z.records) EXPECT_EQ(r.energy, 0.0);
  for (std::size_t i = 1; i < z.records.size(); ++i) EXPECT_LT(z.records[i - 1].state, z.records[i].state);

  QuboModel m(1);
  m.linear[0] = 1.0;
  const SampleSet s = exhaustive_solve(m);
  EXPECT_EQ(s.best().state, (Bits{0}));
  EXPECT_EQ(s.best().energy, 0.0);
}

TEST(exhaustive, cap_and_top_k) {
  EXPECT_THROW(exhaustive_solve(QuboModel(25)), InputError);
  std::mt19937_64 rng(3);
  const QuboModel m = annealfolio::testing::random_qubo(rng, 10, -1.0, 1.0);
  const SampleSet all = exhaustive_solve(m);
  const SampleSet top = exhaustive_solve(m, 7);
  ASSERT_EQ(all.records.size(), 1024u);
  ASSERT_EQ(top.records.size(), 7u);
  for (std::size_t i = 0; i < 7; ++i) {
    EXPECT_EQ(top.records[i].state, all.records[i].state);
    EXPECT_EQ(top.records[i].energy, all.records[i].energy);
  }
  EXPECT_NEAR(all.best().energy, annealfolio::testing::brute_min(m), 1e-12);
}

TEST(exhaustive, feasible_minimum) {
  const QuboModel m = two_tied_minima();
  const std::vector<LinearConstraint> both{{{1.0, 1.0}, Relation::eq, 2.0}};
  const auto r = exhaustive_best_feasible(m, both, 1e-9);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->state, (Bits{1, 1}));
  const std::vector<LinearConstraint> none{{{1.0, 1.0}, Relation::eq, 3.0}};
  EXPECT_FALSE(exhaustive_best_feasible(m, none, 1e-9));
}

TEST(exhaustive, parallel_matches_serial_reference) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const QuboModel m = annealfolio::testing::random_qubo(rng, 1 + rng() % 12, -2.0, 2.0);
    for (int threads : {1, 3}) {
      ThreadCount tc(threads);
      expect_same(exhaustive_solve(m), reference::exhaustive_solve_serial(m));
      expect_same(exhaustive_solve(m, 5), reference::exhaustive_solve_serial(m, 5));
    }
  }
}

TEST(anneal, tied_minima_reach_minus_one) {
  const QuboModel m = two_tied_minima();
  for (std::uint64_t seed : {0ULL, 1ULL, 99ULL, 123456789ULL}) {
    EXPECT_EQ(simulated_anneal(m, default_schedule(m), seed).best().energy, -1.0);
  }
}

TEST(anneal, deterministic_for_fixed_seed) {
  std::mt19937_64 rng(7);
  const QuboModel m = annealfolio::testing::random_qubo(rng, 14, -1.0, 1.0);
  const AnnealSchedule s{5.0, 0.01, 200, 16, Interpolation::geometric};
  const SampleSet a = simulated_anneal(m, s, 2024);
  const SampleSet b = simulated_anneal(m, s, 2024);
  expect_same(a, b);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

TEST(anneal, thread_count_does_not_change_results) {
  std::mt19937_64 rng(8);
  const QuboModel m = annealfolio::testing::random_qubo(rng, 12, -1.0, 1.0);
  const AnnealSchedule s{5.0, 0.01, 100, 9, Interpolation::linear};
  SampleSet one, many;
  {
    ThreadCount tc(1);
    one = simulated_anneal(m, s, 5);
  }
  {
    ThreadCount tc(4);
    many = simulated_anneal(m, s, 5);
  }
  expect_same(one, many);
}

// The incremental kernel and the recomputing reference agree exactly when
// every partial sum is representable, which dyadic coefficients guarantee.
TEST(anneal, kernel_matches_serial_reference) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 15; ++trial) {
    const QuboModel m = annealfolio::testing::dyadic_qubo(rng, 2 + rng() % 14);
    AnnealSchedule s = default_schedule(m);
    s.sweeps = 150;
    s.restarts = 6;
    s.interpolation = trial % 2 ? Interpolation::linear : Interpolation::geometric;
    expect_same(simulated_anneal(m, s, 1000 + static_cast<std::uint64_t>(trial)),
                reference::simulated_anneal_serial(m, s, 1000 + static_cast<std::uint64_t>(trial)));
  }
}

TEST(anneal, energy_audit) {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 10; ++trial) {
    const QuboModel m = annealfolio::testing::random_qubo(rng, 3 + rng() % 15, -2.0, 2.0);
    AnnealSchedule s = default_schedule(m);
    s.sweeps = 100;
    const SampleSet set = simulated_anneal(m, s, static_cast<std::uint64_t>(trial));
    std::size_t total = 0;
    for (std::size_t i = 0; i < set.records.size(); ++i) {
      EXPECT_NEAR(set.records[i].energy, dense_energy(m, set.records[i].state), 1e-9);
      if (i) EXPECT_TRUE(record_less(set.records[i - 1], set.records[i]));
      total += set.records[i].count;
    }
    EXPECT_EQ(total, s.restarts);
  }
}

TEST(anneal, more_restarts_never_worse) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 10; ++trial) {
    const QuboModel m = annealfolio::testing::random_qubo(rng, 16, -1.0, 1.0);
    AnnealSchedule s{4.0, 0.05, 20, 2, Interpolation::geometric};
    const double first = simulated_anneal(m, s, 77).best().energy;
    s.restarts = 7;
    EXPECT_LE(simulated_anneal(m, s, 77).best().energy, first);
  }
}

TEST(anneal, never_beats_exhaustive) {
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 25; ++trial) {
    const QuboModel m = annealfolio::testing::random_qubo(rng, 1 + rng() % 12, -2.0, 2.0);
    AnnealSchedule s = default_schedule(m);
    s.sweeps = 50;
    s.restarts = 4;
    EXPECT_GE(simulated_anneal(m, s, 3).best().energy, exhaustive_solve(m).best().energy - 1e-12);
  }
}

TEST(anneal, finds_optimum_on_small_models) {
  std::mt19937_64 rng(61);
  int hits = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const QuboModel m = annealfolio::testing::random_qubo(rng, 10, -1.0, 1.0);
    hits += simulated_anneal(m, default_schedule(m), 9).best().energy <= exhaustive_solve(m, 1).best().energy + 1e-9;
  }
  EXPECT_GE(hits, 19);
}

TEST(anneal, ising_input) {
  IsingModel s(3);
  s.h = {0.5, -0.25, 1.0};
  s.add_coupling(0, 1, -1.0);
  s.add_coupling(1, 2, 0.75);
  s.offset = 0.125;
  const SampleSet set = simulated_anneal(s, AnnealSchedule{4.0, 0.01, 200, 8}, 1);
  double best = 1e300;
  for (std::uint64_t mask = 0; mask < 8; ++mask) {
    std::vector<int> spins(3);
    for (std::size_t i = 0; i < 3; ++i) spins[i] = ((mask >> i) & 1U) ? 1 : -1;
    best = std::min(best, annealfolio::testing::spin_energy(s, spins));
  }
  EXPECT_NEAR(set.best().energy, best, 1e-12);
  for (const auto& r : set.records) {
    std::vector<int> spins(3);
    for (std::size_t i = 0; i < 3; ++i) spins[i] = 2 * r.state[i] - 1;
    EXPECT_NEAR(r.energy, annealfolio::testing::spin_energy(s, spins), 1e-12);
  }
}

TEST(anneal, rejects_empty_model_and_bad_schedule) {
  EXPECT_THROW(simulated_anneal(QuboModel(0), AnnealSchedule{}, 1), InputError);
  EXPECT_THROW(simulated_anneal(QuboModel(2), AnnealSchedule{1.0, 2.0, 10, 1}, 1), InputError);
}

TEST(restart_seeds, distinct_and_stable) {
  std::set<std::uint64_t> seen;
  for (std::size_t r = 0; r < 1000; ++r) seen.insert(restart_seed(42, r));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(restart_seed(42, 3), restart_seed(43, 2));
  EXPECT_EQ(unit_interval(0), 0.0);
  EXPECT_LT(unit_interval(~0ULL), 1.0);
}

TEST(best_feasible, filter_then_rank) {
  SampleSet s;
  s.model_n = 2;
  s.records = {{{1, 1}, -5.0, 1}, {{1, 0}, -3.0, 1}};
  const std::vector<LinearConstraint> one{{{1.0, 1.0}, Relation::eq, 1.0}};
  EXPECT_EQ(best_feasible(s, one, 1e-9), (Bits{1, 0}));
  EXPECT_EQ(best_feasible(s, {}, 1e-9), (Bits{1, 1}));
  const std::vector<LinearConstraint> none{{{1.0, 1.0}, Relation::eq, 0.0}};
  EXPECT_FALSE(best_feasible(s, none, 1e-9));
  const std::vector<LinearConstraint> wide{{{1.0, 1.0, 1.0}, Relation::eq, 0.0}};
  EXPECT_THROW(best_feasible(s, wide, 1e-9), InputError);
}

TEST(sample_json, layout) {
  SampleSet s;
  s.model_n = 3;
  s.seed = 9;
  s.records = {{{0, 1, 1}, -1.5, 2}};
  EXPECT_EQ(to_json(s).dump(), R"({"n":3,"samples":[{"count":2,"energy":-1.5,"state":"011"}],"seed":9})");
  EXPECT_EQ(bits_from_string("0110"), (Bits{0, 1, 1, 0}));
  EXPECT_THROW(bits_from_string("01x"), InputError);
}
