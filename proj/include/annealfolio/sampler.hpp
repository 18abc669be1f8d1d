#pragma once

#include "annealfolio/model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace annealfolio {

enum class Interpolation { geometric, linear };

struct AnnealSchedule {
  double t_initial = 1.0;
  double t_final = 1e-3;
  std::size_t sweeps = 1000;
  std::size_t restarts = 32;
  Interpolation interpolation = Interpolation::geometric;

  /// Throws InputError unless 0 < t_final < t_initial, sweeps >= 1, restarts >= 1.
  void validate() const;
  /// Temperature used during sweep `k` (0-based); runs t_initial -> t_final.
  double temperature(std::size_t k) const;
};

/// t_initial = max |coefficient| * n, t_final = 1e-3 (or t_initial/1000 when
/// that would not be below t_initial), geometric, 1000 sweeps, 32 restarts.
AnnealSchedule default_schedule(const QuboModel& m);

struct SampleRecord {
  Bits state;
  double energy = 0.0;
  std::size_t count = 1;
};

/// Records are sorted by (energy, state lexicographic) and deduplicated.
struct SampleSet {
  std::vector<SampleRecord> records;
  std::uint64_t seed = 0;
  std::size_t model_n = 0;

  const SampleRecord& best() const;
  bool empty() const { return records.empty(); }
};

/// Total order used for every SampleSet: energy, then state lexicographic.
bool record_less(const SampleRecord& a, const SampleRecord& b);

inline constexpr std::size_t kExhaustiveMaxVars = 24;

/// Enumerates all 2^n states. With top_k > 0 only the k lowest records are
/// kept. Throws InputError when n > kExhaustiveMaxVars.
SampleSet exhaustive_solve(const QuboModel& m, std::size_t top_k = 0);

/// Lowest-energy state satisfying every constraint, found by enumeration.
std::optional<SampleRecord> exhaustive_best_feasible(const QuboModel& m, std::span<const LinearConstraint> constraints,
                                                     double tolerance);

/// Seeded single-flip Metropolis annealing. Restarts are independent and run
/// in parallel; each restart's best state becomes one record.
SampleSet simulated_anneal(const QuboModel& m, const AnnealSchedule& schedule, std::uint64_t seed);

/// Anneals the equivalent QUBO; returned states are bits x with s = 2x - 1 and
/// energies are evaluated on the Ising model.
SampleSet simulated_anneal(const IsingModel& m, const AnnealSchedule& schedule, std::uint64_t seed);

/// Lowest record satisfying all constraints within `tolerance`.
std::optional<Bits> best_feasible(const SampleSet& s, std::span<const LinearConstraint> constraints, double tolerance);

/// Seed of restart `r`: splitmix64(seed + r). Each restart draws from its own
/// std::mt19937_64 seeded with this value.
std::uint64_t restart_seed(std::uint64_t seed, std::size_t restart);

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
inline double unit_interval(std::uint64_t draw) {
  return static_cast<double>(draw >> 11) * 0x1.0p-53;
}

/// Serial implementations kept as references for the parallel kernels.
namespace reference {

/// Recomputes every flip delta from the full coupling row; no incremental state.
SampleSet simulated_anneal_serial(const QuboModel& m, const AnnealSchedule& schedule, std::uint64_t seed);

/// Evaluates qubo_energy on every state in order.
SampleSet exhaustive_solve_serial(const QuboModel& m, std::size_t top_k = 0);

}  // namespace reference

namespace detail {
/// Merges per-restart best states into a sorted, deduplicated record list.
std::vector<SampleRecord> merge_records(std::vector<SampleRecord> raw);
}  // namespace detail

}  // namespace annealfolio
