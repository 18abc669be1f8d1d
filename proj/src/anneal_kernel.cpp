// Parallel simulated-annealing kernel. One OpenMP iteration per restart; the
// serial reference in sampler.cpp must produce identical records.

#include "annealfolio/error.hpp"
#include "annealfolio/sampler.hpp"

#include <cmath>
#include <random>

namespace annealfolio {

namespace {

/// Row-major symmetric coupling matrix with zero diagonal.
struct DenseCouplings {
  std::size_t n = 0;
  std::vector<double> w;

  explicit DenseCouplings(const QuboModel& m) : n(m.n), w(m.n * m.n, 0.0) {
    for (const auto& [key, b] : m.quadratic) {
      w[key.first * n + key.second] = b;
      w[key.second * n + key.first] = b;
    }
  }
  const double* row(std::size_t i) const { return w.data() + i * n; }
};

SampleRecord anneal_one(const QuboModel& m, const DenseCouplings& c, const AnnealSchedule& schedule,
                        std::uint64_t seed, std::size_t restart) {
  const std::size_t n = m.n;
  std::mt19937_64 rng(restart_seed(seed, restart));
  Bits x(n);
  for (auto& b : x) b = static_cast<std::uint8_t>(rng() >> 63);

  // field[i] = linear[i] + sum_j w_ij x_j; flipping i changes energy by (1 - 2 x_i) field[i].
  std::vector<double> field(n);
  for (std::size_t i = 0; i < n; ++i) {
    double f = m.linear[i];
    const double* wi = c.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (x[j]) f += wi[j];
    }
    field[i] = f;
  }

  double energy = qubo_energy(m, x);
  Bits best = x;
  double best_energy = energy;
  for (std::size_t k = 0; k < schedule.sweeps; ++k) {
    const double t = schedule.temperature(k);
    for (std::size_t i = 0; i < n; ++i) {
      const double delta = x[i] ? -field[i] : field[i];
      if (delta <= 0.0 || unit_interval(rng()) < std::exp(-delta / t)) {
        x[i] ^= 1u;
        const double step = x[i] ? 1.0 : -1.0;
        const double* wi = c.row(i);
        for (std::size_t j = 0; j < n; ++j) field[j] += wi[j] * step;
        energy += delta;
        if (energy < best_energy) {
          best_energy = energy;
          best = x;
        }
      }
    }
  }
  const double e = qubo_energy(m, best);
  return SampleRecord{std::move(best), e, 1};
}

}  // namespace

SampleSet simulated_anneal(const QuboModel& m, const AnnealSchedule& schedule, std::uint64_t seed) {
  schedule.validate();
  if (m.n < 1) throw InputError("model has no variables");
  const DenseCouplings couplings(m);

  std::vector<SampleRecord> per_restart(schedule.restarts);
  const auto restarts = static_cast<std::ptrdiff_t>(schedule.restarts);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t r = 0; r < restarts; ++r) {
    per_restart[static_cast<std::size_t>(r)] = anneal_one(m, couplings, schedule, seed, static_cast<std::size_t>(r));
  }

  SampleSet out;
  out.records = detail::merge_records(std::move(per_restart));
  out.seed = seed;
  out.model_n = m.n;
  return out;
}

}  // namespace annealfolio
