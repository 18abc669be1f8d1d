#include "annealfolio/sampler.hpp"

#include "annealfolio/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace annealfolio {

void AnnealSchedule::validate() const {
  if (!(t_initial > 0.0) || !std::isfinite(t_initial)) throw InputError("t_initial must be a positive number");
  if (!(t_final > 0.0) || !(t_final < t_initial)) throw InputError("t_final must lie in (0, t_initial)");
  if (sweeps < 1) throw InputError("sweeps must be at least 1");
  if (restarts < 1) throw InputError("restarts must be at least 1");
}

double AnnealSchedule::temperature(std::size_t k) const {
  if (sweeps <= 1) return t_final;
  const double frac = static_cast<double>(k) / static_cast<double>(sweeps - 1);
  if (interpolation == Interpolation::geometric) return t_initial * std::pow(t_final / t_initial, frac);
  return t_initial + (t_final - t_initial) * frac;
}

AnnealSchedule default_schedule(const QuboModel& m) {
  AnnealSchedule s;
  const double scale = m.max_abs_coefficient() * static_cast<double>(std::max<std::size_t>(m.n, 1));
  s.t_initial = scale > 0.0 ? scale : 1.0;
  s.t_final = 1e-3;
  if (s.t_final >= s.t_initial) s.t_final = s.t_initial * 1e-3;
  return s;
}

const SampleRecord& SampleSet::best() const {
  if (records.empty()) throw SolverError("sample set is empty");
  return records.front();
}

bool record_less(const SampleRecord& a, const SampleRecord& b) {
  if (a.energy != b.energy) return a.energy < b.energy;
  return a.state < b.state;
}

std::uint64_t restart_seed(std::uint64_t seed, std::size_t restart) {
  // splitmix64 finalizer
  std::uint64_t z = seed + static_cast<std::uint64_t>(restart) + 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace detail {

std::vector<SampleRecord> merge_records(std::vector<SampleRecord> raw) {
  std::sort(raw.begin(), raw.end(), record_less);
  std::vector<SampleRecord> out;
  for (auto& r : raw) {
    if (!out.empty() && out.back().state == r.state) {
      out.back().count += r.count;
    } else {
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace detail

SampleSet simulated_anneal(const IsingModel& m, const AnnealSchedule& schedule, std::uint64_t seed) {
  SampleSet s = simulated_anneal(ising_to_qubo(m), schedule, seed);
  for (auto& r : s.records) r.energy = ising_energy(m, to_spins(r.state));
  std::sort(s.records.begin(), s.records.end(), record_less);
  return s;
}

std::optional<Bits> best_feasible(const SampleSet& s, std::span<const LinearConstraint> constraints,
                                  double tolerance) {
  for (const auto& c : constraints) {
    if (c.coeffs.size() > s.model_n) throw InputError("constraint references variables beyond the sample width");
  }
  for (const auto& r : s.records) {
    const bool ok = std::all_of(constraints.begin(), constraints.end(),
                                [&](const LinearConstraint& c) { return c.satisfied(r.state, tolerance); });
    if (ok) return r.state;
  }
  return std::nullopt;
}

namespace reference {

SampleSet simulated_anneal_serial(const QuboModel& m, const AnnealSchedule& schedule, std::uint64_t seed) {
  schedule.validate();
  if (m.n < 1) throw InputError("model has no variables");
  const std::size_t n = m.n;
  std::vector<std::vector<double>> coupling(n, std::vector<double>(n, 0.0));
  for (const auto& [key, b] : m.quadratic) {
    coupling[key.first][key.second] = b;
    coupling[key.second][key.first] = b;
  }

  std::vector<SampleRecord> raw;
  for (std::size_t r = 0; r < schedule.restarts; ++r) {
    std::mt19937_64 rng(restart_seed(seed, r));
    Bits x(n);
    for (auto& b : x) b = static_cast<std::uint8_t>(rng() >> 63);
    double energy = qubo_energy(m, x);
    Bits best = x;
    double best_energy = energy;
    for (std::size_t k = 0; k < schedule.sweeps; ++k) {
      const double t = schedule.temperature(k);
      for (std::size_t i = 0; i < n; ++i) {
        double field = m.linear[i];
        for (std::size_t j = 0; j < n; ++j) {
          if (x[j]) field += coupling[i][j];
        }
        const double delta = x[i] ? -field : field;
        if (delta <= 0.0 || unit_interval(rng()) < std::exp(-delta / t)) {
          x[i] ^= 1u;
          energy += delta;
          if (energy < best_energy) {
            best_energy = energy;
            best = x;
          }
        }
      }
    }
    raw.push_back(SampleRecord{best, qubo_energy(m, best), 1});
  }
  SampleSet out;
  out.records = detail::merge_records(std::move(raw));
  out.seed = seed;
  out.model_n = n;
  return out;
}

SampleSet exhaustive_solve_serial(const QuboModel& m, std::size_t top_k) {
  if (m.n > kExhaustiveMaxVars) throw InputError("exhaustive solve is capped at 24 variables");
  std::vector<SampleRecord> raw;
  const std::uint64_t states = std::uint64_t{1} << m.n;
  raw.reserve(static_cast<std::size_t>(states));
  for (std::uint64_t mask = 0; mask < states; ++mask) {
    Bits x(m.n);
    for (std::size_t i = 0; i < m.n; ++i) x[i] = static_cast<std::uint8_t>((mask >> i) & 1u);
    const double e = qubo_energy(m, x);
    raw.push_back(SampleRecord{std::move(x), e, 1});
  }
  std::sort(raw.begin(), raw.end(), record_less);
  if (top_k > 0 && raw.size() > top_k) raw.resize(top_k);
  SampleSet out;
  out.records = std::move(raw);
  out.model_n = m.n;
  return out;
}

}  // namespace reference

}  // namespace annealfolio
