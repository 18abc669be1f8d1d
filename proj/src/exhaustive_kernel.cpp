// Parallel enumeration of all 2^n states. Energies are summed in the same
// order as qubo_energy, so results match the serial reference bit for bit.

#include "annealfolio/error.hpp"
#include "annealfolio/sampler.hpp"

#include <algorithm>
#include <bit>
#include <omp.h>
#include <queue>

namespace annealfolio {

namespace {

struct UpperRows {
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;

  explicit UpperRows(const QuboModel& m) : rows(m.n) {
    for (const auto& [key, b] : m.quadratic) rows[key.first].emplace_back(key.second, b);
  }
};

double mask_energy(const QuboModel& m, const UpperRows& u, std::uint64_t mask) {
  double e = m.offset;
  for (std::uint64_t rest = mask; rest != 0; rest &= rest - 1) e += m.linear[static_cast<std::size_t>(std::countr_zero(rest))];
  for (std::uint64_t rest = mask; rest != 0; rest &= rest - 1) {
    const auto i = static_cast<std::size_t>(std::countr_zero(rest));
    for (const auto& [j, b] : u.rows[i]) {
      if ((mask >> j) & 1u) e += b;
    }
  }
  return e;
}

/// (energy, state-lexicographic) order on masks, where bit i is x_i.
struct Scored {
  double energy;
  std::uint64_t mask;
};

bool scored_less(const Scored& a, const Scored& b) {
  if (a.energy != b.energy) return a.energy < b.energy;
  const std::uint64_t d = a.mask ^ b.mask;
  if (d == 0) return false;
  // The first differing position decides; a 0 there sorts first.
  return ((a.mask >> std::countr_zero(d)) & 1u) == 0;
}

Bits mask_bits(std::uint64_t mask, std::size_t n) {
  Bits x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<std::uint8_t>((mask >> i) & 1u);
  return x;
}

void check_size(const QuboModel& m) {
  if (m.n > kExhaustiveMaxVars) {
    throw InputError("exhaustive solve is capped at " + std::to_string(kExhaustiveMaxVars) + " variables, model has " +
                     std::to_string(m.n));
  }
}

}  // namespace

SampleSet exhaustive_solve(const QuboModel& m, std::size_t top_k) {
  check_size(m);
  const UpperRows rows(m);
  const auto states = static_cast<std::int64_t>(std::uint64_t{1} << m.n);
  std::vector<Scored> kept;

  if (top_k == 0 || static_cast<std::uint64_t>(top_k) >= static_cast<std::uint64_t>(states)) {
    kept.resize(static_cast<std::size_t>(states));
#pragma omp parallel for schedule(static)
    for (std::int64_t s = 0; s < states; ++s) {
      const auto mask = static_cast<std::uint64_t>(s);
      kept[static_cast<std::size_t>(s)] = Scored{mask_energy(m, rows, mask), mask};
    }
    std::sort(kept.begin(), kept.end(), scored_less);
  } else {
    const int threads = omp_get_max_threads();
    std::vector<std::vector<Scored>> local(static_cast<std::size_t>(threads));
#pragma omp parallel num_threads(threads)
    {
      // Max-heap on the total order: top() is the worst of the kept states.
      std::priority_queue<Scored, std::vector<Scored>, decltype(&scored_less)> heap(&scored_less);
#pragma omp for schedule(static)
      for (std::int64_t s = 0; s < states; ++s) {
        const Scored cur{mask_energy(m, rows, static_cast<std::uint64_t>(s)), static_cast<std::uint64_t>(s)};
        if (heap.size() < top_k) {
          heap.push(cur);
        } else if (scored_less(cur, heap.top())) {
          heap.pop();
          heap.push(cur);
        }
      }
      auto& mine = local[static_cast<std::size_t>(omp_get_thread_num())];
      while (!heap.empty()) {
        mine.push_back(heap.top());
        heap.pop();
      }
    }
    for (auto& l : local) kept.insert(kept.end(), l.begin(), l.end());
    std::sort(kept.begin(), kept.end(), scored_less);
    if (kept.size() > top_k) kept.resize(top_k);
  }

  SampleSet out;
  out.model_n = m.n;
  out.records.reserve(kept.size());
  for (const auto& k : kept) out.records.push_back(SampleRecord{mask_bits(k.mask, m.n), k.energy, 1});
  return out;
}

std::optional<SampleRecord> exhaustive_best_feasible(const QuboModel& m, std::span<const LinearConstraint> constraints,
                                                     double tolerance) {
  check_size(m);
  for (const auto& c : constraints) {
    if (c.coeffs.size() > m.n) throw InputError("constraint references variables beyond the model");
  }
  const UpperRows rows(m);
  const auto states = static_cast<std::int64_t>(std::uint64_t{1} << m.n);
  const int threads = omp_get_max_threads();
  std::vector<std::optional<Scored>> local(static_cast<std::size_t>(threads));

  auto feasible = [&](std::uint64_t mask) {
    for (const auto& c : constraints) {
      double a = 0.0;
      for (std::uint64_t rest = mask; rest != 0; rest &= rest - 1) {
        const auto i = static_cast<std::size_t>(std::countr_zero(rest));
        if (i < c.coeffs.size()) a += c.coeffs[i];
      }
      const double diff = a - c.rhs;
      const double v = c.relation == Relation::eq ? std::abs(diff) : std::max(0.0, diff);
      if (v > tolerance) return false;
    }
    return true;
  };

#pragma omp parallel num_threads(threads)
  {
    std::optional<Scored> best;
#pragma omp for schedule(static)
    for (std::int64_t s = 0; s < states; ++s) {
      const auto mask = static_cast<std::uint64_t>(s);
      if (!feasible(mask)) continue;
      const Scored cur{mask_energy(m, rows, mask), mask};
      if (!best || scored_less(cur, *best)) best = cur;
    }
    local[static_cast<std::size_t>(omp_get_thread_num())] = best;
  }

  std::optional<Scored> best;
  for (const auto& l : local) {
    if (l && (!best || scored_less(*l, *best))) best = l;
  }
  if (!best) return std::nullopt;
  return SampleRecord{mask_bits(best->mask, m.n), best->energy, 1};
}

}  // namespace annealfolio
