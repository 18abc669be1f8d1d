#include "annealfolio/pipeline.hpp"

#include "annealfolio/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace annealfolio {

void PipelineConfig::validate() const {
  if (!(budget > 0.0) || !std::isfinite(budget)) throw InputError("budget must be positive");
  if (!(q > 0.0)) throw InputError("q must be positive");
  if (lambda && !(*lambda > 0.0)) throw InputError("lambda must be positive");
  if (cardinality && *cardinality == 0) throw InputError("cardinality must be at least 1");
  if (!(slack_granularity > 0.0)) throw InputError("slack_granularity must be positive");
  if (!(annualization_factor > 0.0)) throw InputError("annualization_factor must be positive");
  if (sampler) sampler->validate();
  allocator.validate();
}

std::vector<std::string> Holdings::held() const {
  std::vector<std::string> out;
  for (const auto& [ticker, n] : shares) {
    if (n > 0) out.push_back(ticker);
  }
  return out;
}

Selection select_assets(const AssetStats& stats, std::size_t k, double q, std::optional<double> lambda,
                        const std::optional<AnnealSchedule>& schedule, std::uint64_t seed) {
  const std::size_t n = stats.size();
  if (k == 0 || k > n) throw InputError("cardinality " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");

  Selection out;
  double lam = lambda.value_or(default_mvo_lambda(stats, q));
  const LinearConstraint card{std::vector<double>(n, 1.0), Relation::eq, static_cast<double>(k)};

  if (k == n) {
    out.indices.resize(n);
    std::iota(out.indices.begin(), out.indices.end(), std::size_t{0});
    out.energy = mvo_objective(stats, q, Bits(n, 1));
    out.lambda_used = lam;
    return out;
  }

  QuboModel qubo;
  for (int attempt = 0; attempt < 2; ++attempt) {
    qubo = build_mvo_qubo(stats, q, k, lam);
    const AnnealSchedule sched = schedule.value_or(default_schedule(qubo));
    const SampleSet samples = simulated_anneal(qubo, sched, seed);
    if (const auto x = best_feasible(samples, std::span(&card, 1), 1e-9)) {
      for (std::size_t i = 0; i < n; ++i) {
        if ((*x)[i]) out.indices.push_back(i);
      }
      out.energy = qubo_energy(qubo, *x);
      out.lambda_used = lam;
      return out;
    }
    lam *= 2.0;
  }
  lam /= 2.0;
  if (n > kExhaustiveMaxVars) throw SolverError("no feasible asset selection after retry; universe too large to enumerate");
  const auto rec = exhaustive_best_feasible(qubo, std::span(&card, 1), 1e-9);
  if (!rec) throw SolverError("no feasible asset selection");
  for (std::size_t i = 0; i < n; ++i) {
    if (rec->state[i]) out.indices.push_back(i);
  }
  out.energy = rec->energy;
  out.lambda_used = lam;
  out.exhaustive_fallback = true;
  return out;
}

Holdings to_shares(const WeightVector& weights, const PriceRow& prices, double budget, Date as_of) {
  if (static_cast<std::size_t>(weights.weights.size()) != weights.tickers.size()) {
    throw InputError("weights/tickers size mismatch");
  }
  Holdings h;
  h.as_of = as_of;
  if (!(budget > 0.0)) {
    h.cash = 0.0;
    return h;
  }

  struct Line {
    std::string ticker;
    double price;
    std::int64_t shares;
    double remainder;
  };
  std::vector<Line> lines;
  double spend = 0.0;
  for (std::size_t k = 0; k < weights.tickers.size(); ++k) {
    const auto& t = weights.tickers[k];
    const auto it = prices.find(t);
    if (it == prices.end()) throw InputError("no price for '" + t + "'");
    const double p = it->second;
    if (!(p > 0.0)) throw InputError("non-positive price for '" + t + "'");
    const double units = std::max(0.0, weights.weights(static_cast<Eigen::Index>(k))) * budget / p;
    const double whole = std::floor(units);
    lines.push_back(Line{t, p, static_cast<std::int64_t>(whole), units - whole});
    spend += whole * p;
  }
  double cash = budget - spend;

  std::vector<std::size_t> order(lines.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (lines[a].remainder != lines[b].remainder) return lines[a].remainder > lines[b].remainder;
    return lines[a].ticker < lines[b].ticker;
  });
  for (const std::size_t i : order) {
    if (lines[i].remainder > 0.0 && lines[i].price <= cash) {
      ++lines[i].shares;
      cash -= lines[i].price;
    }
  }
  // Rounding of budget - spend can leave a sub-cent negative residue.
  if (cash < 0.0 && cash > -1e-6) cash = 0.0;

  for (const auto& l : lines) {
    if (l.shares > 0) h.shares[l.ticker] += l.shares;
  }
  h.cash = cash;
  return h;
}

double portfolio_value(const Holdings& h, const PriceRow& prices) {
  double v = h.cash;
  for (const auto& [ticker, n] : h.shares) {
    if (n == 0) continue;
    const auto it = prices.find(ticker);
    if (it == prices.end()) throw InputError("no price for held ticker '" + ticker + "'");
    v += static_cast<double>(n) * it->second;
  }
  return v;
}

WeightVector realized_weights(const Holdings& h, const PriceRow& prices) {
  WeightVector w;
  std::vector<double> values;
  double total = 0.0;
  for (const auto& [ticker, n] : h.shares) {
    if (n <= 0) continue;
    const auto it = prices.find(ticker);
    if (it == prices.end()) throw InputError("no price for held ticker '" + ticker + "'");
    w.tickers.push_back(ticker);
    values.push_back(static_cast<double>(n) * it->second);
    total += values.back();
  }
  w.weights.resize(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) w.weights(static_cast<Eigen::Index>(i)) = values[i] / total;
  return w;
}

AssetStats stats_from_prices(const PriceMatrix& prices, const PipelineConfig& cfg) {
  return estimate_stats(compute_returns(prices, cfg.return_method), cfg.annualization_factor, cfg.period);
}

namespace {

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

std::size_t resolve_cardinality(const AssetStats& stats, const PipelineConfig& cfg) {
  if (cfg.cardinality) {
    if (*cfg.cardinality > stats.size()) {
      throw InputError("cardinality " + std::to_string(*cfg.cardinality) + " exceeds universe size " +
                       std::to_string(stats.size()));
    }
    return *cfg.cardinality;
  }
  const auto all = all_indices(stats.size());
  const SharpeSolution full = max_sharpe_weights(stats, all, cfg.allocator);
  return derive_cardinality(full.y_star, cfg.allocator);
}

void attach_metrics(PipelineResult& r, const AssetStats& stats, const PriceRow& prices, const PipelineConfig& cfg) {
  r.weights_realized = realized_weights(r.holdings, prices);
  if (r.weights_realized.tickers.empty()) return;
  r.metrics = compute_metrics(r.weights_realized, stats, cfg.allocator);
  if (!r.weights_target.tickers.empty()) r.target_metrics = compute_metrics(r.weights_target, stats, cfg.allocator);
}

// Local search over share vectors, alternating two move types until neither
// improves: steepest single-share steps (buy one, sell one, or swap one share
// between assets), then an exact line search on every asset pair, scanning one
// count and setting the other to its best value for the leftover budget.
// Sampled states sit in penalty wells where these moves take many
// simultaneous bit flips, so the sampler rarely finds them on its own.
std::vector<std::int64_t> polish_shares(const AssetStats& stats, const std::vector<double>& p, double q,
                                        double budget, std::vector<std::int64_t> x) {
  const std::size_t n = x.size();
  const auto idx = [](std::size_t i) { return static_cast<Eigen::Index>(i); };
  auto spend_of = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += p[i] * static_cast<double>(x[i]);
    return s;
  };
  auto better = [](double f, double best) { return f < best - 1e-12 * std::max(1.0, std::abs(best)); };
  double current = mpt_objective(stats, p, q, x);

  auto single_steps = [&] {
    bool moved = false;
    double spend = spend_of();
    while (true) {
      double best = current;
      std::size_t up = n, down = n;
      auto consider = [&](std::size_t i, std::size_t j) {
        const double delta = (i < n ? p[i] : 0.0) - (j < n ? p[j] : 0.0);
        if (spend + delta > budget + 1e-9) return;
        if (i < n) ++x[i];
        if (j < n) --x[j];
        const double f = mpt_objective(stats, p, q, x);
        if (i < n) --x[i];
        if (j < n) ++x[j];
        if (better(f, best)) {
          best = f;
          up = i;
          down = j;
        }
      };
      for (std::size_t i = 0; i < n; ++i) {
        consider(i, n);
        if (x[i] > 0) consider(n, i);
        for (std::size_t j = 0; j < n; ++j) {
          if (j != i && x[j] > 0) consider(i, j);
        }
      }
      if (up == n && down == n) return moved;
      if (up < n) ++x[up], spend += p[up];
      if (down < n) --x[down], spend -= p[down];
      current = best;
      moved = true;
    }
  };

  // For fixed others the objective is a convex quadratic in each count, so the
  // best x_j given x_i is the rounded unconstrained minimizer, clipped.
  auto pair_search = [&] {
    bool moved = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double rest = spend_of() - p[i] * static_cast<double>(x[i]) - p[j] * static_cast<double>(x[j]);
        const auto keep_i = x[i], keep_j = x[j];
        std::int64_t best_i = keep_i, best_j = keep_j;
        double best = current;
        const auto max_i = static_cast<std::int64_t>(std::floor((budget - rest) / p[i] + 1e-9));
        for (std::int64_t a = 0; a <= max_i; ++a) {
          x[i] = a;
          const auto max_j =
              static_cast<std::int64_t>(std::floor((budget - rest - p[i] * static_cast<double>(a)) / p[j] + 1e-9));
          // d f / d x_j = p_j (2 q (Sigma y)_j - mu_j); solve for x_j with y_j = p_j x_j.
          x[j] = 0;
          double sy = 0.0;
          for (std::size_t k = 0; k < n; ++k) sy += stats.sigma(idx(j), idx(k)) * p[k] * static_cast<double>(x[k]);
          const double sjj = stats.sigma(idx(j), idx(j));
          double star = sjj > 0.0 ? (stats.mu(idx(j)) / (2.0 * q) - sy) / (sjj * p[j])
                                  : (stats.mu(idx(j)) - 2.0 * q * sy > 0.0 ? static_cast<double>(max_j) : 0.0);
          star = std::clamp(star, 0.0, static_cast<double>(max_j));
          for (const double c : {std::floor(star), std::ceil(star)}) {
            x[j] = std::min<std::int64_t>(static_cast<std::int64_t>(c), max_j);
            const double f = mpt_objective(stats, p, q, x);
            if (better(f, best)) {
              best = f;
              best_i = x[i];
              best_j = x[j];
            }
          }
        }
        x[i] = best_i;
        x[j] = best_j;
        if (best_i != keep_i || best_j != keep_j) {
          current = best;
          moved = true;
        }
      }
    }
    return moved;
  };

  single_steps();
  while (pair_search()) single_steps();
  return x;
}

}  // namespace

PipelineResult hybrid_optimize(const AssetStats& stats, const PriceRow& prices, const PipelineConfig& cfg, Date as_of) {
  cfg.validate();
  PipelineResult r;
  r.strategy = Strategy::hybrid;
  r.budget = cfg.budget;
  r.seed = cfg.seed;
  r.cardinality_mode = cfg.allocator.cardinality_mode;
  r.cardinality_auto = !cfg.cardinality.has_value();
  r.cardinality = resolve_cardinality(stats, cfg);

  const Selection sel = select_assets(stats, r.cardinality, cfg.q, cfg.lambda, cfg.sampler, cfg.seed);
  for (const auto i : sel.indices) r.selected.push_back(stats.tickers[i]);

  const SharpeSolution alloc = cfg.allocator_mode == AllocatorMode::max_sharpe
                                   ? max_sharpe_weights(stats, sel.indices, cfg.allocator)
                                   : mvo_weights(stats, sel.indices, cfg.allocator);
  r.weights_target = alloc.weights;
  r.holdings = to_shares(alloc.weights, prices, cfg.budget, as_of);
  if (r.holdings.held().empty()) {
    throw SolverError("budget too small to buy a single share of the selected assets");
  }
  attach_metrics(r, stats, prices, cfg);
  return r;
}

PipelineResult hybrid_optimize(const PriceMatrix& prices, const PipelineConfig& cfg) {
  if (cfg.strategy != Strategy::hybrid) throw InputError("hybrid_optimize needs strategy 'hybrid'");
  const AssetStats stats = stats_from_prices(prices, cfg);
  const std::size_t last = prices.dates.size() - 1;
  return hybrid_optimize(stats, prices.row_prices(last), cfg, prices.dates[last]);
}

Holdings optimize_integer_shares(const PriceRow& prices, const AssetStats& stats, const PipelineConfig& cfg,
                                 Date as_of) {
  cfg.validate();
  std::vector<double> p;
  for (const auto& t : stats.tickers) {
    const auto it = prices.find(t);
    if (it == prices.end()) throw InputError("no price for '" + t + "'");
    p.push_back(it->second);
  }

  // q is dimensionless: the dollar objective is budget * (q w'Sigma w - mu'w), w = y / budget.
  const double q_dollar = cfg.q / cfg.budget;
  const ConstrainedModel cm = build_mpt_model(stats, p, cfg.budget, q_dollar);
  const double lam = cfg.lambda.value_or(default_mpt_lambda(stats, p, cfg.budget, q_dollar, cfg.slack_granularity));
  const LoweredModel lowered = lower_constraints(cm, lam, cfg.slack_granularity);
  if (lowered.qubo.n > kMaxEncodedBits) {
    throw SolverError("integer model needs " + std::to_string(lowered.qubo.n) + " binaries (cap " +
                      std::to_string(kMaxEncodedBits) + "); reduce the universe or the budget");
  }

  Holdings h;
  h.as_of = as_of;
  h.cash = cfg.budget;
  if (lowered.qubo.n == 0) return h;

  const AnnealSchedule sched = cfg.sampler.value_or(default_schedule(lowered.qubo));
  const SampleSet samples = simulated_anneal(lowered.qubo, sched, cfg.seed);

  std::optional<std::vector<std::int64_t>> best;
  double best_obj = 0.0;
  for (const auto& rec : samples.records) {
    auto shares = cm.decode(rec.state);
    double spend = 0.0;
    for (std::size_t i = 0; i < shares.size(); ++i) spend += p[i] * static_cast<double>(shares[i]);
    if (spend > cfg.budget + 1e-9) continue;
    if (cfg.polish_shares) shares = polish_shares(stats, p, q_dollar, cfg.budget, std::move(shares));
    const double obj = mpt_objective(stats, p, q_dollar, shares);
    if (!best || obj < best_obj) {
      best = std::move(shares);
      best_obj = obj;
    }
  }
  if (!best) throw SolverError("no sampled share assignment respects the budget");

  double spend = 0.0;
  for (std::size_t i = 0; i < best->size(); ++i) {
    if ((*best)[i] > 0) {
      h.shares[stats.tickers[i]] = (*best)[i];
      spend += p[i] * static_cast<double>((*best)[i]);
    }
  }
  h.cash = std::max(0.0, cfg.budget - spend);
  return h;
}

PipelineResult fully_quantum_optimize(const AssetStats& stats, const PriceRow& prices, const PipelineConfig& cfg,
                                      Date as_of) {
  cfg.validate();
  PipelineResult r;
  r.strategy = Strategy::fully_quantum;
  r.budget = cfg.budget;
  r.seed = cfg.seed;
  r.cardinality_mode = cfg.allocator.cardinality_mode;
  r.cardinality_auto = !cfg.cardinality.has_value();
  r.cardinality = resolve_cardinality(stats, cfg);

  const Selection sel = select_assets(stats, r.cardinality, cfg.q, cfg.lambda, cfg.sampler, cfg.seed);
  const AssetStats sub = stats.subset(sel.indices);
  for (const auto& t : sub.tickers) r.selected.push_back(t);

  PipelineConfig integer_cfg = cfg;
  // The selection lambda is on a different scale from the budget penalty.
  integer_cfg.lambda.reset();
  r.holdings = optimize_integer_shares(prices, sub, integer_cfg, as_of);
  attach_metrics(r, stats, prices, cfg);
  r.weights_target = r.weights_realized;
  return r;
}

PipelineResult run_pipeline(const PriceMatrix& prices, const PipelineConfig& cfg) {
  const AssetStats stats = stats_from_prices(prices, cfg);
  const std::size_t last = prices.dates.size() - 1;
  const PriceRow row = prices.row_prices(last);
  if (cfg.strategy == Strategy::hybrid) return hybrid_optimize(stats, row, cfg, prices.dates[last]);
  return fully_quantum_optimize(stats, row, cfg, prices.dates[last]);
}

}  // namespace annealfolio
