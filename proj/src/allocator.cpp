#include "annealfolio/allocator.hpp"

#include "annealfolio/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace annealfolio {

void AllocatorConfig::validate() const {
  if (!(kkt_tolerance > 0.0)) throw InputError("kkt_tolerance must be positive");
  if (!(zero_weight_threshold > 0.0)) throw InputError("zero_weight_threshold must be positive");
  if (!std::isfinite(risk_free_rate)) throw InputError("risk_free_rate must be finite");
  if (!(risk_aversion_q > 0.0)) throw InputError("risk_aversion_q must be positive");
}

void WeightVector::validate() const {
  if (static_cast<std::size_t>(weights.size()) != tickers.size()) throw InputError("weights/tickers size mismatch");
  if (weights.size() == 0) throw InputError("empty weight vector");
  if ((weights.array() < 0.0).any()) throw InputError("negative weight");
  if (std::abs(weights.sum() - 1.0) > 1e-9) throw InputError("weights do not sum to one");
}

double KktReport::worst() const { return std::max({stationarity, primal, complementarity}); }

namespace {

/// min 1/2 y'Hy + c'y  s.t.  a'y = b,  y >= 0
struct SimplexQp {
  Eigen::MatrixXd H;
  Eigen::VectorXd c;
  Eigen::VectorXd a;
  double b = 1.0;
};

struct QpSolution {
  Eigen::VectorXd y;
  double nu = 0.0;
  Eigen::VectorXd lambda;
  KktReport kkt;
  bool ridge_applied = false;
  std::size_t iterations = 0;
};

Eigen::MatrixXd restrict(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& s) {
  const auto k = static_cast<Eigen::Index>(s.size());
  Eigen::MatrixXd out(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) out(i, j) = m(s[static_cast<std::size_t>(i)], s[static_cast<std::size_t>(j)]);
  }
  return out;
}

Eigen::VectorXd restrict(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& s) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(s[i]);
  return out;
}

KktReport certify(const SimplexQp& qp, const Eigen::VectorXd& y, const Eigen::VectorXd& lambda,
                  const std::vector<bool>& in_support) {
  KktReport r;
  r.primal = std::abs(qp.a.dot(y) - qp.b);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    r.primal = std::max(r.primal, std::max(0.0, -y(i)));
    const double li = lambda(i);
    r.stationarity = std::max(r.stationarity, in_support[static_cast<std::size_t>(i)] ? std::abs(li) : std::max(0.0, -li));
    r.complementarity = std::max(r.complementarity, std::abs(li * y(i)));
  }
  return r;
}

/// Primal active-set method. Starts from the best single-asset vertex and
/// alternates between solving the equality-constrained problem on the
/// support and either stepping to a blocking bound or freeing the variable
/// with the most negative multiplier.
QpSolution solve_simplex_qp(SimplexQp qp, double tol, std::size_t max_iterations) {
  const auto n = qp.a.size();
  if (n == 0) throw InputError("empty asset subset");

  Eigen::Index start = -1;
  double start_obj = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(qp.a(j) > 0.0)) continue;
    const double t = qp.b / qp.a(j);
    const double obj = 0.5 * qp.H(j, j) * t * t + qp.c(j) * t;
    if (obj < start_obj) {
      start_obj = obj;
      start = j;
    }
  }
  if (start < 0) throw SolverError("no asset has a positive constraint coefficient (nothing beats the risk-free rate)");

  QpSolution sol;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  y(start) = qp.b / qp.a(start);
  std::vector<bool> support(static_cast<std::size_t>(n), false);
  support[static_cast<std::size_t>(start)] = true;

  const double trace = qp.H.trace();
  const double ridge = trace > 0.0 ? 1e-10 * trace / static_cast<double>(n) : 1e-10;

  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    sol.iterations = iter + 1;
    std::vector<Eigen::Index> s;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (support[static_cast<std::size_t>(i)]) s.push_back(i);
    }
    const Eigen::MatrixXd k = restrict(qp.H, s);
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success || llt.rcond() < 1e-13) {
      if (sol.ridge_applied) throw SolverError("covariance restricted to the support is singular even with ridge");
      qp.H.diagonal().array() += ridge;
      sol.ridge_applied = true;
      continue;
    }
    const Eigen::VectorXd as = restrict(qp.a, s);
    const Eigen::VectorXd cs = restrict(qp.c, s);
    const Eigen::VectorXd u = llt.solve(as);
    const Eigen::VectorXd v = llt.solve(cs);
    const double denom = as.dot(u);
    if (!(denom > 0.0)) throw SolverError("degenerate support in active-set iteration");
    const double nu = (qp.b + as.dot(v)) / denom;
    const Eigen::VectorXd cand = nu * u - v;

    Eigen::Index blocking = -1;
    double alpha = 1.0;
    for (std::size_t t = 0; t < s.size(); ++t) {
      const double ct = cand(static_cast<Eigen::Index>(t));
      if (ct < 0.0) {
        const double yt = y(s[t]);
        const double step = yt / (yt - ct);
        if (step < alpha) {
          alpha = step;
          blocking = s[t];
        }
      }
    }

    if (blocking < 0) {
      for (std::size_t t = 0; t < s.size(); ++t) y(s[t]) = cand(static_cast<Eigen::Index>(t));
      const Eigen::VectorXd lambda = qp.H * y + qp.c - nu * qp.a;
      Eigen::Index entering = -1;
      double most_negative = -tol;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!support[static_cast<std::size_t>(i)] && lambda(i) < most_negative) {
          most_negative = lambda(i);
          entering = i;
        }
      }
      if (entering < 0) {
        sol.y = y;
        sol.nu = nu;
        sol.lambda = lambda;
        sol.kkt = certify(qp, y, lambda, support);
        return sol;
      }
      support[static_cast<std::size_t>(entering)] = true;
      continue;
    }

    for (std::size_t t = 0; t < s.size(); ++t) {
      y(s[t]) += alpha * (cand(static_cast<Eigen::Index>(t)) - y(s[t]));
    }
    y(blocking) = 0.0;
    support[static_cast<std::size_t>(blocking)] = false;
  }
  throw SolverError("active-set iteration limit reached without a KKT point");
}

void check_subset(const AssetStats& stats, std::span<const std::size_t> subset) {
  if (subset.empty()) throw InputError("empty asset subset");
  for (const auto i : subset) {
    if (i >= stats.size()) throw InputError("asset index out of range");
  }
}

SharpeSolution package(const AssetStats& sub, QpSolution qp, const AllocatorConfig& cfg) {
  SharpeSolution out;
  out.y_star = qp.y;
  out.nu = qp.nu;
  out.multipliers = qp.lambda;
  out.kkt = qp.kkt;
  out.ridge_applied = qp.ridge_applied;
  out.iterations = qp.iterations;
  if (out.kkt.worst() > cfg.kkt_tolerance) {
    throw SolverError("active-set solution fails the KKT check (residual " + std::to_string(out.kkt.worst()) + ")");
  }
  out.weights.tickers = sub.tickers;
  const double total = qp.y.sum();
  if (!(total > 0.0)) throw SolverError("optimal allocation is empty");
  out.weights.weights = qp.y / total;
  return out;
}

std::size_t iteration_cap(const AllocatorConfig& cfg, std::size_t n) {
  return cfg.max_iterations > 0 ? cfg.max_iterations : 3 * n + 10;
}

}  // namespace

SharpeSolution max_sharpe_weights(const AssetStats& stats, std::span<const std::size_t> subset,
                                  const AllocatorConfig& cfg) {
  cfg.validate();
  check_subset(stats, subset);
  const AssetStats sub = stats.subset(subset);
  SimplexQp qp;
  qp.H = 2.0 * sub.sigma;
  qp.c = Eigen::VectorXd::Zero(sub.mu.size());
  qp.a = sub.mu.array() - cfg.risk_free_rate;
  qp.b = 1.0;
  if ((qp.a.array() <= 0.0).all()) throw SolverError("no asset in the subset beats the risk-free rate");
  return package(sub, solve_simplex_qp(std::move(qp), cfg.kkt_tolerance, iteration_cap(cfg, subset.size())), cfg);
}

SharpeSolution mvo_weights(const AssetStats& stats, std::span<const std::size_t> subset, const AllocatorConfig& cfg) {
  cfg.validate();
  check_subset(stats, subset);
  const AssetStats sub = stats.subset(subset);
  SimplexQp qp;
  qp.H = 2.0 * cfg.risk_aversion_q * sub.sigma;
  qp.c = -sub.mu;
  qp.a = Eigen::VectorXd::Ones(sub.mu.size());
  qp.b = 1.0;
  return package(sub, solve_simplex_qp(std::move(qp), cfg.kkt_tolerance, iteration_cap(cfg, subset.size())), cfg);
}

std::size_t derive_cardinality(const Eigen::VectorXd& y_star, const AllocatorConfig& cfg) {
  const auto n = static_cast<std::size_t>(y_star.size());
  if (n == 0) throw SolverError("empty solution vector");
  if (cfg.cardinality_mode == CardinalityMode::rounded_sum) {
    const double k = std::round(y_star.sum());
    return static_cast<std::size_t>(std::clamp(k, 1.0, static_cast<double>(n)));
  }
  const auto k = static_cast<std::size_t>((y_star.array() > cfg.zero_weight_threshold).count());
  if (k == 0) throw SolverError("every solution entry is below the zero-weight threshold");
  return k;
}

PortfolioMetrics compute_metrics(const WeightVector& weights, const AssetStats& stats, const AllocatorConfig& cfg) {
  if (static_cast<std::size_t>(weights.weights.size()) != weights.tickers.size()) {
    throw InputError("weights/tickers size mismatch");
  }
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(stats.size()));
  for (std::size_t k = 0; k < weights.tickers.size(); ++k) {
    const auto idx = stats.index_of(weights.tickers[k]);
    if (!idx) throw InputError("no statistics for ticker '" + weights.tickers[k] + "'");
    w(static_cast<Eigen::Index>(*idx)) += weights.weights(static_cast<Eigen::Index>(k));
  }

  PortfolioMetrics m;
  m.expected_return = stats.mu.dot(w);
  const double variance = w.dot(stats.sigma * w);
  m.risk = std::sqrt(std::max(variance, 0.0));
  const double excess = m.expected_return - cfg.risk_free_rate;
  double weighted_vol = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) weighted_vol += w(i) * std::sqrt(std::max(stats.sigma(i, i), 0.0));

  if (m.risk > 0.0) {
    m.sharpe = excess / m.risk;
    m.diversification_ratio = weighted_vol / m.risk;
  } else {
    m.zero_risk = true;
    m.sharpe = excess > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    m.diversification_ratio = 1.0;
  }
  return m;
}

WeightVector equal_weights(std::span<const std::string> tickers) {
  if (tickers.empty()) throw InputError("equal weights need at least one ticker");
  WeightVector w;
  w.tickers.assign(tickers.begin(), tickers.end());
  w.weights = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(tickers.size()), 1.0 / static_cast<double>(tickers.size()));
  return w;
}

}  // namespace annealfolio
