#include "annealfolio/model.hpp"

#include "annealfolio/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace annealfolio {

namespace {

PairKey ordered(std::size_t i, std::size_t j) { return i < j ? PairKey{i, j} : PairKey{j, i}; }

void check_index(std::size_t i, std::size_t n) {
  if (i >= n) throw InputError("variable index " + std::to_string(i) + " out of range for n = " + std::to_string(n));
}

}  // namespace

void QuboModel::add_linear(std::size_t i, double value) {
  check_index(i, n);
  linear[i] += value;
}

void QuboModel::add_quadratic(std::size_t i, std::size_t j, double value) {
  check_index(i, n);
  check_index(j, n);
  if (i == j) {
    linear[i] += value;
    return;
  }
  quadratic[ordered(i, j)] += value;
}

std::size_t QuboModel::add_variables(std::size_t count) {
  const std::size_t first = n;
  n += count;
  linear.resize(n, 0.0);
  return first;
}

double QuboModel::max_abs_coefficient() const {
  double m = 0.0;
  for (const double a : linear) m = std::max(m, std::abs(a));
  for (const auto& [key, b] : quadratic) m = std::max(m, std::abs(b));
  return m;
}

void IsingModel::add_coupling(std::size_t i, std::size_t j, double value) {
  check_index(i, n);
  check_index(j, n);
  if (i == j) {
    // s_i^2 = 1
    offset += value;
    return;
  }
  J[ordered(i, j)] += value;
}

double LinearConstraint::activity(std::span<const std::uint8_t> x) const {
  double a = 0.0;
  const std::size_t k = std::min(coeffs.size(), x.size());
  for (std::size_t i = 0; i < k; ++i) {
    if (x[i]) a += coeffs[i];
  }
  return a;
}

double LinearConstraint::violation(std::span<const std::uint8_t> x) const {
  const double diff = activity(x) - rhs;
  return relation == Relation::eq ? std::abs(diff) : std::max(0.0, diff);
}

bool LinearConstraint::has_nonzero() const {
  return std::any_of(coeffs.begin(), coeffs.end(), [](double c) { return c != 0.0; });
}

std::int64_t IntegerEncoding::decode(std::span<const std::uint8_t> x) const {
  std::int64_t v = 0;
  for (std::size_t j = 0; j < bit_weights.size(); ++j) {
    if (x[first_bit + j]) v += bit_weights[j];
  }
  return v;
}

std::vector<std::int64_t> ConstrainedModel::decode(std::span<const std::uint8_t> x) const {
  if (x.size() < objective.n) throw InputError("assignment shorter than the model");
  std::vector<std::int64_t> out;
  out.reserve(encodings.size());
  for (const auto& e : encodings) out.push_back(e.decode(x));
  return out;
}

double qubo_energy(const QuboModel& m, std::span<const std::uint8_t> x) {
  if (x.size() != m.n) {
    throw InputError("assignment length " + std::to_string(x.size()) + " != model size " + std::to_string(m.n));
  }
  double e = m.offset;
  for (std::size_t i = 0; i < m.n; ++i) {
    if (x[i]) e += m.linear[i];
  }
  for (const auto& [key, b] : m.quadratic) {
    if (x[key.first] && x[key.second]) e += b;
  }
  return e;
}

double ising_energy(const IsingModel& m, std::span<const std::int8_t> s) {
  if (s.size() != m.n) {
    throw InputError("spin vector length " + std::to_string(s.size()) + " != model size " + std::to_string(m.n));
  }
  double e = m.offset;
  for (std::size_t i = 0; i < m.n; ++i) e += m.h[i] * s[i];
  for (const auto& [key, j] : m.J) e += j * s[key.first] * s[key.second];
  return e;
}

Spins to_spins(std::span<const std::uint8_t> x) {
  Spins s(x.size());
  std::transform(x.begin(), x.end(), s.begin(), [](std::uint8_t b) { return static_cast<std::int8_t>(b ? 1 : -1); });
  return s;
}

Bits to_bits(std::span<const std::int8_t> s) {
  Bits x(s.size());
  std::transform(s.begin(), s.end(), x.begin(), [](std::int8_t v) { return static_cast<std::uint8_t>(v > 0); });
  return x;
}

// x = (1 + s) / 2:
//   a x_i        -> a/2 + (a/2) s_i
//   b x_i x_j    -> b/4 + (b/4) s_i + (b/4) s_j + (b/4) s_i s_j
IsingModel qubo_to_ising(const QuboModel& m) {
  IsingModel out(m.n);
  out.offset = m.offset;
  for (std::size_t i = 0; i < m.n; ++i) {
    out.h[i] += 0.5 * m.linear[i];
    out.offset += 0.5 * m.linear[i];
  }
  for (const auto& [key, b] : m.quadratic) {
    const double q = 0.25 * b;
    out.J[key] += q;
    out.h[key.first] += q;
    out.h[key.second] += q;
    out.offset += q;
  }
  return out;
}

// s = 2x - 1:
//   h s_i        -> 2h x_i - h
//   J s_i s_j    -> 4J x_i x_j - 2J x_i - 2J x_j + J
QuboModel ising_to_qubo(const IsingModel& m) {
  QuboModel out(m.n);
  out.offset = m.offset;
  for (std::size_t i = 0; i < m.n; ++i) {
    out.linear[i] += 2.0 * m.h[i];
    out.offset -= m.h[i];
  }
  for (const auto& [key, j] : m.J) {
    out.quadratic[key] += 4.0 * j;
    out.linear[key.first] -= 2.0 * j;
    out.linear[key.second] -= 2.0 * j;
    out.offset += j;
  }
  return out;
}

QuboModel penalize_equality(const QuboModel& m, const LinearConstraint& c, double lambda) {
  if (!(lambda > 0.0)) throw InputError("penalty lambda must be positive");
  if (!c.has_nonzero()) throw InputError("constraint has no nonzero coefficient");
  if (c.coeffs.size() > m.n) throw InputError("constraint references variables beyond the model");

  // lambda (sum_i c_i x_i - b)^2
  //   = lambda [ sum_i (c_i^2 - 2 b c_i) x_i + 2 sum_{i<j} c_i c_j x_i x_j + b^2 ]
  QuboModel out = m;
  const auto& pi = c.coeffs;
  const double beta = c.rhs;
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < pi.size(); ++i) {
    if (pi[i] != 0.0) support.push_back(i);
  }
  for (const std::size_t i : support) out.linear[i] += lambda * (pi[i] * pi[i] - 2.0 * beta * pi[i]);
  for (std::size_t a = 0; a < support.size(); ++a) {
    for (std::size_t b = a + 1; b < support.size(); ++b) {
      const std::size_t i = support[a];
      const std::size_t j = support[b];
      out.quadratic[{i, j}] += 2.0 * lambda * pi[i] * pi[j];
    }
  }
  out.offset += lambda * beta * beta;
  return out;
}

std::pair<QuboModel, SlackEncoding> penalize_inequality(const QuboModel& m, const LinearConstraint& c, double lambda,
                                                        double slack_granularity) {
  if (!(lambda > 0.0)) throw InputError("penalty lambda must be positive");
  if (!(slack_granularity > 0.0)) throw InputError("slack granularity must be positive");
  if (c.rhs < 0.0) throw InputError("inequality right-hand side must be non-negative");

  const auto slack_units = static_cast<std::int64_t>(std::floor(c.rhs / slack_granularity + 1e-9));
  QuboModel extended = m;
  SlackEncoding slack;
  slack.granularity = slack_granularity;
  slack.encoding = encode_integer(slack_units, m.n);
  slack.encoding.first_bit = extended.add_variables(slack.encoding.num_bits());

  LinearConstraint eq;
  eq.relation = Relation::eq;
  eq.rhs = c.rhs;
  eq.coeffs = c.coeffs;
  eq.coeffs.resize(extended.n, 0.0);
  for (std::size_t j = 0; j < slack.encoding.num_bits(); ++j) {
    eq.coeffs[slack.encoding.first_bit + j] = slack_granularity * static_cast<double>(slack.encoding.bit_weights[j]);
  }
  return {penalize_equality(extended, eq, lambda), slack};
}

IntegerEncoding encode_integer(std::int64_t upper, std::size_t variable) {
  if (upper < 0) throw InputError("integer upper bound must be non-negative");
  IntegerEncoding enc;
  enc.variable = variable;
  enc.upper = upper;
  std::int64_t covered = 0;
  std::int64_t w = 1;
  while (covered + w <= upper) {
    enc.bit_weights.push_back(w);
    covered += w;
    w *= 2;
  }
  if (covered < upper) enc.bit_weights.push_back(upper - covered);
  return enc;
}

double default_mvo_lambda(const AssetStats& stats, double q) {
  double worst = 0.0;
  const auto n = stats.mu.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    double row = std::abs(stats.sigma(i, i));
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) row += 2.0 * std::abs(stats.sigma(i, j));
    }
    worst = std::max(worst, q * row + std::abs(stats.mu(i)));
  }
  return worst + 1.0;
}

QuboModel build_mvo_qubo(const AssetStats& stats, double q, std::size_t k, std::optional<double> lambda) {
  const std::size_t n = stats.size();
  if (static_cast<std::size_t>(stats.sigma.rows()) != n || static_cast<std::size_t>(stats.sigma.cols()) != n) {
    throw InputError("covariance dimensions do not match expected returns");
  }
  if (k > n) throw InputError("cardinality exceeds the number of assets");
  if (!(q > 0.0)) throw InputError("risk aversion q must be positive");
  const double lam = lambda.value_or(default_mvo_lambda(stats, q));
  if (!(lam > 0.0)) throw InputError("penalty lambda must be positive");

  QuboModel m(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    m.linear[i] = q * stats.sigma(ii, ii) - stats.mu(ii);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double b = 2.0 * q * stats.sigma(ii, static_cast<Eigen::Index>(j));
      if (b != 0.0) m.quadratic[{i, j}] = b;
    }
  }
  if (n == 0) return m;
  LinearConstraint card{std::vector<double>(n, 1.0), Relation::eq, static_cast<double>(k)};
  return penalize_equality(m, card, lam);
}

double mvo_objective(const AssetStats& stats, double q, std::span<const std::uint8_t> x) {
  double risk = 0.0;
  double ret = 0.0;
  const auto n = static_cast<Eigen::Index>(x.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!x[static_cast<std::size_t>(i)]) continue;
    ret += stats.mu(i);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (x[static_cast<std::size_t>(j)]) risk += stats.sigma(i, j);
    }
  }
  return q * risk - ret;
}

ConstrainedModel build_mpt_model(const AssetStats& stats, std::span<const double> prices, double budget, double q) {
  const std::size_t n = stats.size();
  if (prices.size() != n) throw InputError("price vector does not match the asset universe");
  if (!(budget > 0.0)) throw InputError("budget must be positive");
  if (!(q > 0.0)) throw InputError("risk aversion q must be positive");
  for (const double p : prices) {
    if (!(p > 0.0)) throw InputError("prices must be positive");
  }

  ConstrainedModel cm;
  std::size_t bits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto enc = encode_integer(static_cast<std::int64_t>(std::floor(budget / prices[i] + 1e-12)), i);
    enc.first_bit = bits;
    bits += enc.num_bits();
    cm.encodings.push_back(std::move(enc));
  }
  cm.objective = QuboModel(bits);
  for (const auto& enc : cm.encodings) {
    for (std::size_t b = 0; b < enc.num_bits(); ++b) {
      cm.variable_names.push_back(stats.tickers.at(enc.variable) + "[" + std::to_string(enc.bit_weights[b]) + "]");
    }
  }

  // Dollar amount carried by bit t: c_t = p_i * w_t.
  std::vector<double> dollars(bits);
  std::vector<std::size_t> owner(bits);
  for (const auto& enc : cm.encodings) {
    for (std::size_t b = 0; b < enc.num_bits(); ++b) {
      dollars[enc.first_bit + b] = prices[enc.variable] * static_cast<double>(enc.bit_weights[b]);
      owner[enc.first_bit + b] = enc.variable;
    }
  }
  // q sum_{s,t} sigma_{i(s) i(t)} c_s c_t x_s x_t - sum_t mu_{i(t)} c_t x_t
  for (std::size_t s = 0; s < bits; ++s) {
    const auto is = static_cast<Eigen::Index>(owner[s]);
    cm.objective.linear[s] = q * stats.sigma(is, is) * dollars[s] * dollars[s] - stats.mu(is) * dollars[s];
    for (std::size_t t = s + 1; t < bits; ++t) {
      const double b = 2.0 * q * stats.sigma(is, static_cast<Eigen::Index>(owner[t])) * dollars[s] * dollars[t];
      if (b != 0.0) cm.objective.quadratic[{s, t}] = b;
    }
  }
  cm.constraints.push_back(LinearConstraint{dollars, Relation::le, budget});
  return cm;
}

double mpt_objective(const AssetStats& stats, std::span<const double> prices, double q,
                     std::span<const std::int64_t> shares) {
  const std::size_t n = shares.size();
  double risk = 0.0;
  double ret = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double yi = prices[i] * static_cast<double>(shares[i]);
    ret += stats.mu(static_cast<Eigen::Index>(i)) * yi;
    for (std::size_t j = 0; j < n; ++j) {
      const double yj = prices[j] * static_cast<double>(shares[j]);
      risk += stats.sigma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * yi * yj;
    }
  }
  return q * risk - ret;
}

double default_mpt_lambda(const AssetStats& stats, std::span<const double> prices, double budget, double q,
                          double slack_granularity) {
  if (!(slack_granularity > 0.0)) throw InputError("slack granularity must be positive");
  // |d f / d y_i| <= 2 q sum_j |sigma_ij| y_j + |mu_i| with 0 <= y_j <= budget.
  double gradient = 0.0;
  const auto n = static_cast<Eigen::Index>(prices.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) row += std::abs(stats.sigma(i, j));
    gradient = std::max(gradient, 2.0 * q * row * budget + std::abs(stats.mu(i)));
  }
  return gradient / slack_granularity + 1.0;
}

LoweredModel lower_constraints(const ConstrainedModel& cm, double lambda, double slack_granularity) {
  LoweredModel out;
  out.qubo = cm.objective;
  for (const auto& c : cm.constraints) {
    if (c.relation == Relation::eq) {
      out.qubo = penalize_equality(out.qubo, c, lambda);
    } else {
      auto [qubo, slack] = penalize_inequality(out.qubo, c, lambda, slack_granularity);
      out.qubo = std::move(qubo);
      out.slacks.push_back(slack);
    }
  }
  return out;
}

}  // namespace annealfolio
