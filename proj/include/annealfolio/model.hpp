#pragma once

#include "annealfolio/marketdata.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace annealfolio {

using Bits = std::vector<std::uint8_t>;
using Spins = std::vector<std::int8_t>;
using PairKey = std::pair<std::size_t, std::size_t>;

/// energy(x) = offset + sum_i linear[i] x_i + sum_{i<j} quadratic[(i,j)] x_i x_j
///
/// Quadratic keys are always stored with i < j. Diagonal terms passed to
/// add_quadratic are folded into `linear` because x_i^2 = x_i on binaries.
struct QuboModel {
  std::size_t n = 0;
  std::vector<double> linear;
  std::map<PairKey, double> quadratic;
  double offset = 0.0;

  QuboModel() = default;
  explicit QuboModel(std::size_t num_vars) : n(num_vars), linear(num_vars, 0.0) {}

  void add_linear(std::size_t i, double value);
  void add_quadratic(std::size_t i, std::size_t j, double value);
  /// Appends `count` fresh variables with zero coefficients; returns the first index.
  std::size_t add_variables(std::size_t count);
  double max_abs_coefficient() const;

  bool operator==(const QuboModel&) const = default;
};

/// energy(s) = offset + sum_i h[i] s_i + sum_{i<j} J[(i,j)] s_i s_j, s in {-1,+1}^n
struct IsingModel {
  std::size_t n = 0;
  std::vector<double> h;
  std::map<PairKey, double> J;
  double offset = 0.0;

  IsingModel() = default;
  explicit IsingModel(std::size_t num_spins) : n(num_spins), h(num_spins, 0.0) {}

  void add_coupling(std::size_t i, std::size_t j, double value);

  bool operator==(const IsingModel&) const = default;
};

enum class Relation { eq, le };

/// coeffs . x (relation) rhs. Coefficients beyond coeffs.size() are zero.
struct LinearConstraint {
  std::vector<double> coeffs;
  Relation relation = Relation::eq;
  double rhs = 0.0;

  double activity(std::span<const std::uint8_t> x) const;
  /// Signed violation: |a - b| for eq, max(0, a - b) for le.
  double violation(std::span<const std::uint8_t> x) const;
  bool satisfied(std::span<const std::uint8_t> x, double tolerance) const {
    return violation(x) <= tolerance;
  }
  bool has_nonzero() const;
};

/// Truncated binary expansion of an integer in [0, upper]: the variable's
/// value is sum_j bit_weights[j] * x[first_bit + j].
struct IntegerEncoding {
  std::size_t variable = 0;
  std::int64_t upper = 0;
  std::vector<std::int64_t> bit_weights;
  std::size_t first_bit = 0;

  std::size_t num_bits() const { return bit_weights.size(); }
  std::int64_t decode(std::span<const std::uint8_t> x) const;
};

/// Slack variable appended by penalize_inequality. Its value in currency
/// (or constraint) units is granularity * encoding.decode(x).
struct SlackEncoding {
  IntegerEncoding encoding;
  double granularity = 1.0;

  double decode(std::span<const std::uint8_t> x) const {
    return granularity * static_cast<double>(encoding.decode(x));
  }
};

struct ConstrainedModel {
  QuboModel objective;
  std::vector<LinearConstraint> constraints;
  std::vector<IntegerEncoding> encodings;
  std::vector<std::string> variable_names;

  /// One integer per encoding (empty for pure binary models).
  std::vector<std::int64_t> decode(std::span<const std::uint8_t> x) const;
};

double qubo_energy(const QuboModel& m, std::span<const std::uint8_t> x);
double ising_energy(const IsingModel& m, std::span<const std::int8_t> s);

Spins to_spins(std::span<const std::uint8_t> x);
Bits to_bits(std::span<const std::int8_t> s);

IsingModel qubo_to_ising(const QuboModel& m);
QuboModel ising_to_qubo(const IsingModel& m);

/// m + lambda * (coeffs . x - rhs)^2 expanded with x_i^2 = x_i.
QuboModel penalize_equality(const QuboModel& m, const LinearConstraint& c, double lambda);

/// Rewrites coeffs . x <= rhs as coeffs . x + slack = rhs with a binary
/// slack in [0, rhs] at `slack_granularity` resolution, then penalizes it.
std::pair<QuboModel, SlackEncoding> penalize_inequality(const QuboModel& m, const LinearConstraint& c,
                                                        double lambda, double slack_granularity);

IntegerEncoding encode_integer(std::int64_t upper, std::size_t variable = 0);

/// Penalty weight that makes every single-variable move out of the
/// cardinality-feasible set unprofitable:
///   max_i [ q (Sigma_ii + 2 sum_{j!=i} |Sigma_ij|) + |mu_i| ] + 1
double default_mvo_lambda(const AssetStats& stats, double q);

/// q x'Sigma x - mu'x + lambda (1'x - k)^2 over selection bits.
QuboModel build_mvo_qubo(const AssetStats& stats, double q, std::size_t k, std::optional<double> lambda = {});

/// The mean-variance objective without the penalty, for ranking feasible selections.
double mvo_objective(const AssetStats& stats, double q, std::span<const std::uint8_t> x);

/// Integer-share model in dollar terms y_i = p_i x_i with a single budget
/// `le` constraint. Share counts are truncated-binary encoded with upper
/// bound floor(budget / p_i).
ConstrainedModel build_mpt_model(const AssetStats& stats, std::span<const double> prices, double budget, double q);

/// q sum_ij sigma_ij (p_i x_i)(p_j x_j) - sum_i mu_i p_i x_i for integer shares.
double mpt_objective(const AssetStats& stats, std::span<const double> prices, double q,
                     std::span<const std::int64_t> shares);

/// Penalty weight for the budget constraint of an MPT model: the largest
/// gradient of the dollar objective over the box, per unit of slack
/// granularity, plus one.
double default_mpt_lambda(const AssetStats& stats, std::span<const double> prices, double budget, double q,
                          double slack_granularity);

struct LoweredModel {
  QuboModel qubo;
  std::vector<SlackEncoding> slacks;
};

/// Penalizes every constraint of `cm` into one unconstrained model.
LoweredModel lower_constraints(const ConstrainedModel& cm, double lambda, double slack_granularity);

}  // namespace annealfolio
