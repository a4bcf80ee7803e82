#pragma once

// Monte Carlo engine for the market model: capitalizations in log space,
// weights through their own SDE, hitting of the diversity threshold.

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "divmkt/model.hpp"
#include "divmkt/rng.hpp"

namespace divmkt {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Sum that does not depend on the order of the entries.
template <typename Derived>
typename Derived::Scalar order_independent_sum(const Eigen::DenseBase<Derived>& v) {
  Vector<typename Derived::Scalar> sorted = v;
  std::sort(sorted.data(), sorted.data() + sorted.size());
  typename Derived::Scalar s(0);
  for (Eigen::Index i = 0; i < sorted.size(); ++i) s += sorted[i];
  return s;
}

// mu_i = X_i / S from log X, shifting by max log X before exponentiating.
template <typename Derived>
Vector<typename Derived::Scalar> weights_from_log_caps(const Eigen::MatrixBase<Derived>& log_caps,
                                                       typename Derived::Scalar* log_total = nullptr) {
  using std::exp;
  using std::log;
  const auto top = log_caps.maxCoeff();
  const Vector<typename Derived::Scalar> scaled = (log_caps.array() - top).exp().matrix();
  const auto sum = order_independent_sum(scaled);
  if (log_total) *log_total = top + log(sum);
  return scaled / sum;
}

// Diffusion matrix of the weight SDE: D_ij = delta_ij mu_i - mu_i mu_j.
// Its columns sum to zero on the simplex.
template <typename Derived>
Matrix<typename Derived::Scalar> weight_diffusion(const Eigen::MatrixBase<Derived>& mu) {
  Matrix<typename Derived::Scalar> d = -mu * mu.transpose();
  d.diagonal() += mu;
  return d;
}

// Drift of the weight SDE: psi(mu_i) - mu_i sum_j psi(mu_j).
template <typename DerivedMu, typename DerivedPsi>
Vector<typename DerivedMu::Scalar> weight_drift(const Eigen::MatrixBase<DerivedMu>& mu,
                                                const Eigen::MatrixBase<DerivedPsi>& psi_values) {
  return psi_values - mu * psi_values.sum();
}

// Clamp into [1e-14, 1] and rescale to unit sum.
template <typename Derived>
Vector<typename Derived::Scalar> renormalize_simplex(const Eigen::MatrixBase<Derived>& v) {
  using S = typename Derived::Scalar;
  const Vector<S> c = v.cwiseMax(S(1e-14)).cwiseMin(S(1));
  return c / order_independent_sum(c);
}

struct MarketState {
  Eigen::VectorXd log_caps;
  Eigen::VectorXd weights;
  double total_cap_log = 0.0;
  // set once a step evaluated g at a weight >= 1 - delta
  bool diagnostics_only = false;

  static MarketState from_log_caps(Eigen::VectorXd log_caps);
  // log X_i = log mu_i, so S = 1 initially.
  static MarketState from_weights(const Eigen::VectorXd& weights);
};

// log X_i <- log X_i - g(mu_i) dt + noise_i, weights renormalized.
MarketState step_logcap(const MarketState& state, const DriftSpec& spec, double dt,
                        const Eigen::VectorXd& noise);

// Euler step of d mu = (psi(mu) - mu sum psi) dt + D(mu) dW followed by
// renormalize_simplex. `post_hit` reports a weight at or beyond 1 - delta.
Eigen::VectorXd step_weights(const Eigen::VectorXd& weights, const DriftSpec& spec, double dt,
                             const Eigen::VectorXd& noise, bool* post_hit = nullptr);

enum class Scheme { LogCapEuler, WeightEuler };
std::string to_string(Scheme s);

struct SimParams {
  double dt = 1e-3;
  double horizon = 50.0;
  std::size_t n_paths = 500;
  std::uint64_t seed = 0;
  std::size_t record_stride = 1;
  Scheme scheme = Scheme::LogCapEuler;
  // number of leading paths whose trajectories are kept
  std::size_t record_paths = 0;
  bool zero_noise = false;
  bool continue_after_hit = false;
  // worker threads; 0 = hardware concurrency
  unsigned threads = 0;
};

// Throws ParameterError on dt <= 0, horizon <= 0, dt > horizon, n_paths == 0,
// record_stride == 0.
void validate(const SimParams& params);
std::size_t step_count(const SimParams& params);

struct ModelConfig {
  int n = 2;
  DriftSpec spec;
  std::optional<Eigen::VectorXd> initial_weights;

  // initial_weights or 1/n each; throws ParameterError if off the open
  // simplex or not below 1 - delta.
  Eigen::VectorXd initial() const;
};

struct TrajectoryPoint {
  std::size_t step;
  double time;
  Eigen::VectorXd weights;
};

struct PathResult {
  bool hit = false;
  std::optional<double> hit_time;
  std::optional<std::size_t> hit_stock;
  double max_weight_seen = 0.0;
  double min_weight_seen = 1.0;
  bool diagnostics_only = false;
  std::vector<TrajectoryPoint> trajectory;
};

// sqrt(dt) * Z(seed, path, step, i) for i < n, or zeros.
Eigen::VectorXd noise_increment(const NoiseSource& source, std::size_t path, std::size_t step,
                                int n, double dt, bool zero_noise = false);

// Integrates to the horizon or the first grid time with some mu_i >= 1 - delta.
PathResult run_path(const ModelConfig& config, const SimParams& params, std::size_t path_index);

struct MonteCarloReport {
  std::size_t n_paths = 0;
  std::size_t n_hits = 0;
  double hit_frequency = 0.0;
  std::pair<double, double> wilson_ci_95{0.0, 0.0};
  double mean_max_weight = 0.0;
  std::vector<std::size_t> per_stock_hit_counts;
  SimParams params;
  int n = 0;
  double delta = 0.0;
  std::string family;
  // trajectories of the first params.record_paths paths, in path order
  std::vector<std::vector<TrajectoryPoint>> trajectories;
};

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials,
                                          double z = 1.959963984540054);

// Runs all paths (in parallel) and reduces in path order.
MonteCarloReport monte_carlo_hitting(const ModelConfig& config, const SimParams& params);

struct ItoConsistencyReport {
  std::vector<double> dts;        // dt, dt/2, dt/4, ...
  std::vector<double> mean_gaps;  // mean over paths of the per-path sup gap
  double max_abs_weight_gap = 0.0;  // worst path at the coarsest dt
  double convergence_order = 0.0;   // log2 slope of mean_gaps from first to last level
  // paths per level cut short because a scheme reached 1 - delta
  std::vector<std::size_t> truncated_paths;
};

// Integrates both schemes on the same Brownian path: increments at level l are
// sums of the finest-level increments. Sup over time and stocks of
// |mu(LogCapEuler) - mu(WeightEuler)| up to the horizon or the first grid time
// at which either scheme reaches 1 - delta, where g stops being defined.
ItoConsistencyReport ito_consistency_check(const ModelConfig& config, const SimParams& params,
                                           int levels = 3);

struct ComparisonReport {
  std::size_t violation_count = 0;
  double max_violation = 0.0;
  std::size_t steps_checked = 0;
};

// dX = b_low(X) dt + sigma(X) dW and dY = b_high(Y) dt + sigma(Y) dW from
// x_init with shared noise; counts steps with X > Y + 10 sqrt(dt) dt.
// Throws PreconditionError if b_low > b_high at a visited state.
ComparisonReport comparison_lemma_check(const std::function<double(double)>& b_low,
                                        const std::function<double(double)>& b_high,
                                        const std::function<double(double)>& sigma,
                                        double x_init, const SimParams& params);

}  // namespace divmkt
