#include "divmkt/simulate.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "divmkt/errors.hpp"

namespace divmkt {

MarketState MarketState::from_log_caps(Eigen::VectorXd log_caps) {
  MarketState s;
  s.weights = weights_from_log_caps(log_caps, &s.total_cap_log);
  s.log_caps = std::move(log_caps);
  return s;
}

MarketState MarketState::from_weights(const Eigen::VectorXd& weights) {
  return from_log_caps(weights.array().log().matrix());
}

MarketState step_logcap(const MarketState& state, const DriftSpec& spec, double dt,
                        const Eigen::VectorXd& noise) {
  const double threshold = spec.right_endpoint();
  Eigen::VectorXd drift(state.weights.size());
  bool post_hit = state.diagnostics_only;
  for (Eigen::Index i = 0; i < drift.size(); ++i) {
    const double mu = state.weights[i];
    post_hit |= mu >= threshold;
    drift[i] = g_eval_clamped(spec, mu);
  }
  MarketState next = MarketState::from_log_caps(state.log_caps - dt * drift + noise);
  next.diagnostics_only = post_hit;
  return next;
}

Eigen::VectorXd step_weights(const Eigen::VectorXd& weights, const DriftSpec& spec, double dt,
                             const Eigen::VectorXd& noise, bool* post_hit) {
  const double threshold = spec.right_endpoint();
  Eigen::VectorXd psi_values(weights.size());
  bool beyond = false;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    beyond |= weights[i] >= threshold;
    psi_values[i] = psi_clamped(spec, weights[i]);
  }
  if (post_hit) *post_hit = beyond;
  const Eigen::VectorXd raw =
      weights + dt * weight_drift(weights, psi_values) + weight_diffusion(weights) * noise;
  return renormalize_simplex(raw);
}

std::string to_string(Scheme s) {
  return s == Scheme::LogCapEuler ? "LogCapEuler" : "WeightEuler";
}

void validate(const SimParams& p) {
  if (!(p.dt > 0.0) || !std::isfinite(p.dt)) throw ParameterError("dt must be positive");
  if (!(p.horizon > 0.0) || !std::isfinite(p.horizon)) {
    throw ParameterError("horizon must be positive");
  }
  if (p.dt > p.horizon) throw ParameterError("dt must not exceed the horizon");
  if (p.n_paths == 0) throw ParameterError("n_paths must be positive");
  if (p.record_stride == 0) throw ParameterError("record_stride must be at least 1");
}

std::size_t step_count(const SimParams& p) {
  return static_cast<std::size_t>(std::llround(p.horizon / p.dt));
}

Eigen::VectorXd ModelConfig::initial() const {
  if (n < 2) throw ParameterError("n must be at least 2");
  Eigen::VectorXd w = initial_weights ? *initial_weights : Eigen::VectorXd::Constant(n, 1.0 / n);
  if (w.size() != n) throw ParameterError("initial_weights must have n entries");
  if (!((w.array() > 0.0).all() && (w.array() < spec.right_endpoint()).all())) {
    throw ParameterError("initial weights must lie in (0, 1 - delta)");
  }
  if (std::abs(w.sum() - 1.0) > 1e-9) throw ParameterError("initial weights must sum to 1");
  return w / w.sum();
}

Eigen::VectorXd noise_increment(const NoiseSource& source, std::size_t path, std::size_t step,
                                int n, double dt, bool zero_noise) {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  if (zero_noise) return z;
  const double scale = std::sqrt(dt);
  for (int i = 0; i < n; ++i) z[i] = scale * source.standard_normal(path, step, i);
  return z;
}

PathResult run_path(const ModelConfig& config, const SimParams& params, std::size_t path_index) {
  validate(params);
  const Eigen::VectorXd w0 = config.initial();
  const double threshold = config.spec.right_endpoint();
  const std::size_t steps = step_count(params);
  const bool record = path_index < params.record_paths;
  const NoiseSource source(params.seed);

  PathResult out;
  out.max_weight_seen = w0.maxCoeff();
  out.min_weight_seen = w0.minCoeff();
  if (record) out.trajectory.push_back({0, 0.0, w0});

  MarketState state = MarketState::from_weights(w0);
  Eigen::VectorXd weights = w0;
  for (std::size_t k = 0; k < steps; ++k) {
    const Eigen::VectorXd noise =
        noise_increment(source, path_index, k, config.n, params.dt, params.zero_noise);
    if (params.scheme == Scheme::LogCapEuler) {
      state = step_logcap(state, config.spec, params.dt, noise);
      weights = state.weights;
      out.diagnostics_only |= state.diagnostics_only;
    } else {
      bool post_hit = false;
      weights = step_weights(weights, config.spec, params.dt, noise, &post_hit);
      out.diagnostics_only |= post_hit;
    }
    const double t = static_cast<double>(k + 1) * params.dt;
    Eigen::Index top = 0;
    const double wmax = weights.maxCoeff(&top);
    out.max_weight_seen = std::max(out.max_weight_seen, wmax);
    out.min_weight_seen = std::min(out.min_weight_seen, weights.minCoeff());
    if (record && (k + 1) % params.record_stride == 0) out.trajectory.push_back({k + 1, t, weights});

    if (!out.hit && wmax >= threshold) {
      out.hit = true;
      out.hit_time = t;
      out.hit_stock = static_cast<std::size_t>(top);
      if (!params.continue_after_hit) {
        if (record && (k + 1) % params.record_stride != 0) {
          out.trajectory.push_back({k + 1, t, weights});
        }
        break;
      }
    }
  }
  return out;
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) throw ParameterError("wilson_interval needs at least one trial");
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (phat + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
  double lo = std::max(0.0, center - half);
  double hi = std::min(1.0, center + half);
  if (successes == 0) lo = 0.0;
  if (successes == trials) hi = 1.0;
  return {std::min(lo, phat), std::max(hi, phat)};
}

namespace {

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
          return;
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

MonteCarloReport monte_carlo_hitting(const ModelConfig& config, const SimParams& params) {
  validate(params);
  config.initial();

  std::vector<PathResult> results(params.n_paths);
  parallel_for(params.n_paths, params.threads,
               [&](std::size_t i) { results[i] = run_path(config, params, i); });

  MonteCarloReport r;
  r.n_paths = params.n_paths;
  r.params = params;
  r.n = config.n;
  r.delta = config.spec.delta();
  r.family = config.spec.family_name();
  r.per_stock_hit_counts.assign(static_cast<std::size_t>(config.n), 0);
  double max_sum = 0.0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const PathResult& p = results[i];
    if (p.hit) {
      ++r.n_hits;
      ++r.per_stock_hit_counts[*p.hit_stock];
    }
    max_sum += p.max_weight_seen;
    if (i < params.record_paths) r.trajectories.push_back(p.trajectory);
  }
  r.hit_frequency = static_cast<double>(r.n_hits) / static_cast<double>(r.n_paths);
  r.wilson_ci_95 = wilson_interval(r.n_hits, r.n_paths);
  r.mean_max_weight = max_sum / static_cast<double>(r.n_paths);
  return r;
}

ItoConsistencyReport ito_consistency_check(const ModelConfig& config, const SimParams& params,
                                           int levels) {
  validate(params);
  if (config.n < 2) throw ParameterError("n must be at least 2");
  if (levels < 2) throw ParameterError("need at least two refinement levels");
  const Eigen::VectorXd w0 = config.initial();
  const NoiseSource source(params.seed);
  const int n = config.n;
  const std::size_t coarse_steps = step_count(params);
  const std::size_t refine = std::size_t{1} << (levels - 1);
  const double fine_dt = params.dt / static_cast<double>(refine);

  ItoConsistencyReport rep;
  for (int l = 0; l < levels; ++l) rep.dts.push_back(std::ldexp(params.dt, -l));
  std::vector<std::vector<double>> sup_gaps(static_cast<std::size_t>(levels),
                                            std::vector<double>(params.n_paths, 0.0));
  std::vector<std::vector<char>> truncated(static_cast<std::size_t>(levels),
                                           std::vector<char>(params.n_paths, 0));
  const double threshold = config.spec.right_endpoint();

  parallel_for(params.n_paths, params.threads, [&](std::size_t path) {
    for (int l = 0; l < levels; ++l) {
      const std::size_t block = refine >> l;  // fine increments per step at this level
      const double dt = rep.dts[static_cast<std::size_t>(l)];
      MarketState log_state = MarketState::from_weights(w0);
      Eigen::VectorXd weights = w0;
      double sup = 0.0;
      const std::size_t steps = coarse_steps << l;
      for (std::size_t k = 0; k < steps; ++k) {
        Eigen::VectorXd dW = Eigen::VectorXd::Zero(n);
        for (std::size_t s = 0; s < block; ++s) {
          dW += noise_increment(source, path, k * block + s, n, fine_dt, params.zero_noise);
        }
        log_state = step_logcap(log_state, config.spec, dt, dW);
        weights = step_weights(weights, config.spec, dt, dW);
        sup = std::max(sup, (log_state.weights - weights).cwiseAbs().maxCoeff());
        if (log_state.weights.maxCoeff() >= threshold || weights.maxCoeff() >= threshold) {
          truncated[static_cast<std::size_t>(l)][path] = 1;
          break;
        }
      }
      sup_gaps[static_cast<std::size_t>(l)][path] = sup;
    }
  });

  for (const auto& level : sup_gaps) {
    double sum = 0.0;
    for (double g : level) sum += g;
    rep.mean_gaps.push_back(sum / static_cast<double>(level.size()));
  }
  for (const auto& level : truncated) {
    rep.truncated_paths.push_back(static_cast<std::size_t>(std::count(level.begin(), level.end(), 1)));
  }
  for (double g : sup_gaps.front()) rep.max_abs_weight_gap = std::max(rep.max_abs_weight_gap, g);
  const double first = rep.mean_gaps.front(), last = rep.mean_gaps.back();
  rep.convergence_order =
      (first > 0.0 && last > 0.0) ? std::log2(first / last) / static_cast<double>(levels - 1) : 0.0;
  return rep;
}

ComparisonReport comparison_lemma_check(const std::function<double(double)>& b_low,
                                        const std::function<double(double)>& b_high,
                                        const std::function<double(double)>& sigma,
                                        double x_init, const SimParams& params) {
  validate(params);
  const NoiseSource source(params.seed);
  const std::size_t steps = step_count(params);
  const double dt = params.dt;
  const double allowance = 10.0 * std::sqrt(dt) * dt;
  const double sqdt = std::sqrt(dt);

  auto ordered_at = [&](double x) {
    const double lo = b_low(x), hi = b_high(x);
    if (lo > hi) {
      std::ostringstream msg;
      msg << "b_low(" << x << ") = " << lo << " exceeds b_high = " << hi;
      throw PreconditionError(msg.str());
    }
    return lo;
  };

  ComparisonReport rep;
  for (std::size_t path = 0; path < params.n_paths; ++path) {
    double x = x_init, y = x_init;
    for (std::size_t k = 0; k < steps; ++k) {
      const double dw = params.zero_noise ? 0.0 : sqdt * source.standard_normal(path, k, 0);
      const double bx = ordered_at(x);
      ordered_at(y);
      const double x_next = x + bx * dt + sigma(x) * dw;
      const double y_next = y + b_high(y) * dt + sigma(y) * dw;
      x = x_next;
      y = y_next;
      ++rep.steps_checked;
      rep.max_violation = std::max(rep.max_violation, x - y);
      if (x > y + allowance) ++rep.violation_count;
    }
  }
  return rep;
}

}  // namespace divmkt
