#include "divmkt/output.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace divmkt {

using nlohmann::json;

json extended_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  return v;
}

namespace {

json array_of(const Eigen::ArrayXd& a) {
  json out = json::array();
  for (Eigen::Index i = 0; i < a.size(); ++i) out.push_back(extended_real(a[i]));
  return out;
}

std::string fmt(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

json to_json(const DivergenceVerdict& v) {
  json j;
  j["status"] = to_string(v.status);
  j["method"] = to_string(v.method);
  j["exponent"] = v.exponent ? extended_real(*v.exponent) : json(nullptr);
  if (v.fit) {
    j["tail_fit"] = {{"exponent", extended_real(v.fit->exponent)},
                     {"std_error", extended_real(v.fit->std_error)},
                     {"band", kExponentBand},
                     {"saturated", v.fit->saturated},
                     {"eps", array_of(v.fit->eps)},
                     {"log_integrand", array_of(v.fit->log_integrand)}};
  }
  if (!v.diagnostic.empty()) j["diagnostic"] = v.diagnostic;
  return j;
}

json to_json(const DiversityVerdict& v) {
  json j;
  j["status"] = to_string(v.status);
  j["rule"] = v.rule;
  j["evidence"] = json::array();
  for (const auto& e : v.evidence) {
    json item = to_json(e.verdict);
    item["name"] = e.name;
    j["evidence"].push_back(std::move(item));
  }
  j["preconditions"] = {{"admissible", v.preconditions.admissible},
                        {"boundedness_required", v.preconditions.boundedness_required},
                        {"boundedness_at_zero", v.preconditions.boundedness_at_zero},
                        {"sampled", v.preconditions.sampled}};
  return j;
}

json to_json(const EndpointReport& r) {
  json j;
  j["side"] = to_string(r.side);
  j["endpoint"] = extended_real(r.endpoint);
  j["phi"] = extended_real(r.phi);
  j["phi_status"] = to_string(r.phi_status);
  j["I"] = extended_real(r.I);
  j["I_status"] = to_string(r.I_status);
  j["verdict"] = to_string(r.verdict);
  j["phi_fit"] = to_json(r.phi_fit);
  j["I_fit"] = r.I_fit ? to_json(*r.I_fit) : json(nullptr);
  if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
  return j;
}

json to_json(const FellerReport& r) {
  json j;
  j["left"] = r.left ? to_json(*r.left) : json(nullptr);
  j["right"] = r.right ? to_json(*r.right) : json(nullptr);
  return j;
}

json to_json(const SimParams& p) {
  return {{"dt", p.dt},
          {"horizon", p.horizon},
          {"n_paths", p.n_paths},
          {"seed", p.seed},
          {"record_stride", p.record_stride},
          {"record_paths", p.record_paths},
          {"scheme", to_string(p.scheme)},
          {"zero_noise", p.zero_noise},
          {"continue_after_hit", p.continue_after_hit}};
}

json to_json(const MonteCarloReport& r) {
  json j;
  j["n_paths"] = r.n_paths;
  j["n_hits"] = r.n_hits;
  j["hit_frequency"] = r.hit_frequency;
  j["wilson_ci_95"] = {r.wilson_ci_95.first, r.wilson_ci_95.second};
  j["mean_max_weight"] = r.mean_max_weight;
  j["per_stock_hit_counts"] = r.per_stock_hit_counts;
  j["params"] = to_json(r.params);
  j["model"] = {{"n", r.n}, {"delta", r.delta}, {"family", r.family}, {"threshold", 1.0 - r.delta}};
  j["hit_detection"] = "first grid time with some weight >= 1 - delta; biased low by O(sqrt(dt))";
  j["interpretation"] = "finite-horizon hit frequencies are empirical evidence, not proof of (non-)diversity";
  return j;
}

json to_json(const ItoConsistencyReport& r) {
  return {{"dts", r.dts},
          {"mean_sup_gaps", r.mean_gaps},
          {"max_abs_weight_gap", r.max_abs_weight_gap},
          {"convergence_order", r.convergence_order},
          {"truncated_paths", r.truncated_paths}};
}

void write_trajectories_csv(std::ostream& out, const MonteCarloReport& r) {
  out << "path,step,time,stock,weight\n";
  char buf[128];
  for (std::size_t path = 0; path < r.trajectories.size(); ++path) {
    for (const auto& pt : r.trajectories[path]) {
      for (Eigen::Index i = 0; i < pt.weights.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%ld,%.17g\n", path, pt.step, pt.time,
                      static_cast<long>(i), pt.weights[i]);
        out << buf;
      }
    }
  }
}

void write_max_weight_svg(std::ostream& out, const MonteCarloReport& r, std::size_t max_paths) {
  constexpr double kWidth = 800, kHeight = 500;
  constexpr double kLeft = 70, kRight = 20, kTop = 30, kBottom = 60;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const double horizon = r.params.horizon;
  auto sx = [&](double t) { return kLeft + plot_w * t / horizon; };
  auto sy = [&](double w) { return kTop + plot_h * (1.0 - w); };
  static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b",
                                  "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#d62728"};

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" "
         "viewBox=\"0 0 800 500\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n";
  out << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\"" << fmt(plot_w)
      << "\" height=\"" << fmt(plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double w = 0.25 * k;
    out << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(sy(w) + 4)
        << "\" font-size=\"12\" text-anchor=\"end\">" << fmt(w) << "</text>\n";
    const double t = horizon * 0.25 * k;
    out << "<text x=\"" << fmt(sx(t)) << "\" y=\"" << fmt(kTop + plot_h + 18)
        << "\" font-size=\"12\" text-anchor=\"middle\">" << fmt(t, 3) << "</text>\n";
  }
  out << "<text x=\"" << fmt(kLeft + plot_w / 2) << "\" y=\"" << fmt(kHeight - 15)
      << "\" font-size=\"14\" text-anchor=\"middle\">time</text>\n";
  out << "<text x=\"18\" y=\"" << fmt(kTop + plot_h / 2)
      << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << fmt(kTop + plot_h / 2) << ")\">max market weight</text>\n";

  const double threshold = 1.0 - r.delta;
  out << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(sy(threshold)) << "\" x2=\""
      << fmt(kLeft + plot_w) << "\" y2=\"" << fmt(sy(threshold))
      << "\" stroke=\"#d62728\" stroke-dasharray=\"6,4\"/>\n";
  out << "<text x=\"" << fmt(kLeft + plot_w - 4) << "\" y=\"" << fmt(sy(threshold) - 6)
      << "\" font-size=\"12\" text-anchor=\"end\" fill=\"#d62728\">1 - delta = "
      << fmt(threshold, 3) << "</text>\n";

  const std::size_t count = std::min(max_paths, r.trajectories.size());
  for (std::size_t path = 0; path < count; ++path) {
    const auto& traj = r.trajectories[path];
    if (traj.empty()) continue;
    out << "<polyline fill=\"none\" stroke-width=\"1\" stroke=\"" << kColors[path % 10]
        << "\" points=\"";
    for (std::size_t k = 0; k < traj.size(); ++k) {
      if (k) out << ' ';
      out << fmt(sx(traj[k].time)) << ',' << fmt(sy(traj[k].weights.maxCoeff()));
    }
    out << "\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace divmkt
