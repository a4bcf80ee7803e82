#include "divmkt/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "divmkt/errors.hpp"
#include "divmkt/expression.hpp"

namespace divmkt {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

struct Entry {
  std::string value;
  int line;
  bool used = false;
};

// One [section] of the file. Accessors mark keys as consumed; finish()
// rejects whatever is left.
class Section {
 public:
  Section(std::string name, std::map<std::string, Entry> entries)
      : name_(std::move(name)), entries_(std::move(entries)) {}

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    std::ostringstream msg;
    msg << "[" << name_ << "] " << key;
    if (auto it = entries_.find(key); it != entries_.end()) msg << " (line " << it->second.line << ")";
    msg << ": " << what;
    throw ConfigError(msg.str());
  }

  const std::string& raw(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) fail(key, "required key is missing");
    it->second.used = true;
    return it->second.value;
  }

  double real(const std::string& key) { return to_real(key, raw(key)); }
  double real_or(const std::string& key, double fallback) {
    return has(key) ? real(key) : fallback;
  }

  long long integer(const std::string& key) { return to_integer(key, raw(key)); }

  template <typename T>
  T count_or(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    const long long v = integer(key);
    if (v < 0) fail(key, "must be non-negative");
    return static_cast<T>(v);
  }

  std::uint64_t unsigned64(const std::string& key) {
    const std::string& s = raw(key);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail(key, "expected an unsigned integer");
    return v;
  }

  bool boolean_or(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const std::string& s = raw(key);
    if (s == "true" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "no" || s == "0") return false;
    fail(key, "expected true or false");
  }

  std::string text_or(const std::string& key, std::string fallback) {
    return has(key) ? raw(key) : std::move(fallback);
  }

  std::vector<double> reals(const std::string& key) {
    std::vector<double> out;
    const std::string& s = raw(key);
    if (trim(s).empty()) return out;
    for (const auto& item : split_list(s)) out.push_back(to_real(key, item));
    return out;
  }

  std::vector<int> integers(const std::string& key) {
    std::vector<int> out;
    const std::string& s = raw(key);
    if (trim(s).empty()) return out;
    for (const auto& item : split_list(s)) out.push_back(static_cast<int>(to_integer(key, item)));
    return out;
  }

  void finish() const {
    for (const auto& [key, e] : entries_) {
      if (!e.used) {
        std::ostringstream msg;
        msg << "[" << name_ << "] line " << e.line << ": unknown key '" << key << "'";
        throw ConfigError(msg.str());
      }
    }
  }

 private:
  double to_real(const std::string& key, const std::string& s) const {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || std::isnan(v)) {
      fail(key, "expected a number, got '" + s + "'");
    }
    return v;
  }

  long long to_integer(const std::string& key, const std::string& s) const {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      fail(key, "expected an integer, got '" + s + "'");
    }
    return v;
  }

  std::string name_;
  std::map<std::string, Entry> entries_;
};

ModelSection read_model(Section& s) {
  ModelSection m;
  const long long n = s.integer("n");
  if (n < 2 || n > 10'000) s.fail("n", "must be an integer in [2, 10000]");
  m.n = static_cast<int>(n);
  m.delta = s.real("delta");
  m.family = s.text_or("family", "power_law");
  if (m.family == "power_law" || m.family == "patched_power_law") {
    m.p = s.real("p");
    m.q = s.real_or("q", 1.0);
    if (m.family == "patched_power_law") {
      m.c = s.real_or("c", m.c);
      m.x_switch = s.real_or("x_switch", m.x_switch);
    }
  } else if (m.family == "custom") {
    m.g = s.raw("g");
  } else {
    s.fail("family", "must be power_law, patched_power_law or custom");
  }
  if (s.has("initial_weights")) m.initial_weights = s.reals("initial_weights");
  return m;
}

SimParams read_sim(Section& s, SimParams p) {
  p.dt = s.real_or("dt", p.dt);
  p.horizon = s.real_or("horizon", p.horizon);
  p.n_paths = s.count_or<std::size_t>("n_paths", p.n_paths);
  if (s.has("seed")) p.seed = s.unsigned64("seed");
  p.record_stride = s.count_or<std::size_t>("record_stride", p.record_stride);
  p.record_paths = s.count_or<std::size_t>("record_paths", 0);
  p.threads = s.count_or<unsigned>("threads", 0);
  p.zero_noise = s.boolean_or("zero_noise", false);
  p.continue_after_hit = s.boolean_or("continue_after_hit", false);
  const std::string scheme = s.text_or("scheme", "logcap");
  if (scheme == "logcap") p.scheme = Scheme::LogCapEuler;
  else if (scheme == "weights") p.scheme = Scheme::WeightEuler;
  else s.fail("scheme", "must be logcap or weights");
  return p;
}

OutputsSection read_outputs(Section& s) {
  OutputsSection o;
  o.directory = s.text_or("directory", o.directory);
  if (s.has("formats")) {
    try {
      o.formats = parse_formats(s.raw("formats"));
    } catch (const ConfigError& e) {
      s.fail("formats", e.what());
    }
  }
  o.plot_paths = s.count_or<std::size_t>("plot_paths", o.plot_paths);
  return o;
}

VerifySection read_verify(Section& s) {
  VerifySection v;
  v.n = s.integers("n");
  v.delta = s.reals("delta");
  v.p = s.reals("p");
  v.q = s.reals("q");
  v.family = s.text_or("family", v.family);
  if (v.family != "auto" && v.family != "power_law" && v.family != "patched_power_law") {
    s.fail("family", "must be auto, power_law or patched_power_law");
  }
  v.c = s.real_or("c", v.c);
  v.x_switch = s.real_or("x_switch", v.x_switch);
  v.ito_check = s.boolean_or("ito_check", v.ito_check);
  v.ito_horizon = s.real_or("ito_horizon", v.ito_horizon);
  v.ito_dt = s.real_or("ito_dt", v.ito_dt);
  v.ito_paths = s.count_or<std::size_t>("ito_paths", v.ito_paths);
  for (const char* key : {"n", "delta", "p", "q"}) {
    const bool empty = std::string_view(key) == "n" ? v.n.empty()
                       : std::string_view(key) == "delta" ? v.delta.empty()
                       : std::string_view(key) == "p"     ? v.p.empty()
                                                          : v.q.empty();
    if (empty) s.fail(key, "parameter grid is empty");
  }
  for (int n : v.n) {
    if (n < 2 || n > 10'000) s.fail("n", "every n must be an integer in [2, 10000]");
  }
  if (v.ito_horizon <= 0.0 || v.ito_dt <= 0.0 || v.ito_dt > v.ito_horizon) {
    s.fail("ito_dt", "require 0 < ito_dt <= ito_horizon");
  }
  if (v.ito_paths == 0) s.fail("ito_paths", "must be positive");
  for (double delta : v.delta) {
    for (double p : v.p) {
      for (double q : v.q) {
        try {
          DriftSpec::power_law(delta, p, q);
          if (v.family != "power_law") DriftSpec::patched(delta, p, q, v.c, v.x_switch);
        } catch (const ParameterError& e) {
          s.fail("delta", e.what());
        }
      }
    }
  }
  return v;
}

FellerSection read_feller(Section& s) {
  FellerSection f;
  f.process = s.text_or("process", f.process);
  if (f.process == "custom") {
    f.drift = s.raw("drift");
    f.diffusion_sq = s.raw("diffusion_sq");
    f.alpha = s.real("alpha");
    f.beta = s.real("beta");
    f.x0 = s.real("x0");
    for (const auto& [key, text] : {std::pair{"drift", f.drift}, {"diffusion_sq", f.diffusion_sq}}) {
      try {
        Expression::parse(text);
      } catch (const ParameterError& e) {
        s.fail(key, e.what());
      }
    }
    if (!(f.alpha < f.x0 && f.x0 < f.beta)) s.fail("x0", "require alpha < x0 < beta");
  } else if (f.process != "weight") {
    s.fail("process", "must be weight or custom");
  }
  return f;
}

}  // namespace

std::set<std::string> parse_formats(std::string_view list) {
  std::set<std::string> out;
  if (trim(list).empty()) return out;
  for (const auto& f : split_list(list)) {
    if (f != "csv" && f != "json" && f != "svg") {
      throw ConfigError("unknown output format '" + f + "' (expected csv, json, svg)");
    }
    out.insert(f);
  }
  return out;
}

DriftSpec make_spec(const ModelSection& m) {
  try {
    if (m.family == "power_law") return DriftSpec::power_law(m.delta, m.p, m.q);
    if (m.family == "patched_power_law") {
      return DriftSpec::patched(m.delta, m.p, m.q, m.c, m.x_switch);
    }
    const Expression g = Expression::parse(m.g);
    return DriftSpec::custom(m.delta, [g](double x) { return g(x); }, "custom:" + m.g);
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("[model] ") + e.what());
  }
}

ModelConfig make_model_config(const ModelSection& m) {
  ModelConfig cfg{m.n, make_spec(m), std::nullopt};
  if (m.initial_weights) {
    cfg.initial_weights = Eigen::Map<const Eigen::VectorXd>(
        m.initial_weights->data(), static_cast<Eigen::Index>(m.initial_weights->size()));
  }
  try {
    cfg.initial();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("[model] ") + e.what());
  }
  return cfg;
}

ExperimentConfig parse_config(std::string_view text) {
  std::map<std::string, std::map<std::string, Entry>> sections;
  std::string current;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      }
      current = trim(std::string_view(t).substr(1, t.size() - 2));
      static const std::set<std::string> known = {"model", "sim", "outputs", "verify", "feller"};
      if (!known.count(current)) {
        throw ConfigError("line " + std::to_string(lineno) + ": unknown section [" + current + "]");
      }
      if (sections.count(current)) {
        throw ConfigError("line " + std::to_string(lineno) + ": duplicate section [" + current + "]");
      }
      sections[current];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    if (current.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": key outside of a section");
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    auto& sec = sections[current];
    if (sec.count(key)) {
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    sec.emplace(key, Entry{value, lineno});
  }

  ExperimentConfig cfg;
  cfg.sim.record_stride = 100;
  auto take = [&](const char* name) -> std::optional<Section> {
    auto it = sections.find(name);
    if (it == sections.end()) return std::nullopt;
    return Section(name, std::move(it->second));
  };

  if (auto s = take("model")) {
    cfg.model = read_model(*s);
    s->finish();
    make_model_config(*cfg.model);
  }
  if (auto s = take("sim")) {
    cfg.sim = read_sim(*s, cfg.sim);
    s->finish();
  }
  try {
    validate(cfg.sim);
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("[sim] ") + e.what());
  }
  if (auto s = take("outputs")) {
    cfg.outputs = read_outputs(*s);
    s->finish();
  }
  if (auto s = take("verify")) {
    cfg.verify = read_verify(*s);
    s->finish();
  }
  if (auto s = take("feller")) {
    cfg.feller = read_feller(*s);
    s->finish();
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace divmkt
