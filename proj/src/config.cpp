#include "plsgd/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "plsgd/errors.hpp"
#include "plsgd/toml_lite.hpp"

namespace plsgd {

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kEnsemble:
      return "ensemble";
    case ExperimentKind::kCoupled:
      return "coupled";
    case ExperimentKind::kRisk:
      return "risk";
    case ExperimentKind::kCounterexample:
      return "counterexample";
    case ExperimentKind::kLandscape:
      return "landscape";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(std::string_view name) {
  if (name == "ensemble") return ExperimentKind::kEnsemble;
  if (name == "coupled") return ExperimentKind::kCoupled;
  if (name == "risk") return ExperimentKind::kRisk;
  if (name == "counterexample") return ExperimentKind::kCounterexample;
  if (name == "landscape") return ExperimentKind::kLandscape;
  throw ConfigError("kind", "unknown experiment kind '" + std::string(name) + "'");
}

namespace {

// Reads typed values out of a document and remembers which keys were used.
class Reader {
 public:
  explicit Reader(const toml::Document& doc) : doc_(doc) {}

  bool has(const std::string& key) const { return doc_.count(key) > 0; }

  const toml::Value* find(const std::string& key) {
    auto it = doc_.find(key);
    if (it == doc_.end()) return nullptr;
    used_.insert(key);
    return &it->second;
  }

  const toml::Value& require(const std::string& key) {
    const toml::Value* v = find(key);
    if (!v) throw ConfigError(key, "missing required key");
    return *v;
  }

  static double as_double(const std::string& key, const toml::Value& v) {
    if (v.is_float()) return std::get<double>(v.data);
    if (v.is_int()) return static_cast<double>(std::get<std::int64_t>(v.data));
    throw ConfigError(key, "expected a number");
  }

  static std::int64_t as_int(const std::string& key, const toml::Value& v) {
    if (v.is_int()) return std::get<std::int64_t>(v.data);
    throw ConfigError(key, "expected an integer");
  }

  void read(const std::string& key, double& out) {
    if (auto* v = find(key)) out = as_double(key, *v);
  }
  void read(const std::string& key, std::optional<double>& out) {
    if (auto* v = find(key)) out = as_double(key, *v);
  }
  void read(const std::string& key, std::int64_t& out) {
    if (auto* v = find(key)) out = as_int(key, *v);
  }
  void read(const std::string& key, int& out) {
    std::int64_t wide = out;
    read(key, wide);
    if (wide < std::numeric_limits<int>::min() ||
        wide > std::numeric_limits<int>::max()) {
      throw ConfigError(key, "integer out of range");
    }
    out = static_cast<int>(wide);
  }
  void read(const std::string& key, std::uint64_t& out) {
    if (auto* v = find(key)) {
      const std::int64_t i = as_int(key, *v);
      if (i < 0) throw ConfigError(key, "must be nonnegative");
      out = static_cast<std::uint64_t>(i);
    }
  }
  void read(const std::string& key, std::uint32_t& out) {
    if (auto* v = find(key)) {
      const std::int64_t i = as_int(key, *v);
      if (i < 0 || i > std::numeric_limits<std::uint32_t>::max()) {
        throw ConfigError(key, "integer out of range");
      }
      out = static_cast<std::uint32_t>(i);
    }
  }
  void read(const std::string& key, bool& out) {
    if (auto* v = find(key)) {
      if (!v->is_bool()) throw ConfigError(key, "expected a boolean");
      out = std::get<bool>(v->data);
    }
  }
  void read(const std::string& key, std::string& out) {
    if (auto* v = find(key)) {
      if (!v->is_string()) throw ConfigError(key, "expected a string");
      out = std::get<std::string>(v->data);
    }
  }
  void read(const std::string& key, std::vector<double>& out) {
    if (auto* v = find(key)) {
      if (!v->is_array()) throw ConfigError(key, "expected an array of numbers");
      out.clear();
      for (const auto& item : std::get<toml::Array>(v->data)) {
        out.push_back(as_double(key, item));
      }
    }
  }

  void reject_unused() const {
    for (const auto& [key, value] : doc_) {
      if (!used_.count(key)) throw ConfigError(key, "unknown key");
    }
  }

 private:
  const toml::Document& doc_;
  std::set<std::string> used_;
};

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key, what);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

std::vector<double> resolved_spectrum(const ProblemSpec& spec) {
  if (!spec.spectrum.empty()) return spec.spectrum;
  std::vector<double> out(static_cast<std::size_t>(std::max(spec.d, 1)));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = out.size() == 1
                 ? spec.L
                 : spec.mu + (spec.L - spec.mu) * static_cast<double>(i) /
                                 static_cast<double>(out.size() - 1);
  }
  return out;
}

double implied_smoothness(const ProblemSpec& spec) {
  if (spec.type == "logistic") return 0.25 + spec.lambda_r;
  double top = 0.0;
  for (double v : resolved_spectrum(spec)) top = std::max(top, v);
  return top;
}

CounterexampleSpec counterexample_spec(const CounterexampleSettings& s) {
  CounterexampleSpec spec;
  spec.a = s.a;
  spec.b = s.b;
  spec.c = s.c;
  spec.start_x = s.start_x;
  spec.epsilon = s.epsilon;
  spec.order = static_cast<int>(s.order);
  spec.radius = s.radius ? *s.radius : distance_to_minimizers(spec) - 1e-6;
  return spec;
}

void validate_config(const ExperimentConfig& c) {
  const auto kind = c.kind;
  const bool needs_problem = kind != ExperimentKind::kCounterexample;
  require(c.T >= 1, "T", "must be >= 1");
  require(c.C1 > 0.0 && finite(c.C1), "C1", "must be > 0");
  require(c.C2 > 0.0 && finite(c.C2), "C2", "must be > 0");
  require(c.trajectory_trials >= 0, "trajectory_trials", "must be >= 0");
  if (kind == ExperimentKind::kEnsemble) {
    require(c.N >= 100, "N", "ensembles need N >= 100");
    require(c.N <= std::numeric_limits<std::uint32_t>::max(), "N", "too large");
    require(!c.deltas.empty(), "deltas", "must not be empty");
    for (double d : c.deltas) {
      require(d > 0.0 && d < std::exp(-1.0), "deltas",
              "every delta must lie in (0, 1/e)");
    }
  }

  const ProblemSpec& p = c.problem;
  if (needs_problem) {
    require(p.type == "quadratic" || p.type == "logistic", "problem.type",
            "must be \"quadratic\" or \"logistic\"");
    require(p.d >= 1, "problem.d", "must be >= 1");
    if (p.type == "quadratic") {
      if (!p.spectrum.empty()) {
        require(p.spectrum.size() == static_cast<std::size_t>(p.d),
                "problem.spectrum", "length must equal d");
        double top = 0.0;
        for (double v : p.spectrum) {
          require(v >= 0.0 && finite(v), "problem.spectrum",
                  "entries must be finite and >= 0");
          top = std::max(top, v);
        }
        require(top > 0.0, "problem.spectrum", "needs a positive entry");
      } else {
        require(p.mu > 0.0 && finite(p.mu), "problem.mu", "must be > 0");
        require(p.L >= p.mu && finite(p.L), "problem.L", "must be >= mu");
      }
      require(p.x0_distance >= 0.0 && finite(p.x0_distance),
              "problem.x0_distance", "must be >= 0");
    } else {
      require(p.n >= 2, "problem.n", "must be >= 2");
      require(p.lambda_r >= 0.0 && finite(p.lambda_r), "problem.lambda_r",
              "must be >= 0");
      require(p.lambda_r > 0.0 || p.radius.has_value(), "problem.radius",
              "lambda_r = 0 needs an explicit radius");
      if (p.radius) {
        require(*p.radius > 0.0 && finite(*p.radius), "problem.radius", "must be > 0");
      }
      require(p.pilot_points >= 10, "problem.pilot_points", "must be >= 10");
      if (p.mu_override) {
        require(*p.mu_override > 0.0 &&
                    *p.mu_override <= implied_smoothness(p),
                "problem.mu", "must lie in (0, L]");
      }
    }
  }

  const OracleSpec& o = c.oracle;
  try {
    (void)oracle_mode_from_string(o.mode);
  } catch (const Error&) {
    throw ConfigError("oracle.mode", "unknown oracle mode '" + o.mode + "'");
  }
  require(o.sigma >= 0.0 && finite(o.sigma), "oracle.sigma", "must be >= 0");
  require(o.b >= 1, "oracle.b", "must be >= 1");
  if (needs_problem && o.mode == "finite_sum_subsample") {
    if (p.type == "quadratic") {
      require(p.coordinate_split, "problem.coordinate_split",
              "finite_sum_subsample on a quadratic needs coordinate_split = true");
      require(o.b <= static_cast<std::uint32_t>(p.d), "oracle.b", "must be <= d");
    } else {
      require(o.b <= p.n, "oracle.b", "must be <= n");
    }
  }

  const ScheduleSpec& s = c.schedule;
  ScheduleKind sk{};
  try {
    sk = schedule_kind_from_string(s.kind);
  } catch (const Error&) {
    throw ConfigError("schedule.kind", "unknown schedule '" + s.kind + "'");
  }
  if (needs_problem) {
    const double L = implied_smoothness(p);
    if (sk == ScheduleKind::kSlow) {
      require(s.c > 0.0 && s.c < 1.0 / L, "schedule.c",
              "slow schedule needs c < 1/L (c = " + toml::format_float(s.c) +
                  ", 1/L = " + toml::format_float(1.0 / L) + ")");
    }
    if (sk == ScheduleKind::kStability && kind != ExperimentKind::kCoupled) {
      require(s.c > 0.0 && finite(s.c), "schedule.c", "must be > 0");
    }
    if (sk == ScheduleKind::kConstant) {
      require(s.eta >= 0.0 && finite(s.eta), "schedule.eta", "must be >= 0");
    }
  }

  switch (kind) {
    case ExperimentKind::kEnsemble:
      break;
    case ExperimentKind::kCoupled:
      require(p.type == "logistic", "problem.type", "coupled runs need logistic");
      require(sk == ScheduleKind::kStability, "schedule.kind",
              "coupled runs need the stability schedule");
      require(s.c >= 0.0 && finite(s.c), "schedule.c", "must be >= 0");
      require(c.coupled.replicates >= 1, "coupled.replicates", "must be >= 1");
      require(c.coupled.index >= 0 && c.coupled.index < p.n, "coupled.index",
              "must lie in [0, n)");
      require(c.coupled.fresh_samples >= 0, "coupled.fresh_samples", "must be >= 0");
      require(o.b <= p.n, "oracle.b", "must be <= n");
      break;
    case ExperimentKind::kRisk:
      require(p.type == "logistic", "problem.type", "risk runs need logistic");
      require(o.sigma > 0.0, "oracle.sigma", "risk horizon needs sigma > 0");
      require(o.b <= p.n, "oracle.b", "must be <= n");
      require(!c.risk.multipliers.empty(), "risk.multipliers", "must not be empty");
      for (double m : c.risk.multipliers) {
        require(m >= 0.0 && finite(m), "risk.multipliers", "entries must be >= 0");
      }
      require(c.risk.replicates >= 1, "risk.replicates", "must be >= 1");
      require(c.risk.delta > 0.0 && c.risk.delta < 1.0, "risk.delta",
              "must lie in (0, 1)");
      require(c.risk.heldout >= 10000, "risk.heldout",
              "held-out set needs at least 1e4 samples");
      require(c.risk.max_T >= 1, "risk.max_T", "must be >= 1");
      break;
    case ExperimentKind::kCounterexample: {
      const auto& ce = c.counterexample;
      require(ce.order >= 8 && ce.order <= 512, "counterexample.order",
              "must lie in [8, 512]");
      require(ce.a > 0.0 && finite(ce.a), "counterexample.a", "must be > 0");
      require(ce.b > 0.0 && finite(ce.b), "counterexample.b", "must be > 0");
      require(ce.start_x > 0.0 && finite(ce.start_x), "counterexample.start_x",
              "must be > 0");
      require(ce.epsilon > 0.0 && ce.epsilon < ce.c, "counterexample.epsilon",
              "must lie in (0, c)");
      if (ce.radius) {
        require(*ce.radius > 0.0 && finite(*ce.radius), "counterexample.radius",
                "must be finite and > 0");
      }
      require(ce.eta > 0.0 && ce.eta <= 1.0 / (2.0 * ce.a), "counterexample.eta",
              "must lie in (0, 1/(2a)]");
      break;
    }
    case ExperimentKind::kLandscape:
      require(c.landscape.points >= 2, "landscape.points", "must be >= 2");
      require(c.landscape.radius > 0.0 && finite(c.landscape.radius),
              "landscape.radius", "must be > 0");
      break;
  }
}

ExperimentConfig parse_config_text(std::string_view text) {
  const toml::Document doc = toml::parse(text);
  Reader r(doc);
  ExperimentConfig c;

  const toml::Value& kind = r.require("kind");
  if (!kind.is_string()) throw ConfigError("kind", "expected a string");
  c.kind = experiment_kind_from_string(std::get<std::string>(kind.data));
  const toml::Value& seed = r.require("seed");
  {
    const std::int64_t s = Reader::as_int("seed", seed);
    require(s >= 0, "seed", "must be nonnegative");
    c.seed = static_cast<std::uint64_t>(s);
  }
  if (c.kind == ExperimentKind::kEnsemble || c.kind == ExperimentKind::kCoupled ||
      c.kind == ExperimentKind::kCounterexample) {
    (void)r.require("T");
  }
  if (c.kind == ExperimentKind::kEnsemble) (void)r.require("N");

  r.read("T", c.T);
  r.read("N", c.N);
  r.read("deltas", c.deltas);
  r.read("C1", c.C1);
  r.read("C2", c.C2);
  r.read("trajectory_trials", c.trajectory_trials);
  r.read("output", c.output);

  ProblemSpec& p = c.problem;
  r.read("problem.type", p.type);
  r.read("problem.d", p.d);
  r.read("problem.spectrum", p.spectrum);
  r.read("problem.L", p.L);
  r.read("problem.x0_distance", p.x0_distance);
  r.read("problem.coordinate_split", p.coordinate_split);
  r.read("problem.n", p.n);
  r.read("problem.lambda_r", p.lambda_r);
  r.read("problem.data_seed", p.data_seed);
  r.read("problem.radius", p.radius);
  r.read("problem.pilot_points", p.pilot_points);
  // `mu` is the spectrum floor for quadratics and the PL override for logistic.
  if (p.type == "logistic") {
    r.read("problem.mu", p.mu_override);
  } else {
    r.read("problem.mu", p.mu);
  }

  r.read("oracle.mode", c.oracle.mode);
  r.read("oracle.sigma", c.oracle.sigma);
  r.read("oracle.b", c.oracle.b);

  r.read("schedule.kind", c.schedule.kind);
  r.read("schedule.c", c.schedule.c);
  r.read("schedule.eta", c.schedule.eta);

  r.read("coupled.replicates", c.coupled.replicates);
  r.read("coupled.index", c.coupled.index);
  r.read("coupled.fresh_samples", c.coupled.fresh_samples);

  r.read("risk.multipliers", c.risk.multipliers);
  r.read("risk.replicates", c.risk.replicates);
  r.read("risk.delta", c.risk.delta);
  r.read("risk.heldout", c.risk.heldout);
  r.read("risk.max_T", c.risk.max_T);

  auto& ce = c.counterexample;
  r.read("counterexample.a", ce.a);
  r.read("counterexample.b", ce.b);
  r.read("counterexample.c", ce.c);
  r.read("counterexample.start_x", ce.start_x);
  r.read("counterexample.epsilon", ce.epsilon);
  r.read("counterexample.order", ce.order);
  r.read("counterexample.radius", ce.radius);
  r.read("counterexample.eta", ce.eta);

  r.read("landscape.points", c.landscape.points);
  r.read("landscape.radius", c.landscape.radius);

  r.reject_unused();
  validate_config(c);
  return c;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("path", "cannot open config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(ch);
    }
  }
  return out + "\"";
}

std::string list(const std::vector<double>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += toml::format_float(values[i]);
  }
  return out + "]";
}

}  // namespace

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream o;
  auto f = [](double v) { return toml::format_float(v); };
  o << "kind = " << quote(std::string(to_string(c.kind))) << "\n";
  o << "seed = " << c.seed << "\n";
  o << "T = " << c.T << "\n";
  o << "N = " << c.N << "\n";
  o << "deltas = " << list(c.deltas) << "\n";
  o << "C1 = " << f(c.C1) << "\n";
  o << "C2 = " << f(c.C2) << "\n";
  o << "trajectory_trials = " << c.trajectory_trials << "\n";
  if (!c.output.empty()) o << "output = " << quote(c.output) << "\n";

  const ProblemSpec& p = c.problem;
  o << "\n[problem]\n";
  o << "type = " << quote(p.type) << "\n";
  o << "d = " << p.d << "\n";
  if (!p.spectrum.empty()) o << "spectrum = " << list(p.spectrum) << "\n";
  if (p.type == "logistic") {
    if (p.mu_override) o << "mu = " << f(*p.mu_override) << "\n";
  } else {
    o << "mu = " << f(p.mu) << "\n";
  }
  o << "L = " << f(p.L) << "\n";
  o << "x0_distance = " << f(p.x0_distance) << "\n";
  o << "coordinate_split = " << (p.coordinate_split ? "true" : "false") << "\n";
  o << "n = " << p.n << "\n";
  o << "lambda_r = " << f(p.lambda_r) << "\n";
  o << "data_seed = " << p.data_seed << "\n";
  if (p.radius) o << "radius = " << f(*p.radius) << "\n";
  o << "pilot_points = " << p.pilot_points << "\n";

  o << "\n[oracle]\n";
  o << "mode = " << quote(c.oracle.mode) << "\n";
  o << "sigma = " << f(c.oracle.sigma) << "\n";
  o << "b = " << c.oracle.b << "\n";

  o << "\n[schedule]\n";
  o << "kind = " << quote(c.schedule.kind) << "\n";
  o << "c = " << f(c.schedule.c) << "\n";
  o << "eta = " << f(c.schedule.eta) << "\n";

  o << "\n[coupled]\n";
  o << "replicates = " << c.coupled.replicates << "\n";
  o << "index = " << c.coupled.index << "\n";
  o << "fresh_samples = " << c.coupled.fresh_samples << "\n";

  o << "\n[risk]\n";
  o << "multipliers = " << list(c.risk.multipliers) << "\n";
  o << "replicates = " << c.risk.replicates << "\n";
  o << "delta = " << f(c.risk.delta) << "\n";
  o << "heldout = " << c.risk.heldout << "\n";
  o << "max_T = " << c.risk.max_T << "\n";

  const auto& ce = c.counterexample;
  o << "\n[counterexample]\n";
  o << "a = " << f(ce.a) << "\n";
  o << "b = " << f(ce.b) << "\n";
  o << "c = " << f(ce.c) << "\n";
  o << "start_x = " << f(ce.start_x) << "\n";
  o << "epsilon = " << f(ce.epsilon) << "\n";
  o << "order = " << ce.order << "\n";
  if (ce.radius) o << "radius = " << f(*ce.radius) << "\n";
  o << "eta = " << f(ce.eta) << "\n";

  o << "\n[landscape]\n";
  o << "points = " << c.landscape.points << "\n";
  o << "radius = " << f(c.landscape.radius) << "\n";
  return o.str();
}

}  // namespace plsgd
