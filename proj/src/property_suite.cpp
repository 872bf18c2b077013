#include "plsgd/property_suite.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "plsgd/envelopes.hpp"
#include "plsgd/errors.hpp"
#include "plsgd/experiments.hpp"
#include "plsgd/oracles.hpp"
#include "plsgd/optimizer.hpp"
#include "plsgd/problems.hpp"
#include "plsgd/rng.hpp"
#include "plsgd/statistics.hpp"

namespace plsgd {

namespace {

struct Property {
  std::string name;
  std::function<std::string(bool fault)> body;  // empty string: pass
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

std::string landscape_quadratic(bool fault) {
  const auto p = make_quadratic(6, {0.5, 0.7, 1.0, 1.5, 2.0, 3.0},
                                {1.0, -1.0, 0.5, 0.0, 2.0, -0.5});
  LandscapeReport r = check_landscape(*p, 2000, 2.0, 11);
  if (fault) ++r.pl_violations;
  if (r.total_violations() != 0) {
    return std::to_string(r.total_violations()) + " violations";
  }
  return {};
}

std::string landscape_logistic(bool fault) {
  LogisticOptions opts;
  opts.pilot_points = 2000;
  const auto p = make_logistic(60, 3, 5, 0.1, opts);
  LandscapeReport r = check_landscape(*p, 1000, p->radius(), 12);
  if (fault) ++r.smoothness_violations;
  if (r.total_violations() != 0) {
    return std::to_string(r.total_violations()) + " violations (pl_min " +
           fmt(r.pl_ratio_min) + ")";
  }
  return {};
}

std::string harvey_constraint(bool fault) {
  CounterRng rng(0xC0FFEE, Purpose::kProbe, 0, 0);
  double worst = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double k = std::exp(20.0 * rng.uniform() - 10.0);
    const double alpha = rng.uniform();
    const double beta_sq = std::exp(20.0 * rng.uniform() - 10.0);
    const double gamma = std::exp(20.0 * rng.uniform() - 10.0);
    double next = envelope_next(k, alpha, beta_sq, gamma);
    if (fault) next *= 1.0 - 1e-6;
    const double lhs = next * next;
    const double rhs = (alpha * k + 2.0 * gamma) * next + beta_sq * k;
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(lhs, rhs));
  }
  if (worst > 1e-12) return "max relative residual " + fmt(worst);
  return {};
}

std::string expected_bound_algebra(bool fault) {
  RecursionParams params;
  CounterRng rng(7, Purpose::kProbe, 1, 0);
  for (int t = 0; t < 50; ++t) {
    params.alpha.push_back(rng.uniform());
    params.beta_sq.push_back(rng.uniform());
    params.gamma.push_back(rng.uniform());
  }
  const double x0 = 3.0;
  for (std::int64_t T = 0; T <= 50; T += 7) {
    double direct = x0;
    for (std::int64_t t = 0; t < T; ++t) direct *= params.alpha[t];
    for (std::int64_t t = 0; t < T; ++t) {
      double prod = params.gamma[t];
      for (std::int64_t i = t + 1; i < T; ++i) prod *= params.alpha[i];
      direct += prod;
    }
    double got = expected_bound(params, x0, T);
    if (fault) got += 1e-3;
    if (std::abs(got - direct) > 1e-12 * (1.0 + direct)) {
      return "T=" + std::to_string(T) + ": " + fmt(got) + " vs " + fmt(direct);
    }
  }
  return {};
}

std::string closed_form_dominance(bool fault) {
  for (double mu : {0.1, 0.5, 1.0}) {
    for (double sigma : {0.5, 2.0}) {
      SGDEnvelopeConfig cfg;
      cfg.smoothness = 1.0;
      cfg.pl_constant = mu;
      cfg.sigma = sigma;
      cfg.dimension = 10;
      cfg.schedule = StepSchedule::theta(1.0, mu);
      cfg.x0 = 1.0;
      const BoundReport r = sgd_envelope(cfg, 2000, {0.1});
      for (std::size_t t = 0; t < r.k.size(); ++t) {
        double closed = (*r.closed_form)[t];
        if (fault) closed *= 0.5;
        if (r.k[t] > closed * (1.0 + 1e-12)) {
          return "mu=" + fmt(mu) + " sigma=" + fmt(sigma) + " t=" +
                 std::to_string(t);
        }
      }
    }
  }
  return {};
}

std::string coupling_hit_rate(bool fault) {
  const std::uint32_t n = 10, b = 3, draws = 20000;
  std::uint64_t hits = 0;
  for (std::uint32_t t = 0; t < draws; ++t) {
    hits += coupled_indices(n, b, 4, t, 99).hit ? 1 : 0;
  }
  double rate = static_cast<double>(hits) / draws;
  if (fault) rate += 0.1;
  const double p = static_cast<double>(b) / n;
  const double slack = 3.0 * std::sqrt(p * (1.0 - p) / draws);
  if (std::abs(rate - p) > slack) {
    return "hit rate " + fmt(rate) + " vs " + fmt(p) + " +- " + fmt(slack);
  }
  return {};
}

std::string recursion_short_runs(bool fault) {
  const auto p = make_quadratic(8, {0.3, 0.5, 0.8, 1.0, 1.2, 1.5, 1.8, 2.0},
                                std::vector<double>(8, 0.0));
  GradientOracle oracle;
  oracle.sigma = 1.0;
  const StepSchedule schedule = StepSchedule::theta(p->smoothness(), p->pl_constant());
  for (std::uint32_t trial = 0; trial < 20; ++trial) {
    Trajectory traj = run_sgd(*p, oracle, schedule, 300, trial, 5, default_start(*p));
    if (fault) traj.rows.back().gap += 10.0;
    const auto v = recursion_check(traj, *p, schedule);
    if (!v.empty()) {
      return "trial " + std::to_string(trial) + ": " + std::to_string(v.size()) +
             " violations";
    }
  }
  return {};
}

std::string determinism(bool fault) {
  const auto p = make_quadratic(4, {1.0, 2.0, 3.0, 4.0}, {0.0, 0.0, 0.0, 0.0});
  GradientOracle oracle;
  oracle.sigma = 0.5;
  oracle.batch = 2;
  const StepSchedule schedule = StepSchedule::theta(4.0, 1.0);
  const Trajectory a = run_sgd(*p, oracle, schedule, 200, 3, 77, default_start(*p));
  const Trajectory b =
      run_sgd(*p, oracle, schedule, 200, 3, fault ? 78 : 77, default_start(*p));
  for (std::size_t t = 0; t < a.rows.size(); ++t) {
    if (a.rows[t].gap != b.rows[t].gap || a.rows[t].inner != b.rows[t].inner) {
      return "rows differ at t=" + std::to_string(t);
    }
  }
  return {};
}

std::string theta_cap(bool fault) {
  for (double mu : {0.01, 0.3, 1.0}) {
    const StepSchedule s = StepSchedule::theta(1.0, mu);
    for (std::int64_t t = 0; t < 5000; ++t) {
      double eta = s(t);
      if (fault) eta *= 2.0;
      if (eta > 1.0 + 1e-15) return "eta_" + std::to_string(t) + " = " + fmt(eta);
    }
  }
  return {};
}

std::vector<Property> properties() {
  return {
      {"landscape-quadratic", landscape_quadratic},
      {"landscape-logistic", landscape_logistic},
      {"harvey-constraint", harvey_constraint},
      {"expected-bound-algebra", expected_bound_algebra},
      {"closed-form-dominance", closed_form_dominance},
      {"coupling-hit-rate", coupling_hit_rate},
      {"recursion-check", recursion_short_runs},
      {"determinism", determinism},
      {"theta-step-cap", theta_cap},
  };
}

}  // namespace

std::vector<std::string> property_names() {
  std::vector<std::string> names;
  for (const auto& p : properties()) names.push_back(p.name);
  return names;
}

std::vector<PropertyResult> run_property_suite(std::string_view inject_fault) {
  const auto props = properties();
  if (!inject_fault.empty()) {
    bool known = false;
    for (const auto& p : props) known = known || p.name == inject_fault;
    if (!known) {
      throw InvalidArgument("unknown property '" + std::string(inject_fault) + "'");
    }
  }
  std::vector<PropertyResult> results;
  for (const auto& p : props) {
    PropertyResult r;
    r.name = p.name;
    try {
      r.detail = p.body(p.name == inject_fault);
      r.pass = r.detail.empty();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace plsgd
