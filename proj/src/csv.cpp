#include "plsgd/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "plsgd/errors.hpp"

namespace plsgd {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw NumericError("number formatting failed");
  return std::string(buf, p);
}

std::string delta_label(double delta) {
  const double pct = delta * 100.0;
  const double rounded = std::round(pct);
  if (std::abs(pct - rounded) < 1e-9 && rounded >= 1.0) {
    const auto whole = static_cast<long long>(rounded);
    return (whole < 10 ? "d0" : "d") + std::to_string(whole);
  }
  std::string s = format_number(delta);
  for (char& c : s) {
    if (c == '.') c = 'p';
  }
  return "d" + s;
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  const auto tmp = path.parent_path() /
                   ("." + path.filename().string() + ".tmp." +
                    std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error("short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot rename into '" + path.string() + "': " + ec.message());
  }
}

namespace {

class Table {
 public:
  explicit Table(std::vector<std::string> header) {
    add(header);
  }
  void add(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

std::string num(double v) { return format_number(v); }
template <class Int>
std::string integer(Int v) {
  return std::to_string(v);
}

}  // namespace

std::string trajectory_csv(const std::vector<Trajectory>& trajectories) {
  Table t({"trial_id", "t", "gap", "grad_norm_sq", "eta", "radius", "inner",
           "err_norm_sq"});
  for (const auto& traj : trajectories) {
    for (std::size_t i = 0; i < traj.rows.size(); ++i) {
      const auto& r = traj.rows[i];
      t.add({integer(traj.trial_id), integer(i), num(r.gap), num(r.grad_norm_sq),
             num(r.eta), num(r.radius), num(r.inner), num(r.err_norm_sq)});
    }
  }
  return t.str();
}

std::string bounds_csv(const BoundReport& report) {
  std::vector<std::string> header{"t", "K_t"};
  for (double d : report.deltas) header.push_back("env_" + delta_label(d));
  header.push_back("expected_bound");
  header.push_back("closedform_K_t");
  Table t(header);
  for (std::size_t i = 0; i < report.k.size(); ++i) {
    std::vector<std::string> row{integer(i), num(report.k[i])};
    for (const auto& env : report.envelopes) row.push_back(num(env[i]));
    row.push_back(num(report.expected[i]));
    row.push_back(report.closed_form ? num((*report.closed_form)[i]) : "");
    t.add(row);
  }
  return t.str();
}

std::string ensemble_summary_csv(const EnsembleStats& stats) {
  std::vector<std::string> header{"t", "mean", "q50", "q90", "q95", "q99"};
  for (double d : stats.deltas) header.push_back("env_" + delta_label(d));
  for (double d : stats.deltas) header.push_back("exceed_" + delta_label(d));
  header.push_back("mgf_stat");
  header.push_back("expected_bound");
  Table t(header);
  for (const auto& cs : stats.checkpoints) {
    std::vector<std::string> row{integer(cs.t), num(cs.mean), num(cs.q50),
                                 num(cs.q90), num(cs.q95), num(cs.q99)};
    const bool bounded = stats.bounds.has_value();
    for (std::size_t j = 0; j < stats.deltas.size(); ++j) {
      row.push_back(bounded ? num(cs.envelope[j]) : "");
    }
    for (std::size_t j = 0; j < stats.deltas.size(); ++j) {
      row.push_back(bounded ? integer(cs.exceed[j]) : "");
    }
    row.push_back(bounded ? num(cs.mgf_stat) : "");
    row.push_back(bounded ? num(cs.expected_bound) : "");
    t.add(row);
  }
  return t.str();
}

std::string mean_gap_csv(const EnsembleStats& stats) {
  Table t({"t", "mean"});
  for (std::size_t i = 0; i < stats.mean_gap.size(); ++i) {
    t.add({integer(i), num(stats.mean_gap[i])});
  }
  return t.str();
}

std::string coupled_csv(const CoupledStats& stats) {
  Table t({"t", "delta_mean", "delta_max", "violations"});
  for (std::size_t i = 0; i < stats.delta_mean.size(); ++i) {
    t.add({integer(i), num(stats.delta_mean[i]), num(stats.delta_max[i]),
           integer(stats.violations[i])});
  }
  return t.str();
}

std::string risk_csv(const std::vector<RiskReport>& reports) {
  Table t({"multiplier", "T", "c", "F_est", "f_est", "gap", "conv_bound",
           "gen_bound", "combined_bound", "exceed_frac"});
  for (const auto& r : reports) {
    t.add({num(r.multiplier), integer(r.T), num(r.c), num(r.F_est),
           num(r.f_est), num(r.gap), num(r.conv_bound), num(r.gen_bound),
           num(r.combined_bound), num(r.exceed_frac)});
  }
  return t.str();
}

std::string projected_csv(const ProjectedRun& run) {
  Table t({"t", "x", "y", "value"});
  for (std::size_t i = 0; i < run.iterates.size(); ++i) {
    t.add({integer(i), num(run.iterates[i][0]), num(run.iterates[i][1]),
           num(run.values[i])});
  }
  return t.str();
}

}  // namespace plsgd
