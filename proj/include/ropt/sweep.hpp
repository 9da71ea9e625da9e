#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ropt/sim.hpp"

namespace ropt {

/// Shortest round-trip decimal for a double; infinities and NaN get the
/// fixed spellings "inf"/"-inf"/"nan" so CSV output is byte-stable.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0.0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("parse_double: bad number '" + s + "'");
  return v;
}

struct SweepSpec {
  std::vector<PlannerKind> planners{PlannerKind::Ropt, PlannerKind::Iidm,
                                    PlannerKind::PredictiveIidm};
  std::vector<double> lambdas{2.0, 3.5, 5.0};
  std::vector<double> politeness{0.5, 1.0, 4.0};       // IDM-family param axis
  std::vector<double> distance_weights{0.1, 1.0, 10.0};  // EUR/km, risk planner axis
  int runs_per_cell = 50;
  std::uint64_t base_seed = 1;
};

inline std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t h = 14695981039346656037ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

/// Stable per-episode seed: base seed plus a hash of the traffic-relevant
/// coordinates (lambda) plus the run index. Planner and behavior parameter
/// are deliberately left out so every cell at the same lambda replays the
/// same traffic realizations (common random numbers); cell comparisons then
/// differ only by planner behavior, not by sampling noise. Independent of
/// sweep ordering and worker count, and adding a cell never changes the
/// seeds of existing cells.
inline std::uint64_t episode_seed(std::uint64_t base, PlannerKind planner, double lambda,
                                  double param, int run) {
  (void)planner;
  (void)param;
  std::uint64_t h = fnv1a64(&lambda, sizeof(lambda));
  return base + h + static_cast<std::uint64_t>(run);
}

inline const std::vector<double>& param_axis(const SweepSpec& spec, PlannerKind k) {
  return k == PlannerKind::Ropt ? spec.distance_weights : spec.politeness;
}

inline int default_worker_count() {
  if (const char* env = std::getenv("ROPTSIM_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return std::min(n, 64);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 4 : static_cast<int>(std::min(hw, 16u));
}

/// Runs every (planner, lambda, param, run) episode of the sweep. Tasks fan
/// out over a worker pool; results land in a pre-sized vector indexed by
/// task, so the output order and content are independent of scheduling.
inline std::vector<EpisodeRecord> run_sweep(const Scenario& sc, const SweepSpec& spec,
                                            int workers = 0) {
  struct Task {
    PlannerKind planner;
    double lambda;
    double param;
    int run;
  };
  std::vector<Task> tasks;
  for (const PlannerKind planner : spec.planners)
    for (const double lambda : spec.lambdas)
      for (const double param : param_axis(spec, planner))
        for (int run = 0; run < spec.runs_per_cell; ++run)
          tasks.push_back({planner, lambda, param, run});

  std::vector<EpisodeRecord> records(tasks.size());
  if (workers <= 0) workers = default_worker_count();
  workers = std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));

  std::atomic<std::size_t> cursor{0};
  auto work = [&] {
    while (true) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& task = tasks[i];
      const std::uint64_t seed =
          episode_seed(spec.base_seed, task.planner, task.lambda, task.param, task.run);
      records[i] = run_episode(sc, task.planner, task.lambda, task.param, seed);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return records;
}

struct CellStats {
  PlannerKind planner = PlannerKind::Ropt;
  double lambda = 0.0;
  double param = 0.0;
  int runs = 0;
  int merged = 0;
  int crashes = 0;
  int starved = 0;
  int planner_errors = 0;
  double crash_rate = 0.0;
  // distance indicators and the taken-gap size are over merged, crash-free
  // runs; the missed-gap count averages over every completed run, because a
  // run that waits out the clock has declined every gap it saw. Empty sets
  // yield NaN (or +inf for the lower bound).
  double d_back_min_mean = std::numeric_limits<double>::quiet_NaN();
  double d_back_min_lower = std::numeric_limits<double>::infinity();
  double d_front_min_mean = std::numeric_limits<double>::quiet_NaN();
  double n_gap_mean = std::numeric_limits<double>::quiet_NaN();
  double t_gap_mean = std::numeric_limits<double>::quiet_NaN();
};

/// Groups episode records into per-cell statistics, preserving first-seen
/// cell order.
inline std::vector<CellStats> aggregate(const std::vector<EpisodeRecord>& records) {
  std::vector<CellStats> cells;
  auto find_cell = [&](const EpisodeRecord& r) -> CellStats& {
    for (auto& c : cells)
      if (c.planner == r.planner && c.lambda == r.lambda && c.param == r.param) return c;
    CellStats c;
    c.planner = r.planner;
    c.lambda = r.lambda;
    c.param = r.param;
    cells.push_back(c);
    return cells.back();
  };

  struct Accum {
    double back_sum = 0.0;
    int back_n = 0;
    double front_sum = 0.0;
    int front_n = 0;
    double gap_sum = 0.0;
    int gap_n = 0;
    double tgap_sum = 0.0;
    int tgap_n = 0;
  };
  std::vector<Accum> accums;

  for (const auto& r : records) {
    CellStats& c = find_cell(r);
    const std::size_t idx = &c - cells.data();
    if (accums.size() <= idx) accums.resize(idx + 1);
    Accum& a = accums[idx];

    ++c.runs;
    switch (r.status) {
      case EpisodeStatus::Merged: ++c.merged; break;
      case EpisodeStatus::Crash: ++c.crashes; break;
      case EpisodeStatus::Starved: ++c.starved; break;
      case EpisodeStatus::PlannerError: ++c.planner_errors; break;
    }
    if (r.status != EpisodeStatus::PlannerError) {
      a.gap_sum += r.n_gap;
      ++a.gap_n;
    }
    if (r.merged && !r.crash) {
      if (std::isfinite(r.d_back_min)) {
        a.back_sum += r.d_back_min;
        ++a.back_n;
        c.d_back_min_lower = std::min(c.d_back_min_lower, r.d_back_min);
      }
      if (std::isfinite(r.d_front_min)) {
        a.front_sum += r.d_front_min;
        ++a.front_n;
      }
      if (std::isfinite(r.t_gap)) {
        a.tgap_sum += r.t_gap;
        ++a.tgap_n;
      }
    }
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    CellStats& c = cells[i];
    const Accum& a = accums[i];
    c.crash_rate = c.runs > 0 ? static_cast<double>(c.crashes) / c.runs : 0.0;
    if (a.back_n > 0) c.d_back_min_mean = a.back_sum / a.back_n;
    if (a.front_n > 0) c.d_front_min_mean = a.front_sum / a.front_n;
    if (a.gap_n > 0) c.n_gap_mean = a.gap_sum / a.gap_n;
    if (a.tgap_n > 0) c.t_gap_mean = a.tgap_sum / a.tgap_n;
  }
  return cells;
}

inline void write_episode_csv(std::ostream& os, const std::vector<EpisodeRecord>& records) {
  os << "seed,planner,lambda,param,merged,crash,d_back_min,d_front_min,n_gap,t_gap,status\n";
  for (const auto& r : records) {
    os << r.seed << ',' << planner_name(r.planner) << ',' << format_double(r.lambda) << ','
       << format_double(r.param) << ',' << (r.merged ? 1 : 0) << ',' << (r.crash ? 1 : 0) << ','
       << format_double(r.d_back_min) << ',' << format_double(r.d_front_min) << ',' << r.n_gap
       << ',' << format_double(r.t_gap) << ',' << status_name(r.status) << '\n';
  }
}

inline std::vector<EpisodeRecord> read_episode_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("read_episode_csv: empty input");
  std::vector<EpisodeRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) f.push_back(tok);
    if (f.size() != 11) throw std::invalid_argument("read_episode_csv: bad row '" + line + "'");
    EpisodeRecord r;
    r.seed = std::stoull(f[0]);
    const auto kind = planner_from_name(f[1]);
    if (!kind) throw std::invalid_argument("read_episode_csv: bad planner '" + f[1] + "'");
    r.planner = *kind;
    r.lambda = parse_double(f[2]);
    r.param = parse_double(f[3]);
    r.merged = f[4] == "1";
    r.crash = f[5] == "1";
    r.d_back_min = parse_double(f[6]);
    r.d_front_min = parse_double(f[7]);
    r.n_gap = std::stoi(f[8]);
    r.t_gap = parse_double(f[9]);
    if (f[10] == "merged") r.status = EpisodeStatus::Merged;
    else if (f[10] == "crash") r.status = EpisodeStatus::Crash;
    else if (f[10] == "starved") r.status = EpisodeStatus::Starved;
    else if (f[10] == "planner_error") r.status = EpisodeStatus::PlannerError;
    else throw std::invalid_argument("read_episode_csv: bad status '" + f[10] + "'");
    out.push_back(r);
  }
  return out;
}

inline void write_cell_csv(std::ostream& os, const std::vector<CellStats>& cells) {
  os << "planner,lambda,param,runs,merged,crashes,starved,planner_errors,crash_rate,"
        "d_back_min_mean,d_back_min_lower,d_front_min_mean,n_gap_mean,t_gap_mean\n";
  for (const auto& c : cells) {
    os << planner_name(c.planner) << ',' << format_double(c.lambda) << ','
       << format_double(c.param) << ',' << c.runs << ',' << c.merged << ',' << c.crashes << ','
       << c.starved << ',' << c.planner_errors << ',' << format_double(c.crash_rate) << ','
       << format_double(c.d_back_min_mean) << ',' << format_double(c.d_back_min_lower) << ','
       << format_double(c.d_front_min_mean) << ',' << format_double(c.n_gap_mean) << ','
       << format_double(c.t_gap_mean) << '\n';
  }
}

/// Long-format table of the safety-distance indicators, one row per
/// (indicator, cell), ready for plotting.
inline void write_risk_indicator_csv(std::ostream& os, const std::vector<CellStats>& cells) {
  os << "indicator,planner,lambda,param,value\n";
  const auto row = [&os](const char* name, const CellStats& c, double v) {
    os << name << ',' << planner_name(c.planner) << ',' << format_double(c.lambda) << ','
       << format_double(c.param) << ',' << format_double(v) << '\n';
  };
  for (const auto& c : cells) row("d_back_min_mean", c, c.d_back_min_mean);
  for (const auto& c : cells)
    row("d_back_min_lower", c,
        std::isfinite(c.d_back_min_lower) ? c.d_back_min_lower
                                          : std::numeric_limits<double>::quiet_NaN());
  for (const auto& c : cells) row("d_front_min_mean", c, c.d_front_min_mean);
}

/// Long-format table of the waiting-utility indicators.
inline void write_utility_indicator_csv(std::ostream& os, const std::vector<CellStats>& cells) {
  os << "indicator,planner,lambda,param,value\n";
  const auto row = [&os](const char* name, const CellStats& c, double v) {
    os << name << ',' << planner_name(c.planner) << ',' << format_double(c.lambda) << ','
       << format_double(c.param) << ',' << format_double(v) << '\n';
  };
  for (const auto& c : cells) row("n_gap_mean", c, c.n_gap_mean);
  for (const auto& c : cells) row("t_gap_mean", c, c.t_gap_mean);
}

/// Spearman rank correlation with average ranks for ties. Returns NaN for
/// fewer than two points or when either side is constant.
inline double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("spearman: size mismatch");
  const std::size_t n = xs.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const auto ranks = [n](const std::vector<double>& v) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = 0.5 * (i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(xs);
  const auto ry = ranks(ys);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace ropt
