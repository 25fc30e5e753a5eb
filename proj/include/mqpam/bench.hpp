#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <iomanip>
#include <istream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "mqpam/dense.hpp"
#include "mqpam/solver.hpp"
#include "mqpam/spca.hpp"
#include "mqpam/stiefel.hpp"

namespace mqpam::bench {

/// Solve hook used by the harness; defaults to MQPAM with the l1 prox.
using SolveFn = std::function<SolveResult(const SpcaInstance&, const StiefelPoint& x0,
                                          const SolverConfig&)>;

inline SolveResult solve_spca(const SpcaInstance& inst, const StiefelPoint& x0,
                              const SolverConfig& config) {
  const SmoothProblem problem = make_smooth_problem(inst);
  return solve(problem, Regularizer::l1(), x0, initial_y(x0, config), config);
}

struct ExperimentConfig {
  std::vector<int> n_values{300, 500};
  std::vector<int> p_values{50, 100};
  std::optional<int> m;  // rows of A; empty means m = n
  std::vector<double> mu_values{1e-10, 1e-8, 1e-6, 1e-4, 1e-2};
  int repeats = 50;
  std::uint64_t base_seed = 0;
  SolverConfig solver{};
  int threads = 1;
  SolveFn solve = solve_spca;

  void validate() const {
    if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
    if (m && *m < 1) throw std::invalid_argument("m must be >= 1");
    if (n_values.empty() || p_values.empty() || mu_values.empty())
      throw std::invalid_argument("n, p and mu lists must be non-empty");
    for (int n : n_values)
      for (int p : p_values)
        if (p < 1 || n < p)
          throw std::invalid_argument("every (n, p) pair must satisfy n >= p >= 1");
    for (double mu : mu_values)
      if (!(mu > 0.0)) throw std::invalid_argument("mu values must be positive");
    solver.validate();
  }
};

struct ExperimentRecord {
  double mu = 0.0;
  int n = 0;  // 0 marks a per-mu average row
  int p = 0;
  double obj_mean = 0.0;
  double err_mean = 0.0;
  double cpu_mean_seconds = 0.0;
  double sparsity_mean = 0.0;
  double sparsity_x_thresholded_mean = 0.0;
  double obj_y_mean = 0.0;
  int repeats = 0;
  int relative_change_stops = 0;  // runs that ended on the relative-change rule
  double max_rel_change = 0.0;
};

struct SweepResult {
  std::vector<ExperimentRecord> cells;     // mu-major, then n, then p
  std::vector<ExperimentRecord> averages;  // one per mu
};

/// splitmix64 finalizer; a bijection on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Packs (n, p, mu index, repeat) into disjoint bit fields and mixes with the
/// base seed. Injective in the tuple for a fixed base seed.
inline std::uint64_t run_seed(std::uint64_t base_seed, int n, int p, int mu_index,
                              int repeat) {
  if (n < 0 || n >= (1 << 22) || p < 0 || p >= (1 << 18) || mu_index < 0 ||
      mu_index >= (1 << 8) || repeat < 0 || repeat >= (1 << 16))
    throw std::out_of_range("run_seed: (n, p, mu index, repeat) exceeds the packed range");
  const std::uint64_t packed = (static_cast<std::uint64_t>(n) << 42) |
                               (static_cast<std::uint64_t>(p) << 24) |
                               (static_cast<std::uint64_t>(mu_index) << 16) |
                               static_cast<std::uint64_t>(repeat);
  return mix64(base_seed + packed);
}

inline std::uint64_t start_point_seed(std::uint64_t run_seed_value) {
  return mix64(run_seed_value ^ 0x5851f42d4c957f2dULL);
}

struct RunMetrics {
  double obj = 0.0;
  double err = 0.0;
  double cpu_seconds = 0.0;
  double sparsity_y = 0.0;
  double sparsity_x = 0.0;
  double obj_y = 0.0;
  bool relative_change_stop = false;
};

class CellError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  const int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

/// One seeded SPCA run. Timing covers the solve call only.
inline RunMetrics run_once(const ExperimentConfig& cfg, int n, int p, double mu,
                           std::uint64_t seed) {
  const int m = cfg.m.value_or(n);
  const SpcaInstance inst = build_instance(m, n, p, mu, seed);
  const StiefelPoint x0 = random_point(n, p, start_point_seed(seed));

  const auto start = std::chrono::steady_clock::now();
  const SolveResult res = cfg.solve(inst, x0, cfg.solver);
  const auto stop = std::chrono::steady_clock::now();

  RunMetrics out;
  out.obj = spca_objective(inst, res.x_final.value());
  out.err = res.rel_change_final;
  out.cpu_seconds = std::chrono::duration<double>(stop - start).count();
  out.sparsity_y = sparsity(res.y_final);
  out.sparsity_x = thresholded_sparsity(res.x_final.value());
  out.obj_y = spca_objective(inst, res.y_final);
  out.relative_change_stop = res.termination == Termination::kRelativeChange;
  return out;
}

/// Averages `repeats` seeded runs of one (n, p, mu) cell. Runs may execute
/// concurrently; accumulation is in repeat order.
inline ExperimentRecord run_cell(const ExperimentConfig& cfg, int n, int p, int mu_index) {
  cfg.validate();
  if (mu_index < 0 || mu_index >= static_cast<int>(cfg.mu_values.size()))
    throw std::out_of_range("run_cell: mu index out of range");
  const double mu = cfg.mu_values[static_cast<std::size_t>(mu_index)];

  std::vector<RunMetrics> runs(static_cast<std::size_t>(cfg.repeats));
  detail::parallel_for(cfg.repeats, cfg.threads, [&](int r) {
    const std::uint64_t seed = run_seed(cfg.base_seed, n, p, mu_index, r);
    try {
      runs[static_cast<std::size_t>(r)] = run_once(cfg, n, p, mu, seed);
    } catch (const std::exception& e) {
      throw CellError("cell (n=" + std::to_string(n) + ", p=" + std::to_string(p) +
                      ", mu=" + detail::format_real(mu) + ", repeat=" + std::to_string(r) +
                      ", seed=" + std::to_string(seed) + ") failed: " + e.what());
    }
  });

  ExperimentRecord rec;
  rec.mu = mu;
  rec.n = n;
  rec.p = p;
  rec.repeats = cfg.repeats;
  for (const RunMetrics& run : runs) {
    rec.obj_mean += run.obj;
    rec.err_mean += run.err;
    rec.cpu_mean_seconds += run.cpu_seconds;
    rec.sparsity_mean += run.sparsity_y;
    rec.sparsity_x_thresholded_mean += run.sparsity_x;
    rec.obj_y_mean += run.obj_y;
    rec.relative_change_stops += run.relative_change_stop ? 1 : 0;
    rec.max_rel_change = std::max(rec.max_rel_change, run.err);
  }
  const double k = static_cast<double>(cfg.repeats);
  rec.obj_mean /= k;
  rec.err_mean /= k;
  rec.cpu_mean_seconds /= k;
  rec.sparsity_mean /= k;
  rec.sparsity_x_thresholded_mean /= k;
  rec.obj_y_mean /= k;
  return rec;
}

inline ExperimentRecord average_of(const std::vector<ExperimentRecord>& cells, double mu) {
  ExperimentRecord avg;
  avg.mu = mu;
  if (cells.empty()) return avg;
  for (const auto& c : cells) {
    avg.obj_mean += c.obj_mean;
    avg.err_mean += c.err_mean;
    avg.cpu_mean_seconds += c.cpu_mean_seconds;
    avg.sparsity_mean += c.sparsity_mean;
    avg.sparsity_x_thresholded_mean += c.sparsity_x_thresholded_mean;
    avg.obj_y_mean += c.obj_y_mean;
    avg.repeats += c.repeats;
    avg.relative_change_stops += c.relative_change_stops;
    avg.max_rel_change = std::max(avg.max_rel_change, c.max_rel_change);
  }
  const double k = static_cast<double>(cells.size());
  avg.obj_mean /= k;
  avg.err_mean /= k;
  avg.cpu_mean_seconds /= k;
  avg.sparsity_mean /= k;
  avg.sparsity_x_thresholded_mean /= k;
  avg.obj_y_mean /= k;
  return avg;
}

/// Every (mu, n, p) cell in mu-major order plus one average row per mu.
inline SweepResult run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  SweepResult out;
  for (std::size_t mi = 0; mi < cfg.mu_values.size(); ++mi) {
    std::vector<ExperimentRecord> block;
    for (int n : cfg.n_values)
      for (int p : cfg.p_values) block.push_back(run_cell(cfg, n, p, static_cast<int>(mi)));
    out.averages.push_back(average_of(block, cfg.mu_values[mi]));
    out.cells.insert(out.cells.end(), block.begin(), block.end());
  }
  return out;
}

inline constexpr const char* kCsvHeader =
    "mu,n,p,obj,err,cpu_s,sparsity_y,sparsity_x_thresh,obj_y,repeats";

inline void emit_csv(const std::vector<ExperimentRecord>& records, std::ostream& os) {
  using detail::format_real;
  os << kCsvHeader << '\n';
  for (const auto& r : records) {
    os << format_real(r.mu) << ',' << r.n << ',' << r.p << ',' << format_real(r.obj_mean)
       << ',' << format_real(r.err_mean) << ',' << format_real(r.cpu_mean_seconds) << ','
       << format_real(r.sparsity_mean) << ',' << format_real(r.sparsity_x_thresholded_mean)
       << ',' << format_real(r.obj_y_mean) << ',' << r.repeats << '\n';
  }
  if (!os) throw std::runtime_error("emit_csv: write failed");
}

inline std::vector<ExperimentRecord> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader)
    throw std::runtime_error("read_csv: missing or unexpected header");
  std::vector<ExperimentRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() != 10) throw std::runtime_error("read_csv: expected 10 fields");
    ExperimentRecord r;
    r.mu = std::stod(fields[0]);
    r.n = std::stoi(fields[1]);
    r.p = std::stoi(fields[2]);
    r.obj_mean = std::stod(fields[3]);
    r.err_mean = std::stod(fields[4]);
    r.cpu_mean_seconds = std::stod(fields[5]);
    r.sparsity_mean = std::stod(fields[6]);
    r.sparsity_x_thresholded_mean = std::stod(fields[7]);
    r.obj_y_mean = std::stod(fields[8]);
    r.repeats = std::stoi(fields[9]);
    out.push_back(r);
  }
  return out;
}

/// Aligned text table in the layout of the published results: one block per
/// mu followed by its average row.
inline void emit_table(const SweepResult& sweep, std::ostream& os) {
  auto row = [&os](const std::string& mu, const std::string& np, const ExperimentRecord& r) {
    os << std::left << std::setw(10) << mu << std::setw(10) << np << std::right
       << std::fixed << std::setprecision(4) << std::setw(11) << r.obj_mean
       << std::setw(10) << r.err_mean << std::setw(10) << r.cpu_mean_seconds
       << std::setw(10) << r.sparsity_mean << std::setw(10)
       << r.sparsity_x_thresholded_mean << std::setw(11) << r.obj_y_mean << '\n';
    os.unsetf(std::ios::fixed);
  };
  os << std::left << std::setw(10) << "mu" << std::setw(10) << "n/p" << std::right
     << std::setw(11) << "Obj" << std::setw(10) << "Err" << std::setw(10) << "CPU"
     << std::setw(10) << "Spar" << std::setw(10) << "SparX" << std::setw(11) << "ObjY"
     << '\n';
  if (sweep.averages.empty()) return;
  const std::size_t block = sweep.cells.size() / sweep.averages.size();
  for (std::size_t b = 0; b < sweep.averages.size(); ++b) {
    for (std::size_t i = 0; i < block; ++i) {
      const auto& c = sweep.cells[b * block + i];
      row(i == 0 ? detail::format_real(c.mu) : "",
          std::to_string(c.n) + "/" + std::to_string(c.p), c);
    }
    row("", "Average", sweep.averages[b]);
  }
}

}  // namespace mqpam::bench
