#pragma once

#include "kerr/errors.hpp"
#include "kerr/fock.hpp"
#include "kerr/types.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <atomic>
#include <exception>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace kerr::io {

inline constexpr const char* kFormat = "kerr-esqpt/1";
inline constexpr const char* kToolVersion = "1.0.0";

/// Malformed invocation or configuration (exit code 64).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Everything a subcommand needs. Every field has a default, so a config file
/// may list any subset; CLI flags override file values.
struct RunConfig {
  std::string format = kFormat;
  std::string command;
  std::string output_dir = "out";
  int jobs = 1;

  // model
  double kerr_K = 1.0;
  double n_eff = 1.0;
  Index dim_N = 900;
  SignConvention sign = SignConvention::main_text;
  double xi = 180.0;

  // spectrum
  std::vector<double> xi_grid;
  Index levels = 8;
  Index pairs = 4;

  // eigenstates
  Index dos_bins = 0;
  std::vector<Index> eigenstates;
  bool husimi_near_esqpt = true;
  Index husimi_samples = 161;

  // evolve
  std::vector<std::string> states;
  std::vector<std::array<double, 2>> points;
  double t_max = 0.15;
  Index t_samples = 2000;
  Index t_log_samples = 200;
  double t_log_min = 1e-5;
  double t_log_max = 1e-3;
  std::vector<double> snapshot_times;
  bool entropy = true;

  // classical
  double K_cl = 1.0;
  double xi_cl = 180.0;
  std::vector<double> energies;
  Index contour_samples = 720;
  Index separatrix_samples = 720;
  std::vector<std::array<double, 2>> trajectory_starts;
  double trajectory_t = 0.15;
  double trajectory_dt = 0.0;  // 0: 1e-3 / (K_cl max(1, xi_cl))

  // map-params
  MicroscopicParams micro;

  ModelParams model() const;
  ModelParams model_at(double x) const { return model().with_xi(x); }
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

RunConfig load_config(const std::filesystem::path& path);
void save_config(const RunConfig& c, const std::filesystem::path& path);

nlohmann::json to_json(const fock::ConvergenceReport& r);

/// IEEE CRC-32 of a file's bytes, as 8 lowercase hex digits.
std::string crc32_file(const std::filesystem::path& path);

struct OutputRecord {
  std::string file;  // relative to the run directory
  std::string crc32;
  std::uintmax_t bytes = 0;
};

/// Run bookkeeping; the orchestrator records each file after closing it.
struct RunManifest {
  RunConfig config;
  std::string started_at;
  double wall_clock_seconds = 0.0;
  std::vector<OutputRecord> outputs;
  std::vector<nlohmann::json> convergence;
  std::vector<std::string> notes;
  std::string status = "ok";

  void add_output(const std::filesystem::path& run_dir, const std::string& file);
  nlohmann::json to_json() const;
  /// Writes manifest.json into run_dir.
  void write(const std::filesystem::path& run_dir) const;
};

/// Re-reads manifest.json and checks every listed file against its checksum.
/// Returns the names of missing or mismatching files.
std::vector<std::string> verify_manifest(const std::filesystem::path& run_dir);

/// Comma-separated table with '#' comment lines for units and convention.
/// Reals are written with 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& comments,
            const std::vector<std::string>& columns);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  CsvWriter& cell(double v);
  CsvWriter& cell(Index v);
  CsvWriter& cell(int v) { return cell(static_cast<Index>(v)); }
  CsvWriter& cell(const std::string& v);
  void end_row();
  void close();

 private:
  std::FILE* f_ = nullptr;
  bool first_ = true;
};

std::string format_real(double v);

/// Standard header comment: units plus sign convention.
std::vector<std::string> units_comment(SignConvention sign, const std::string& extra = {});

/// Evaluates fn(0..n-1) on up to `jobs` threads; results come back in index
/// order. The first exception (by index) is rethrown after all workers join.
template <class R>
std::vector<R> parallel_map(std::size_t n, int jobs, const std::function<R(std::size_t)>& fn) {
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace kerr::io
