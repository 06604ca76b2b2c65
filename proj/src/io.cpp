#include "kerr/io.hpp"

#include <boost/crc.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iterator>

namespace kerr::io {

namespace fs = std::filesystem;
using nlohmann::json;

ModelParams RunConfig::model() const {
  ModelParams p;
  p.kerr_K = kerr_K;
  p.xi = xi;
  p.n_eff = n_eff;
  p.dim_N = dim_N;
  p.sign = sign;
  return p;
}

void to_json(json& j, const RunConfig& c) {
  j = json{
      {"format", c.format},
      {"command", c.command},
      {"output_dir", c.output_dir},
      {"jobs", c.jobs},
      {"model",
       {{"kerr_K", c.kerr_K}, {"n_eff", c.n_eff}, {"dim_N", c.dim_N}, {"sign", std::string(to_string(c.sign))},
        {"xi", c.xi}}},
      {"spectrum", {{"xi_grid", c.xi_grid}, {"levels", c.levels}, {"pairs", c.pairs}}},
      {"eigenstates",
       {{"dos_bins", c.dos_bins},
        {"indices", c.eigenstates},
        {"husimi_near_esqpt", c.husimi_near_esqpt},
        {"husimi_samples", c.husimi_samples}}},
      {"evolve",
       {{"states", c.states},
        {"points", c.points},
        {"t_max", c.t_max},
        {"t_samples", c.t_samples},
        {"t_log_samples", c.t_log_samples},
        {"t_log_min", c.t_log_min},
        {"t_log_max", c.t_log_max},
        {"snapshot_times", c.snapshot_times},
        {"entropy", c.entropy}}},
      {"classical",
       {{"K_cl", c.K_cl},
        {"xi_cl", c.xi_cl},
        {"energies", c.energies},
        {"contour_samples", c.contour_samples},
        {"separatrix_samples", c.separatrix_samples},
        {"trajectory_starts", c.trajectory_starts},
        {"trajectory_t", c.trajectory_t},
        {"trajectory_dt", c.trajectory_dt}}},
      {"map_params",
       {{"g3", c.micro.g3}, {"g4", c.micro.g4}, {"omega_d", c.micro.omega_d}, {"Omega_d", c.micro.Omega_d}}},
  };
}

namespace {

template <class T>
void read(const json& j, const char* section, const char* key, T& out) {
  const json* node = &j;
  if (section) {
    if (!j.contains(section)) return;
    node = &j.at(section);
  }
  if (node->contains(key)) node->at(key).get_to(out);
}

}  // namespace

void from_json(const json& j, RunConfig& c) {
  c = RunConfig{};
  try {
    read(j, nullptr, "format", c.format);
    if (c.format != kFormat) throw UsageError("unsupported config format '" + c.format + "'");
    read(j, nullptr, "command", c.command);
    read(j, nullptr, "output_dir", c.output_dir);
    read(j, nullptr, "jobs", c.jobs);
    read(j, "model", "kerr_K", c.kerr_K);
    read(j, "model", "n_eff", c.n_eff);
    read(j, "model", "dim_N", c.dim_N);
    read(j, "model", "xi", c.xi);
    std::string sign(to_string(c.sign));
    read(j, "model", "sign", sign);
    c.sign = sign_convention_from_string(sign);
    read(j, "spectrum", "xi_grid", c.xi_grid);
    read(j, "spectrum", "levels", c.levels);
    read(j, "spectrum", "pairs", c.pairs);
    read(j, "eigenstates", "dos_bins", c.dos_bins);
    read(j, "eigenstates", "indices", c.eigenstates);
    read(j, "eigenstates", "husimi_near_esqpt", c.husimi_near_esqpt);
    read(j, "eigenstates", "husimi_samples", c.husimi_samples);
    read(j, "evolve", "states", c.states);
    read(j, "evolve", "points", c.points);
    read(j, "evolve", "t_max", c.t_max);
    read(j, "evolve", "t_samples", c.t_samples);
    read(j, "evolve", "t_log_samples", c.t_log_samples);
    read(j, "evolve", "t_log_min", c.t_log_min);
    read(j, "evolve", "t_log_max", c.t_log_max);
    read(j, "evolve", "snapshot_times", c.snapshot_times);
    read(j, "evolve", "entropy", c.entropy);
    read(j, "classical", "K_cl", c.K_cl);
    read(j, "classical", "xi_cl", c.xi_cl);
    read(j, "classical", "energies", c.energies);
    read(j, "classical", "contour_samples", c.contour_samples);
    read(j, "classical", "separatrix_samples", c.separatrix_samples);
    read(j, "classical", "trajectory_starts", c.trajectory_starts);
    read(j, "classical", "trajectory_t", c.trajectory_t);
    read(j, "classical", "trajectory_dt", c.trajectory_dt);
    read(j, "map_params", "g3", c.micro.g3);
    read(j, "map_params", "g4", c.micro.g4);
    read(j, "map_params", "omega_d", c.micro.omega_d);
    read(j, "map_params", "Omega_d", c.micro.Omega_d);
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed config: ") + e.what());
  } catch (const InvalidParams& e) {
    throw UsageError(e.what());
  }
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UsageError("config file is not valid JSON: " + std::string(e.what()));
  }
  return j.get<RunConfig>();
}

void save_config(const RunConfig& c, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << json(c).dump(2) << '\n';
}

json to_json(const fock::ConvergenceReport& r) {
  return json{{"quantity", r.quantity},
              {"dim_N", r.dim_N},
              {"dim_probe", r.dim_probe},
              {"max_drift", r.max_drift},
              {"converged", r.converged}};
}

std::string crc32_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  boost::crc_32_type crc;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    crc.process_bytes(buf, static_cast<std::size_t>(in.gcount()));
  }
  char hex[9];
  std::snprintf(hex, sizeof hex, "%08x", crc.checksum());
  return hex;
}

void RunManifest::add_output(const fs::path& run_dir, const std::string& file) {
  const fs::path full = run_dir / file;
  outputs.push_back({file, crc32_file(full), fs::file_size(full)});
}

json RunManifest::to_json() const {
  json outs = json::array();
  for (const auto& o : outputs) outs.push_back({{"file", o.file}, {"crc32", o.crc32}, {"bytes", o.bytes}});
  return json{{"format", kFormat},
              {"tool_version", kToolVersion},
              {"status", status},
              {"started_at", started_at},
              {"wall_clock_seconds", wall_clock_seconds},
              {"config", json(config)},
              {"outputs", outs},
              {"convergence", convergence},
              {"notes", notes}};
}

void RunManifest::write(const fs::path& run_dir) const {
  std::ofstream out(run_dir / "manifest.json");
  if (!out) throw Error("cannot write manifest in " + run_dir.string());
  out << to_json().dump(2) << '\n';
}

std::vector<std::string> verify_manifest(const fs::path& run_dir) {
  std::ifstream in(run_dir / "manifest.json");
  if (!in) return {"manifest.json"};
  const json j = json::parse(in);
  std::vector<std::string> bad;
  for (const auto& o : j.at("outputs")) {
    const std::string file = o.at("file");
    const fs::path full = run_dir / file;
    if (!fs::exists(full) || crc32_file(full) != o.at("crc32").get<std::string>()) bad.push_back(file);
  }
  return bad;
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> units_comment(SignConvention sign, const std::string& extra) {
  std::vector<std::string> c = {"units: energy in K, time in 1/K; sign_convention=" + std::string(to_string(sign))};
  if (!extra.empty()) c.push_back(extra);
  return c;
}

CsvWriter::CsvWriter(const fs::path& path, const std::vector<std::string>& comments,
                     const std::vector<std::string>& columns) {
  f_ = std::fopen(path.string().c_str(), "wb");
  if (!f_) throw Error("cannot write " + path.string());
  for (const auto& c : comments) std::fprintf(f_, "# %s\n", c.c_str());
  for (std::size_t i = 0; i < columns.size(); ++i) std::fprintf(f_, i ? ",%s" : "%s", columns[i].c_str());
  std::fputc('\n', f_);
}

CsvWriter::~CsvWriter() {
  if (f_) std::fclose(f_);
}

CsvWriter& CsvWriter::cell(double v) { return cell(format_real(v)); }

CsvWriter& CsvWriter::cell(Index v) { return cell(std::to_string(v)); }

CsvWriter& CsvWriter::cell(const std::string& v) {
  if (!first_) std::fputc(',', f_);
  std::fputs(v.c_str(), f_);
  first_ = false;
  return *this;
}

void CsvWriter::end_row() {
  std::fputc('\n', f_);
  first_ = true;
}

void CsvWriter::close() {
  if (f_) {
    std::fclose(f_);
    f_ = nullptr;
  }
}

}  // namespace kerr::io
