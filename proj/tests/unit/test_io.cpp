#include "doctest.h"

#include "kerr/classical.hpp"
#include "kerr/commands.hpp"
#include "kerr/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <unistd.h>

using namespace kerr;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("kerr_io_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

io::RunConfig small_spectrum(const fs::path& out) {
  io::RunConfig c;
  c.command = "spectrum";
  c.output_dir = out.string();
  c.dim_N = 60;
  c.xi_grid = {0.0, 1.0, 2.5, 4.0};
  c.levels = 6;
  c.pairs = 2;
  return c;
}

}  // namespace

TEST_CASE("run config round trip") {
  io::RunConfig c;
  c.command = "evolve";
  c.xi = 42.5;
  c.dim_N = 333;
  c.sign = SignConvention::lab_frame;
  c.states = {"O", "D"};
  c.points = {{1.5, -2.0}};
  c.snapshot_times = {0.0, 0.01};
  c.entropy = false;
  c.micro.g3 = 0.25;
  nlohmann::json j = c;
  const io::RunConfig back = j.get<io::RunConfig>();
  CHECK(nlohmann::json(back) == j);
  CHECK(back.xi == 42.5);
  CHECK(back.sign == SignConvention::lab_frame);
  CHECK(back.points[0][1] == -2.0);

  // Partial configs fill in defaults.
  const auto partial = nlohmann::json::parse(R"({"format":"kerr-esqpt/1","model":{"xi":7}})").get<io::RunConfig>();
  CHECK(partial.xi == 7.0);
  CHECK(partial.dim_N == 900);
  CHECK(partial.t_samples == 2000);
  CHECK_THROWS_AS(nlohmann::json::parse(R"({"format":"other/2"})").get<io::RunConfig>(), io::UsageError);

  TempDir tmp("cfg");
  io::save_config(c, tmp.path / "c.json");
  CHECK(nlohmann::json(io::load_config(tmp.path / "c.json")) == j);
  std::ofstream(tmp.path / "bad.json") << "{ not json";
  CHECK_THROWS_AS(io::load_config(tmp.path / "bad.json"), io::UsageError);
}

TEST_CASE("crc32 and csv formatting") {
  TempDir tmp("crc");
  std::ofstream(tmp.path / "check.txt", std::ios::binary) << "123456789";
  CHECK(io::crc32_file(tmp.path / "check.txt") == "cbf43926");

  {
    io::CsvWriter w(tmp.path / "t.csv", {"units: test"}, {"a", "b", "c"});
    w.cell(0.1).cell(Index{7}).cell(std::string("x"));
    w.end_row();
    w.close();
  }
  const std::string text = slurp(tmp.path / "t.csv");
  CHECK(text == "# units: test\na,b,c\n0.10000000000000001,7,x\n");
  CHECK(std::stod(io::format_real(M_PI)) == M_PI);
  CHECK(io::units_comment(SignConvention::lab_frame).front().find("sign_convention=lab_frame") != std::string::npos);
}

TEST_CASE("parallel map keeps order and rethrows") {
  std::function<double(std::size_t)> f = [](std::size_t i) { return std::sin(static_cast<double>(i)) * i; };
  const auto one = io::parallel_map<double>(50, 1, f);
  const auto four = io::parallel_map<double>(50, 4, f);
  CHECK(one == four);
  CHECK(one[7] == f(7));
  std::function<int(std::size_t)> bad = [](std::size_t i) -> int {
    if (i == 3) throw NumericalError("boom");
    return static_cast<int>(i);
  };
  CHECK_THROWS_AS(io::parallel_map<int>(10, 3, bad), NumericalError);
}

TEST_CASE("spectrum command is deterministic and verifiable") {
  TempDir tmp("spectrum");
  auto c1 = small_spectrum(tmp.path / "a");
  auto c2 = small_spectrum(tmp.path / "b");
  c2.jobs = 3;
  const auto r1 = cli::cmd_spectrum(c1);
  const auto r2 = cli::cmd_spectrum(c2);
  CHECK(r1.exit_code == cli::kExitOk);
  for (const char* f : {"levels.csv", "gaps.csv", "esqpt_line.csv"}) {
    REQUIRE(fs::exists(r1.run_dir / f));
    CHECK(slurp(r1.run_dir / f) == slurp(r2.run_dir / f));
  }
  CHECK(io::verify_manifest(r1.run_dir).empty());
  const auto manifest = nlohmann::json::parse(slurp(r1.run_dir / "manifest.json"));
  CHECK(manifest["status"] == "ok");
  CHECK(manifest["config"]["format"] == io::kFormat);

  const auto levels = csv_rows(r1.run_dir / "levels.csv");
  CHECK(levels.size() == 4 * 6);
  CHECK(std::stod(levels[3][3]) == doctest::Approx(6.0));  // xi = 0: E' = n(n-1)

  std::ofstream(r1.run_dir / "gaps.csv", std::ios::app) << "tampered\n";
  const auto bad = io::verify_manifest(r1.run_dir);
  REQUIRE(bad.size() == 1);
  CHECK(bad[0] == "gaps.csv");

  auto empty = small_spectrum(tmp.path / "c");
  empty.xi_grid.clear();
  CHECK_THROWS_AS(cli::cmd_spectrum(empty), io::UsageError);
}

TEST_CASE("exit codes") {
  CHECK(cli::exit_code_for(io::UsageError("x")) == cli::kExitUsage);
  CHECK(cli::exit_code_for(NumericalError("x")) == cli::kExitNumerical);
  CHECK(cli::exit_code_for(TruncationTooSmall("x")) == cli::kExitNumerical);
  CHECK(cli::exit_code_for(DomainError("x")) == cli::kExitDomain);
  CHECK(cli::exit_code_for(InvalidParams("x")) == cli::kExitDomain);
}

TEST_CASE("evolve command") {
  TempDir tmp("evolve");
  io::RunConfig c;
  c.command = "evolve";
  c.output_dir = (tmp.path / "run").string();
  c.xi = 4.0;
  c.dim_N = 80;
  c.points = {{0.0, 0.0}, {2.0, 0.5}};
  c.t_max = 0.5;
  c.t_samples = 101;
  c.t_log_samples = 0;
  c.snapshot_times = {0.25};
  const auto r = cli::cmd_evolve(c);
  CHECK(r.exit_code == cli::kExitOk);
  for (const char* f : {"sp_pt0.csv", "fotoc_pt1.csv", "sh2_pt1.csv", "fits.json", "husimi_pt0_0.csv"})
    CHECK(fs::exists(r.run_dir / f));
  const auto sp = csv_rows(r.run_dir / "sp_pt0.csv");
  CHECK(sp.size() == 101);
  CHECK(std::stod(sp[0][1]) == doctest::Approx(1.0));
  CHECK(io::verify_manifest(r.run_dir).empty());

  // Truncation far too small for the requested point.
  io::RunConfig t = c;
  t.output_dir = (tmp.path / "trunc").string();
  t.points = {{12.0, 0.0}};
  t.snapshot_times.clear();
  const auto rt = cli::cmd_evolve(t);
  CHECK(rt.exit_code == cli::kExitNumerical);
  CHECK(nlohmann::json::parse(slurp(rt.run_dir / "manifest.json"))["status"] != "ok");

  io::RunConfig u = c;
  u.points.clear();
  u.states = {"D"};
  CHECK_THROWS_AS(cli::cmd_evolve(u), io::UsageError);
  u.xi = 180.0;
  u.states = {"Q"};
  CHECK_THROWS_AS(cli::cmd_evolve(u), io::UsageError);
}

TEST_CASE("classical command") {
  TempDir tmp("classical");
  const classical::ClassicalParams cp{1.0, 180.0};
  io::RunConfig c;
  c.command = "classical";
  c.output_dir = tmp.path.string();
  c.energies = {classical::h_cl({28.1302, 0.0}, cp), 0.0};
  c.contour_samples = 72;
  c.separatrix_samples = 144;
  c.trajectory_t = 0.01;
  const auto r = cli::cmd_classical(c);
  CHECK(r.exit_code == cli::kExitOk);

  const auto contours = csv_rows(r.run_dir / "contours.csv");
  // Outer contour: one point per ray. H = 0 only meets rays inside the lobes.
  REQUIRE(contours.size() > 72);
  CHECK(contours.size() < 144);
  for (std::size_t i = 72; i < contours.size(); ++i) CHECK(std::abs(std::stod(contours[i][3])) < 1e-8);
  CHECK(std::stod(contours[0][1]) == doctest::Approx(28.1302).epsilon(1e-3 / 28.1302));
  CHECK(std::abs(std::stod(contours[0][2])) < 1e-12);
  CHECK(std::stod(contours[72][1]) == doctest::Approx(std::sqrt(720.0)));

  const auto fixed = nlohmann::json::parse(slurp(r.run_dir / "fixed_points.json"));
  CHECK(fixed["points"].size() == 3);
  CHECK(fixed["lyapunov_origin"].get<double>() == doctest::Approx(360.0));

  const auto traj = nlohmann::json::parse(slurp(r.run_dir / "trajectories.json"));
  CHECK(traj["relative_drift"].size() == 6);
  for (const auto& d : traj["relative_drift"]) CHECK(d.get<double>() < 1e-6);
  CHECK(io::verify_manifest(r.run_dir).empty());
}

TEST_CASE("map-params output") {
  MicroscopicParams mp;
  mp.g3 = 0.0;
  mp.g4 = -2.0 / 3.0;
  mp.omega_d = 2.0;
  mp.Omega_d = 1.0;
  const auto j = cli::cmd_map_params(mp);
  CHECK(j["K"].get<double>() == doctest::Approx(1.0));
  CHECK(j["xi"].get<double>() == 0.0);
  mp.g4 = 0.0;
  CHECK_THROWS_AS(cli::cmd_map_params(mp), KerrFreePoint);
}
