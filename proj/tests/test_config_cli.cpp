#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "nanolaser/errors.hpp"

using namespace nanolaser;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("nanolaser_test_" + name);
  fs::remove_all(d);
  return d;
}

std::string slurp(const fs::path& f) {
  std::ifstream in(f, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::size_t data_rows(const fs::path& csv) {
  std::ifstream in(csv);
  std::string line;
  std::size_t rows = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    ++rows;
  }
  return rows;
}

// Decimal text may differ from computed defaults in the last bit.
bool same_physics(const PhysicalParams& a, const PhysicalParams& b) {
  auto eq = [](double x, double y) { return std::abs(x - y) <= 1e-14 * std::max(std::abs(x), std::abs(y)); };
  return eq(a.kappa, b.kappa) && eq(a.alpha, b.alpha) && eq(a.K, b.K) && eq(a.gamma_c, b.gamma_c) &&
         eq(a.gamma_par, b.gamma_par) && eq(a.gamma_tot, b.gamma_tot) && eq(a.beta, b.beta) && eq(a.n0, b.n0) &&
         eq(a.F_P, b.F_P) && eq(a.B_rec, b.B_rec) && eq(a.V_a, b.V_a);
}

}  // namespace

TEST_CASE("settings parsing") {
  SUBCASE("no overrides keeps the defaults") {
    const cli::RunConfig c = cli::parse_config(cli::Experiment::Bifurcation, "", {}, std::nullopt, "out", std::nullopt);
    CHECK(c.settings == Settings{});
    CHECK(c.seed == 1);
  }
  SUBCASE("overrides and seed") {
    const cli::RunConfig c =
        cli::parse_config(cli::Experiment::Stationary, "", {"beta=0.017", "pump_grid=6.01, 6.02"}, 9, "o", 2);
    CHECK(c.settings.physics.beta == 0.017);
    CHECK(c.settings.pump_grid == std::vector<double>{6.01, 6.02});
    CHECK(c.settings.seed == 9);
    CHECK(c.lanes == 2);
  }
  SUBCASE("unknown key suggests the nearest one") {
    try {
      cli::parse_config(cli::Experiment::Bifurcation, "", {"kapa=1"}, std::nullopt, "out", std::nullopt);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("did you mean 'kappa'") != std::string::npos);
    }
    CHECK(nearest_key("gama_c") == "gamma_c");
  }
  SUBCASE("errors carry the line number") {
    std::istringstream in("# header\nkappa = 140\n\nbeta = abc\n");
    try {
      parse_settings(in);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
    std::istringstream bad_schema("schema = 2\n");
    CHECK_THROWS_AS(parse_settings(bad_schema), ConfigError);
    CHECK_THROWS_AS(split_override("novalue"), ConfigError);
  }
  SUBCASE("canonical text round-trips") {
    Settings s;
    s.physics.beta = 1.7e-5;
    s.physics.V_a = 16e-12;
    s.pump_grid = {6.0, 6.0125, 6.1};
    s.scheme = Scheme::EulerMaruyama;
    s.noise = false;
    s.seed = 123456789012345ULL;
    std::istringstream in(write_settings(s));
    CHECK(parse_settings(in) == s);
  }
  CHECK(cli::experiment_from_name("single-trajectory") == cli::Experiment::Trajectory);
  CHECK(cli::experiment_from_name("beta-sweep") == cli::Experiment::BetaSweep);
  CHECK_FALSE(cli::experiment_from_name("nope"));
}

TEST_CASE("bifurcation run writes one row per pump value") {
  const fs::path out = scratch("bif");
  const auto cfg = cli::parse_config(cli::Experiment::Bifurcation, "", {"relax_ns=100"}, std::nullopt, out, 1);
  const cli::RunOutcome r = cli::run(cfg);
  CHECK(data_rows(out / "bifurcation.csv") == 9);
  CHECK(fs::exists(out / "manifest.json"));
  CHECK(fs::exists(out / "config.echo.params"));
  // The echo reproduces the resolved settings.
  CHECK(load_settings((out / "config.echo.params").string()) == cfg.settings);
  CHECK(r.summary.contains("hopf_points_P_over_P0"));
  fs::remove_all(out);
}

TEST_CASE("trajectory run honours the record stride and is reproducible") {
  const fs::path a = scratch("traj_a"), b = scratch("traj_b");
  const std::vector<std::string> ov{"trajectory_steps=1000", "record_stride=10", "relax_ns=20"};
  cli::run(cli::parse_config(cli::Experiment::Trajectory, "", ov, 5, a, 1));
  cli::run(cli::parse_config(cli::Experiment::Trajectory, "", ov, 5, b, 1));
  CHECK(data_rows(a / "trajectory.csv") == 100);
  CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
  CHECK(slurp(a / "trajectory.csv").find("# seed") != std::string::npos);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("two-point beta sweep") {
  const fs::path a = scratch("beta_a"), b = scratch("beta_b");
  const std::vector<std::string> ov{"beta_grid=1.7e-5, 1.7e-2", "pump_grid=6.01, 6.02, 6.03", "n_traj=4",
                                    "burn_ns=0.5", "window_ns=1", "relax_ns=30"};
  cli::run(cli::parse_config(cli::Experiment::BetaSweep, "", ov, 3, a, 1));
  cli::run(cli::parse_config(cli::Experiment::BetaSweep, "", ov, 3, b, 2));
  CHECK(data_rows(a / "beta_sweep.csv") == 2);
  // Lane count does not change the numbers.
  CHECK(slurp(a / "beta_sweep.csv") == slurp(b / "beta_sweep.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("shipped parameter files load") {
  const fs::path dir = fs::path(NANOLASER_SOURCE_DIR) / "configs";
  const Settings base = load_settings((dir / "coupled_pair.params").string());
  CHECK(same_physics(base.physics, mesoscopic_params()));
  const Settings macro = load_settings((dir / "macroscopic.params").string());
  CHECK(same_physics(macro.physics, macroscopic_params()));
  for (const char* f : {"stationary_scan.params", "ramp.params", "beta_sweep.params"}) {
    CHECK_NOTHROW(load_settings((dir / f).string()));
  }
}
