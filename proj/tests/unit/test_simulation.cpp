#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "spinflow/errors.hpp"
#include "spinflow/simulation.hpp"
#include "spinflow/wigner.hpp"

namespace fs = std::filesystem;
using namespace spinflow;
using nlohmann::json;

namespace {

std::string field_of_error(const json& j) {
  try {
    config_from_json(j);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<none>";
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("spinflow_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_SUITE("simulation") {

TEST_CASE("defaults describe the equator coherent state under Kerr") {
  const SimulationConfig c = config_from_json(json::object());
  CHECK(c.spin == 10.0);
  CHECK(c.times == std::vector<double>{0.0, 0.32, 1.5});
  CHECK(std::holds_alternative<KerrHamiltonian>(c.hamiltonian));
  CHECK(c.state.kind == StateSpec::Kind::Coherent);
}

TEST_CASE("config round trip through json") {
  const json in = {{"spin", 2.5},
                   {"state", {{"type", "basis"}, {"m", -1.5}}},
                   {"hamiltonian", {{"type", "linear"}, {"ax", 0.1}, {"ay", 0.2}, {"az", 0.3}}},
                   {"times", {0.0, 1.0}},
                   {"modes", {"quantum", "currents"}}};
  const SimulationConfig c = config_from_json(in);
  const SimulationConfig d = config_from_json(config_to_json(c));
  CHECK(config_to_json(c) == config_to_json(d));
  CHECK(d.state.m == -1.5);
  CHECK(d.modes.quantum);
  CHECK_FALSE(d.modes.twa);
}

TEST_CASE("config errors name the offending field") {
  CHECK(field_of_error({{"spin", 0.7}}) == "spin");
  CHECK(field_of_error({{"spin", "ten"}}) == "spin");
  CHECK(field_of_error({{"times", {0.5, 0.1}}}) == "times");
  CHECK(field_of_error({{"times", json::array()}}) == "times");
  CHECK(field_of_error({{"oversample", 0.5}}) == "oversample");
  CHECK(field_of_error({{"state", {{"type", "basis"}, {"m", 10.5}}}}) == "state.m");
  CHECK(field_of_error({{"state", {{"type", "squeezed"}}}}) == "state.type");
  CHECK(field_of_error({{"hamiltonian", {{"type", "kerr"}, {"omega", 1}}}}) == "hamiltonian.omega");
  CHECK(field_of_error({{"modes", {"quantum", "plots"}}}) == "modes");
  CHECK(field_of_error({{"frames", {{"n_frames", 1}}}}) == "frames.n_frames");
  CHECK(field_of_error({{"check_translation", true}}) == "check_translation");
  CHECK(field_of_error({{"colour", 1}}) == "colour");
}

TEST_CASE("syntax errors report line and column") {
  const fs::path dir = scratch("syntax");
  std::ofstream(dir / "c.json") << "{\n  \"spin\": 10,\n  \"times\": [0,\n}\n";
  try {
    load_config(dir / "c.json");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("c.json:4:1") != std::string::npos);
  }
}

TEST_CASE("state files load relative to the config and check the spin") {
  const fs::path dir = scratch("state_file");
  std::ofstream(dir / "rho.json") << R"({"spin": 0.5, "real": [[0.75, 0.1], [0.1, 0.25]], "imag": [[0, 0.2], [-0.2, 0]]})";
  std::ofstream(dir / "c.json") << R"({"spin": 0.5, "state": {"type": "file", "path": "rho.json"}, "times": [0]})";
  const SimulationConfig c = load_config(dir / "c.json");
  const DensityMatrix rho = initial_state(c);
  CHECK(rho.mat()(0, 1).real() == doctest::Approx(0.1));
  CHECK(rho.mat()(0, 1).imag() == doctest::Approx(0.2));

  std::ofstream(dir / "c2.json") << R"({"spin": 1, "state": {"type": "file", "path": "rho.json"}, "times": [0]})";
  CHECK_THROWS_AS(initial_state(load_config(dir / "c2.json")), ConfigError);
}

TEST_CASE("a single zero time reproduces the direct symbol") {
  SimulationConfig c;
  c.spin = 3.5;
  c.times = {0.0};
  c.state.coherent = {0.8, 2.1};
  const auto snaps = compute_snapshots(c, c.times);
  REQUIRE(snaps.size() == 1);
  const SpinRep rep = c.rep();
  const GridField direct =
      symbol_of(initial_state(c).op(), TensorBasis(rep)).on(build_grid(rep, c.oversample));
  CHECK((*snaps[0].w_quantum - direct).max_abs() == 0.0);
  CHECK((*snaps[0].w_twa - direct).max_abs() <= 1e-13);
}

TEST_CASE("snapshots do not depend on the thread count") {
  SimulationConfig c;
  c.spin = 4;
  c.times = {0.0, 0.2, 0.5, 0.9, 1.4};
  c.threads = 1;
  const auto one = compute_snapshots(c, c.times);
  c.threads = 4;
  const auto four = compute_snapshots(c, c.times);
  REQUIRE(one.size() == four.size());
  for (std::size_t n = 0; n < one.size(); ++n) {
    CHECK(one[n].tau == four[n].tau);
    CHECK((*one[n].w_quantum - *four[n].w_quantum).max_abs() == 0.0);
    CHECK((one[n].j_quantum->j_phi - four[n].j_quantum->j_phi).max_abs() == 0.0);
    CHECK(one[n].diagnostics.dump() == four[n].diagnostics.dump());
  }
}

TEST_CASE("csv layout: header of phi nodes, one row per theta node") {
  const GridPtr g = build_grid(SpinRep(2), 1.0);
  GridField f(g);
  for (int i = 0; i < g->n_theta(); ++i)
    for (int j = 0; j < g->n_phi(); ++j) f(i, j) = i + 0.1 * j;
  std::ostringstream os;
  write_csv(os, f);
  std::istringstream is(os.str());
  std::string line;
  int rows = 0;
  std::getline(is, line);
  CHECK(line.rfind("theta\\phi,", 0) == 0);
  CHECK(std::count(line.begin(), line.end(), ',') == g->n_phi());
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string cell;
    std::getline(ls, cell, ',');
    CHECK(std::stod(cell) == g->theta(rows));
    for (int j = 0; j < g->n_phi(); ++j) {
      std::getline(ls, cell, ',');
      CHECK(std::stod(cell) == f(rows, j));
    }
    ++rows;
  }
  CHECK(rows == g->n_theta());
}

TEST_CASE("simulate writes checksums that match the files") {
  SimulationConfig c;
  c.spin = 2;
  c.times = {0.0, 0.5};
  c.out = scratch("simulate");
  const RunResult r = run_simulate(c);
  std::ifstream is(c.out / "meta.json");
  const json meta = json::parse(is);
  CHECK(meta["spin"] == 2.0);
  CHECK(meta["checksums"].size() + 1 == r.files.size());
  for (const auto& [name, sum] : meta["checksums"].items()) {
    CHECK(sha256_file(c.out / name) == sum.get<std::string>());
  }
  CHECK_FALSE(meta["config"].contains("out"));
}

TEST_CASE("linear translation check passes and kerr is rejected") {
  SimulationConfig c;
  c.spin = 3;
  c.hamiltonian = LinearHamiltonian{{0.0, 0.0, 1.0}};
  c.times = {0.0, 0.7, 2.0};
  c.check_translation = true;
  c.modes = Modes{true, false, false, false, false, false};
  c.out = scratch("translation");
  const RunResult r = run_simulate(c);
  REQUIRE(r.translation_ok.has_value());
  CHECK(*r.translation_ok);
  CHECK(r.translation_error <= 1e-10);

  c.hamiltonian = KerrHamiltonian{1.0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("verify passes at small spin") {
  SimulationConfig c;
  c.spin = 1.5;
  for (const auto& r : run_verify(c)) {
    INFO(r.name, " ", r.measured);
    CHECK(r.pass);
  }
}

TEST_CASE("sha256 of a known string") {
  const fs::path dir = scratch("sha");
  std::ofstream(dir / "abc", std::ios::binary) << "abc";
  CHECK(sha256_file(dir / "abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

}
