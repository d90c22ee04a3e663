#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "spinflow/errors.hpp"
#include "spinflow/simulation.hpp"

namespace {

using nlohmann::json;

struct Overrides {
  std::string config;
  std::optional<double> spin;
  std::optional<double> chi;
  std::optional<std::string> times;
  std::optional<std::string> out;
  std::optional<double> oversample;
  std::optional<std::string> mode;
  std::optional<int> threads;
  std::optional<int> n_frames;
  std::optional<double> tau_max;
  bool check_translation = false;
};

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) parts.push_back(item.substr(b, e - b + 1));
  }
  return parts;
}

double parse_number(const std::string& s, const std::string& field) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw spinflow::ConfigError(field, "not a number: '" + s + "'");
}

// Flag overrides are merged into the JSON form so they pass the same validation
// as the config file.
spinflow::SimulationConfig resolve(const Overrides& o) {
  spinflow::SimulationConfig base;
  if (!o.config.empty()) base = spinflow::load_config(o.config);
  json j = spinflow::config_to_json(base);
  if (o.spin) j["spin"] = *o.spin;
  if (o.chi) j["hamiltonian"] = {{"type", "kerr"}, {"chi", *o.chi}};
  if (o.times) {
    json t = json::array();
    for (const auto& s : split(*o.times)) t.push_back(parse_number(s, "times"));
    j["times"] = t;
  }
  if (o.out) j["out"] = *o.out;
  if (o.oversample) j["oversample"] = *o.oversample;
  if (o.mode) j["modes"] = split(*o.mode);
  if (o.threads) j["threads"] = *o.threads;
  if (o.n_frames) j["frames"]["n_frames"] = *o.n_frames;
  if (o.tau_max) j["frames"]["tau_max"] = *o.tau_max;
  if (o.check_translation) j["check_translation"] = true;
  return spinflow::config_from_json(j);
}

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON configuration file");
  app->add_option("--spin", o.spin, "Spin quantum number S");
  app->add_option("--chi", o.chi, "Kerr strength (selects the Kerr Hamiltonian)");
  app->add_option("--times", o.times, "Comma-separated dimensionless times");
  app->add_option("--out", o.out, "Output directory");
  app->add_option("--oversample", o.oversample, "Grid oversampling factor (>= 1)");
  app->add_option("--mode", o.mode, "Comma-separated modes: quantum,twa,currents,stagnation,moments,frames,all");
  app->add_option("--threads", o.threads, "Worker threads (0 = hardware concurrency)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spin-S phase-space dynamics: Wigner functions, currents and stagnation lines"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SPINFLOW_VERSION);

  Overrides sim, frm, ver;
  auto* simulate = app.add_subcommand("simulate", "Write field, current and diagnostic snapshots");
  add_common(simulate, sim);
  simulate->add_option("--n-frames", sim.n_frames, "Frames written when the frames mode is on");
  simulate->add_option("--tau-max", sim.tau_max, "Last frame time when the frames mode is on");
  simulate->add_flag("--check-translation", sim.check_translation,
                     "Linear Hamiltonian: check that snapshots are rigid rotations of each other");

  auto* frames = app.add_subcommand("frames", "Write a uniformly spaced frame sequence");
  add_common(frames, frm);
  frames->add_option("--n-frames,-n", frm.n_frames, "Number of frames (>= 2)");
  frames->add_option("--tau-max", frm.tau_max, "Last frame time");

  auto* verify = app.add_subcommand("verify", "Run the oracle suite at the configured spin");
  add_common(verify, ver);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed()) {
      const auto c = resolve(sim);
      const auto r = spinflow::run_simulate(c);
      std::cout << "wrote " << r.files.size() << " files to " << c.out.string() << '\n';
      if (r.translation_ok) {
        std::printf("translation check: %s (max error %.3e)\n", *r.translation_ok ? "PASS" : "FAIL",
                    r.translation_error);
        if (!*r.translation_ok) return 1;
      }
      return 0;
    }
    if (frames->parsed()) {
      const auto c = resolve(frm);
      const auto r = spinflow::run_frames(c, c.out);
      std::cout << "wrote " << c.n_frames << " frames (" << r.files.size() << " files) to " << c.out.string()
                << '\n';
      return 0;
    }
    const auto c = resolve(ver);
    bool ok = true;
    for (const auto& r : spinflow::run_verify(c)) {
      std::printf("%s %-22s measured=%.3e tol=%.1e\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.measured,
                  r.tolerance);
      ok = ok && r.pass;
    }
    return ok ? 0 : 1;
  } catch (const spinflow::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
