#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "spinflow/analysis.hpp"
#include "spinflow/dynamics.hpp"

namespace spinflow {

struct StateSpec {
  enum class Kind { Coherent, Basis, File };
  Kind kind = Kind::Coherent;
  CoherentLabel coherent{1.5707963267948966, 0.0};
  double m = 0.0;
  /// JSON file with "spin", "real" and "imag" (row-major density matrix).
  std::string file;
};

struct Modes {
  bool quantum = true;
  bool twa = true;
  bool currents = true;
  bool stagnation = true;
  bool moments = true;
  /// simulate also writes the frame sequence under <out>/frames.
  bool frames = false;
};

struct SimulationConfig {
  double spin = 10.0;
  StateSpec state;
  Hamiltonian hamiltonian = KerrHamiltonian{1.0};
  /// Dimensionless times, ascending.
  std::vector<double> times{0.0, 0.32, 1.5};
  double oversample = 1.0;
  std::filesystem::path out = "out";
  Modes modes;
  int n_frames = 50;
  double tau_max = 1.5;
  /// Worker threads; 0 uses the hardware concurrency.
  int threads = 0;
  /// For linear Hamiltonians: check that every W snapshot is the rigid
  /// rotation of the first one.
  bool check_translation = false;

  SpinRep rep() const { return SpinRep::from_spin(spin); }
  /// Throws ConfigError on inconsistent values.
  void validate() const;
};

/// Reads a config file. Unknown keys, wrong types and invalid values throw
/// ConfigError naming the offending field (and line, for JSON syntax errors).
SimulationConfig load_config(const std::filesystem::path& path);
SimulationConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SimulationConfig& c);

DensityMatrix initial_state(const SimulationConfig& c);

/// Everything computed for one time point.
struct Snapshot {
  double tau = 0.0;
  double t = 0.0;
  std::optional<GridField> w_quantum;
  std::optional<GridField> w_twa;
  std::optional<CurrentField> j_quantum;
  std::optional<CurrentField> j_scl;
  std::optional<StagnationSet> stagnation;
  std::optional<StagnationSet> stagnation_scl;
  nlohmann::json diagnostics;
};

/// Computes one snapshot per entry of `taus`, spread over a worker pool.
/// Results are independent of the thread count.
std::vector<Snapshot> compute_snapshots(const SimulationConfig& c, const std::vector<double>& taus);

void write_csv(std::ostream& os, const GridField& f);
nlohmann::json stagnation_to_json(const StagnationSet& s);
std::string sha256_file(const std::filesystem::path& p);

struct RunResult {
  std::vector<std::filesystem::path> files;
  /// Empty when the translation check was not requested.
  std::optional<bool> translation_ok;
  double translation_error = 0.0;
};

RunResult run_simulate(const SimulationConfig& c);
/// Writes n_frames uniformly spaced frames on [0, tau_max] into `dir`.
RunResult run_frames(const SimulationConfig& c, const std::filesystem::path& dir);

struct CheckResult {
  std::string name;
  bool pass;
  double measured;
  double tolerance;
};

/// Oracle suite at the configured spin.
std::vector<CheckResult> run_verify(const SimulationConfig& c);

}  // namespace spinflow
