#include "spinflow/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include "spinflow/errors.hpp"

#ifndef SPINFLOW_VERSION
#define SPINFLOW_VERSION "0.0.0"
#endif

namespace spinflow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

// Moments up to k = 3 need quadrature exact to degree 6S.
constexpr double kMomentOversample = 3.0;
// Meridional currents need sin(theta) J_theta resolved at band 2S + 1.
constexpr double kResidualOversample = 2.0;

bool is_kerr(const Hamiltonian& h) { return std::holds_alternative<KerrHamiltonian>(h); }

// ---- config parsing -------------------------------------------------------

std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ConfigError(join(where, k), "unknown key");
  }
}

const json& require_object(const json& j, const std::string& field) {
  if (!j.is_object()) throw ConfigError(field, "expected an object");
  return j;
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number, got " + std::string(j.type_name()));
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
  return v;
}

int integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) throw ConfigError(field, "expected an integer");
  return j.get<int>();
}

std::string string(const json& j, const std::string& field) {
  if (!j.is_string()) throw ConfigError(field, "expected a string");
  return j.get<std::string>();
}

Modes parse_modes(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field, "expected an array of mode names");
  Modes m{false, false, false, false, false, false};
  for (const auto& e : j) {
    const std::string s = string(e, field);
    if (s == "quantum") m.quantum = true;
    else if (s == "twa") m.twa = true;
    else if (s == "currents") m.currents = true;
    else if (s == "stagnation") m.stagnation = true;
    else if (s == "moments") m.moments = true;
    else if (s == "frames") m.frames = true;
    else if (s == "all") m = Modes{true, true, true, true, true, m.frames};
    else throw ConfigError(field, "unknown mode '" + s + "'");
  }
  return m;
}

json modes_to_json(const Modes& m) {
  json a = json::array();
  if (m.quantum) a.push_back("quantum");
  if (m.twa) a.push_back("twa");
  if (m.currents) a.push_back("currents");
  if (m.stagnation) a.push_back("stagnation");
  if (m.moments) a.push_back("moments");
  if (m.frames) a.push_back("frames");
  return a;
}

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t n = 0; n < std::min(byte, text.size()); ++n) {
    if (text[n] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// ---- rotations for linear dynamics ----------------------------------------

Eigen::Vector3d unit_vector(double th, double ph) {
  return {std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
}

std::pair<double, double> to_angles(const Eigen::Vector3d& n) {
  double ph = std::atan2(n.y(), n.x());
  if (ph < 0) ph += 2 * kPi;
  return {std::acos(std::clamp(n.z(), -1.0, 1.0)), ph};
}

// W0 transported rigidly by the flow of a.S over time t: W(n) = W0(R(-|a| t) n).
GridField rotate_field(const Symbol& w0, const LinearHamiltonian& h, double t, const GridPtr& grid) {
  const double omega = h.frequency();
  GridField out(grid);
  if (omega == 0.0) return w0.on(grid);
  const Eigen::Vector3d axis(h.a[0] / omega, h.a[1] / omega, h.a[2] / omega);
  const Eigen::Matrix3d back = Eigen::AngleAxisd(-omega * t, axis).toRotationMatrix();
  for (int i = 0; i < grid->n_theta(); ++i) {
    for (int j = 0; j < grid->n_phi(); ++j) {
      const auto [th, ph] = to_angles(back * unit_vector(grid->theta(i), grid->phi(j)));
      out(i, j) = w0.at(th, ph);
    }
  }
  return out;
}

// ---- diagnostics ----------------------------------------------------------

json stats_json(const SpinStatistics& s) {
  json cov = json::array();
  for (const auto& row : s.covariance) cov.push_back(row);
  return {{"mean", s.mean},
          {"covariance", cov},
          {"min_transverse_variance", s.min_transverse_variance},
          {"max_transverse_variance", s.max_transverse_variance},
          {"squeezing_ratio", s.squeezing_ratio}};
}

json stagnation_counts(const StagnationSet& s) {
  return {{"equator_trivial", s.count(LineClass::EquatorTrivial)},
          {"closed_loop", s.count(LineClass::ClosedLoop)},
          {"open_curve", s.count(LineClass::OpenCurve)},
          {"closed_loops_north", s.closed_loops_north()},
          {"closed_loops_south", s.closed_loops_south()}};
}

json moments_json(const GridField& w, SpinRep rep) {
  return {{"m1", wigner_moment(w, rep, 1)}, {"m2", wigner_moment(w, rep, 2)}, {"m3", wigner_moment(w, rep, 3)}};
}

struct Context {
  SimulationConfig cfg;
  SpinRep rep;
  DensityMatrix rho0;
  TensorBasis basis;
  GridPtr grid;
  GridPtr moment_grid;
  GridPtr residual_grid;
  Symbol w0;
  Operator h_op;
};

Snapshot compute_one(const Context& cx, double tau) {
  const SimulationConfig& c = cx.cfg;
  Snapshot s;
  s.tau = tau;
  s.t = physical_time(c.hamiltonian, tau);
  const DensityMatrix rho = evolve(cx.rho0, c.hamiltonian, s.t);
  const Symbol w = symbol_of(rho.op(), cx.basis);
  json d = {{"tau", tau}, {"t", s.t}};

  // TWA: exact azimuthal transport for Kerr, rigid rotation for linear H.
  const auto twa_on = [&](const GridPtr& g) {
    return std::visit(
        [&](const auto& h) -> GridField {
          if constexpr (std::is_same_v<std::decay_t<decltype(h)>, KerrHamiltonian>) {
            return twa_evolve(cx.w0, h, s.t, g);
          } else {
            return rotate_field(cx.w0, h, s.t, g);
          }
        },
        c.hamiltonian);
  };

  if (c.modes.quantum) s.w_quantum = w.on(cx.grid);
  if (c.modes.twa || c.modes.currents) s.w_twa = twa_on(cx.grid);

  const auto quantum_current = [&](const GridPtr& g) {
    return std::visit(
        [&](const auto& h) -> CurrentField {
          if constexpr (std::is_same_v<std::decay_t<decltype(h)>, KerrHamiltonian>) {
            return kerr_current(w, h.chi, g);
          } else {
            return linear_current(w, h.a, g);
          }
        },
        c.hamiltonian);
  };

  if (c.modes.currents || c.modes.stagnation) {
    s.j_quantum = quantum_current(cx.grid);
    const GridField& wt = *s.w_twa;
    s.j_scl = std::visit(
        [&](const auto& h) -> CurrentField {
          if constexpr (std::is_same_v<std::decay_t<decltype(h)>, KerrHamiltonian>) {
            return semiclassical_current(wt, h.chi, cx.rep);
          } else {
            return linear_current(wt, h.a);
          }
        },
        c.hamiltonian);

    // Continuity against the exact dW/dt = symbol of -i[H, rho].
    const GridField dwdt = exact_time_derivative(rho, cx.h_op).on(cx.residual_grid);
    const ContinuityResidual r = continuity_residual(dwdt, quantum_current(cx.residual_grid));
    const double scale = dwdt.max_abs();
    d["continuity"] = {{"max_abs", r.max_abs}, {"relative", scale > 0 ? r.max_abs / scale : 0.0}};
    if (const auto* k = std::get_if<KerrHamiltonian>(&c.hamiltonian)) {
      const double jmax = s.j_quantum->j_phi.max_abs();
      const double eq = kerr_equator_current_max(w, k->chi, *cx.grid);
      d["equator_current"] = {{"max_abs", eq}, {"relative", jmax > 0 ? eq / jmax : 0.0}};
    }
  }

  if (c.modes.stagnation) {
    if (s.j_quantum->theta_vanishes()) {
      s.stagnation = extract_stagnation_lines(*s.j_quantum);
      s.stagnation_scl = extract_stagnation_lines(*s.j_scl);
      d["stagnation"] = stagnation_counts(*s.stagnation);
      d["stagnation_scl"] = stagnation_counts(*s.stagnation_scl);
    } else {
      d["stagnation"] = {{"skipped", "J_theta is nonzero"}};
    }
  }

  if (c.modes.moments) {
    d["moments"] = {{"quantum", moments_json(w.on(cx.moment_grid), cx.rep)},
                    {"twa", moments_json(twa_on(cx.moment_grid), cx.rep)}};
    d["spin"] = stats_json(spin_statistics(rho));
  }
  s.diagnostics = std::move(d);
  if (!c.modes.twa) s.w_twa.reset();
  if (!c.modes.currents) {
    s.j_quantum.reset();
    s.j_scl.reset();
  }
  return s;
}

// ---- output ---------------------------------------------------------------

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << text;
  if (!os) throw std::runtime_error("write failed: " + p.string());
}

void write_field(const fs::path& p, const GridField& f) {
  std::ostringstream os;
  write_csv(os, f);
  write_text(p, os.str());
}

json grid_json(const SimulationConfig& c, const SphereGrid& g) {
  return {{"n_theta", g.n_theta()},
          {"n_phi", g.n_phi()},
          {"oversample", c.oversample},
          {"theta_nodes", "gauss-legendre, ascending"},
          {"phi_nodes", "phi_j = 2 pi j / n_phi"},
          {"moment_oversample", kMomentOversample},
          {"residual_oversample", kResidualOversample}};
}

json conventions_json() {
  return {{"cg_phase", "condon-shortley"},
          {"basis_order", "m = S, S-1, ..., -S"},
          {"time_evolution", "U(t) = exp(-i H t)"},
          {"dimensionless_time", "tau = |chi| t (kerr), tau = |a| t (linear)"},
          {"symbol", "W_A(Omega) = Tr[A w(Omega)], W_{S_i} = sqrt(S(S+1)) n_i"},
          {"twa_shift", "W(theta, phi - (chi t / eps) cos(theta))"},
          {"csv", "header row: phi nodes; first column: theta; rows ascending theta"}};
}

// Checksums are keyed by path relative to `dir`. The config echo leaves out the
// output directory and thread count, which do not affect any result, so runs
// into different directories produce identical trees.
void write_meta(const fs::path& dir, const std::string& command, const SimulationConfig& c,
                const SphereGrid& g, const std::vector<double>& taus,
                const std::vector<fs::path>& files) {
  std::vector<std::string> names;
  for (const auto& f : files) names.push_back(f.lexically_relative(dir).generic_string());
  std::sort(names.begin(), names.end());
  json sums = json::object();
  for (const auto& n : names) sums[n] = sha256_file(dir / n);
  json config = config_to_json(c);
  config.erase("out");
  config.erase("threads");
  const SpinRep rep = c.rep();
  json meta = {{"tool", "spinflow"},
               {"version", SPINFLOW_VERSION},
               {"command", command},
               {"spin", rep.spin()},
               {"dim", rep.dim()},
               {"epsilon", rep.epsilon()},
               {"grid", grid_json(c, g)},
               {"conventions", conventions_json()},
               {"times", taus},
               {"config", config},
               {"checksums", sums}};
  write_text(dir / "meta.json", meta.dump(2) + "\n");
}

Context make_context(const SimulationConfig& c) {
  c.validate();
  const SpinRep rep = c.rep();
  DensityMatrix rho0 = initial_state(c);
  TensorBasis basis(rep);
  Symbol w0 = symbol_of(rho0.op(), basis);
  return Context{c,
                 rep,
                 rho0,
                 std::move(basis),
                 build_grid(rep, c.oversample),
                 build_grid(rep, std::max(c.oversample, kMomentOversample)),
                 build_grid(rep, std::max(c.oversample, kResidualOversample)),
                 std::move(w0),
                 hamiltonian_operator(c.hamiltonian, rep)};
}

std::vector<Snapshot> compute_all(const Context& cx, const std::vector<double>& taus) {
  std::vector<Snapshot> out(taus.size());
  std::vector<std::exception_ptr> errors(taus.size());
  int n_threads = cx.cfg.threads > 0 ? cx.cfg.threads : int(std::thread::hardware_concurrency());
  n_threads = std::clamp(n_threads, 1, int(std::max<std::size_t>(1, taus.size())));
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t n = next++; n < taus.size(); n = next++) {
      try {
        out[n] = compute_one(cx, taus[n]);
      } catch (...) {
        errors[n] = std::current_exception();
      }
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int n = 0; n < n_threads; ++n) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::string tag(const std::string& prefix, std::size_t idx, int width) {
  std::ostringstream os;
  os << prefix << std::setw(width) << std::setfill('0') << idx;
  return os.str();
}

// Writes the per-snapshot files; `label(idx)` gives the t{idx} / f{idx} suffix.
std::vector<fs::path> write_snapshots(const fs::path& dir, const std::vector<Snapshot>& snaps,
                                      const std::function<std::string(std::size_t)>& label) {
  std::vector<fs::path> files;
  const auto emit_field = [&](const std::string& name, const GridField& f) {
    write_field(dir / name, f);
    files.push_back(dir / name);
  };
  const auto emit_json = [&](const std::string& name, const json& j) {
    write_text(dir / name, j.dump(1) + "\n");
    files.push_back(dir / name);
  };
  for (std::size_t n = 0; n < snaps.size(); ++n) {
    const Snapshot& s = snaps[n];
    const std::string l = label(n);
    if (s.w_quantum) emit_field("W_quantum_" + l + ".csv", *s.w_quantum);
    if (s.w_twa) emit_field("W_twa_" + l + ".csv", *s.w_twa);
    if (s.j_quantum) {
      emit_field("Jphi_quantum_" + l + ".csv", s.j_quantum->j_phi);
      if (!s.j_quantum->theta_vanishes()) emit_field("Jtheta_quantum_" + l + ".csv", s.j_quantum->j_theta);
    }
    if (s.j_scl) {
      emit_field("Jphi_scl_" + l + ".csv", s.j_scl->j_phi);
      if (!s.j_scl->theta_vanishes()) emit_field("Jtheta_scl_" + l + ".csv", s.j_scl->j_theta);
    }
    if (s.stagnation) emit_json("stagnation_" + l + ".json", stagnation_to_json(*s.stagnation));
    if (s.stagnation_scl) emit_json("stagnation_scl_" + l + ".json", stagnation_to_json(*s.stagnation_scl));
  }
  json diag = json::array();
  for (const auto& s : snaps) diag.push_back(s.diagnostics);
  write_text(dir / "diagnostics.json", json{{"snapshots", diag}}.dump(2) + "\n");
  files.push_back(dir / "diagnostics.json");
  return files;
}

// Fixed equator-symmetric field with K <= 6, used by the Gamma -> 1 check.
SpectralField low_k_field() {
  SpectralField f(6);
  f(0, 0) = std::sqrt(4 * kPi);
  for (int k = 1; k <= 6; ++k) {
    for (int q = 0; q <= k; ++q) {
      if ((k + q) % 2 != 0) continue;
      const cplx c(0.3 / k, 0.1 * q / k);
      if (q == 0) {
        f(k, 0) = c.real();
      } else {
        f(k, q) = c;
        f(k, -q) = ((q % 2) ? -1.0 : 1.0) * std::conj(c);
      }
    }
  }
  return f;
}

DensityMatrix random_state(SpinRep rep, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix x(rep.dim(), rep.dim());
  for (int r = 0; r < rep.dim(); ++r)
    for (int c = 0; c < rep.dim(); ++c) x(r, c) = cplx(n(rng), n(rng));
  Matrix rho = x * x.adjoint();
  rho /= rho.trace();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix(Operator(rep, rho));
}

Operator random_observable(SpinRep rep, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix x(rep.dim(), rep.dim());
  for (int r = 0; r < rep.dim(); ++r)
    for (int c = 0; c < rep.dim(); ++c) x(r, c) = cplx(n(rng), n(rng));
  return {rep, 0.5 * (x + x.adjoint())};
}

}  // namespace

// ---- public API -------------------------------------------------------------

void SimulationConfig::validate() const {
  const double two_s = 2.0 * spin;
  if (!(spin >= 0.5) || std::abs(two_s - std::round(two_s)) > 1e-12) {
    throw ConfigError("spin", "must be a positive multiple of 1/2");
  }
  if (times.empty()) throw ConfigError("times", "must not be empty");
  for (std::size_t n = 0; n < times.size(); ++n) {
    if (!std::isfinite(times[n])) throw ConfigError("times", "must be finite");
    if (n > 0 && times[n] < times[n - 1]) throw ConfigError("times", "must be sorted ascending");
  }
  if (!(oversample >= 1.0) || !std::isfinite(oversample)) throw ConfigError("oversample", "must be >= 1");
  if (n_frames < 2) throw ConfigError("frames.n_frames", "must be >= 2");
  if (!(tau_max >= 0.0) || !std::isfinite(tau_max)) throw ConfigError("frames.tau_max", "must be >= 0");
  if (threads < 0) throw ConfigError("threads", "must be >= 0");
  if (state.kind == StateSpec::Kind::Basis) {
    const double k = spin - state.m;
    if (std::abs(state.m) > spin || std::abs(k - std::round(k)) > 1e-12) {
      throw ConfigError("state.m", "must be one of S, S-1, ..., -S");
    }
  }
  if (state.kind == StateSpec::Kind::Coherent &&
      !(std::isfinite(state.coherent.theta0) && std::isfinite(state.coherent.phi0))) {
    throw ConfigError("state", "coherent angles must be finite");
  }
  if (const auto* l = std::get_if<LinearHamiltonian>(&hamiltonian)) {
    for (double a : l->a) {
      if (!std::isfinite(a)) throw ConfigError("hamiltonian", "coefficients must be finite");
    }
  } else if (!std::isfinite(std::get<KerrHamiltonian>(hamiltonian).chi)) {
    throw ConfigError("hamiltonian.chi", "must be finite");
  }
  if (check_translation && is_kerr(hamiltonian)) {
    throw ConfigError("check_translation", "only applies to linear Hamiltonians");
  }
}

SimulationConfig config_from_json(const json& j) {
  require_object(j, "");
  reject_unknown(j, "", {"spin", "state", "hamiltonian", "times", "oversample", "out", "modes", "frames",
                         "threads", "check_translation"});
  SimulationConfig c;
  if (j.contains("spin")) c.spin = number(j["spin"], "spin");
  if (j.contains("state")) {
    const json& s = require_object(j["state"], "state");
    const std::string type = s.contains("type") ? string(s["type"], "state.type") : "coherent";
    if (type == "coherent") {
      reject_unknown(s, "state", {"type", "theta0", "phi0"});
      c.state.kind = StateSpec::Kind::Coherent;
      if (s.contains("theta0")) c.state.coherent.theta0 = number(s["theta0"], "state.theta0");
      if (s.contains("phi0")) c.state.coherent.phi0 = number(s["phi0"], "state.phi0");
    } else if (type == "basis") {
      reject_unknown(s, "state", {"type", "m"});
      c.state.kind = StateSpec::Kind::Basis;
      if (!s.contains("m")) throw ConfigError("state.m", "required for basis states");
      c.state.m = number(s["m"], "state.m");
    } else if (type == "file") {
      reject_unknown(s, "state", {"type", "path"});
      c.state.kind = StateSpec::Kind::File;
      if (!s.contains("path")) throw ConfigError("state.path", "required for file states");
      c.state.file = string(s["path"], "state.path");
    } else {
      throw ConfigError("state.type", "expected coherent, basis or file");
    }
  }
  if (j.contains("hamiltonian")) {
    const json& h = require_object(j["hamiltonian"], "hamiltonian");
    const std::string type = h.contains("type") ? string(h["type"], "hamiltonian.type") : "kerr";
    if (type == "kerr") {
      reject_unknown(h, "hamiltonian", {"type", "chi"});
      c.hamiltonian = KerrHamiltonian{h.contains("chi") ? number(h["chi"], "hamiltonian.chi") : 1.0};
    } else if (type == "linear") {
      reject_unknown(h, "hamiltonian", {"type", "ax", "ay", "az"});
      LinearHamiltonian l;
      const char* keys[] = {"ax", "ay", "az"};
      for (int n = 0; n < 3; ++n) {
        if (h.contains(keys[n])) l.a[n] = number(h[keys[n]], std::string("hamiltonian.") + keys[n]);
      }
      c.hamiltonian = l;
    } else {
      throw ConfigError("hamiltonian.type", "expected kerr or linear");
    }
  }
  if (j.contains("times")) {
    if (!j["times"].is_array()) throw ConfigError("times", "expected an array of numbers");
    c.times.clear();
    for (const auto& t : j["times"]) c.times.push_back(number(t, "times"));
  }
  if (j.contains("oversample")) c.oversample = number(j["oversample"], "oversample");
  if (j.contains("out")) c.out = string(j["out"], "out");
  if (j.contains("modes")) c.modes = parse_modes(j["modes"], "modes");
  if (j.contains("frames")) {
    const json& f = require_object(j["frames"], "frames");
    reject_unknown(f, "frames", {"n_frames", "tau_max"});
    if (f.contains("n_frames")) c.n_frames = integer(f["n_frames"], "frames.n_frames");
    if (f.contains("tau_max")) c.tau_max = number(f["tau_max"], "frames.tau_max");
  }
  if (j.contains("threads")) c.threads = integer(j["threads"], "threads");
  if (j.contains("check_translation")) {
    if (!j["check_translation"].is_boolean()) throw ConfigError("check_translation", "expected true or false");
    c.check_translation = j["check_translation"].get<bool>();
  }
  c.validate();
  return c;
}

SimulationConfig load_config(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("", "cannot open config file " + path.string());
  const std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ConfigError("", path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) +
                              ": JSON syntax error");
  }
  SimulationConfig c = config_from_json(j);
  if (c.state.kind == StateSpec::Kind::File && fs::path(c.state.file).is_relative()) {
    c.state.file = (path.parent_path() / c.state.file).lexically_normal().string();
  }
  return c;
}

json config_to_json(const SimulationConfig& c) {
  json state;
  switch (c.state.kind) {
    case StateSpec::Kind::Coherent:
      state = {{"type", "coherent"}, {"theta0", c.state.coherent.theta0}, {"phi0", c.state.coherent.phi0}};
      break;
    case StateSpec::Kind::Basis:
      state = {{"type", "basis"}, {"m", c.state.m}};
      break;
    case StateSpec::Kind::File:
      state = {{"type", "file"}, {"path", c.state.file}};
      break;
  }
  json ham;
  if (const auto* k = std::get_if<KerrHamiltonian>(&c.hamiltonian)) {
    ham = {{"type", "kerr"}, {"chi", k->chi}};
  } else {
    const auto& l = std::get<LinearHamiltonian>(c.hamiltonian);
    ham = {{"type", "linear"}, {"ax", l.a[0]}, {"ay", l.a[1]}, {"az", l.a[2]}};
  }
  return {{"spin", c.spin},
          {"state", state},
          {"hamiltonian", ham},
          {"times", c.times},
          {"oversample", c.oversample},
          {"out", c.out.generic_string()},
          {"modes", modes_to_json(c.modes)},
          {"frames", {{"n_frames", c.n_frames}, {"tau_max", c.tau_max}}},
          {"threads", c.threads},
          {"check_translation", c.check_translation}};
}

DensityMatrix initial_state(const SimulationConfig& c) {
  const SpinRep rep = c.rep();
  switch (c.state.kind) {
    case StateSpec::Kind::Coherent:
      return DensityMatrix::pure(rep, coherent_state(rep, c.state.coherent.canonical()));
    case StateSpec::Kind::Basis: {
      Vector v = Vector::Zero(rep.dim());
      v(int(std::lround(rep.spin() - c.state.m))) = 1.0;
      return DensityMatrix::pure(rep, v);
    }
    case StateSpec::Kind::File: {
      std::ifstream is(c.state.file);
      if (!is) throw ConfigError("state.path", "cannot open " + c.state.file);
      json j;
      try {
        j = json::parse(is);
      } catch (const json::parse_error&) {
        throw ConfigError("state.path", c.state.file + ": JSON syntax error");
      }
      if (!j.contains("spin") || std::abs(number(j["spin"], "state file spin") - c.spin) > 1e-12) {
        throw ConfigError("state.path", "state file spin does not match spin");
      }
      Matrix m = Matrix::Zero(rep.dim(), rep.dim());
      for (const char* part : {"real", "imag"}) {
        if (!j.contains(part)) {
          if (std::string(part) == "imag") continue;
          throw ConfigError("state.path", "missing 'real'");
        }
        const json& a = j[part];
        if (!a.is_array() || int(a.size()) != rep.dim()) {
          throw ConfigError("state.path", std::string("'") + part + "' must be a (2S+1)x(2S+1) array");
        }
        for (int r = 0; r < rep.dim(); ++r) {
          if (!a[r].is_array() || int(a[r].size()) != rep.dim()) {
            throw ConfigError("state.path", std::string("'") + part + "' must be a (2S+1)x(2S+1) array");
          }
          for (int col = 0; col < rep.dim(); ++col) {
            const double v = number(a[r][col], "state file entry");
            m(r, col) += std::string(part) == "real" ? cplx(v, 0) : cplx(0, v);
          }
        }
      }
      try {
        return DensityMatrix(Operator(rep, m));
      } catch (const std::invalid_argument& e) {
        throw ConfigError("state.path", e.what());
      }
    }
  }
  throw ConfigError("state", "unsupported state");
}

std::vector<Snapshot> compute_snapshots(const SimulationConfig& c, const std::vector<double>& taus) {
  return compute_all(make_context(c), taus);
}

void write_csv(std::ostream& os, const GridField& f) {
  const SphereGrid& g = f.grid();
  char buf[32];
  os << "theta\\phi";
  for (int j = 0; j < g.n_phi(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g", g.phi(j));
    os << ',' << buf;
  }
  os << '\n';
  for (int i = 0; i < g.n_theta(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", g.theta(i));
    os << buf;
    for (int j = 0; j < g.n_phi(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", f(i, j));
      os << ',' << buf;
    }
    os << '\n';
  }
}

json stagnation_to_json(const StagnationSet& s) {
  json a = json::array();
  for (const auto& p : s.polylines) {
    json v = json::array();
    for (const auto& x : p.vertices) v.push_back({x.theta, x.phi});
    a.push_back({{"class", to_string(p.cls)}, {"vertices", v}});
  }
  return a;
}

std::string sha256_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + p.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (is) {
    is.read(buf.data(), std::streamsize(buf.size()));
    EVP_DigestUpdate(ctx.get(), buf.data(), std::size_t(is.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::ostringstream os;
  for (unsigned int n = 0; n < len; ++n) os << std::hex << std::setw(2) << std::setfill('0') << int(md[n]);
  return os.str();
}

RunResult run_simulate(const SimulationConfig& c) {
  const Context cx = make_context(c);
  fs::create_directories(c.out);
  const std::vector<Snapshot> snaps = compute_all(cx, c.times);
  RunResult res;
  res.files = write_snapshots(c.out, snaps, [](std::size_t n) { return "t" + std::to_string(n); });

  if (c.check_translation) {
    // Every snapshot must be the rigid rotation of the first one.
    const auto& h = std::get<LinearHamiltonian>(c.hamiltonian);
    const Symbol first = symbol_of(evolve(cx.rho0, c.hamiltonian, snaps.front().t).op(), cx.basis);
    double err = 0.0;
    for (const auto& s : snaps) {
      const GridField moved = rotate_field(first, h, s.t - snaps.front().t, cx.grid);
      const GridField now = symbol_of(evolve(cx.rho0, c.hamiltonian, s.t).op(), cx.basis).on(cx.grid);
      err = std::max(err, (moved - now).max_abs());
    }
    res.translation_error = err;
    res.translation_ok = err <= 1e-10;
  }
  if (c.modes.frames) {
    const RunResult f = run_frames(c, c.out / "frames");
    res.files.insert(res.files.end(), f.files.begin(), f.files.end());
  }
  write_meta(c.out, "simulate", c, *cx.grid, c.times, res.files);
  res.files.push_back(c.out / "meta.json");
  return res;
}

RunResult run_frames(const SimulationConfig& c, const fs::path& dir) {
  const Context cx = make_context(c);
  fs::create_directories(dir);
  std::vector<double> taus(static_cast<std::size_t>(c.n_frames));
  for (int n = 0; n < c.n_frames; ++n) taus[std::size_t(n)] = c.tau_max * n / (c.n_frames - 1);
  const int width = std::max(4, int(std::to_string(c.n_frames - 1).size()));
  const std::vector<Snapshot> snaps = compute_all(cx, taus);
  RunResult res;
  res.files = write_snapshots(dir, snaps, [&](std::size_t n) { return tag("f", n, width); });
  write_meta(dir, "frames", c, *cx.grid, taus, res.files);
  res.files.push_back(dir / "meta.json");
  return res;
}

std::vector<CheckResult> run_verify(const SimulationConfig& c) {
  c.validate();
  const SpinRep rep = c.rep();
  const TensorBasis basis(rep);
  const GridPtr grid = build_grid(rep, c.oversample);
  std::mt19937_64 rng(20240611);
  std::vector<CheckResult> out;

  {
    double err = 0.0;
    const GridPtr g2 = build_grid(rep, 2.0);
    for (int n = 0; n < 20; ++n) {
      const DensityMatrix rho = random_state(rep, rng);
      const Operator a = random_observable(rep, rng);
      const Symbol wr = symbol_of(rho.op(), basis), wa = symbol_of(a, basis);
      const double q = rep.dim() / (4 * kPi) * integrate(wr.on(g2) * wa.on(g2));
      err = std::max(err, std::abs(q - (rho.mat() * a.mat()).trace().real()));
    }
    out.push_back({"overlap-vs-trace", err <= 1e-10, err, 1e-10});
  }

  const double chi = is_kerr(c.hamiltonian) ? std::get<KerrHamiltonian>(c.hamiltonian).chi : 1.0;
  const KerrHamiltonian kerr{chi == 0.0 ? 1.0 : chi};
  {
    const DensityMatrix rho = random_state(rep, rng);
    const GridField exact = symbol_of(Operator(rep, cplx(0, -1) * commutator(kerr.op(rep), rho.op()).mat()), basis).on(grid);
    const GridField phase = kerr_phase_space_rhs(symbol_of(rho.op(), basis), kerr.chi, grid);
    const double rel = (exact - phase).max_abs() / exact.max_abs();
    out.push_back({"kerr-equation", rel <= 1e-9, rel, 1e-9});
  }
  {
    const DensityMatrix rho0 = initial_state(c);
    double rel = 0.0;
    for (double tau : c.times) {
      const DensityMatrix rho = evolve_kerr(rho0, kerr, physical_time(kerr, tau));
      const GridField dwdt = exact_time_derivative(rho, kerr.op(rep)).on(grid);
      const double scale = dwdt.max_abs();
      if (scale == 0.0) continue;
      const auto r = continuity_residual(dwdt, kerr_current(symbol_of(rho.op(), basis), kerr.chi, grid));
      rel = std::max(rel, r.max_abs / scale);
    }
    out.push_back({"continuity-kerr", rel <= 1e-9, rel, 1e-9});
  }
  {
    const GridPtr g2 = build_grid(rep, 2.0);
    const LinearHamiltonian lin = is_kerr(c.hamiltonian) ? LinearHamiltonian{{0.4, -0.7, 1.1}}
                                                         : std::get<LinearHamiltonian>(c.hamiltonian);
    const DensityMatrix rho = random_state(rep, rng);
    const GridField dwdt = exact_time_derivative(rho, lin.op(rep)).on(g2);
    const double scale = dwdt.max_abs();
    const auto r = continuity_residual(dwdt, linear_current(symbol_of(rho.op(), basis), lin.a, g2));
    const double rel = scale > 0 ? r.max_abs / scale : r.max_abs;
    out.push_back({"continuity-linear", rel <= 1e-10, rel, 1e-10});
  }
  {
    std::vector<double> err;
    const GridPtr g = std::make_shared<SphereGrid>(16, 16);
    const SpectralField f = low_k_field();
    const GridField plain = synthesize(f, g);
    for (int two_s : {100, 200, 400}) {
      err.push_back((apply_gamma(f, SpinRep(two_s), g) - plain).max_abs() / plain.max_abs());
    }
    const double slope = std::log(err[0] / err[2]) / std::log(401.0 / 101.0);
    out.push_back({"gamma-scaling-slope", std::abs(slope - 2.0) <= 0.2, slope, 0.2});
  }
  {
    const CoherentLabel lab{1.1, 0.4};
    const GridField closed = coherent_wigner_closed_form(rep, lab, grid);
    const GridField trace =
        symbol_of(DensityMatrix::pure(rep, coherent_state(rep, lab)).op(), basis).on(grid);
    const double err = (closed - trace).max_abs();
    out.push_back({"closed-form-coherent", err <= 1e-10, err, 1e-10});
  }
  return out;
}

}  // namespace spinflow
