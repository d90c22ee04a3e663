#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "spinflow/analysis.hpp"
#include "spinflow/errors.hpp"
#include "spinflow/simulation.hpp"

namespace py = pybind11;
using namespace spinflow;

namespace {

py::array_t<double> to_array(const GridField& f) {
  const SphereGrid& g = f.grid();
  py::array_t<double> a({g.n_theta(), g.n_phi()});
  auto m = a.mutable_unchecked<2>();
  for (int i = 0; i < g.n_theta(); ++i)
    for (int j = 0; j < g.n_phi(); ++j) m(i, j) = f(i, j);
  return a;
}

py::dict grid_dict(const SphereGrid& g) {
  std::vector<double> th(g.n_theta()), ph(g.n_phi());
  for (int i = 0; i < g.n_theta(); ++i) th[i] = g.theta(i);
  for (int j = 0; j < g.n_phi(); ++j) ph[j] = g.phi(j);
  py::dict d;
  d["theta"] = py::array_t<double>(py::ssize_t(th.size()), th.data());
  d["phi"] = py::array_t<double>(py::ssize_t(ph.size()), ph.data());
  return d;
}

DensityMatrix density(double spin, const Matrix& rho) {
  const SpinRep rep = SpinRep::from_spin(spin);
  if (rho.rows() != rep.dim() || rho.cols() != rep.dim()) {
    throw std::invalid_argument("density matrix must be (2S+1) x (2S+1)");
  }
  return DensityMatrix(Operator(rep, rho));
}

Hamiltonian hamiltonian_from(const py::dict& h) {
  const std::string type = h.contains("type") ? h["type"].cast<std::string>() : "kerr";
  if (type == "kerr") return KerrHamiltonian{h.contains("chi") ? h["chi"].cast<double>() : 1.0};
  if (type == "linear") {
    LinearHamiltonian l;
    const char* keys[] = {"ax", "ay", "az"};
    for (int n = 0; n < 3; ++n)
      if (h.contains(keys[n])) l.a[n] = h[keys[n]].cast<double>();
    return l;
  }
  throw std::invalid_argument("hamiltonian type must be 'kerr' or 'linear'");
}

py::list lines_to_python(const StagnationSet& s) {
  py::list out;
  for (const auto& p : s.polylines) {
    std::vector<std::array<double, 2>> v;
    for (const auto& x : p.vertices) v.push_back({x.theta, x.phi});
    py::dict d;
    d["class"] = to_string(p.cls);
    d["vertices"] = v;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spin-S phase-space dynamics: Wigner functions, currents and stagnation lines";
  m.attr("__version__") = SPINFLOW_VERSION;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ResolutionError>(m, "ResolutionError", PyExc_ValueError);
  py::register_exception<UnsupportedTopologyError>(m, "UnsupportedTopologyError", PyExc_ValueError);

  m.def("grid", [](double spin, double oversample) { return grid_dict(*build_grid(SpinRep::from_spin(spin), oversample)); },
        py::arg("spin"), py::arg("oversample") = 1.0, "Gauss-Legendre theta nodes and uniform phi nodes.");

  m.def("coherent_state", [](double spin, double theta0, double phi0) {
        return Vector(coherent_state(SpinRep::from_spin(spin), {theta0, phi0}));
      }, py::arg("spin"), py::arg("theta0"), py::arg("phi0"),
      "Coherent state amplitudes in the basis m = S, S-1, ..., -S.");

  m.def("coherent_density", [](double spin, double theta0, double phi0) {
        const SpinRep rep = SpinRep::from_spin(spin);
        return Matrix(DensityMatrix::pure(rep, coherent_state(rep, {theta0, phi0})).mat());
      }, py::arg("spin"), py::arg("theta0"), py::arg("phi0"));

  m.def("wigner", [](double spin, const Matrix& rho, double oversample) {
        const DensityMatrix d = density(spin, rho);
        return to_array(wigner_function(d).on(build_grid(d.rep(), oversample)));
      }, py::arg("spin"), py::arg("rho"), py::arg("oversample") = 1.0,
      "Wigner function sampled on the grid, shape (n_theta, n_phi).");

  m.def("wigner_at", [](double spin, const Matrix& rho, double theta, double phi) {
        return wigner_function(density(spin, rho)).at(theta, phi);
      }, py::arg("spin"), py::arg("rho"), py::arg("theta"), py::arg("phi"));

  m.def("coherent_wigner_closed_form", [](double spin, double theta0, double phi0, double oversample) {
        const SpinRep rep = SpinRep::from_spin(spin);
        return to_array(coherent_wigner_closed_form(rep, {theta0, phi0}, build_grid(rep, oversample)));
      }, py::arg("spin"), py::arg("theta0"), py::arg("phi0"), py::arg("oversample") = 1.0);

  m.def("evolve", [](double spin, const Matrix& rho, const py::dict& h, double tau) {
        const DensityMatrix d = density(spin, rho);
        const Hamiltonian ham = hamiltonian_from(h);
        return Matrix(evolve(d, ham, physical_time(ham, tau)).mat());
      }, py::arg("spin"), py::arg("rho"), py::arg("hamiltonian"), py::arg("tau"),
      "Exact evolution to dimensionless time tau.");

  m.def("twa", [](double spin, const Matrix& rho0, double chi, double tau, double oversample) {
        const DensityMatrix d = density(spin, rho0);
        const KerrHamiltonian h{chi};
        return to_array(twa_evolve(wigner_function(d), h, physical_time(h, tau), build_grid(d.rep(), oversample)));
      }, py::arg("spin"), py::arg("rho0"), py::arg("chi"), py::arg("tau"), py::arg("oversample") = 1.0,
      "Truncated Wigner field under the Kerr flow.");

  m.def("kerr_current", [](double spin, const Matrix& rho, double chi, double oversample) {
        const DensityMatrix d = density(spin, rho);
        const CurrentField j = kerr_current(wigner_function(d), chi, build_grid(d.rep(), oversample));
        return py::make_tuple(to_array(j.j_theta), to_array(j.j_phi));
      }, py::arg("spin"), py::arg("rho"), py::arg("chi"), py::arg("oversample") = 1.0,
      "Quantum Wigner current (J_theta, J_phi) for H = chi Sz^2.");

  m.def("linear_current", [](double spin, const Matrix& rho, std::array<double, 3> a, double oversample) {
        const DensityMatrix d = density(spin, rho);
        const CurrentField j = linear_current(wigner_function(d), a, build_grid(d.rep(), oversample));
        return py::make_tuple(to_array(j.j_theta), to_array(j.j_phi));
      }, py::arg("spin"), py::arg("rho"), py::arg("a"), py::arg("oversample") = 1.0);

  m.def("stagnation_lines", [](double spin, const Matrix& rho, double chi, double oversample) {
        const DensityMatrix d = density(spin, rho);
        return lines_to_python(
            extract_stagnation_lines(kerr_current(wigner_function(d), chi, build_grid(d.rep(), oversample))));
      }, py::arg("spin"), py::arg("rho"), py::arg("chi"), py::arg("oversample") = 1.0);

  m.def("phi_multiplier", [](double spin, int k) { return phi_multiplier(SpinRep::from_spin(spin), k); },
        py::arg("spin"), py::arg("k"));

  m.def("moment", [](double spin, const Matrix& rho, int k) {
        const DensityMatrix d = density(spin, rho);
        return wigner_moment(wigner_function(d).on(build_grid(d.rep(), std::max(1.0, 0.5 * k + 0.5))), d.rep(), k);
      }, py::arg("spin"), py::arg("rho"), py::arg("k"), "m_k = ((2S+1)/(4 pi))^k times the integral of W^k.");

  m.def("spin_statistics", [](double spin, const Matrix& rho) {
        const SpinStatistics s = spin_statistics(density(spin, rho));
        py::dict d;
        d["mean"] = s.mean;
        d["covariance"] = s.covariance;
        d["min_transverse_variance"] = s.min_transverse_variance;
        d["max_transverse_variance"] = s.max_transverse_variance;
        d["squeezing_ratio"] = s.squeezing_ratio;
        return d;
      }, py::arg("spin"), py::arg("rho"));

  m.def("simulate", [](const std::string& config_json, const std::filesystem::path& out) {
        SimulationConfig c = config_from_json(nlohmann::json::parse(config_json));
        c.out = out;
        py::gil_scoped_release release;
        const RunResult r = run_simulate(c);
        return r.files;
      }, py::arg("config_json"), py::arg("out"), "Runs simulate with a JSON config string; returns written files.");

  m.def("verify", [](double spin) {
        SimulationConfig c;
        c.spin = spin;
        py::list out;
        for (const auto& r : run_verify(c)) {
          py::dict d;
          d["name"] = r.name;
          d["pass"] = r.pass;
          d["measured"] = r.measured;
          d["tolerance"] = r.tolerance;
          out.append(d);
        }
        return out;
      }, py::arg("spin"), "Oracle suite at the given spin.");
}
