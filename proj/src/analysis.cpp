#include "spinflow/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "spinflow/errors.hpp"

namespace spinflow {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_angle(double d) {
  while (d > kPi) d -= 2.0 * kPi;
  while (d <= -kPi) d += 2.0 * kPi;
  return d;
}

// Crossing-point graph for marching squares. Node ids:
//   horizontal edge (row i, between columns j and j+1): i * n_phi + j
//   vertical edge (column j, between rows i and i+1):   n_theta * n_phi + i * n_phi + j
class ContourGraph {
 public:
  ContourGraph(const GridField& f, double threshold)
      : f_(f), grid_(f.grid()), thr_(threshold) {
    const std::size_t nodes =
        static_cast<std::size_t>(grid_.n_theta() * grid_.n_phi() +
                                 (grid_.n_theta() - 1) * grid_.n_phi());
    point_.resize(nodes);
    adj_.assign(nodes, {});
  }

  void build() {
    const int nt = grid_.n_theta(), np = grid_.n_phi();
    for (int i = 0; i + 1 < nt; ++i) {
      for (int j = 0; j < np; ++j) cell(i, j);
    }
  }

  std::vector<Polyline> trace() {
    std::vector<Polyline> out;
    std::vector<bool> used(adj_.size(), false);
    // Open curves first: walk from every degree-1 node.
    for (std::size_t n = 0; n < adj_.size(); ++n) {
      if (!used[n] && adj_[n].size() == 1) out.push_back(walk(n, used, false));
    }
    for (std::size_t n = 0; n < adj_.size(); ++n) {
      if (!used[n] && adj_[n].size() == 2) out.push_back(walk(n, used, true));
    }
    return out;
  }

 private:
  int h_id(int i, int j) const { return i * grid_.n_phi() + j; }
  int v_id(int i, int j) const {
    return grid_.n_theta() * grid_.n_phi() + i * grid_.n_phi() + j;
  }

  bool crosses(double a, double b) const {
    return std::abs(a) > thr_ && std::abs(b) > thr_ && ((a > 0) != (b > 0));
  }

  double t_of(double a, double b) const { return a / (a - b); }

  // Returns node id if the edge is crossed, recording its point once.
  std::optional<int> h_edge(int i, int j) {
    const int jn = (j + 1) % grid_.n_phi();
    const double a = f_(i, j), b = f_(i, jn);
    if (!crosses(a, b)) return std::nullopt;
    const int id = h_id(i, j);
    auto& p = point_[static_cast<std::size_t>(id)];
    if (!p) {
      const double dphi = 2.0 * kPi / grid_.n_phi();
      double phi = grid_.phi(j) + t_of(a, b) * dphi;
      if (phi >= 2.0 * kPi) phi -= 2.0 * kPi;
      p = Vertex{grid_.theta(i), phi};
    }
    return id;
  }

  std::optional<int> v_edge(int i, int j) {
    const double a = f_(i, j), b = f_(i + 1, j);
    if (!crosses(a, b)) return std::nullopt;
    const int id = v_id(i, j);
    auto& p = point_[static_cast<std::size_t>(id)];
    if (!p) {
      const double t = t_of(a, b);
      p = Vertex{grid_.theta(i) + t * (grid_.theta(i + 1) - grid_.theta(i)), grid_.phi(j)};
    }
    return id;
  }

  void link(int a, int b) {
    adj_[static_cast<std::size_t>(a)].push_back(b);
    adj_[static_cast<std::size_t>(b)].push_back(a);
  }

  void cell(int i, int j) {
    const int jn = (j + 1) % grid_.n_phi();
    const auto top = h_edge(i, j);
    const auto bottom = h_edge(i + 1, j);
    const auto left = v_edge(i, j);
    const auto right = v_edge(i, jn);
    std::vector<int> hits;
    for (const auto& e : {top, right, bottom, left}) {
      if (e) hits.push_back(*e);
    }
    if (hits.size() == 2) {
      link(hits[0], hits[1]);
    } else if (hits.size() == 4) {
      const double centre = 0.25 * (f_(i, j) + f_(i, jn) + f_(i + 1, j) + f_(i + 1, jn));
      if ((centre > 0) == (f_(i, j) > 0)) {
        // Top-left joins bottom-right through the centre; cut off the other corners.
        link(*top, *right);
        link(*left, *bottom);
      } else {
        link(*top, *left);
        link(*right, *bottom);
      }
    }
    // A single crossing means a corner sits below the threshold; the line
    // ends on that edge.
  }

  Polyline walk(std::size_t start, std::vector<bool>& used, bool closed) {
    Polyline line{LineClass::OpenCurve, {}};
    std::size_t prev = adj_.size();
    std::size_t cur = start;
    while (true) {
      used[cur] = true;
      line.vertices.push_back(*point_[cur]);
      std::size_t next = adj_.size();
      for (int nb : adj_[cur]) {
        const auto n = static_cast<std::size_t>(nb);
        if (n != prev && !used[n]) {
          next = n;
          break;
        }
      }
      if (next == adj_.size()) break;
      prev = cur;
      cur = next;
    }
    if (closed) {
      line.vertices.push_back(line.vertices.front());
      line.cls = LineClass::ClosedLoop;
    }
    return line;
  }

  const GridField& f_;
  const SphereGrid& grid_;
  double thr_;
  std::vector<std::optional<Vertex>> point_;
  std::vector<std::vector<int>> adj_;
};

}  // namespace

std::string to_string(LineClass c) {
  switch (c) {
    case LineClass::EquatorTrivial:
      return "equator-trivial";
    case LineClass::ClosedLoop:
      return "closed-loop";
    case LineClass::OpenCurve:
      return "open-curve";
  }
  return "unknown";
}

bool Polyline::closed() const {
  if (vertices.size() < 2) return false;
  const auto& a = vertices.front();
  const auto& b = vertices.back();
  return a.theta == b.theta && a.phi == b.phi;
}

int Polyline::phi_winding() const {
  double total = 0.0;
  for (std::size_t n = 1; n < vertices.size(); ++n) {
    total += wrap_angle(vertices[n].phi - vertices[n - 1].phi);
  }
  return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

std::size_t StagnationSet::count(LineClass c) const {
  return static_cast<std::size_t>(std::count_if(polylines.begin(), polylines.end(),
                                                [&](const Polyline& p) { return p.cls == c; }));
}

namespace {

std::size_t count_loops(const std::vector<Polyline>& lines, bool north) {
  std::size_t n = 0;
  for (const auto& p : lines) {
    if (p.cls != LineClass::ClosedLoop) continue;
    const bool inside = std::all_of(p.vertices.begin(), p.vertices.end(), [&](const Vertex& v) {
      return north ? v.theta < 0.5 * kPi : v.theta > 0.5 * kPi;
    });
    if (inside) ++n;
  }
  return n;
}

}  // namespace

std::size_t StagnationSet::closed_loops_north() const { return count_loops(polylines, true); }
std::size_t StagnationSet::closed_loops_south() const { return count_loops(polylines, false); }

std::vector<Polyline> zero_contours(const GridField& f, double rel_threshold) {
  ContourGraph g(f, rel_threshold * f.max_abs());
  g.build();
  return g.trace();
}

StagnationSet extract_stagnation_lines(const CurrentField& j) {
  if (!j.theta_vanishes()) {
    throw UnsupportedTopologyError(
        "extract_stagnation_lines: J_theta is nonzero; only azimuthal currents are supported");
  }
  const SphereGrid& grid = j.j_phi.grid();
  StagnationSet out;
  if (j.equator_factor) {
    const GridField reduced = j.j_phi.times_row(
        [&](int i) { return 1.0 / (grid.sin_theta(i) * grid.cos_theta(i)); });
    Polyline equator{LineClass::EquatorTrivial, {}};
    for (int c = 0; c < grid.n_phi(); ++c) equator.vertices.push_back({0.5 * kPi, grid.phi(c)});
    equator.vertices.push_back(equator.vertices.front());
    out.polylines.push_back(std::move(equator));
    for (auto& p : zero_contours(reduced)) out.polylines.push_back(std::move(p));
    return out;
  }
  const double band_lo = grid.theta(grid.n_theta() / 2 - 1);
  const double band_hi = grid.theta(grid.n_theta() / 2);
  for (auto& p : zero_contours(j.j_phi)) {
    const bool in_band = std::all_of(p.vertices.begin(), p.vertices.end(), [&](const Vertex& v) {
      return v.theta >= band_lo && v.theta <= band_hi;
    });
    if (p.cls == LineClass::ClosedLoop && in_band && p.phi_winding() != 0) {
      p.cls = LineClass::EquatorTrivial;
    }
    out.polylines.push_back(std::move(p));
  }
  return out;
}

double wigner_moment(const GridField& w, SpinRep rep, int k) {
  if (k < 1) throw std::invalid_argument("wigner_moment: k must be >= 1");
  GridField p = w;
  for (int n = 1; n < k; ++n) p = p * w;
  return std::pow(rep.dim() / (4.0 * kPi), k) * integrate(p);
}

MomentDerivatives moment_initial_derivatives(const DensityMatrix& rho0, const Hamiltonian& h,
                                             int k, double delta, const GridPtr& grid) {
  if (!(delta > 0.0)) throw std::invalid_argument("moment_initial_derivatives: delta must be > 0");
  const SpinRep rep = rho0.rep();
  const TensorBasis basis(rep);
  const auto moment_at = [&](double t) {
    const DensityMatrix rho = evolve(rho0, h, t);
    return wigner_moment(symbol_of(rho.op(), basis).on(grid), rep, k);
  };
  const double plus = moment_at(delta);
  const double zero = moment_at(0.0);
  const double minus = moment_at(-delta);
  return {(plus - minus) / (2.0 * delta), (plus - 2.0 * zero + minus) / (delta * delta)};
}

SpinStatistics spin_statistics(const DensityMatrix& rho) {
  const SpinRep rep = rho.rep();
  const auto ops = spin_operators(rep);
  const std::array<const Matrix*, 3> s{&ops.sx.mat(), &ops.sy.mat(), &ops.sz.mat()};
  SpinStatistics st{};
  for (int a = 0; a < 3; ++a) st.mean[a] = (rho.mat() * *s[a]).trace().real();
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const Matrix sym = 0.5 * (*s[a] * *s[b] + *s[b] * *s[a]);
      st.covariance[a][b] = (rho.mat() * sym).trace().real() - st.mean[a] * st.mean[b];
    }
  }
  Eigen::Vector3d n(st.mean[0], st.mean[1], st.mean[2]);
  if (n.norm() < 1e-12) {
    n = Eigen::Vector3d::UnitZ();
  } else {
    n.normalize();
  }
  // Any axis not parallel to n seeds the transverse frame.
  const Eigen::Vector3d seed =
      std::abs(n.z()) < 0.9 ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d::UnitX();
  const Eigen::Vector3d e1 = n.cross(seed).normalized();
  const Eigen::Vector3d e2 = n.cross(e1);
  Eigen::Matrix3d cov;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) cov(a, b) = st.covariance[a][b];
  }
  Eigen::Matrix2d plane;
  plane << e1.dot(cov * e1), e1.dot(cov * e2), e2.dot(cov * e1), e2.dot(cov * e2);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(plane);
  st.min_transverse_variance = eig.eigenvalues()(0);
  st.max_transverse_variance = eig.eigenvalues()(1);
  st.squeezing_ratio = st.min_transverse_variance / (0.5 * rep.spin());
  return st;
}

}  // namespace spinflow
