#pragma once

#include <array>
#include <string>
#include <vector>

#include "spinflow/current.hpp"
#include "spinflow/dynamics.hpp"
#include "spinflow/sphere.hpp"

namespace spinflow {

enum class LineClass { EquatorTrivial, ClosedLoop, OpenCurve };

std::string to_string(LineClass c);

struct Vertex {
  double theta;
  double phi;
};

struct Polyline {
  LineClass cls;
  /// Closed polylines repeat their first vertex at the end.
  std::vector<Vertex> vertices;

  bool closed() const;
  /// Net number of turns around the polar axis.
  int phi_winding() const;
};

struct StagnationSet {
  std::vector<Polyline> polylines;

  std::size_t count(LineClass c) const;
  /// Closed loops lying entirely in the northern (theta < pi/2) or southern hemisphere.
  std::size_t closed_loops_north() const;
  std::size_t closed_loops_south() const;
};

/// Marching-squares zero contours of a scalar grid field, periodic in phi.
///
/// An edge is crossed when its two endpoint values have opposite signs and
/// both exceed `rel_threshold * max|f|` in magnitude. Saddle cells are split
/// using the cell-centre average. Lines that reach the first or last theta
/// row end there and are returned open.
std::vector<Polyline> zero_contours(const GridField& f, double rel_threshold = 1e-13);

/// Zero set of J_phi for currents with J_theta = 0.
///
/// When J_phi vanishes identically on the equator (`equator_factor`) the
/// equator is reported once as EquatorTrivial and the remaining lines are the
/// zero contours of J_phi / (sin cos). Otherwise J_phi is contoured directly
/// and a phi-wrapping loop confined to the equatorial cell band is classified
/// as EquatorTrivial. Throws UnsupportedTopologyError when J_theta != 0.
StagnationSet extract_stagnation_lines(const CurrentField& j);

/// m_k = ((2S+1)/(4 pi))^k times the integral of W^k; exact when the grid
/// resolves degree 2Sk.
double wigner_moment(const GridField& w, SpinRep rep, int k);

struct MomentDerivatives {
  double first;
  double second;
};

/// Central differences of m_k(t) at t = 0 along the exact evolution.
MomentDerivatives moment_initial_derivatives(const DensityMatrix& rho0, const Hamiltonian& h,
                                             int k, double delta, const GridPtr& grid);

struct SpinStatistics {
  std::array<double, 3> mean;
  std::array<std::array<double, 3>, 3> covariance;
  /// Eigenvalues of the covariance restricted to the plane normal to the mean spin.
  double min_transverse_variance;
  double max_transverse_variance;
  /// min_transverse_variance / (S/2).
  double squeezing_ratio;
};

SpinStatistics spin_statistics(const DensityMatrix& rho);

}  // namespace spinflow
