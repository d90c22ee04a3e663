#pragma once

#include <algorithm>
#include <random>

#include "spinflow/su2.hpp"
#include "spinflow/wigner.hpp"

namespace spinflow::testing {

inline Matrix random_complex(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix x(d, d);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) x(r, c) = cplx(n(rng), n(rng));
  }
  return x;
}

inline DensityMatrix random_density(SpinRep rep, std::mt19937_64& rng) {
  const Matrix x = random_complex(rep.dim(), rng);
  Matrix rho = x * x.adjoint();
  rho /= rho.trace();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix(Operator(rep, rho));
}

inline Operator random_hermitian(SpinRep rep, std::mt19937_64& rng) {
  const Matrix x = random_complex(rep.dim(), rng);
  return {rep, 0.5 * (x + x.adjoint())};
}

// Fixed real field with K <= 6 and only K + q even, so it is symmetric under
// theta -> pi - theta. Padded to the band limit of `rep`.
inline Symbol low_k_symbol(SpinRep rep) {
  SpectralField f(rep.band_limit());
  f(0, 0) = 3.5449077018110318;  // sqrt(4 pi)
  for (int k = 1; k <= std::min(6, rep.band_limit()); ++k) {
    for (int q = -k; q <= k; ++q) {
      if ((k + q) % 2 != 0) continue;
      const cplx c(0.3 / k, 0.1 * q / k);
      if (q > 0) {
        f(k, q) = c;
        f(k, -q) = ((q % 2) ? -1.0 : 1.0) * std::conj(c);
      } else if (q == 0) {
        f(k, 0) = c.real();
      }
    }
  }
  return {rep, f};
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace spinflow::testing
