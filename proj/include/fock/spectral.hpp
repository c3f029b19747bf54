#pragma once

// Root tracking on the spectral curve P(z, w) = 0 over circles |z| = r,
// amoeba membership and the Ronkin function.

#include <Eigen/Dense>

#include <vector>

#include "fock/kasteleyn.hpp"

namespace fock {

// Torus |z| = exp(By), |w| = exp(-Bx).
struct MagneticField {
  double Bx = 0, By = 0;
  double rz() const { return std::exp(By); }
  double rw() const { return std::exp(-Bx); }
};

// Nonzero roots of w -> P(z, w), with multiplicity.
std::vector<cd> roots_in_w(const CharPoly& P, cd z);

// Angles theta in [0, 2 pi) at which a root w(z) crosses |w| = rw while
// z = rz e^{i theta} runs once around the circle, sorted.
std::vector<double> root_crossings(const CharPoly& P, double rz, double rw, int scan = 512);

struct AmoebaReport {
  bool inside = false;
  int min_count = 0, max_count = 0;  // roots with |w| < rw along the z circle
  double min_gap = 0;                // min | log|w_j| - log rw | over the samples
};

AmoebaReport amoeba_sample(const CharPoly& P, const MagneticField& B, int scan = 512, double tol = 1e-9);

struct RonkinConfig {
  double rel_tol = 1e-12;
  double abs_tol = 1e-13;
};

// Torus average of log|P| over |z| = rz, |w| = rw; the inner average is exact
// by Jensen's formula and the outer one is split at root crossings.
double ronkin(const CharPoly& P, const MagneticField& B, const RonkinConfig& cfg = {});

}  // namespace fock
