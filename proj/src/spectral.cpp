#include "fock/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fock/quadrature.hpp"

namespace fock {

namespace {

// Coefficients of w -> P(z, w) from the lowest to the highest w power,
// trimmed of vanishing ends; `low` receives the w exponent of the first one.
Eigen::VectorXcd w_coefficients(const CharPoly& P, cd z, int& low) {
  const int nx = int(P.c.rows()), ny = int(P.c.cols());
  Eigen::VectorXcd q = Eigen::VectorXcd::Zero(ny);
  for (int b = 0; b < ny; ++b) {
    cd acc = 0;
    for (int a = nx - 1; a >= 0; --a) acc = acc * z + P.c(a, b);
    q[b] = acc * std::pow(z, P.m0);
  }
  const double thr = 1e-14 * q.cwiseAbs().maxCoeff();
  int lo = 0, hi = ny - 1;
  while (lo < hi && std::abs(q[lo]) <= thr) ++lo;
  while (hi > lo && std::abs(q[hi]) <= thr) --hi;
  low = P.n0 + lo;
  return q.segment(lo, hi - lo + 1);
}

std::vector<cd> poly_roots(const Eigen::VectorXcd& q) {
  const int d = int(q.size()) - 1;
  std::vector<cd> out;
  if (d <= 0) return out;
  if (d == 1) {
    out.push_back(-q[0] / q[1]);
    return out;
  }
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 1; i < d; ++i) C(i, i - 1) = 1;
  for (int i = 0; i < d; ++i) C(i, d - 1) = -q[i] / q[d];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
  for (int i = 0; i < d; ++i) {
    cd r = es.eigenvalues()[i];
    // Newton polish.
    for (int it = 0; it < 3; ++it) {
      cd p = 0, dp = 0;
      for (int k = d; k >= 0; --k) {
        dp = dp * r + p;
        p = p * r + q[k];
      }
      if (dp == 0.0) break;
      cd step = p / dp;
      r -= step;
      if (std::abs(step) < 1e-16 * std::abs(r)) break;
    }
    out.push_back(r);
  }
  return out;
}

int count_inside(const CharPoly& P, cd z, double rw) {
  int n = 0;
  for (cd r : roots_in_w(P, z))
    if (std::abs(r) < rw) ++n;
  return n;
}

}  // namespace

std::vector<cd> roots_in_w(const CharPoly& P, cd z) {
  int low = 0;
  return poly_roots(w_coefficients(P, z, low));
}

std::vector<double> root_crossings(const CharPoly& P, double rz, double rw, int scan) {
  const double two_pi = 2 * std::numbers::pi;
  auto count_at = [&](double th) { return count_inside(P, std::polar(rz, th), rw); };
  std::vector<int> counts(scan + 1);
  for (int i = 0; i <= scan; ++i) counts[i] = count_at(two_pi * i / scan);
  std::vector<double> out;
  for (int i = 0; i < scan; ++i) {
    if (counts[i] == counts[i + 1]) continue;
    double a = two_pi * i / scan, b = two_pi * (i + 1) / scan;
    const int ca = counts[i];
    for (int it = 0; it < 60 && b - a > 1e-15; ++it) {
      double m = 0.5 * (a + b);
      if (count_at(m) == ca)
        a = m;
      else
        b = m;
    }
    out.push_back(0.5 * (a + b));
  }
  return out;
}

AmoebaReport amoeba_sample(const CharPoly& P, const MagneticField& B, int scan, double tol) {
  AmoebaReport r;
  const double rz = B.rz(), lrw = -B.Bx;
  r.min_count = INT32_MAX;
  r.max_count = -1;
  r.min_gap = INFINITY;
  for (int i = 0; i < scan; ++i) {
    cd z = std::polar(rz, 2 * std::numbers::pi * (i + 0.5) / scan);
    int n = 0;
    for (cd w : roots_in_w(P, z)) {
      double gap = std::log(std::abs(w)) - lrw;
      r.min_gap = std::min(r.min_gap, std::abs(gap));
      if (gap < 0) ++n;
    }
    r.min_count = std::min(r.min_count, n);
    r.max_count = std::max(r.max_count, n);
  }
  r.inside = r.min_count != r.max_count || r.min_gap < tol;
  return r;
}

double ronkin(const CharPoly& P, const MagneticField& B, const RonkinConfig& cfg) {
  const double rz = B.rz(), rw = B.rw(), lrw = std::log(rw);
  const double two_pi = 2 * std::numbers::pi;
  std::function<double(double)> jensen = [&](double th) {
    int low = 0;
    Eigen::VectorXcd q = w_coefficients(P, std::polar(rz, th), low);
    double acc = std::log(std::abs(q[q.size() - 1])) + low * lrw;
    for (cd r : poly_roots(q)) acc += std::max(std::log(std::abs(r)), lrw);
    return acc;
  };
  std::vector<double> cuts = root_crossings(P, rz, rw);
  cuts.insert(cuts.begin(), 0.0);
  cuts.push_back(two_pi);
  quad::AdaptiveConfig ac;
  ac.abs_tol = cfg.abs_tol;
  ac.rel_tol = cfg.rel_tol;
  double total = 0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i)
    if (cuts[i + 1] > cuts[i]) total += quad::adaptive<double>(jensen, cuts[i], cuts[i + 1], ac);
  return total / two_pi;
}

}  // namespace fock
