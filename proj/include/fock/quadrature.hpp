#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <type_traits>
#include <utility>
#include <vector>

#include "fock/errors.hpp"

namespace fock::quad {

namespace detail {
// Scalars and Eigen vectors share the quadrature code.
template <class T>
double magnitude(const T& v) {
  if constexpr (std::is_arithmetic_v<T> || std::is_same_v<T, std::complex<double>>)
    return std::abs(v);
  else
    return v.size() ? double(v.cwiseAbs().maxCoeff()) : 0.0;
}
template <class T>
T zero_like(const T& v) {
  if constexpr (std::is_arithmetic_v<T> || std::is_same_v<T, std::complex<double>>)
    return T(0);
  else
    return T::Zero(v.rows(), v.cols());
}
}  // namespace detail

// Gauss-Legendre nodes and weights on [-1,1].
struct GaussLegendre {
  Eigen::VectorXd x, w;
};

inline const GaussLegendre& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, GaussLegendre> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  GaussLegendre gl{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  auto legendre = [n](double t, double& dp) {
    double p0 = 1, p1 = t;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (t * p1 - p0) / (t * t - 1);
    return p1;
  };
  for (int i = 0; i < n; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5)), dp = 0;
    for (int it = 0; it < 100; ++it) {
      double dt = legendre(t, dp) / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    legendre(t, dp);
    gl.x[i] = t;
    gl.w[i] = 2.0 / ((1 - t * t) * dp * dp);
  }
  return cache.emplace(n, gl).first->second;
}

template <class T, class F>
T gauss(F&& f, double a, double b, int n) {
  const GaussLegendre& gl = gauss_legendre(n);
  const double h = 0.5 * (b - a), m = 0.5 * (a + b);
  T s = gl.w[0] * f(m + h * gl.x[0]);
  for (int i = 1; i < n; ++i) s += gl.w[i] * f(m + h * gl.x[i]);
  return s * h;
}

namespace detail {
inline constexpr std::array<double, 8> xgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> wgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
std::pair<T, double> gk15(const std::function<T(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  T fc = f(c);
  T rk = fc * wgk[7];
  T rg = fc * wg[3];
  for (int j = 0; j < 7; ++j) {
    T f1 = f(c - h * xgk[j]);
    T f2 = f(c + h * xgk[j]);
    rk += wgk[j] * (f1 + f2);
    if (j % 2 == 1) rg += wg[j / 2] * (f1 + f2);
  }
  T diff = rk - rg;
  return {rk * h, magnitude(diff) * std::abs(h)};
}
}  // namespace detail

struct AdaptiveConfig {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_intervals = 4000;
};

// Adaptive Gauss-Kronrod 7/15, splitting the piece with the largest error estimate.
template <class T>
T adaptive(const std::function<T(double)>& f, double a, double b, const AdaptiveConfig& cfg = {},
           double* err_out = nullptr) {
  struct Piece {
    double a, b;
    T val;
    double err;
  };
  std::vector<Piece> pieces;
  auto [v0, e0] = detail::gk15<T>(f, a, b);
  pieces.push_back({a, b, v0, e0});
  T total = v0;
  double err = e0;
  while (err > std::max(cfg.abs_tol, cfg.rel_tol * detail::magnitude(total))) {
    if (int(pieces.size()) >= cfg.max_intervals)
      throw Error(ErrorCode::QuadratureFailure, "adaptive quadrature did not converge");
    size_t worst = 0;
    for (size_t i = 1; i < pieces.size(); ++i)
      if (pieces[i].err > pieces[worst].err) worst = i;
    Piece p = pieces[worst];
    double m = 0.5 * (p.a + p.b);
    auto [vl, el] = detail::gk15<T>(f, p.a, m);
    auto [vr, er] = detail::gk15<T>(f, m, p.b);
    pieces[worst] = {p.a, m, vl, el};
    pieces.push_back({m, p.b, vr, er});
    total = detail::zero_like(v0);
    err = 0;
    for (const Piece& q : pieces) {
      total += q.val;
      err += q.err;
    }
  }
  if (err_out) *err_out = err;
  return total;
}

// Brent root of a function that changes sign on [a,b].
template <class F>
double bracketed_root(F&& f, double a, double b, double tol = 1e-15, int max_iter = 200) {
  double fa = f(a), fb = f(b);
  if (fa == 0) return a;
  if (fb == 0) return b;
  if ((fa > 0) == (fb > 0)) throw Error(ErrorCode::Degenerate, "root is not bracketed");
  double c = a, fc = fa, d = b - a, e = d;
  for (int it = 0; it < max_iter; ++it) {
    if ((fb > 0) == (fc > 0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    double tol1 = 2 * 1e-16 * std::abs(b) + 0.5 * tol;
    double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double s = fb / fa, p, q;
      if (a == c) {
        p = 2 * xm * s;
        q = 1 - s;
      } else {
        double qq = fa / fc, r = fb / fc;
        p = s * (2 * xm * qq * (qq - r) - (b - a) * (r - 1));
        q = (qq - 1) * (r - 1) * (s - 1);
      }
      if (p > 0) q = -q;
      p = std::abs(p);
      if (2 * p < std::min(3 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : (xm > 0 ? tol1 : -tol1);
    fb = f(b);
  }
  return b;
}

}  // namespace fock::quad
