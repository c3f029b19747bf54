#pragma once

// Riemann theta functions for small genus, evaluated by an ellipsoidal
// lattice sum recentred on the Gaussian peak. Values are carried as
// (mantissa, log-scale) pairs so that large imaginary arguments do not
// overflow before the caller combines them.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "fock/errors.hpp"

namespace fock {

template <class Real>
using Complex = std::complex<Real>;
template <class Real>
using CVector = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1>;
template <class Real>
using CMatrix = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <class Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
template <class Real>
using RMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

using cd = std::complex<double>;

template <class Real>
class BasicPeriodMatrix {
 public:
  BasicPeriodMatrix() = default;
  explicit BasicPeriodMatrix(const CMatrix<Real>& omega, Real tol_sym = Real(1e-8))
      : omega_(omega) {
    if (omega.rows() != omega.cols() || omega.rows() == 0)
      throw Error(ErrorCode::NonPositiveDefinite, "period matrix must be square and non-empty");
    if ((omega - omega.transpose()).cwiseAbs().maxCoeff() > tol_sym)
      throw Error(ErrorCode::NonPositiveDefinite, "period matrix is not symmetric");
    im_ = omega.imag();
    im_ = Real(0.5) * (im_ + im_.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<RMatrix<Real>> es(im_);
    lambda_min_ = es.eigenvalues().minCoeff();
    if (!(lambda_min_ > Real(0)))
      throw Error(ErrorCode::NonPositiveDefinite, "imaginary part is not positive definite");
    im_inv_ = im_.inverse();
    im_inv_diag_sqrt_ = im_inv_.diagonal().cwiseSqrt();
  }

  int genus() const { return int(omega_.rows()); }
  const CMatrix<Real>& omega() const { return omega_; }
  const RMatrix<Real>& imag() const { return im_; }
  const RMatrix<Real>& imag_inverse() const { return im_inv_; }
  const RVector<Real>& imag_inverse_diag_sqrt() const { return im_inv_diag_sqrt_; }
  Real lambda_min() const { return lambda_min_; }
  bool purely_imaginary(Real tol) const { return omega_.real().cwiseAbs().maxCoeff() <= tol; }

 private:
  CMatrix<Real> omega_;
  RMatrix<Real> im_, im_inv_;
  RVector<Real> im_inv_diag_sqrt_;
  Real lambda_min_ = 0;
};

using PeriodMatrix = BasicPeriodMatrix<double>;

// Half-integer characteristic stored as integer numerators over 2.
struct ThetaChar {
  Eigen::VectorXi p;   // 2 delta'
  Eigen::VectorXi pp;  // 2 delta''

  static ThetaChar zero(int g) { return {Eigen::VectorXi::Zero(g), Eigen::VectorXi::Zero(g)}; }
  static ThetaChar half(const Eigen::VectorXi& p, const Eigen::VectorXi& pp) { return {p, pp}; }

  int genus() const { return int(p.size()); }
  // 0 even, 1 odd: parity of 4 delta'.delta''.
  int parity() const { return int(((long long)p.dot(pp) % 2 + 2) % 2); }
  bool is_zero() const { return p.isZero() && pp.isZero(); }
  template <class Real = double>
  RVector<Real> delta_p() const { return p.cast<Real>() / Real(2); }
  template <class Real = double>
  RVector<Real> delta_pp() const { return pp.cast<Real>() / Real(2); }
  ThetaChar reduced() const {
    ThetaChar r{p, pp};
    for (int i = 0; i < genus(); ++i) {
      r.p[i] = ((p[i] % 2) + 2) % 2;
      r.pp[i] = ((pp[i] % 2) + 2) % 2;
    }
    return r;
  }
  bool operator==(const ThetaChar& o) const { return p == o.p && pp == o.pp; }
};

template <class Real>
struct BasicThetaConfig {
  Real tol = Real(1e-14);

  // Ellipsoid radius rho in the Im(Omega) metric: terms left out are below
  // exp(-pi rho^2) relative to the peak, with a margin for the lattice count.
  Real radius(int g) const {
    Real r2 = (-std::log(tol) + Real(3) + Real(g) * std::log(Real(10))) / std::numbers::pi_v<Real>;
    return std::sqrt(r2);
  }
};

using ThetaConfig = BasicThetaConfig<double>;

// theta(z) = mantissa * exp(log_scale); gradient shares the scale.
template <class Real>
struct ThetaSum {
  Complex<Real> mantissa;
  CVector<Real> grad;
  Real log_scale = 0;

  Complex<Real> value() const {
    if (log_scale > Real(700)) throw Error(ErrorCode::Overflow, "theta value exceeds double range");
    return mantissa * std::exp(log_scale);
  }
  CVector<Real> gradient() const {
    if (log_scale > Real(700)) throw Error(ErrorCode::Overflow, "theta gradient exceeds double range");
    return grad * std::exp(log_scale);
  }
  Complex<Real> log() const { return std::log(mantissa) + log_scale; }
};

namespace detail {

template <class Real, class F>
void for_each_in_ellipsoid(const RVector<Real>& center, const RMatrix<Real>& T,
                           const RVector<Real>& box, Real rho, F&& f) {
  const int g = int(center.size());
  Eigen::VectorXi lo(g), hi(g), n(g);
  for (int i = 0; i < g; ++i) {
    lo[i] = int(std::ceil(center[i] - rho * box[i]));
    hi[i] = int(std::floor(center[i] + rho * box[i]));
  }
  const Real rho2 = rho * rho;
  RVector<Real> d(g);
  n = lo;
  while (true) {
    d = n.cast<Real>() - center;
    if (d.dot(T * d) <= rho2) f(n);
    int k = 0;
    while (k < g) {
      if (++n[k] <= hi[k]) break;
      n[k] = lo[k];
      ++k;
    }
    if (k == g) break;
  }
}

}  // namespace detail

template <class Real>
ThetaSum<Real> theta_sum(const CVector<Real>& z, const BasicPeriodMatrix<Real>& om,
                         const BasicThetaConfig<Real>& cfg = {}, bool with_grad = true) {
  const int g = om.genus();
  const Real pi = std::numbers::pi_v<Real>;
  const RVector<Real> x = z.real(), y = z.imag();
  const RMatrix<Real>& T = om.imag();
  const RMatrix<Real> X = om.omega().real();
  const RVector<Real> c = -om.imag_inverse() * y;

  ThetaSum<Real> out;
  out.log_scale = pi * c.dot(T * c);
  out.mantissa = 0;
  out.grad = CVector<Real>::Zero(g);
  const Complex<Real> I(0, 1);
  RVector<Real> nr(g), d(g);
  detail::for_each_in_ellipsoid<Real>(c, T, om.imag_inverse_diag_sqrt(), cfg.radius(g),
                                      [&](const Eigen::VectorXi& n) {
                                        nr = n.cast<Real>();
                                        d = nr - c;
                                        Real mod = -pi * d.dot(T * d);
                                        Real ph = pi * nr.dot(X * nr) + Real(2) * pi * nr.dot(x);
                                        Complex<Real> term = std::exp(Complex<Real>(mod, ph));
                                        out.mantissa += term;
                                        if (with_grad) out.grad += (Real(2) * pi * I * term) * nr.template cast<Complex<Real>>();
                                      });
  return out;
}

template <class Real>
ThetaSum<Real> theta_char_sum(const ThetaChar& chr, const CVector<Real>& z,
                              const BasicPeriodMatrix<Real>& om,
                              const BasicThetaConfig<Real>& cfg = {}, bool with_grad = true) {
  if (chr.is_zero()) return theta_sum(z, om, cfg, with_grad);
  const Real pi = std::numbers::pi_v<Real>;
  const CVector<Real> dp = chr.delta_p<Real>().template cast<Complex<Real>>();
  const CVector<Real> dpp = chr.delta_pp<Real>().template cast<Complex<Real>>();
  const CVector<Real> shifted = z + om.omega() * dp + dpp;
  ThetaSum<Real> s = theta_sum(shifted, om, cfg, with_grad);
  const Complex<Real> I(0, 1);
  const Complex<Real> e = I * pi * ((dp.transpose() * om.omega() * dp)(0, 0) +
                                    Real(2) * (dp.transpose() * (z + dpp))(0, 0));
  const Complex<Real> phase = std::exp(Complex<Real>(0, e.imag()));
  ThetaSum<Real> out;
  out.log_scale = s.log_scale + e.real();
  out.mantissa = phase * s.mantissa;
  if (with_grad) out.grad = phase * (s.grad + (Real(2) * pi * I * s.mantissa) * dp);
  return out;
}

template <class Real>
Complex<Real> theta(const CVector<Real>& z, const BasicPeriodMatrix<Real>& om,
                    const BasicThetaConfig<Real>& cfg = {}) {
  return theta_sum(z, om, cfg, false).value();
}

template <class Real>
Complex<Real> theta_char(const ThetaChar& chr, const CVector<Real>& z,
                         const BasicPeriodMatrix<Real>& om, const BasicThetaConfig<Real>& cfg = {}) {
  return theta_char_sum(chr, z, om, cfg, false).value();
}

template <class Real>
CVector<Real> grad_theta(const CVector<Real>& z, const BasicPeriodMatrix<Real>& om,
                         const BasicThetaConfig<Real>& cfg = {}) {
  return theta_sum(z, om, cfg, true).gradient();
}

template <class Real>
CVector<Real> grad_theta_char(const ThetaChar& chr, const CVector<Real>& z,
                              const BasicPeriodMatrix<Real>& om,
                              const BasicThetaConfig<Real>& cfg = {}) {
  return theta_char_sum(chr, z, om, cfg, true).gradient();
}

template <class Real>
CVector<Real> grad_log_theta_char(const ThetaChar& chr, const CVector<Real>& z,
                                  const BasicPeriodMatrix<Real>& om,
                                  const BasicThetaConfig<Real>& cfg = {}) {
  ThetaSum<Real> s = theta_char_sum(chr, z, om, cfg, true);
  if (std::abs(s.mantissa) < cfg.tol * Real(100))
    throw Error(ErrorCode::ThetaZero, "theta vanishes at the requested point");
  return s.grad / s.mantissa;
}

template <class Real>
CVector<Real> grad_log_theta(const CVector<Real>& z, const BasicPeriodMatrix<Real>& om,
                             const BasicThetaConfig<Real>& cfg = {}) {
  return grad_log_theta_char(ThetaChar::zero(om.genus()), z, om, cfg);
}

// Odd characteristic with the largest gradient at the origin.
template <class Real>
ThetaChar pick_odd_characteristic(const BasicPeriodMatrix<Real>& om,
                                  const BasicThetaConfig<Real>& cfg = {}) {
  const int g = om.genus();
  ThetaChar best;
  Real best_norm = -1;
  const CVector<Real> zero = CVector<Real>::Zero(g);
  for (int a = 0; a < (1 << g); ++a) {
    for (int b = 0; b < (1 << g); ++b) {
      ThetaChar c{Eigen::VectorXi::Zero(g), Eigen::VectorXi::Zero(g)};
      for (int i = 0; i < g; ++i) {
        c.p[i] = (a >> i) & 1;
        c.pp[i] = (b >> i) & 1;
      }
      if (c.parity() != 1) continue;
      Real nrm = grad_theta_char(c, zero, om, cfg).norm();
      if (nrm > best_norm * (Real(1) + Real(1e-12))) {
        best_norm = nrm;
        best = c;
      }
    }
  }
  if (best_norm < cfg.tol)
    throw Error(ErrorCode::Degenerate, "every odd characteristic has vanishing gradient at 0");
  return best;
}

}  // namespace fock
