#include "fock/surface.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fock/quadrature.hpp"

namespace fock {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXd probe_vector(int g, double a, double b) {
  Eigen::VectorXd e(g);
  for (int i = 0; i < g; ++i) e[i] = a + b * i;
  return e;
}

}  // namespace

// ---------------------------------------------------------------- MCurve

cd MCurve::zeta_at(cd coord, const ThetaChar& odd) const {
  const int g = genus();
  Eigen::VectorXcd grad = grad_theta_char(odd, Eigen::VectorXcd::Zero(g).eval(), omega_, cfg_.theta);
  return (grad.transpose() * forms_at(coord))(0, 0);
}

LatticeCoords MCurve::lattice_coords(const Eigen::VectorXcd& v) const {
  LatticeCoords c;
  c.b = omega_.imag_inverse() * v.imag();
  c.a = v.real() - omega_.omega().real() * c.b;
  return c;
}

Eigen::VectorXcd MCurve::reduce_mod_lattice(const Eigen::VectorXcd& v) const {
  LatticeCoords c = lattice_coords(v);
  Eigen::VectorXd m = c.a.array().floor().matrix(), n = c.b.array().floor().matrix();
  return v - m.cast<cd>() - omega_.omega() * n.cast<cd>();
}

double MCurve::lattice_distance(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) const {
  LatticeCoords c = lattice_coords(u - v);
  Eigen::VectorXd a = c.a - c.a.array().round().matrix();
  Eigen::VectorXd b = c.b - c.b.array().round().matrix();
  return (a.cast<cd>() + omega_.omega() * b.cast<cd>()).norm();
}

std::vector<OvalPoint> MCurve::theta_divisor(const Eigen::VectorXd& e) const {
  const int g = genus();
  std::vector<OvalPoint> out;
  for (int j = 1; j <= g; ++j) {
    Eigen::VectorXcd l0 = at_oval({j, 0.0}).lift;
    Eigen::VectorXd b = lattice_coords(l0).b;
    ThetaChar chr{(2.0 * b).array().round().cast<int>().matrix(), Eigen::VectorXi::Zero(g)};
    auto h = [&](double s) {
      Eigen::VectorXcd l = at_oval({j, s}).lift;
      Eigen::VectorXcd z = (e + lattice_coords(l).a).cast<cd>();
      return theta_char(chr, z, omega_, cfg_.theta).real();
    };
    const int n = 64;
    std::vector<double> vals(n + 1);
    for (int i = 0; i <= n; ++i) vals[i] = h(double(i) / n);
    int changes = 0, at = -1;
    for (int i = 0; i < n; ++i) {
      if ((vals[i] > 0) != (vals[i + 1] > 0)) {
        ++changes;
        at = i;
      }
    }
    if (changes != 1)
      throw Error(ErrorCode::Degenerate, "theta divisor scan found " + std::to_string(changes) +
                                             " sign changes on oval " + std::to_string(j));
    double s = quad::bracketed_root(h, double(at) / n, double(at + 1) / n, 1e-14);
    out.push_back({j, s - std::floor(s)});
  }
  return out;
}

Eigen::VectorXcd MCurve::riemann_from_probe(const Eigen::VectorXd& e) const {
  Eigen::VectorXcd d = e.cast<cd>();
  for (const OvalPoint& p : theta_divisor(e)) d += at_oval(p).lift;
  return reduce_mod_lattice(d);
}

double MCurve::riemann_residual(const Eigen::VectorXd& e) const {
  Eigen::VectorXcd d = e.cast<cd>();
  for (const OvalPoint& p : theta_divisor(e)) d += at_oval(p).lift;
  return lattice_distance(d, delta_);
}

void MCurve::finish_setup() {
  const int g = genus();
  delta_ = riemann_from_probe(probe_vector(g, 0.1, 0.17));
  Eigen::VectorXcd other = riemann_from_probe(probe_vector(g, 0.43, 0.29));
  if (lattice_distance(delta_, other) > 1e-6)
    throw Error(ErrorCode::CalibrationFailure, "Riemann constant depends on the probe");
  Eigen::VectorXd b = lattice_coords(delta_).b;
  Eigen::VectorXd off = (b.array() - 0.5) - (b.array() - 0.5).round();
  if (off.cwiseAbs().maxCoeff() > 1e-6)
    throw Error(ErrorCode::CalibrationFailure, "Riemann constant is not in the half-period class");
}

// ---------------------------------------------------------------- Genus1Curve

Genus1Curve::Genus1Curve(double tau_im, SurfaceConfig cfg) : tau_im_(tau_im) {
  if (!(tau_im > 0) || !std::isfinite(tau_im))
    throw Error(ErrorCode::NonPositiveDefinite, "tau must have positive imaginary part");
  Eigen::MatrixXcd om(1, 1);
  om(0, 0) = cd(0, tau_im);
  omega_ = PeriodMatrix(om);
  cfg_ = cfg;
  finish_setup();
}

std::string Genus1Curve::describe() const {
  std::ostringstream os;
  os << "genus1(tau=" << tau_im_ << "i)";
  return os.str();
}

PointLift Genus1Curve::at_oval(const OvalPoint& p) const {
  if (p.oval < 0 || p.oval > 1) throw Error(ErrorCode::InputError, "oval index out of range");
  PointLift r;
  r.coord = cd(p.s, p.oval == 1 ? 0.5 * tau_im_ : 0.0);
  r.lift = Eigen::VectorXcd::Constant(1, r.coord);
  r.oval = p.oval;
  r.s = p.s;
  return r;
}

Eigen::VectorXcd Genus1Curve::oval_velocity(const OvalPoint&) const { return Eigen::VectorXcd::Ones(1); }

cd Genus1Curve::oval_coord(const OvalPoint& p) const { return at_oval(p).coord; }

PointLift Genus1Curve::interior(cd u, double) const {
  if (!in_sigma_plus(u)) throw Error(ErrorCode::InputError, "point is not in the interior of Sigma+");
  PointLift r;
  r.coord = u;
  r.lift = Eigen::VectorXcd::Constant(1, u);
  return r;
}

bool Genus1Curve::in_sigma_plus(cd u) const { return u.imag() > 0 && u.imag() < 0.5 * tau_im_; }

Eigen::VectorXcd Genus1Curve::forms_at(cd) const { return Eigen::VectorXcd::Ones(1); }

Eigen::VectorXcd Genus1Curve::transport(cd from, const Eigen::VectorXcd& lift_from, cd to) const {
  return lift_from + Eigen::VectorXcd::Constant(1, to - from);
}

// ---------------------------------------------------------------- HyperellipticCurve

HyperellipticCurve::HyperellipticCurve(std::vector<double> lam, SurfaceConfig cfg)
    : lam_(std::move(lam)), kappa_(0, -1) {
  cfg_ = cfg;
  const int n = int(lam_.size());
  if (n < 4 || n % 2 != 0) throw Error(ErrorCode::InputError, "need 2g+2 branch points with g >= 1");
  double span = lam_.back() - lam_.front();
  for (int i = 0; i + 1 < n; ++i)
    if (!(lam_[i + 1] - lam_[i] > 1e-6 * std::max(1.0, span)))
      throw Error(ErrorCode::InputError, "branch points must be strictly increasing and separated");
  g_ = n / 2 - 1;

  Eigen::MatrixXcd M(g_, g_);
  for (int j = 1; j <= g_; ++j) M.row(j - 1) = raw_oval_integral(j, 0.0, 1.0).transpose();
  C_ = M.transpose().inverse();

  gamma_.assign(g_ + 1, Eigen::VectorXcd::Zero(g_));
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(g_);
  for (int m = 2 * g_ - 1; m >= 1; --m) {
    acc -= raw_cut_integral(m);
    if (m % 2 == 1) gamma_[(m + 1) / 2] = acc;
  }

  Eigen::MatrixXcd om(g_, g_);
  for (int j = 1; j <= g_; ++j) {
    Eigen::VectorXcd col = cd(0, 2) * (C_ * gamma_[j]).imag().cast<cd>();
    if (col[j - 1].imag() < 0) col = -col;
    om.col(j - 1) = col;
  }
  double asym = (om - om.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8) throw Error(ErrorCode::QuadratureFailure, "computed period matrix is not symmetric");
  om = 0.5 * (om + om.transpose()).eval();
  omega_ = PeriodMatrix(om);
  finish_setup();
}

std::string HyperellipticCurve::describe() const {
  std::ostringstream os;
  os << "hyperelliptic(g=" << g_ << ", branch_points=[";
  for (size_t i = 0; i < lam_.size(); ++i) os << (i ? "," : "") << lam_[i];
  os << "])";
  return os.str();
}

HyperellipticCurve::Interval HyperellipticCurve::interval(int oval) const {
  if (oval < 0 || oval > g_) throw Error(ErrorCode::InputError, "oval index out of range");
  Interval iv;
  if (oval == 0) {
    iv.lo = 2 * g_;
    iv.sheet = 1;
  } else {
    iv.lo = 2 * oval - 2;
    iv.sheet = -1;
  }
  iv.hi = iv.lo + 1;
  iv.c = 0.5 * (lam_[iv.lo] + lam_[iv.hi]);
  iv.h = 0.5 * (lam_[iv.hi] - lam_[iv.lo]);
  return iv;
}

cd HyperellipticCurve::y_upper(cd x) const {
  if (x.imag() < 0) return std::conj(y_upper(std::conj(x)));
  cd y = kappa_;
  for (double l : lam_) y *= std::sqrt(cd(x.real() - l, std::abs(x.imag())));
  return y;
}

Eigen::VectorXcd HyperellipticCurve::raw_forms_upper(cd x) const {
  cd y = y_upper(x);
  if (std::abs(y) < 1e-300) throw Error(ErrorCode::BranchPoint, "forms requested at a branch point");
  Eigen::VectorXcd v(g_);
  cd p = 1.0;
  for (int k = 0; k < g_; ++k) {
    v[k] = p / y;
    p *= x;
  }
  return v;
}

// dx/y along an oval is 2 pi ds / (sheet * kappa * i^N * sqrt|r(x)|), where r omits the
// two endpoints of the interval and N counts branch points above it.
Eigen::VectorXcd HyperellipticCurve::raw_oval_density(int oval, double s) const {
  Interval iv = interval(oval);
  const double x = iv.c - iv.h * std::cos(2 * kPi * s);
  double r = 1;
  for (int i = 0; i < int(lam_.size()); ++i)
    if (i != iv.lo && i != iv.hi) r *= std::abs(x - lam_[i]);
  const int N = int(lam_.size()) - iv.hi;
  cd phase = iv.sheet * kappa_ * std::pow(cd(0, 1), N);
  cd q = 2 * kPi / (phase * std::sqrt(r));
  Eigen::VectorXcd v(g_);
  double p = 1;
  for (int k = 0; k < g_; ++k) {
    v[k] = q * p;
    p *= x;
  }
  return v;
}

Eigen::VectorXcd HyperellipticCurve::raw_oval_integral(int oval, double s0, double s1) const {
  Eigen::VectorXcd out(g_);
  if (s0 == 0.0 && s1 == 1.0) {
    // full turn: periodic trapezoid, doubled until stable
    Eigen::VectorXcd prev;
    for (int n = 16; n <= (1 << 18); n *= 2) {
      Eigen::VectorXcd sum = Eigen::VectorXcd::Zero(g_);
      for (int i = 0; i < n; ++i) sum += raw_oval_density(oval, double(i) / n);
      sum /= double(n);
      if (prev.size() && (sum - prev).norm() < 0.1 * cfg_.tol * std::max(1.0, sum.norm())) return sum;
      prev = sum;
    }
    throw Error(ErrorCode::QuadratureFailure, "oval period did not converge");
  }
  quad::AdaptiveConfig qc{0.1 * cfg_.tol, 0.1 * cfg_.tol, 2000};
  for (int k = 0; k < g_; ++k)
    out[k] = quad::adaptive<cd>([&](double s) { return raw_oval_density(oval, s)[k]; }, s0, s1, qc);
  return out;
}

// integral of x^{k-1}/y over [lam_m, lam_{m+1}] with boundary values from above
Eigen::VectorXcd HyperellipticCurve::raw_cut_integral(int m) const {
  const double mid = 0.5 * (lam_[m] + lam_[m + 1]), half = 0.5 * (lam_[m + 1] - lam_[m]);
  const int N = int(lam_.size()) - 1 - m;
  const cd phase = kappa_ * std::pow(cd(0, 1), N);
  auto rule = [&](int n) {
    Eigen::VectorXcd sum = Eigen::VectorXcd::Zero(g_);
    for (int i = 0; i < n; ++i) {
      double th = (i + 0.5) * kPi / n;
      double x = mid - half * std::cos(th);
      double r = 1;
      for (int l = 0; l < int(lam_.size()); ++l)
        if (l != m && l != m + 1) r *= std::abs(x - lam_[l]);
      double p = 1 / std::sqrt(r);
      for (int k = 0; k < g_; ++k) {
        sum[k] += p;
        p *= x;
      }
    }
    return Eigen::VectorXcd(sum * (kPi / n) / phase);
  };
  Eigen::VectorXcd prev = rule(16);
  for (int n = 32; n <= (1 << 18); n *= 2) {
    Eigen::VectorXcd cur = rule(n);
    if ((cur - prev).norm() < 0.1 * cfg_.tol * std::max(1.0, cur.norm())) return cur;
    prev = cur;
  }
  throw Error(ErrorCode::QuadratureFailure, "cut integral did not converge");
}

// Panels are refined until each is short compared with its distance to the branch points.
Eigen::VectorXcd HyperellipticCurve::raw_segment(cd a, cd b) const {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(g_);
  const quad::GaussLegendre& gl = quad::gauss_legendre(16);
  auto dist = [&](cd z) {
    double d = 1e300;
    for (double l : lam_) d = std::min(d, std::abs(z - l));
    return d;
  };
  std::vector<std::tuple<double, double, int>> todo{{0.0, 1.0, 0}};
  while (!todo.empty()) {
    auto [t0, t1, depth] = todo.back();
    todo.pop_back();
    cd z0 = a + t0 * (b - a), z1 = a + t1 * (b - a);
    double len = std::abs(z1 - z0);
    double d = dist(0.5 * (z0 + z1)) - 0.5 * len;
    if (len > 0.5 * d && depth < 48) {
      double tm = 0.5 * (t0 + t1);
      todo.push_back({t0, tm, depth + 1});
      todo.push_back({tm, t1, depth + 1});
      continue;
    }
    cd m = 0.5 * (z0 + z1), h = 0.5 * (z1 - z0);
    for (int i = 0; i < gl.x.size(); ++i) out += (gl.w[i] * h) * raw_forms_upper(m + h * gl.x[i]);
  }
  return out;
}

PointLift HyperellipticCurve::at_oval(const OvalPoint& p) const {
  Interval iv = interval(p.oval);
  const double turns = std::floor(p.s), f = p.s - turns;
  Eigen::VectorXcd raw;
  if (p.oval == 0) {
    raw = raw_oval_integral(0, 0.0, f);
  } else {
    raw = gamma_[p.oval] + raw_oval_integral(p.oval, 0.5, f);
  }
  PointLift r;
  r.lift = C_ * raw;
  if (turns != 0) {
    if (p.oval == 0)
      r.lift.array() += turns;
    else
      r.lift[p.oval - 1] += turns;
  }
  r.coord = iv.c - iv.h * std::cos(2 * kPi * f);
  r.oval = p.oval;
  r.s = p.s;
  return r;
}

Eigen::VectorXcd HyperellipticCurve::oval_velocity(const OvalPoint& p) const {
  return C_ * raw_oval_density(p.oval, p.s);
}

cd HyperellipticCurve::oval_coord(const OvalPoint& p) const {
  Interval iv = interval(p.oval);
  return iv.c - iv.h * std::cos(2 * kPi * p.s);
}

PointLift HyperellipticCurve::interior(cd x, double s_cross) const {
  if (!in_sigma_plus(x)) throw Error(ErrorCode::PathAmbiguous, "interior points must lie in the upper half plane");
  const double f = s_cross - std::floor(s_cross);
  if (!(f > 1e-6 && f < 0.5 - 1e-6))
    throw Error(ErrorCode::PathAmbiguous, "crossing parameter must lie on the upper side of A0");
  PointLift base = at_oval({0, s_cross});
  PointLift r;
  r.lift = base.lift + C_ * raw_segment(base.coord, x);
  r.coord = x;
  return r;
}

bool HyperellipticCurve::in_sigma_plus(cd x) const { return x.imag() > 0; }

Eigen::VectorXcd HyperellipticCurve::forms_at(cd x) const {
  if (x.imag() < 0) return forms_at(std::conj(x)).conjugate();
  return C_ * raw_forms_upper(x);
}

Eigen::VectorXcd HyperellipticCurve::transport(cd from, const Eigen::VectorXcd& lift_from, cd to) const {
  if (from.imag() >= 0 && to.imag() >= 0) return lift_from + C_ * raw_segment(from, to);
  if (from.imag() <= 0 && to.imag() <= 0)
    return lift_from + (C_ * raw_segment(std::conj(from), std::conj(to))).conjugate();
  throw Error(ErrorCode::PathAmbiguous, "segment crosses the real axis");
}

std::shared_ptr<const MCurve> make_genus1(double tau_im, SurfaceConfig cfg) {
  return std::make_shared<Genus1Curve>(tau_im, cfg);
}

std::shared_ptr<const MCurve> make_hyperelliptic(std::vector<double> branch_points, SurfaceConfig cfg) {
  return std::make_shared<HyperellipticCurve>(std::move(branch_points), cfg);
}

}  // namespace fock
