#include "fock/kasteleyn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace fock {

namespace {

cd fock_entry_at(const FockModel& m, int e, const Cell& c, const Eigen::VectorXd& t_lift);

Eigen::VectorXcd as_complex(const Eigen::VectorXd& v) { return v.cast<cd>(); }

// log theta[odd](x), any branch.
cd log_odd(const FockModel& m, const Eigen::VectorXcd& x) {
  ThetaSum<double> s = theta_char_sum(m.odd(), x, m.curve().period_matrix(), m.curve().config().theta, false);
  if (std::abs(s.mantissa) == 0.0) throw Error(ErrorCode::PolePoint, "reduced prime form vanishes");
  return s.log();
}

cd log_theta(const FockModel& m, const Eigen::VectorXcd& x) {
  ThetaSum<double> s = theta_sum(x, m.curve().period_matrix(), m.curve().config().theta, false);
  if (std::abs(s.mantissa) == 0.0) throw Error(ErrorCode::ThetaZero, "theta vanishes");
  return s.log();
}

double phase_distance(cd z, double target) {
  if (std::abs(z) == 0.0) return 2.0;
  return std::abs(z / std::abs(z) - target);
}

}  // namespace

// ---------------------------------------------------------------- model

FockModel::FockModel(std::shared_ptr<const MCurve> curve, PeriodicBipartiteGraph graph, std::vector<double> angles,
                     Eigen::VectorXd t, ModelOptions opt)
    : curve_(std::move(curve)), graph_(std::move(graph)), t_(std::move(t)), opt_(opt) {
  if (!curve_) throw Error(ErrorCode::InputError, "missing curve");
  const int g = curve_->genus();
  if (t_.size() != g) throw Error(ErrorCode::InputError, "t has the wrong dimension");
  tracks_ = extract_train_tracks(graph_);
  if (int(angles.size()) != tracks_.size()) throw Error(ErrorCode::InputError, "one angle per train-track expected");
  minimal_ = check_minimal(graph_, tracks_);
  if (opt_.strict && !minimal_.minimal) throw Error(ErrorCode::DegenerateGraph, "graph is not minimal");
  angles_ = make_angle_map(*curve_, std::move(angles));
  valid_ = validate_angle_map(tracks_, angles_);
  if (opt_.strict && !valid_.valid) throw Error(ErrorCode::DegenerateAngles, valid_.diagnostics);
  abel_ = discrete_abel_map(graph_, tracks_);
  odd_ = pick_odd_characteristic(curve_->period_matrix(), curve_->config().theta);
  // Periodicity is only defined for order-preserving angle maps.
  if (valid_.valid) {
    periodic_ = is_operator_periodic(tracks_, angles_, opt_.periodic_tol);
  } else {
    periodic_.max_deviation = INFINITY;
  }
  entries_.resize(graph_.n_edges());
  for (int e = 0; e < graph_.n_edges(); ++e) entries_[e] = fock_entry(*this, e);
}

FockModel FockModel::with_t(Eigen::VectorXd t) const {
  return FockModel(curve_, graph_, angles_.s, std::move(t), opt_);
}

FockModel FockModel::with_angles(std::vector<double> angles) const {
  return FockModel(curve_, graph_, std::move(angles), t_, opt_);
}

cd fock_entry(const FockModel& m, int e) { return fock_entry(m, e, m.t()); }

cd fock_entry(const FockModel& m, int e, const Eigen::VectorXd& t_lift) {
  return fock_entry_at(m, e, Cell::Zero(), t_lift);
}

cd fock_entry_at(const FockModel& m, int e, const Cell& c) { return fock_entry_at(m, e, c, m.t()); }

namespace {

cd fock_entry_at(const FockModel& m, int e, const Cell& c, const Eigen::VectorXd& t_lift) {
  const PeriodMatrix& om = m.curve().period_matrix();
  const ThetaConfig& cfg = m.curve().config().theta;
  const AngleMap& a = m.angles();
  const Eigen::VectorXd& al = a.lift[m.tracks().alpha[e]];
  const Eigen::VectorXd& be = a.lift[m.tracks().beta[e]];
  const PeriodicBipartiteGraph& g = m.graph();
  cd num = theta_char(m.odd(), as_complex(be - al), om, cfg);
  if (std::abs(num) < 1e3 * cfg.tol)
    throw Error(ErrorCode::DegenerateAngles, "edge " + std::to_string(e) + " has coincident angle lifts");
  FaceRef f = g.face_left(e), f2 = g.face_right(e);
  f.cell += c;
  f2.cell += c;
  cd d1 = theta(as_complex(t_lift + m.d_face(f)), om, cfg);
  cd d2 = theta(as_complex(t_lift + m.d_face(f2)), om, cfg);
  return num / (d1 * d2);
}

}  // namespace

cd face_weight(const FockModel& m, int f) { return face_weight(m.graph(), m.entries(), f); }

cd face_weight(const PeriodicBipartiteGraph& g, const std::vector<cd>& entries, int f) {
  // Darts alternate; entries on w->b darts go to the numerator.
  cd num = 1, den = 1;
  for (const Dart& d : g.face(f).darts) {
    cd k = entries[d.edge];
    if (d.from_white) {
      num *= k;
    } else {
      if (k == 0.0) throw Error(ErrorCode::ZeroEdge, "zero entry in a face weight denominator");
      den *= k;
    }
  }
  return num / den;
}

KasteleynReport check_kasteleyn_condition(const FockModel& m, double tol) {
  KasteleynReport r;
  for (int f = 0; f < m.graph().n_faces(); ++f) {
    FaceCheck c;
    c.face = f;
    c.degree = m.graph().face(f).degree();
    c.weight = face_weight(m, f);
    const int half = c.degree / 2;
    c.phase_error = phase_distance(c.weight, (half % 2 == 1) ? 1.0 : -1.0);
    r.max_error = std::max(r.max_error, c.phase_error);
    if (!(c.phase_error < tol)) {
      r.pass = false;
      r.failing.push_back(f);
    }
    r.faces.push_back(c);
  }
  return r;
}

// ---------------------------------------------------------------- K(z,w)

Eigen::MatrixXcd KasteleynMatrix::operator()(cd z, cd w) const {
  Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(n_white, n_black);
  for (const Term& t : terms) K(t.w, t.b) += t.coef * std::pow(z, t.offset.x()) * std::pow(w, t.offset.y());
  return K;
}

KasteleynMatrix kasteleyn_matrix(const PeriodicBipartiteGraph& g, const std::vector<cd>& entries) {
  KasteleynMatrix K;
  K.n_white = g.n_white();
  K.n_black = g.n_black();
  for (int e = 0; e < g.n_edges(); ++e) K.terms.push_back({g.edge(e).w, g.edge(e).b, entries[e], g.edge(e).offset});
  return K;
}

KasteleynMatrix kasteleyn_matrix(const FockModel& m) { return kasteleyn_matrix(m.graph(), m.entries()); }

Eigen::MatrixXcd build_K(const FockModel& m, cd z, cd w) { return kasteleyn_matrix(m)(z, w); }

// ---------------------------------------------------------------- P(z,w)

cd CharPoly::operator()(cd z, cd w) const {
  // Horner in both variables, then the monomial shift.
  cd acc = 0;
  for (int i = int(c.rows()) - 1; i >= 0; --i) {
    cd row = 0;
    for (int j = int(c.cols()) - 1; j >= 0; --j) row = row * w + c(i, j);
    acc = acc * z + row;
  }
  return acc * std::pow(z, m0) * std::pow(w, n0);
}

double CharPoly::norm() const { return c.size() ? c.cwiseAbs().maxCoeff() : 0.0; }

cd CharPoly::coefficient(int i, int j) const {
  int a = i - m0, b = j - n0;
  if (a < 0 || b < 0 || a >= c.rows() || b >= c.cols()) return 0;
  return c(a, b);
}

std::vector<Cell> CharPoly::support(double rel_tol) const {
  std::vector<Cell> out;
  const double thr = rel_tol * norm();
  for (int i = 0; i < c.rows(); ++i)
    for (int j = 0; j < c.cols(); ++j)
      if (std::abs(c(i, j)) > thr) out.push_back(Cell(m0 + i, n0 + j));
  return out;
}

std::vector<Cell> CharPoly::newton_corners(double rel_tol) const {
  std::vector<Cell> pts = support(rel_tol);
  std::sort(pts.begin(), pts.end(), [](const Cell& a, const Cell& b) {
    return a.x() != b.x() ? a.x() < b.x() : a.y() < b.y();
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  // Monotone chain, dropping collinear points.
  std::vector<Cell> hull(2 * pts.size());
  int k = 0;
  auto turn = [](const Cell& o, const Cell& a, const Cell& b) { return cross2(a - o, b - o); };
  for (const Cell& p : pts) {
    while (k >= 2 && turn(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (int i = int(pts.size()) - 2, lo = k + 1; i >= 0; --i) {
    while (k >= lo && turn(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

CharPoly char_poly(const KasteleynMatrix& K) {
  if (K.n_white != K.n_black) throw Error(ErrorCode::DegenerateGraph, "unbalanced fundamental domain");
  const int n = K.n_white;
  // Exponent box from per-row extremes.
  Eigen::VectorXi lo_x = Eigen::VectorXi::Constant(n, INT32_MAX), hi_x = Eigen::VectorXi::Constant(n, INT32_MIN);
  Eigen::VectorXi lo_y = lo_x, hi_y = hi_x;
  for (const auto& t : K.terms) {
    lo_x[t.w] = std::min(lo_x[t.w], t.offset.x());
    hi_x[t.w] = std::max(hi_x[t.w], t.offset.x());
    lo_y[t.w] = std::min(lo_y[t.w], t.offset.y());
    hi_y[t.w] = std::max(hi_y[t.w], t.offset.y());
  }
  CharPoly P;
  P.m0 = lo_x.sum();
  P.n0 = lo_y.sum();
  const int nx = hi_x.sum() - P.m0 + 1, ny = hi_y.sum() - P.n0 + 1;
  const double two_pi = 2 * std::numbers::pi;
  Eigen::MatrixXcd vals(nx, ny);
  for (int j = 0; j < nx; ++j)
    for (int k = 0; k < ny; ++k) {
      cd z = std::polar(1.0, two_pi * j / nx), w = std::polar(1.0, two_pi * k / ny);
      vals(j, k) = K(z, w).partialPivLu().determinant();
    }
  P.c = Eigen::MatrixXcd::Zero(nx, ny);
  for (int a = 0; a < nx; ++a)
    for (int b = 0; b < ny; ++b) {
      cd acc = 0;
      for (int j = 0; j < nx; ++j)
        for (int k = 0; k < ny; ++k) {
          double ph = -two_pi * (double((P.m0 + a) * j) / nx + double((P.n0 + b) * k) / ny);
          acc += vals(j, k) * std::polar(1.0, ph);
        }
      P.c(a, b) = acc / double(nx * ny);
    }
  const double thr = 1e-13 * P.norm();
  for (int a = 0; a < nx; ++a)
    for (int b = 0; b < ny; ++b)
      if (std::abs(P.c(a, b)) < thr) P.c(a, b) = 0;
  return P;
}

CharPoly char_poly(const FockModel& m) {
  if (!m.periodicity().periodic)
    throw Error(ErrorCode::PeriodicityRequired, "angle map does not give a periodic operator");
  return char_poly(kasteleyn_matrix(m));
}

// ---------------------------------------------------------------- spectral map

SpectralPoint spectral_point(const FockModel& m, const Eigen::VectorXcd& u) {
  SpectralPoint p;
  p.log_z = 0;
  p.log_w = 0;
  const auto& tracks = m.tracks().tracks;
  for (int T = 0; T < int(tracks.size()); ++T) {
    const Cell& h = tracks[T].homology;
    cd l;
    try {
      l = log_odd(m, u - as_complex(m.angles().lift[T]));
    } catch (const Error&) {
      throw Error(ErrorCode::AnglePole, "point coincides with a train-track angle");
    }
    p.log_z -= double(h.y()) * l;
    p.log_w += double(h.x()) * l;
  }
  p.z = std::exp(p.log_z);
  p.w = std::exp(p.log_w);
  return p;
}

Calibration calibrate_scale(const FockModel& m, const CharPoly& P, const std::vector<Eigen::VectorXcd>& probes,
                            double tol) {
  Calibration c;
  const double nrm = P.norm();
  for (const auto& u : probes) {
    SpectralPoint s = spectral_point(m, u);
    c.residual = std::max(c.residual, std::abs(P(c.lambda * s.z, c.mu * s.w)) / nrm);
  }
  if (!(c.residual < tol))
    throw Error(ErrorCode::CalibrationFailure, "spectral map does not land on the zero set of P");
  return c;
}

// ---------------------------------------------------------------- kernel

cd log_vertex_factor(const FockModel& m, const QuadVertex& x, const Eigen::VectorXcd& u) {
  const int r = m.tracks().size();
  Eigen::VectorXi D = x.kind == VertexKind::White ? m.abel().at_white(x.index, x.cell)
                                                  : m.abel().at_black(x.index, x.cell);
  Eigen::VectorXd d = lift_of(D, m.angles());
  cd acc = 0;
  for (int T = 0; T < r; ++T)
    if (D[T]) acc += double(D[T]) * log_odd(m, u - as_complex(m.angles().lift[T]));
  Eigen::VectorXcd tc = as_complex(m.t());
  if (x.kind == VertexKind::White) return acc + log_theta(m, tc + u + as_complex(d));
  return acc - log_theta(m, -tc + u - as_complex(d));
}

cd kernel_g(const FockModel& m, const QuadVertex& x, const QuadVertex& y, const Eigen::VectorXcd& u) {
  return std::exp(log_vertex_factor(m, y, u) - log_vertex_factor(m, x, u));
}

double right_kernel_residual(const FockModel& m, int w, const QuadVertex& x, const Eigen::VectorXcd& u) {
  cd sum = 0;
  double big = 0;
  for (int e : m.graph().edges_at_white(w)) {
    const GraphEdge& ge = m.graph().edge(e);
    cd term = m.entry(e) * kernel_g(m, QuadVertex::black(ge.b, ge.offset), x, u);
    sum += term;
    big = std::max(big, std::abs(term));
  }
  return std::abs(sum) / big;
}

double left_kernel_residual(const FockModel& m, int b, const QuadVertex& x, const Eigen::VectorXcd& u) {
  cd sum = 0;
  double big = 0;
  for (int e : m.graph().edges_at_black(b)) {
    const GraphEdge& ge = m.graph().edge(e);
    cd term = kernel_g(m, x, QuadVertex::white(ge.w, -ge.offset), u) * fock_entry_at(m, e, -ge.offset);
    sum += term;
    big = std::max(big, std::abs(term));
  }
  return std::abs(sum) / big;
}

double faydiff_residual(const FockModel& m, int e, const PointLift& p) {
  const MCurve& c = m.curve();
  const PeriodMatrix& om = c.period_matrix();
  const ThetaConfig& cfg = c.config().theta;
  const GraphEdge& ge = m.graph().edge(e);
  const Eigen::VectorXcd al = as_complex(m.angles().lift[m.tracks().alpha[e]]);
  const Eigen::VectorXcd be = as_complex(m.angles().lift[m.tracks().beta[e]]);
  Eigen::VectorXcd omega = c.forms_at(p.coord);
  cd lhs = m.entry(e) * kernel_g(m, QuadVertex::black(ge.b, ge.offset), QuadVertex::white(ge.w), p.lift) *
           c.zeta_at(p.coord, m.odd());
  // d/du log theta[odd](beta - u) = -grad log theta[odd](beta - u) . omega
  Eigen::VectorXcd dlog = -grad_log_theta_char(m.odd(), (be - p.lift).eval(), om, cfg) +
                          grad_log_theta_char(m.odd(), (al - p.lift).eval(), om, cfg);
  Eigen::VectorXcd tc = as_complex(m.t());
  Eigen::VectorXcd cj =
      grad_log_theta((tc + as_complex(m.d_face(m.graph().face_left(e)))).eval(), om, cfg) -
      grad_log_theta((tc + as_complex(m.d_face(m.graph().face_right(e)))).eval(), om, cfg);
  cd rhs = ((dlog + cj).transpose() * omega)(0, 0);
  return std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs));
}

// ---------------------------------------------------------------- Fay

double fay_residual(const PeriodMatrix& om, const ThetaChar& odd, const Eigen::VectorXcd& al,
                    const Eigen::VectorXcd& be, const Eigen::VectorXcd& ga, const Eigen::VectorXcd& u,
                    const Eigen::VectorXcd& s, const ThetaConfig& cfg) {
  auto E = [&](const Eigen::VectorXcd& x, const Eigen::VectorXcd& y) {
    return theta_char_sum(odd, (y - x).eval(), om, cfg, false);
  };
  auto th = [&](const Eigen::VectorXcd& x) { return theta_sum(x, om, cfg, false); };
  auto term = [&](const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    return th(s + u - a - b).log() + E(a, b).log() - E(a, u).log() - E(b, u).log() - th(s - a).log() -
           th(s - b).log();
  };
  cd l[3] = {term(al, be), term(be, ga), term(ga, al)};
  double ref = std::max({l[0].real(), l[1].real(), l[2].real()});
  cd sum = 0;
  for (cd x : l) sum += std::exp(x - ref);
  return std::abs(sum);
}

double fay_fock_residual(const PeriodMatrix& om, const ThetaChar& odd, const Eigen::VectorXcd& a,
                         const Eigen::VectorXcd& b, const Eigen::VectorXcd& c, const Eigen::VectorXcd& d,
                         const Eigen::VectorXcd& t, const ThetaConfig& cfg) {
  auto F = [&](const Eigen::VectorXcd& x, const Eigen::VectorXcd& y) {
    return theta_sum((x + y - t).eval(), om, cfg, false).log() +
           theta_char_sum(odd, (y - x).eval(), om, cfg, false).log();
  };
  cd l[3] = {F(a, b) + F(c, d), F(a, d) + F(b, c), F(a, c) + F(d, b)};
  double ref = std::max({l[0].real(), l[1].real(), l[2].real()});
  cd sum = 0;
  for (cd x : l) sum += std::exp(x - ref);
  return std::abs(sum);
}

FayReport check_fay(const MCurve& curve, int samples, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> U(0, 1);
  const int g = curve.genus();
  const PeriodMatrix& om = curve.period_matrix();
  const ThetaChar odd = pick_odd_characteristic(om, curve.config().theta);
  auto point = [&](int kind) -> Eigen::VectorXcd {
    if (kind <= g) return curve.at_oval({kind, U(gen)}).lift;
    if (curve.kind() == CurveKind::Genus1) {
      double tau = om.omega()(0, 0).imag();
      return Eigen::VectorXcd::Constant(1, cd(U(gen), tau * (0.05 + 0.4 * U(gen))));
    }
    const auto& lam = static_cast<const HyperellipticCurve&>(curve).branch_points();
    cd x(lam.front() - 0.5 + (lam.back() - lam.front() + 1) * U(gen), 0.1 + 1.5 * U(gen));
    return curve.interior(x, 0.05 + 0.4 * U(gen)).lift;
  };
  auto any = [&]() { return point(int(U(gen) * (g + 2))); };
  FayReport r;
  for (int k = 0; k < samples; ++k) {
    Eigen::VectorXcd a = any(), b = any(), c = any(), d = any();
    Eigen::VectorXcd s(g), t(g);
    for (int i = 0; i < g; ++i) {
      s[i] = cd(U(gen), 0.3 * (U(gen) - 0.5));
      t[i] = cd(U(gen), 0.3 * (U(gen) - 0.5));
    }
    r.fay = std::max(r.fay, fay_residual(om, odd, a, b, c, d, s, curve.config().theta));
    r.fay_fock = std::max(r.fay_fock, fay_fock_residual(om, odd, a, b, c, d, t, curve.config().theta));
    ++r.samples;
  }
  return r;
}

// ---------------------------------------------------------------- divisors

std::vector<OvalPoint> divisor_of_vertex(const FockModel& m, int w) {
  try {
    return m.curve().theta_divisor(m.t() + m.d_white(w));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Degenerate) throw Error(ErrorCode::NonGenericT, e.what());
    throw;
  }
}

double divisor_residual(const FockModel& m, int w) {
  Eigen::VectorXd e = m.t() + m.d_white(w);
  Eigen::VectorXcd d = as_complex(e);
  for (const OvalPoint& p : divisor_of_vertex(m, w)) d += m.curve().at_oval(p).lift;
  return m.curve().lattice_distance(d, m.curve().riemann_constant());
}

}  // namespace fock
