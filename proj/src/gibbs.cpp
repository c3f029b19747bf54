#include "fock/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "fock/quadrature.hpp"

namespace fock {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXcd as_complex(const Eigen::VectorXd& v) { return v.cast<cd>(); }

double frac(double x) { return x - std::floor(x); }

// True when b lies on the positive arc from a to c (all mod 1).
bool on_arc(double a, double b, double c) { return frac(b - a) < frac(c - a); }

cd log_odd(const FockModel& m, const Eigen::VectorXcd& x) {
  ThetaSum<double> s = theta_char_sum(m.odd(), x, m.curve().period_matrix(), m.curve().config().theta, false);
  if (std::abs(s.mantissa) == 0.0) throw Error(ErrorCode::PolePoint, "reduced prime form vanishes");
  return s.log();
}

Eigen::VectorXcd grad_log_odd(const FockModel& m, const Eigen::VectorXcd& x) {
  return grad_log_theta_char(m.odd(), x, m.curve().period_matrix(), m.curve().config().theta);
}

// Tracks with equal angles share one A0 point.
struct AnglePoint {
  double s;
  std::vector<int> tracks;
};

std::vector<AnglePoint> angle_points(const FockModel& m) {
  std::vector<int> ord = m.angles().order();
  std::vector<AnglePoint> out;
  for (int T : ord) {
    double s = m.angles().s[T];
    if (!out.empty() && std::abs(s - out.back().s) < 1e-12)
      out.back().tracks.push_back(T);
    else
      out.push_back({s, {T}});
  }
  return out;
}

// Coefficients c_j of the holomorphic part of the Faydiff decomposition.
Eigen::VectorXd faydiff_coefficients(const FockModel& m, int e) {
  const PeriodMatrix& om = m.curve().period_matrix();
  const ThetaConfig& cfg = m.curve().config().theta;
  Eigen::VectorXcd tc = as_complex(m.t());
  Eigen::VectorXcd cl = grad_log_theta((tc + as_complex(m.d_face(m.graph().face_left(e)))).eval(), om, cfg);
  Eigen::VectorXcd cr = grad_log_theta((tc + as_complex(m.d_face(m.graph().face_right(e)))).eval(), om, cfg);
  return (cl - cr).real();
}

// A0 parameter inside the largest angle gap, kept in (0, 1/2) for charts
// that only see the upper side of A0.
double free_crossing(const FockModel& m) {
  std::vector<AnglePoint> pts = angle_points(m);
  const bool half = m.curve().kind() == CurveKind::Hyperelliptic;
  const double hi = half ? 0.5 : 1.0;
  std::vector<double> cuts;
  for (const auto& p : pts) cuts.push_back(frac(p.s));
  cuts.push_back(0.0);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  double best = -1, where = 0.25;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] > hi + 1e-15) break;
    double gap = cuts[i + 1] - cuts[i];
    if (gap > best) {
      best = gap;
      where = 0.5 * (cuts[i] + cuts[i + 1]);
    }
  }
  return where;
}

// Straight chart path from (a, lift_a) to b; Gauss-Legendre panels whose
// count doubles until the integral settles. f(lift, dlift) -> T.
template <class T, class F>
T path_integral(const MCurve& c, cd a, const Eigen::VectorXcd& la, cd b, F&& f, double tol, T zero) {
  const quad::GaussLegendre& gl = quad::gauss_legendre(20);
  const cd dx = b - a;
  auto run = [&](int panels) {
    T acc = zero;
    Eigen::VectorXcd start = la;
    for (int p = 0; p < panels; ++p) {
      const double l0 = double(p) / panels, l1 = double(p + 1) / panels;
      const cd x0 = a + l0 * dx;
      for (int i = 0; i < gl.x.size(); ++i) {
        double lam = 0.5 * (l0 + l1) + 0.5 * (l1 - l0) * gl.x[i];
        cd x = a + lam * dx;
        Eigen::VectorXcd lift = c.transport(x0, start, x);
        Eigen::VectorXcd dl = c.forms_at(x) * dx;
        acc += (0.5 * (l1 - l0) * gl.w[i]) * f(lift, dl);
      }
      start = c.transport(x0, start, a + l1 * dx);
    }
    return acc;
  };
  T prev = run(4);
  for (int panels = 8; panels <= 1024; panels *= 2) {
    T cur = run(panels);
    if (quad::detail::magnitude(T(cur - prev)) <= tol * std::max(1.0, quad::detail::magnitude(cur))) return cur;
    prev = cur;
  }
  throw Error(ErrorCode::QuadratureFailure, "path integral did not converge");
}

// Start of every path into the interior: a point of A0 seen from the upper side.
PointLift path_start(const FockModel& m, double s) {
  if (m.curve().kind() == CurveKind::Hyperelliptic && !(frac(s) > 0 && frac(s) < 0.5))
    throw Error(ErrorCode::PathAmbiguous, "A0 point is not on the charted side");
  return m.curve().at_oval({0, s});
}

}  // namespace

const char* to_string(Phase p) {
  switch (p) {
    case Phase::Liquid: return "liquid";
    case Phase::Solid: return "solid";
    case Phase::Gaseous: return "gaseous";
  }
  return "unknown";
}

PhasePoint PhasePoint::on_oval(const MCurve& c, const OvalPoint& op) {
  PhasePoint p;
  p.oval = op.oval;
  p.phase = op.oval == 0 ? Phase::Solid : Phase::Gaseous;
  p.point = c.at_oval(op);
  return p;
}

PhasePoint PhasePoint::interior(const MCurve& c, cd coord, double s_cross) {
  PhasePoint p;
  p.phase = Phase::Liquid;
  p.oval = -1;
  p.s_cross = s_cross;
  p.point = c.interior(coord, s_cross);
  return p;
}

Phase classify_phase(const PhasePoint& p) {
  if (!p.point.on_oval()) return Phase::Liquid;
  return p.point.oval == 0 ? Phase::Solid : Phase::Gaseous;
}

MagneticField magnetic_field(const FockModel& m, const PhasePoint& p) {
  SpectralPoint sp = spectral_point(m, p.point.lift);
  return {-sp.log_w.real(), sp.log_z.real()};
}

MagneticField representative_field(const FockModel& m, const PhasePoint& p, double step) {
  MagneticField B = magnetic_field(m, p);
  if (p.phase == Phase::Liquid) return B;
  const MCurve& c = m.curve();
  Eigen::Vector2d dir = Eigen::Vector2d::Zero();
  if (p.phase == Phase::Solid) {
    // Move into the recession cone spanned by the two bounding tentacles.
    std::vector<AnglePoint> pts = angle_points(m);
    const double s0 = p.point.s;
    for (size_t i = 0; i < pts.size(); ++i) {
      const AnglePoint& a = pts[i];
      const AnglePoint& nb = pts[(i + 1) % pts.size()];
      if (!(on_arc(a.s, s0, nb.s) || pts.size() == 1)) continue;
      for (const AnglePoint* q : {&a, &nb}) {
        Eigen::Vector2d d = Eigen::Vector2d::Zero();
        for (int T : q->tracks) d += m.tracks().tracks[T].homology.cast<double>();
        dir += d.normalized();
      }
      break;
    }
  } else {
    // Toward the centroid of the oval image, which lies in the convex hole.
    const int n = 64;
    Eigen::Vector2d cen = Eigen::Vector2d::Zero();
    for (int i = 0; i < n; ++i) {
      SpectralPoint sp = spectral_point(m, c.at_oval({p.oval, (i + 0.5) / n}).lift);
      cen += Eigen::Vector2d(-sp.log_w.real(), sp.log_z.real());
    }
    cen /= n;
    dir = cen - Eigen::Vector2d(B.Bx, B.By);
    step = 0.5;
    return {B.Bx + step * dir.x(), B.By + step * dir.y()};
  }
  if (dir.norm() == 0) throw Error(ErrorCode::Degenerate, "no direction into the frozen component");
  dir.normalize();
  return {B.Bx + step * dir.x(), B.By + step * dir.y()};
}

double reference_s(const FockModel& m) {
  const auto& s = m.angles().s;
  auto [lo, hi] = std::minmax_element(s.begin(), s.end());
  return 0.5 * (*hi + *lo + 1.0);
}

// ---------------------------------------------------------------- Fourier

const Eigen::MatrixXcd& InverseBlocks::at(const Cell& c) const {
  for (size_t i = 0; i < offsets.size(); ++i)
    if (offsets[i] == c) return blocks[i];
  throw Error(ErrorCode::InputError, "offset not computed");
}

namespace {

// Samples of K^{-1} on the tensor grid.
struct FourierGrid {
  int N = 0;
  double rz = 1, rw = 1;
  std::vector<Eigen::MatrixXcd> inv;  // index j * N + k
  double min_abs_det = INFINITY;

  FourierGrid(const FockModel& m, const MagneticField& B, const FourierConfig& cfg) : N(cfg.order) {
    if (!m.periodicity().periodic)
      throw Error(ErrorCode::PeriodicityRequired, "Fourier inverse needs a periodic operator");
    rz = B.rz();
    rw = B.rw();
    KasteleynMatrix K = kasteleyn_matrix(m);
    inv.resize(size_t(N) * N);
    double max_abs_det = 0;
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) {
        cd z = std::polar(rz, 2 * kPi * (j + 0.5) / N), w = std::polar(rw, 2 * kPi * (k + 0.5) / N);
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(K(z, w));
        double d = std::abs(lu.determinant());
        min_abs_det = std::min(min_abs_det, d);
        max_abs_det = std::max(max_abs_det, d);
        inv[size_t(j) * N + k] = lu.inverse();
      }
    if (!(min_abs_det > cfg.singular_floor * max_abs_det))
      throw Error(ErrorCode::NearSingular, "det K vanishes near the integration torus");
  }

  Eigen::MatrixXcd block(const Cell& c) const {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(inv[0].rows(), inv[0].cols());
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) {
        cd z = std::polar(rz, 2 * kPi * (j + 0.5) / N), w = std::polar(rw, 2 * kPi * (k + 0.5) / N);
        acc += inv[size_t(j) * N + k] * (std::pow(z, c.x()) * std::pow(w, c.y()));
      }
    return acc / double(N * N);
  }
};

// Inner integral (1/2 pi i) \oint_{|w| = rw} K^{-1}(z, w) w^n dw / w for each n.
std::vector<Eigen::MatrixXcd> inner_integral(const KasteleynMatrix& K, const CharPoly& P, cd z, double rw,
                                             const std::vector<int>& powers) {
  std::vector<cd> roots = roots_in_w(P, z);
  const double lr = std::log(rw);
  std::vector<double> lm;
  for (cd r : roots) lm.push_back(std::log(std::abs(r)));
  auto dist = [&](double l) {
    double d = INFINITY;
    for (double x : lm) d = std::min(d, std::abs(l - x));
    return d;
  };
  // Safe radius: rw itself if clear of all roots, else the best adjacent gap.
  double lstar = lr, dstar = dist(lr);
  if (dstar < 0.3) {
    std::vector<double> s = lm;
    std::sort(s.begin(), s.end());
    std::vector<double> cand;
    for (size_t i = 0; i + 1 < s.size(); ++i) cand.push_back(0.5 * (s[i] + s[i + 1]));
    if (!s.empty()) {
      cand.push_back(s.front() - 0.5);
      cand.push_back(s.back() + 0.5);
    }
    double best = -INFINITY;
    for (double c : cand) {
      double score = dist(c) - 0.25 * std::abs(c - lr);
      if (score > best) {
        best = score;
        lstar = c;
      }
    }
    dstar = dist(lstar);
  }
  const int M = std::clamp(int(std::ceil(40.0 / std::max(dstar, 1e-3))), 64, 2048);
  const double rs = std::exp(lstar);
  const int nb = K.n_black, nw = K.n_white;
  std::vector<Eigen::MatrixXcd> out(powers.size(), Eigen::MatrixXcd::Zero(nb, nw));
  for (int k = 0; k < M; ++k) {
    cd w = std::polar(rs, 2 * kPi * (k + 0.5) / M);
    Eigen::MatrixXcd inv = K(z, w).partialPivLu().inverse();
    for (size_t i = 0; i < powers.size(); ++i) out[i] += inv * std::pow(w, powers[i]);
  }
  for (auto& o : out) o /= double(M);

  // Residues of roots between the two circles, clustered.
  std::vector<bool> used(roots.size(), false);
  for (size_t i = 0; i < roots.size(); ++i) {
    if (used[i]) continue;
    std::vector<size_t> cl{i};
    used[i] = true;
    for (size_t j = i + 1; j < roots.size(); ++j)
      if (!used[j] && std::abs(roots[j] - roots[i]) < 1e-7 * std::abs(roots[i])) {
        cl.push_back(j);
        used[j] = true;
      }
    cd centre = 0;
    for (size_t j : cl) centre += roots[j];
    centre /= double(cl.size());
    const double lc = std::log(std::abs(centre));
    int sign = 0;
    if (lc > lstar && lc < lr) sign = 1;
    if (lc < lstar && lc > lr) sign = -1;
    if (!sign) continue;
    double gap = 0.3 * std::abs(centre);
    for (size_t j = 0; j < roots.size(); ++j)
      if (std::find(cl.begin(), cl.end(), j) == cl.end()) gap = std::min(gap, 0.3 * std::abs(roots[j] - centre));
    double spread = 0;
    for (size_t j : cl) spread = std::max(spread, std::abs(roots[j] - centre));
    const double eps = std::max(gap, 4 * spread);
    const int Ms = 32;
    for (int k = 0; k < Ms; ++k) {
      cd dz = std::polar(eps, 2 * kPi * (k + 0.5) / Ms);
      cd w = centre + dz;
      Eigen::MatrixXcd inv = K(z, w).partialPivLu().inverse();
      for (size_t p = 0; p < powers.size(); ++p) out[p] += (double(sign) / Ms) * inv * (std::pow(w, powers[p]) * dz / w);
    }
  }
  return out;
}

}  // namespace

InverseBlocks inverse_fourier(const FockModel& m, const MagneticField& B, const std::vector<Cell>& offsets,
                              const FourierConfig& cfg) {
  FourierGrid grid(m, B, cfg);
  InverseBlocks r;
  r.offsets = offsets;
  r.min_abs_det = grid.min_abs_det;
  for (const Cell& c : offsets) r.blocks.push_back(grid.block(c));
  return r;
}

InverseBlocks inverse_fourier_adaptive(const FockModel& m, const CharPoly& P, const MagneticField& B,
                                       const std::vector<Cell>& offsets, const FourierConfig& cfg) {
  if (!m.periodicity().periodic)
    throw Error(ErrorCode::PeriodicityRequired, "Fourier inverse needs a periodic operator");
  KasteleynMatrix K = kasteleyn_matrix(m);
  const int nb = K.n_black, nw = K.n_white, blk = nb * nw;
  std::vector<int> powers;
  for (const Cell& c : offsets)
    if (std::find(powers.begin(), powers.end(), c.y()) == powers.end()) powers.push_back(c.y());
  const double rz = B.rz(), rw = B.rw();
  std::function<Eigen::VectorXcd(double)> f = [&](double th) {
    cd z = std::polar(rz, th);
    std::vector<Eigen::MatrixXcd> in = inner_integral(K, P, z, rw, powers);
    Eigen::VectorXcd v(blk * offsets.size());
    for (size_t i = 0; i < offsets.size(); ++i) {
      size_t p = std::find(powers.begin(), powers.end(), offsets[i].y()) - powers.begin();
      Eigen::MatrixXcd a = in[p] * std::pow(z, offsets[i].x());
      v.segment(i * blk, blk) = Eigen::Map<Eigen::VectorXcd>(a.data(), blk);
    }
    return v;
  };
  std::vector<double> cuts = root_crossings(P, rz, rw);
  cuts.insert(cuts.begin(), 0.0);
  cuts.push_back(2 * kPi);
  quad::AdaptiveConfig ac;
  ac.rel_tol = cfg.rel_tol;
  ac.abs_tol = cfg.abs_tol;
  Eigen::VectorXcd total = Eigen::VectorXcd::Zero(blk * offsets.size());
  for (size_t i = 0; i + 1 < cuts.size(); ++i)
    if (cuts[i + 1] > cuts[i]) total += quad::adaptive<Eigen::VectorXcd>(f, cuts[i], cuts[i + 1], ac);
  total /= 2 * kPi;
  InverseBlocks r;
  r.offsets = offsets;
  for (size_t i = 0; i < offsets.size(); ++i)
    r.blocks.push_back(Eigen::Map<Eigen::MatrixXcd>(total.data() + i * blk, nb, nw));
  return r;
}

// ---------------------------------------------------------------- contour

double crossing_parameter(const FockModel& m, int b, const Cell& cb, int w, const Cell& cw) {
  Eigen::VectorXi k = m.abel().at_white(w, cw) - m.abel().at_black(b, cb);
  struct Mark {
    double s;
    int k;
  };
  std::vector<Mark> marks;
  for (const AnglePoint& p : angle_points(m)) {
    int sum = 0;
    for (int T : p.tracks) sum += k[T];
    if (sum) marks.push_back({frac(p.s), sum});
  }
  std::sort(marks.begin(), marks.end(), [](const Mark& a, const Mark& c) { return a.s < c.s; });
  const int n = int(marks.size());
  if (n == 0) return free_crossing(m);
  int zeros = 0, blocks = 0;
  for (int i = 0; i < n; ++i) {
    if (marks[i].k > 0) ++zeros;
    if (marks[i].k < 0 && marks[(i + n - 1) % n].k > 0) ++blocks;
  }
  if (zeros == 0) {
    // Only poles: neighbours, crossing on the arc from beta to alpha.
    Cell off = cb - cw;
    for (int e : m.graph().edges_at_white(w)) {
      const GraphEdge& ge = m.graph().edge(e);
      if (ge.b != b || ge.offset != off) continue;
      double sa = m.angles().s[m.tracks().alpha[e]], sb = m.angles().s[m.tracks().beta[e]];
      return sb + 0.5 * frac(sa - sb);
    }
    throw Error(ErrorCode::SectorBlocked, "no zero separates the poles of the kernel");
  }
  if (blocks > 1) throw Error(ErrorCode::SectorBlocked, "poles of the kernel are not contiguous on A0");
  double best = -1, where = 0;
  for (int i = 0; i < n; ++i) {
    const Mark& a = marks[i];
    const Mark& c = marks[(i + 1) % n];
    if (a.k < 0 && c.k < 0) continue;
    double gap = n == 1 ? 1.0 : frac(c.s - a.s);
    if (gap > best) {
      best = gap;
      where = a.s + 0.5 * gap;
    }
  }
  return where;
}

cd inverse_contour(const FockModel& m, const PhasePoint& p, int b, const Cell& cb, int w, const Cell& cw,
                   double tol) {
  const auto* g1 = dynamic_cast<const Genus1Curve*>(&m.curve());
  if (!g1) throw Error(ErrorCode::InputError, "contour inverse is implemented for genus 1");
  const double T = g1->tau_im();
  const QuadVertex xb = QuadVertex::black(b, cb), xw = QuadVertex::white(w, cw);
  const cd zeta = m.curve().zeta_at(0.0, m.odd());
  const cd u0 = p.point.coord;
  double xc = crossing_parameter(m, b, cb, w, cw);
  xc += std::round(u0.real() - xc);

  std::vector<cd> nodes;
  if (p.phase == Phase::Solid) {
    const double h = 0.25 * T, x0 = u0.real();
    nodes = {x0, cd(x0, -h), cd(xc, -h), xc, cd(xc, h), cd(x0, h), x0};
  } else {
    nodes = {std::conj(u0), xc, u0};
  }
  quad::AdaptiveConfig ac;
  ac.rel_tol = tol;
  ac.abs_tol = tol * 1e-2;
  cd total = 0;
  for (size_t i = 0; i + 1 < nodes.size(); ++i) {
    const cd a = nodes[i], d = nodes[i + 1] - nodes[i];
    std::function<cd(double)> f = [&](double l) {
      Eigen::VectorXcd u = Eigen::VectorXcd::Constant(1, a + l * d);
      return kernel_g(m, xb, xw, u) * zeta * d;
    };
    total += quad::adaptive<cd>(f, 0.0, 1.0, ac);
  }
  return total / (2 * kPi * cd(0, 1));
}

namespace {

struct OffsetKey {
  int b, w, dx, dy;
  bool operator<(const OffsetKey& o) const { return std::tie(b, w, dx, dy) < std::tie(o.b, o.w, o.dx, o.dy); }
};

}  // namespace

InverseFn fourier_inverse_fn(const FockModel& m, const MagneticField& B, const FourierConfig& cfg) {
  auto grid = std::make_shared<FourierGrid>(m, B, cfg);
  auto cache = std::make_shared<std::map<std::pair<int, int>, Eigen::MatrixXcd>>();
  return [grid, cache](int b, const Cell& cb, int w, const Cell& cw) {
    Cell c = cb - cw;
    auto key = std::make_pair(c.x(), c.y());
    auto it = cache->find(key);
    if (it == cache->end()) it = cache->emplace(key, grid->block(c)).first;
    return it->second(b, w);
  };
}

InverseFn adaptive_inverse_fn(const FockModel& m, const MagneticField& B, const FourierConfig& cfg) {
  auto model = std::make_shared<FockModel>(m);
  auto P = std::make_shared<CharPoly>(char_poly(m));
  auto cache = std::make_shared<std::map<std::pair<int, int>, Eigen::MatrixXcd>>();
  return [model, P, B, cfg, cache](int b, const Cell& cb, int w, const Cell& cw) {
    Cell c = cb - cw;
    auto key = std::make_pair(c.x(), c.y());
    auto it = cache->find(key);
    if (it == cache->end())
      it = cache->emplace(key, inverse_fourier_adaptive(*model, *P, B, {c}, cfg).blocks[0]).first;
    return it->second(b, w);
  };
}

InverseFn contour_inverse_fn(const FockModel& m, const PhasePoint& p, double tol) {
  auto model = std::make_shared<FockModel>(m);
  auto cache = std::make_shared<std::map<OffsetKey, cd>>();
  return [model, p, tol, cache](int b, const Cell& cb, int w, const Cell& cw) {
    Cell c = cb - cw;
    OffsetKey key{b, w, c.x(), c.y()};
    auto it = cache->find(key);
    if (it == cache->end()) it = cache->emplace(key, inverse_contour(*model, p, b, cb, w, cw, tol)).first;
    return it->second;
  };
}

// ---------------------------------------------------------------- probabilities

double cylinder_probability(const FockModel& m, const std::vector<EdgeCopy>& edges, const InverseFn& inv) {
  const int k = int(edges.size());
  Eigen::MatrixXcd A(k, k);
  cd weight = 1;
  for (int i = 0; i < k; ++i) {
    const GraphEdge& gi = m.graph().edge(edges[i].edge);
    weight *= fock_entry_at(m, edges[i].edge, edges[i].cell);
    for (int j = 0; j < k; ++j) {
      const GraphEdge& gj = m.graph().edge(edges[j].edge);
      A(i, j) = inv(gi.b, edges[i].cell + gi.offset, gj.w, edges[j].cell);
    }
  }
  return (weight * A.determinant()).real();
}

double edge_probability(const FockModel& m, int e, const InverseFn& inv) {
  return cylinder_probability(m, {{e, Cell::Zero()}}, inv);
}

double edge_probability_local(const FockModel& m, int e, const PhasePoint& p) {
  const int ta = m.tracks().alpha[e], tb = m.tracks().beta[e];
  const double sa = m.angles().s[ta], sb = m.angles().s[tb];
  if (p.phase == Phase::Solid) {
    const double s0 = p.point.s;
    if (std::abs(frac(s0 - sa)) < 1e-14 || std::abs(frac(s0 - sb)) < 1e-14)
      throw Error(ErrorCode::AnglePole, "u0 coincides with an angle");
    return on_arc(sa, s0, sb) ? 1.0 : 0.0;
  }
  const MCurve& c = m.curve();
  Eigen::VectorXd cj = faydiff_coefficients(m, e);
  if (p.phase == Phase::Gaseous) {
    const int k = p.oval - 1;
    Eigen::VectorXd diff = (c.at_oval({0, sa + frac(sb - sa)}).lift - c.at_oval({0, sa}).lift).real();
    Eigen::VectorXd corr = c.period_matrix().omega().imag() * cj / (2 * kPi);
    return diff[k] + corr[k];
  }
  // Liquid: arg change of E(beta,u)/E(alpha,u) from an A0 point x' to u0.
  const double sx = free_crossing(m);
  PointLift start = path_start(m, sx);
  const Eigen::VectorXcd al = as_complex(m.angles().lift[ta]), be = as_complex(m.angles().lift[tb]);
  auto darg = [&](const Eigen::VectorXcd& u, const Eigen::VectorXcd& du) {
    Eigen::VectorXcd gb = grad_log_odd(m, (be - u).eval()), ga = grad_log_odd(m, (al - u).eval());
    return (-(gb.transpose() * du)(0, 0) + (ga.transpose() * du)(0, 0)).imag();
  };
  double A = path_integral<double>(c, start.coord, start.lift, p.point.coord, darg, 1e-13, 0.0);
  double prob = A / kPi + cj.dot(p.point.lift.imag()) / kPi;
  if (on_arc(sa, sx, sb)) prob += 1.0;
  return prob;
}

std::vector<double> edge_probabilities_local(const FockModel& m, const PhasePoint& p) {
  std::vector<double> out(m.graph().n_edges());
  for (int e = 0; e < m.graph().n_edges(); ++e) out[e] = edge_probability_local(m, e, p);
  return out;
}

double white_sum_defect(const FockModel& m, const std::vector<double>& probs) {
  double worst = 0;
  for (int w = 0; w < m.graph().n_white(); ++w) {
    double s = 0;
    for (int e : m.graph().edges_at_white(w)) s += probs[e];
    worst = std::max(worst, std::abs(s - 1));
  }
  return worst;
}

// ---------------------------------------------------------------- slopes

Slope slope_from_probabilities(const FockModel& m, const std::vector<double>& probs) {
  const double s1 = reference_s(m);
  Slope r;
  for (int e = 0; e < m.graph().n_edges(); ++e) {
    const int ta = m.tracks().alpha[e], tb = m.tracks().beta[e];
    double frozen = on_arc(m.angles().s[ta], s1, m.angles().s[tb]) ? 1.0 : 0.0;
    const Cell& off = m.graph().edge(e).offset;
    r.s += -double(off.y()) * (probs[e] - frozen);
    r.t += double(off.x()) * (probs[e] - frozen);
  }
  return r;
}

Slope slope(const FockModel& m, const PhasePoint& p) {
  return slope_from_probabilities(m, edge_probabilities_local(m, p));
}

Slope slope_solid(const FockModel& m, double s0) {
  const double s1 = reference_s(m);
  Slope r;
  for (int T = 0; T < m.tracks().size(); ++T) {
    if (!on_arc(s0, m.angles().s[T], s1)) continue;
    const Cell& h = m.tracks().tracks[T].homology;
    r.s += h.y();
    r.t -= h.x();
  }
  return r;
}

Slope slope_dlog(const FockModel& m, const PhasePoint& p) {
  if (p.phase == Phase::Solid) return slope_solid(m, p.point.s);
  if (p.phase == Phase::Gaseous && m.curve().kind() != CurveKind::Genus1)
    throw Error(ErrorCode::PathAmbiguous, "gaseous paths are charted for genus 1 only");
  PointLift start = path_start(m, reference_s(m));
  const int r = m.tracks().size();
  auto f = [&](const Eigen::VectorXcd& u, const Eigen::VectorXcd& du) {
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();
    for (int T = 0; T < r; ++T) {
      double dl = (grad_log_odd(m, (u - as_complex(m.angles().lift[T])).eval()).transpose() * du)(0, 0).imag();
      const Cell& h = m.tracks().tracks[T].homology;
      acc.x() += -h.y() * dl;  // arg z
      acc.y() += h.x() * dl;   // arg w
    }
    return acc;
  };
  Eigen::Vector2d args =
      path_integral<Eigen::Vector2d>(m.curve(), start.coord, start.lift, p.point.coord, f, 1e-13, Eigen::Vector2d::Zero());
  return {-args.x() / kPi, -args.y() / kPi};
}

// ---------------------------------------------------------------- thermodynamics

Thermodynamics thermodynamics(const FockModel& m, const PhasePoint& p, double tol) {
  if (p.phase != Phase::Liquid) throw Error(ErrorCode::InputError, "thermodynamic path integrals need an interior point");
  const MCurve& c = m.curve();
  const double s1 = reference_s(m);
  PointLift start = path_start(m, s1);
  const int r = m.tracks().size();
  const int E = m.graph().n_edges();

  Thermodynamics th;
  th.B = magnetic_field(m, p);
  th.slope = slope(m, p);

  double frozen = 0;
  for (int e = 0; e < E; ++e)
    if (on_arc(m.angles().s[m.tracks().alpha[e]], s1, m.angles().s[m.tracks().beta[e]]))
      frozen += std::log(std::abs(m.entry(e)));

  // Per-track d log E(u, alpha_T) along the path.
  auto dlogs = [&](const Eigen::VectorXcd& u, const Eigen::VectorXcd& du) {
    Eigen::VectorXcd out(r);
    for (int T = 0; T < r; ++T)
      out[T] = (grad_log_odd(m, (u - as_complex(m.angles().lift[T])).eval()).transpose() * du)(0, 0);
    return out;
  };
  auto logs = [&](const Eigen::VectorXcd& u) {
    Eigen::VectorXcd out(r);
    for (int T = 0; T < r; ++T) out[T] = log_odd(m, (u - as_complex(m.angles().lift[T])).eval());
    return out;
  };

  // Surface tension: sum_e int k_beta dl_alpha - k_alpha dl_beta.
  auto tension = [&](const Eigen::VectorXcd& u, const Eigen::VectorXcd& du) {
    Eigen::VectorXcd L = logs(u), dL = dlogs(u, du);
    double acc = 0;
    for (int e = 0; e < E; ++e) {
      const int a = m.tracks().alpha[e], b = m.tracks().beta[e];
      acc += L[b].real() * dL[a].imag() - L[a].real() * dL[b].imag();
    }
    return acc;
  };
  th.surface_tension =
      -frozen + path_integral<double>(c, start.coord, start.lift, p.point.coord, tension, tol, 0.0) / kPi;

  // Free energy: sum_e int l_alpha dk_beta - l_beta dk_alpha, with the
  // continuous arguments l(u) accumulated from u1 along the same path.
  const quad::GaussLegendre& gl = quad::gauss_legendre(20);
  const cd a = start.coord, dx = p.point.coord - a;
  auto run = [&](int panels) {
    double acc = 0;
    Eigen::VectorXcd lift0 = start.lift;
    Eigen::VectorXd ell = Eigen::VectorXd::Zero(r);  // continuous args at the panel start
    for (int q = 0; q < panels; ++q) {
      const double l0 = double(q) / panels, l1 = double(q + 1) / panels, h = l1 - l0;
      const cd x0 = a + l0 * dx;
      auto arg_increment = [&](double lam) {
        // Args from the panel start to lam, by a nested rule.
        Eigen::VectorXd inc = Eigen::VectorXd::Zero(r);
        for (int i = 0; i < gl.x.size(); ++i) {
          double mu = l0 + 0.5 * (lam - l0) * (1 + gl.x[i]);
          cd x = a + mu * dx;
          Eigen::VectorXcd u = c.transport(x0, lift0, x);
          inc += 0.5 * (lam - l0) * gl.w[i] * dlogs(u, c.forms_at(x) * dx).imag();
        }
        return inc;
      };
      for (int i = 0; i < gl.x.size(); ++i) {
        double lam = l0 + 0.5 * h * (1 + gl.x[i]);
        cd x = a + lam * dx;
        Eigen::VectorXcd u = c.transport(x0, lift0, x);
        Eigen::VectorXd dk = dlogs(u, c.forms_at(x) * dx).real();
        Eigen::VectorXd l = ell + arg_increment(lam);
        double s = 0;
        for (int e = 0; e < E; ++e) {
          const int al = m.tracks().alpha[e], be = m.tracks().beta[e];
          s += l[al] * dk[be] - l[be] * dk[al];
        }
        acc += 0.5 * h * gl.w[i] * s;
      }
      ell += arg_increment(l1);
      lift0 = c.transport(x0, lift0, a + l1 * dx);
    }
    return acc;
  };
  double prev = run(4), cur = prev;
  bool ok = false;
  for (int panels = 8; panels <= 512; panels *= 2) {
    cur = run(panels);
    if (std::abs(cur - prev) <= tol * std::max(1.0, std::abs(cur))) {
      ok = true;
      break;
    }
    prev = cur;
  }
  if (!ok) throw Error(ErrorCode::QuadratureFailure, "free energy path integral did not converge");
  th.free_energy = frozen + cur / kPi;
  th.legendre_residual =
      std::abs(th.free_energy - (th.slope.s * th.B.Bx + th.slope.t * th.B.By - th.surface_tension));
  return th;
}

// ---------------------------------------------------------------- torus

namespace {

struct Blowup {
  int n = 1, nw = 0, nb = 0;
  struct Copy {
    int w, b, edge;
    Cell wrap;
    cd coef;
  };
  std::vector<Copy> copies;

  Blowup(const FockModel& m, int n_, const MagneticField& B) : n(n_) {
    const auto& g = m.graph();
    nw = g.n_white() * n * n;
    nb = g.n_black() * n * n;
    const double rz = B.rz(), rw = B.rw();
    for (int e = 0; e < g.n_edges(); ++e) {
      const GraphEdge& ge = g.edge(e);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          int bi = i + ge.offset.x(), bj = j + ge.offset.y();
          int qx = int(std::floor(double(bi) / n)), qy = int(std::floor(double(bj) / n));
          bi -= qx * n;
          bj -= qy * n;
          cd coef = m.entry(e) * std::pow(rz, ge.offset.x()) * std::pow(rw, ge.offset.y());
          copies.push_back({ge.w + g.n_white() * (i + n * j), ge.b + g.n_black() * (bi + n * bj), e, Cell(qx, qy), coef});
        }
    }
  }
};

}  // namespace

TorusResult torus_partition_function(const FockModel& m, int n, const MagneticField& B) {
  if (!m.periodicity().periodic) throw Error(ErrorCode::PeriodicityRequired, "torus needs a periodic operator");
  Blowup bl(m, n, B);
  if (bl.nw != bl.nb) throw Error(ErrorCode::DegenerateGraph, "unbalanced fundamental domain");
  const int N = bl.nw, E = m.graph().n_edges();
  // Exponent box of det from per-row extremes of the wrap vectors.
  Eigen::VectorXi lo_x = Eigen::VectorXi::Constant(N, INT32_MAX), hi_x = Eigen::VectorXi::Constant(N, INT32_MIN);
  Eigen::VectorXi lo_y = lo_x, hi_y = hi_x;
  for (const auto& c : bl.copies) {
    lo_x[c.w] = std::min(lo_x[c.w], c.wrap.x());
    hi_x[c.w] = std::max(hi_x[c.w], c.wrap.x());
    lo_y[c.w] = std::min(lo_y[c.w], c.wrap.y());
    hi_y[c.w] = std::max(hi_y[c.w], c.wrap.y());
  }
  const int m0 = lo_x.sum(), n0 = lo_y.sum();
  const int nx = hi_x.sum() - m0 + 1, ny = hi_y.sum() - n0 + 1;
  // Off the unit torus so that det K_n never vanishes on the grid.
  const double rho_z = 1.1, rho_w = 1.13;
  Eigen::MatrixXcd vals(nx, ny);
  std::vector<Eigen::MatrixXcd> dvals(E, Eigen::MatrixXcd::Zero(nx, ny));
  for (int j = 0; j < nx; ++j)
    for (int k = 0; k < ny; ++k) {
      cd z = std::polar(rho_z, 2 * kPi * j / nx), w = std::polar(rho_w, 2 * kPi * k / ny);
      Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(N, N);
      for (const auto& c : bl.copies) K(c.w, c.b) += c.coef * std::pow(z, c.wrap.x()) * std::pow(w, c.wrap.y());
      Eigen::PartialPivLU<Eigen::MatrixXcd> lu(K);
      cd det = lu.determinant();
      Eigen::MatrixXcd inv = lu.inverse();
      vals(j, k) = det;
      // d det / d log(weight of e) = det * sum over copies of K entry * K^{-1}(b, w).
      for (const auto& c : bl.copies)
        dvals[c.edge](j, k) += det * c.coef * std::pow(z, c.wrap.x()) * std::pow(w, c.wrap.y()) * inv(c.b, c.w);
    }
  auto coeffs = [&](const Eigen::MatrixXcd& v) {
    Eigen::MatrixXcd out(nx, ny);
    for (int a = 0; a < nx; ++a)
      for (int b = 0; b < ny; ++b) {
        cd acc = 0;
        for (int j = 0; j < nx; ++j)
          for (int k = 0; k < ny; ++k)
            acc += v(j, k) * std::polar(1.0, -2 * kPi * (double((m0 + a) * j) / nx + double((n0 + b) * k) / ny));
        out(a, b) = acc / double(nx * ny) / (std::pow(rho_z, m0 + a) * std::pow(rho_w, n0 + b));
      }
    return out;
  };
  Eigen::MatrixXcd c = coeffs(vals);
  const double thr = 1e-12 * c.cwiseAbs().maxCoeff();
  TorusResult r;
  Eigen::MatrixXd sign = Eigen::MatrixXd::Zero(nx, ny);
  for (int a = 0; a < nx; ++a)
    for (int b = 0; b < ny; ++b)
      if (std::abs(c(a, b)) > thr) {
        r.Z += std::abs(c(a, b));
        sign(a, b) = c(a, b).real() >= 0 ? 1.0 : -1.0;
      }
  r.edge_frequency.assign(E, 0.0);
  for (int e = 0; e < E; ++e) {
    Eigen::MatrixXcd d = coeffs(dvals[e]);
    double acc = 0;
    for (int a = 0; a < nx; ++a)
      for (int b = 0; b < ny; ++b) acc += sign(a, b) * d(a, b).real();
    r.edge_frequency[e] = acc / (double(n) * n * r.Z);
  }
  return r;
}

TorusResult brute_force_torus(const FockModel& m, int n, const MagneticField& B) {
  Blowup bl(m, n, B);
  if (bl.nw != bl.nb) throw Error(ErrorCode::DegenerateGraph, "unbalanced fundamental domain");
  const int E = m.graph().n_edges();
  std::vector<std::vector<int>> at_white(bl.nw);
  for (int i = 0; i < int(bl.copies.size()); ++i) at_white[bl.copies[i].w].push_back(i);
  std::vector<char> used(bl.nb, 0);
  std::vector<int> count(E, 0);
  TorusResult r;
  std::vector<double> acc(E, 0.0);
  std::function<void(int, double)> rec = [&](int w, double weight) {
    if (w == bl.nw) {
      r.Z += weight;
      ++r.matchings;
      for (int e = 0; e < E; ++e) acc[e] += count[e] * weight;
      return;
    }
    for (int i : at_white[w]) {
      const auto& c = bl.copies[i];
      if (used[c.b]) continue;
      used[c.b] = 1;
      ++count[c.edge];
      rec(w + 1, weight * std::abs(c.coef));
      --count[c.edge];
      used[c.b] = 0;
    }
  };
  rec(0, 1.0);
  r.edge_frequency.resize(E);
  for (int e = 0; e < E; ++e) r.edge_frequency[e] = acc[e] / (double(n) * n * r.Z);
  return r;
}

}  // namespace fock
