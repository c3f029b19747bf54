// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "fock/gibbs.hpp"
#include "fock/model_io.hpp"
#include "fock/moves.hpp"

using namespace fock;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

FockModel packaged(const std::string& name) {
  return load_model(std::string(FOCK_MODELS_DIR) + "/" + name + ".json").build();
}

Eigen::VectorXcd vec1(cd z) { return Eigen::VectorXcd::Constant(1, z); }

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0;
  for (size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

std::vector<double> class_angles(const TrackSet& t) {
  std::vector<double> s;
  for (const auto& tr : t.tracks) {
    const Cell& h = tr.homology;
    s.push_back(h.x() > 0 && h.y() > 0 ? 0.0 : h.x() < 0 && h.y() > 0 ? 0.2 : h.x() < 0 ? 0.5 : 0.7);
  }
  return s;
}

std::vector<PointLift> interior_samples(const MCurve& c, int n, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> U(0, 1);
  std::vector<PointLift> out;
  for (int i = 0; i < n; ++i) {
    if (c.kind() == CurveKind::Genus1) {
      double tau = c.period_matrix().omega()(0, 0).imag();
      out.push_back(c.interior(cd(U(gen), tau * (0.05 + 0.4 * U(gen))), 0.05 + 0.4 * U(gen)));
    } else {
      out.push_back(c.interior(cd(-4 + 8 * U(gen), 0.05 + 1.5 * U(gen)), 0.05 + 0.4 * U(gen)));
    }
  }
  return out;
}

// ---------------------------------------------------------------- 1

cd jacobi_theta3(cd z, double tau) {
  const double pi = std::numbers::pi;
  const double q = std::exp(-pi * tau);
  cd s = 1.0;
  for (int n = 1; n < 100; ++n) {
    double qn = std::pow(q, double(n) * n);
    if (qn < 1e-300) break;
    s += 2.0 * qn * std::cos(2.0 * pi * double(n) * z);
  }
  return s;
}

void theta_criterion(Outcome& o) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> U(0, 1);
  double oracle = 0;
  for (int k = 0; k < 1000; ++k) {
    double tau = 0.5 + 2.0 * U(gen);
    cd z(2 * U(gen) - 1, tau * (1.2 * U(gen) - 0.6));
    PeriodMatrix om(Eigen::MatrixXcd::Constant(1, 1, cd(0, tau)));
    cd a = theta(vec1(z), om), b = jacobi_theta3(z, tau);
    oracle = std::max(oracle, std::abs(a - b) / std::abs(b));
  }
  o.detail << "oracle rel " << oracle;
  o.require(oracle < 1e-10, "Jacobi oracle");

  ThetaConfig cfg;
  const double pi = std::numbers::pi;
  const auto g2curve = make_hyperelliptic({-3, -2, 0.9, 0.95, 1, 3});
  for (const PeriodMatrix& om : {PeriodMatrix(Eigen::MatrixXcd::Constant(1, 1, cd(0, 1.0))), g2curve->period_matrix()}) {
    const int g = om.genus();
    double quasi = 0, parity = 0, reality = 0;
    for (int k = 0; k < 1000; ++k) {
      Eigen::VectorXcd z(g), n(g), m(g);
      for (int i = 0; i < g; ++i) {
        z[i] = cd(2 * U(gen) - 1, 0.8 * U(gen) - 0.4);
        m[i] = std::floor(5 * U(gen)) - 2;
        n[i] = std::floor(3 * U(gen)) - 1;
      }
      cd base = theta(z, om, cfg);
      cd lhs = theta((z + m + om.omega() * n).eval(), om, cfg);
      cd rhs = std::exp(cd(0, -pi) * (n.transpose() * (2.0 * z + om.omega() * n))(0, 0)) * base;
      quasi = std::max(quasi, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
      ThetaChar c{Eigen::VectorXi(g), Eigen::VectorXi(g)};
      for (int i = 0; i < g; ++i) {
        c.p[i] = int(2 * U(gen));
        c.pp[i] = int(2 * U(gen));
      }
      cd plus = theta_char(c, z, om, cfg), minus = theta_char(c, (-z).eval(), om, cfg);
      parity = std::max(parity, std::abs(minus - (c.parity() ? -1.0 : 1.0) * plus) / std::max(1.0, std::abs(plus)));
      cd conj = theta_char(c, z.conjugate().eval(), om, cfg);
      reality = std::max(reality, std::abs(conj - std::conj(plus)) / std::max(1.0, std::abs(plus)));
    }
    o.detail << "; g" << g << " quasi " << quasi << " parity " << parity << " reality " << reality;
    o.require(quasi < 10 * cfg.tol && parity < 10 * cfg.tol && reality < 10 * cfg.tol, "identities");
  }
}

// ---------------------------------------------------------------- 2

void kasteleyn_criterion(Outcome& o) {
  for (const char* name : {"square1", "hexagonal", "square_octagon", "genus2_square3"}) {
    KasteleynReport r = check_kasteleyn_condition(packaged(name), 1e-8);
    o.detail << name << " " << r.max_error << "; ";
    o.require(r.pass && r.max_error < 1e-8, name);
  }
}

// ---------------------------------------------------------------- 3

void fay_criterion(Outcome& o) {
  FayReport a = check_fay(packaged("square2").curve(), 200, 3);
  FayReport b = check_fay(packaged("genus2_square3").curve(), 200, 3);
  o.detail << "g1 fay " << a.fay << " fayfock " << a.fay_fock << "; g2 fay " << b.fay << " fayfock " << b.fay_fock
           << " (" << a.samples << "+" << b.samples << " samples)";
  o.require(a.samples == 200 && b.samples == 200, "sample count");
  o.require(a.fay < 1e-9 && a.fay_fock < 1e-9, "genus 1");
  o.require(b.fay < 1e-7 && b.fay_fock < 1e-7, "genus 2");
}

// ---------------------------------------------------------------- 4

double ka_residual(const FockModel& m, const InverseBlocks& A) {
  const auto& g = m.graph();
  double r = 0;
  for (int dx = -1; dx <= 1; ++dx)
    for (int dy = -1; dy <= 1; ++dy)
      for (int w2 = 0; w2 < g.n_white(); ++w2)
        for (int w = 0; w < g.n_white(); ++w) {
          cd s = 0;
          for (int e : g.edges_at_white(w2)) {
            const GraphEdge& ge = g.edge(e);
            s += m.entry(e) * A.at(Cell(dx, dy) + ge.offset)(ge.b, w);
          }
          r = std::max(r, std::abs(s - ((dx == 0 && dy == 0 && w2 == w) ? 1.0 : 0.0)));
        }
  return r;
}

void inverse_criterion(Outcome& o) {
  std::mt19937_64 gen(5);
  double kernel = 0;
  for (const char* name : {"square2", "square_octagon", "genus2_square3"}) {
    FockModel m = packaged(name);
    for (const PointLift& p : interior_samples(m.curve(), 10, gen))
      for (int w = 0; w < m.graph().n_white(); ++w)
        for (int b = 0; b < m.graph().n_black(); ++b)
          kernel = std::max(kernel, right_kernel_residual(m, w, QuadVertex::black(b, Cell(1, -2)), p.lift));
  }
  o.detail << "sum K g " << kernel;
  o.require(kernel < 1e-9, "kernel");

  FockModel m = packaged("square2");  // 2 white + 2 black
  std::vector<Cell> offsets;
  for (int x = -2; x <= 2; ++x)
    for (int y = -2; y <= 2; ++y) offsets.push_back(Cell(x, y));
  double ka = 0;
  for (const auto& p : {PhasePoint::on_oval(m.curve(), {0, 0.3}), PhasePoint::on_oval(m.curve(), {1, 0.6})}) {
    FourierConfig cfg;
    cfg.order = 64;
    ka = std::max(ka, ka_residual(m, inverse_fourier(m, representative_field(m, p), offsets, cfg)));
  }
  o.detail << "; |KA-Id| " << ka;
  o.require(ka < 1e-8, "Fourier inverse");

  double route = 0;
  std::vector<PhasePoint> probes = {PhasePoint::interior(m.curve(), cd(0.31, 0.2)),
                                    PhasePoint::interior(m.curve(), cd(0.72, 0.41)),
                                    PhasePoint::on_oval(m.curve(), {0, 0.3}),
                                    PhasePoint::on_oval(m.curve(), {0, 0.85}),
                                    PhasePoint::on_oval(m.curve(), {1, 0.6})};
  for (const auto& p : probes) {
    InverseFn four = adaptive_inverse_fn(m, representative_field(m, p));
    InverseFn cont = contour_inverse_fn(m, p);
    for (int b = 0; b < 2; ++b)
      for (int w = 0; w < 2; ++w)
        for (const Cell& c : {Cell(0, 0), Cell(1, 0), Cell(0, -1), Cell(-1, 1), Cell(2, 1)})
          route = std::max(route, std::abs(four(b, c, w, Cell::Zero()) - cont(b, c, w, Cell::Zero())));
  }
  o.detail << "; contour vs Fourier " << route;
  o.require(route < 1e-6, "contour route");
}

// ---------------------------------------------------------------- 5

void spectral_criterion(Outcome& o) {
  std::mt19937_64 gen(9);
  for (const char* name : {"square2", "square_octagon", "genus2_square3"}) {
    FockModel m = packaged(name);
    CharPoly P = char_poly(m);
    std::vector<Eigen::VectorXcd> lifts;
    for (const PointLift& p : interior_samples(m.curve(), 50, gen)) lifts.push_back(p.lift);
    Calibration c = calibrate_scale(m, P, lifts);
    bool same = same_polygon_up_to_translation(P.newton_corners(), newton_polygon(m.tracks()).corners());
    o.detail << name << " " << c.residual << (same ? " N ok; " : " N differs; ");
    o.require(c.residual < 1e-7, name);
    o.require(same, std::string(name) + " Newton polygon");
  }
}

// ---------------------------------------------------------------- 6

void torus_criterion(Outcome& o) {
  for (const char* name : {"square2", "square_octagon"}) {
    FockModel m = packaged(name);
    for (int n : {1, 2})
      for (MagneticField B : {MagneticField{}, MagneticField{0.3, -0.2}}) {
        TorusResult a = torus_partition_function(m, n, B), b = brute_force_torus(m, n, B);
        double dz = std::abs(a.Z - b.Z) / b.Z, df = max_diff(a.edge_frequency, b.edge_frequency);
        o.require(dz < 1e-6 && df < 1e-6, std::string(name) + " n=" + std::to_string(n));
        if (B.Bx == 0)
          o.detail << name << " n=" << n << " Z " << b.Z << " (" << b.matchings << " matchings) dZ " << dz
                   << " dP " << df << "; ";
      }
  }
}

// ---------------------------------------------------------------- 7

void structure_criterion(Outcome& o) {
  double sums = 0, gas = 0;
  bool solid_ok = true, slope_ok = true;
  for (const char* name : {"square2", "square_octagon", "genus2_square3"}) {
    FockModel m = packaged(name);
    NewtonPolygon N = newton_polygon(m.tracks(), m.angles().order());  // P1 = (0,0), angle order
    std::vector<PhasePoint> pts;
    for (double s : {0.05, 0.3, 0.55, 0.8}) pts.push_back(PhasePoint::on_oval(m.curve(), {0, s}));
    for (int k = 1; k <= m.genus(); ++k)
      for (double s : {0.1, 0.4, 0.7}) pts.push_back(PhasePoint::on_oval(m.curve(), {k, s}));
    pts.push_back(m.genus() == 1 ? PhasePoint::interior(m.curve(), cd(0.31, 0.2))
                                 : PhasePoint::interior(m.curve(), cd(-0.4, 0.7)));
    std::vector<std::vector<double>> by_oval(m.genus() + 1);
    for (const auto& p : pts) {
      auto probs = edge_probabilities_local(m, p);
      sums = std::max(sums, white_sum_defect(m, probs));
      if (p.phase == Phase::Solid) {
        for (double x : probs) solid_ok = solid_ok && (x == 0.0 || x == 1.0);
        Slope a = slope_from_probabilities(m, probs), b = slope_solid(m, p.point.s);
        Cell q = N.points[0] + Cell(int(std::lround(a.t)), int(-std::lround(a.s)));
        slope_ok = slope_ok && a.s == b.s && a.t == b.t && a.s == std::round(a.s) && a.t == std::round(a.t) &&
                   std::find(N.points.begin(), N.points.end(), q) != N.points.end();
      }
      if (p.phase == Phase::Gaseous) {
        auto& ref = by_oval[p.oval];
        if (ref.empty())
          ref = probs;
        else
          gas = std::max(gas, max_diff(ref, probs));
      }
    }
  }
  o.detail << "white sums " << sums << "; gaseous spread " << gas << "; solid 0/1 " << (solid_ok ? "yes" : "no")
           << "; solid slopes " << (slope_ok ? "exact boundary points" : "mismatch");
  o.require(sums < 1e-8, "white sums");
  o.require(gas < 1e-8, "gaseous constancy");
  o.require(solid_ok, "solid 0/1");
  o.require(slope_ok, "solid slopes");
}

// ---------------------------------------------------------------- 8

void gaseous_slope_criterion(Outcome& o) {
  FockModel m = packaged("genus2_square3");
  NewtonPolygon N = newton_polygon(m.tracks(), m.angles().order());
  const auto& phi = m.periodicity().points;
  o.require(phi.size() == 2 && phi[0] != phi[1], "distinct interior points");
  double err = 0;
  for (int k = 1; k <= 2; ++k) {
    for (double s : {0.2, 0.65}) {
      Slope sl = slope(m, PhasePoint::on_oval(m.curve(), {k, s}));
      Eigen::Vector2d q = N.points[0].cast<double>() + Eigen::Vector2d(sl.t, -sl.s);
      err = std::max(err, (q - phi[k - 1].cast<double>()).cwiseAbs().maxCoeff());
    }
    o.detail << "phi_" << k << " = (" << phi[k - 1].x() << "," << phi[k - 1].y() << ") ";
  }
  o.detail << "max error " << err;
  o.require(err < 1e-6, "slope");
}

// ---------------------------------------------------------------- 9

void thermo_criterion(Outcome& o) {
  FockModel m = packaged("square2");
  CharPoly P = char_poly(m);
  double legendre = 0;
  Eigen::MatrixXd A(10, 3);
  Eigen::VectorXd d(10);
  for (int i = 0; i < 10; ++i) {
    cd u(0.08 + 0.09 * i, 0.12 + 0.03 * i);
    Thermodynamics th = thermodynamics(m, PhasePoint::interior(m.curve(), u));
    legendre = std::max(legendre, th.legendre_residual);
    A.row(i) << 1, th.B.Bx, th.B.By;
    d[i] = ronkin(P, th.B) - th.free_energy;
  }
  Eigen::VectorXd coef = A.colPivHouseholderQr().solve(d);
  double fit = (A * coef - d).cwiseAbs().maxCoeff();
  o.detail << "Legendre " << legendre << "; Ronkin-F affine fit " << fit;
  o.require(legendre < 1e-5, "Legendre");
  o.require(fit < 1e-4, "Ronkin vs free energy");

  double second = 0;
  for (const char* name : {"square2", "genus2_square3"}) {
    FockModel mm = packaged(name);
    CharPoly Q = char_poly(mm);
    for (double s : {0.1, 0.35, 0.6, 0.85}) {
      MagneticField B = representative_field(mm, PhasePoint::on_oval(mm.curve(), {0, s}));
      const double h = 0.05;
      double r0 = ronkin(Q, B);
      second = std::max(second, std::abs(ronkin(Q, {B.Bx + h, B.By}) - 2 * r0 + ronkin(Q, {B.Bx - h, B.By})));
      second = std::max(second, std::abs(ronkin(Q, {B.Bx, B.By + h}) - 2 * r0 + ronkin(Q, {B.Bx, B.By - h})));
      second = std::max(second, std::abs(ronkin(Q, {B.Bx + h, B.By + h}) - ronkin(Q, {B.Bx + h, B.By - h}) -
                                         ronkin(Q, {B.Bx - h, B.By + h}) + ronkin(Q, {B.Bx - h, B.By - h})));
    }
  }
  o.detail << "; solid second differences " << second;
  o.require(second < 1e-6, "Ronkin affine on solid components");
}

// ---------------------------------------------------------------- 10

void moves_criterion(Outcome& o) {
  double fw = 0, cp = 0, pr = 0, ff = 0;
  int compared = 0;
  auto account = [&](const MoveReport& r) {
    fw = std::max(fw, r.face_weight_error);
    cp = std::max(cp, r.charpoly_deviation);
    pr = std::max(pr, r.probability_error);
    ff = std::max(ff, r.fay_fock);
    compared += r.compared_edges;
  };
  const auto torus = packaged("square2").curve_ptr();
  Eigen::VectorXd t = Eigen::VectorXd::Constant(1, 0.23);

  auto so = supercell(square_octagon_lattice(), 2, 2);
  FockModel m(torus, so, class_angles(extract_train_tracks(so)), t);
  MoveResult r = spider_move(so, spider_faces(so)[0]);
  FockModel n = transport_model(m, r);
  for (const auto& p : {PhasePoint::interior(m.curve(), cd(0.31, 0.2)), PhasePoint::on_oval(m.curve(), {1, 0.5})})
    account(check_move_invariance(m, n, r, p));

  Eigen::Matrix2i L;
  L << 4, 0, 0, 4;
  auto sq = square_lattice(L);
  FockModel a(torus, sq, class_angles(extract_train_tracks(sq)), t);
  MoveResult ex = expand_2valent(sq, true, 3, 2, 2);
  FockModel b = transport_model(a, ex);
  auto u0 = PhasePoint::interior(a.curve(), cd(0.31, 0.2));
  account(check_move_invariance(a, b, ex, u0));
  MoveResult sh = shrink_2valent(b.graph(), false, b.graph().n_black() - 1);
  account(check_move_invariance(b, transport_model(b, sh), sh, u0));

  FockModel g2 = packaged("genus2_square3");
  MoveResult e2 = expand_2valent(g2.graph(), false, 1, 0, 2);
  account(check_move_invariance(g2, transport_model(g2, e2), e2, PhasePoint::on_oval(g2.curve(), {2, 0.3})));

  o.detail << "face weights " << fw << "; char_poly " << cp << "; probabilities " << pr << " over " << compared
           << " edges; spider FayFock " << ff;
  o.require(fw < 1e-13, "face weights");
  o.require(cp < 1e-7, "char_poly");
  o.require(compared > 0 && pr < 1e-6, "probabilities");
  o.require(ff < 1e-9, "FayFock");
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit;  // seconds, 0 if none
    std::function<void(Outcome&)> run;
  };
  const std::vector<Criterion> all = {
      {1, "theta", 10, theta_criterion},
      {2, "kasteleyn condition", 30, kasteleyn_criterion},
      {3, "Fay residuals", 0, fay_criterion},
      {4, "kernel and inverse", 120, inverse_criterion},
      {5, "spectral parametrization", 0, spectral_criterion},
      {6, "torus oracle", 60, torus_criterion},
      {7, "Gibbs structure", 0, structure_criterion},
      {8, "gaseous slopes", 0, gaseous_slope_criterion},
      {9, "thermodynamics", 0, thermo_criterion},
      {10, "moves", 0, moves_criterion},
  };
  int failed = 0;
  for (const auto& c : all) {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit > 0 && secs > c.limit) {
      o.pass = false;
      o.detail << " [over the " << c.limit << " s limit]";
    }
    std::printf("%s %2d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.str().c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", int(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}
