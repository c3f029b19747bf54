#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fock/kasteleyn.hpp"
#include "support.hpp"

using namespace fock;
using namespace testing_support;

namespace {

std::vector<PointLift> probes(const MCurve& c, int n) {
  std::vector<PointLift> out;
  for (int i = 0; i < n; ++i) {
    double s = (i + 0.37) / n;
    if (c.kind() == CurveKind::Genus1) {
      double tau = c.period_matrix().omega()(0, 0).imag();
      out.push_back(c.interior(cd(s, tau * (0.1 + 0.3 * ((i * 7) % n) / n)), 0.25));
    } else {
      out.push_back(c.interior(cd(-2.5 + 5.0 * s, 0.2 + 0.8 * ((i * 3) % n) / n), 0.25));
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("kasteleyn") {

TEST_CASE("packaged models satisfy the Kasteleyn condition") {
  for (const auto& m : {square1(), square2(), hexagonal(), square_octagon(), genus2_square3()}) {
    KasteleynReport r = check_kasteleyn_condition(m);
    CHECK(r.pass);
    CHECK(r.max_error < 1e-8);
    CHECK(r.failing.empty());
    CHECK(int(r.faces.size()) == m.graph().n_faces());
  }
}

TEST_CASE("reduced gauge entries are real") {
  for (const auto& m : {square2(), square_octagon(), genus2_square3()})
    for (cd k : m.entries()) {
      CHECK(std::abs(k.imag()) <= 1e-12 * std::abs(k));
      CHECK(std::abs(k) > 0);
    }
}

TEST_CASE("scrambled angles break the condition") {
  auto m = square2();
  FockModel bad(m.curve_ptr(), m.graph(), {0.2, 0, 0.5, 0.7}, m.t(), {false});
  CHECK_FALSE(bad.angle_validation().valid);
  KasteleynReport r = check_kasteleyn_condition(bad);
  CHECK_FALSE(r.pass);
  CHECK_FALSE(r.failing.empty());
  CHECK_THROWS_AS(FockModel(m.curve_ptr(), m.graph(), {0.2, 0, 0.5, 0.7}, m.t()), Error);
}

TEST_CASE("face weights do not depend on t") {
  auto m = square_octagon();
  auto m2 = m.with_t(rvec({0.61}));
  for (int f = 0; f < m.graph().n_faces(); ++f) {
    cd a = face_weight(m, f), b = face_weight(m2, f);
    CHECK(std::abs(a - b) > 1e-6 * std::abs(a));  // t is a genuine parameter
  }
  // but the product over all faces is one
  cd prod = 1;
  for (int f = 0; f < m.graph().n_faces(); ++f) prod *= face_weight(m, f);
  CHECK(std::abs(prod - 1.0) < 1e-12);
}

TEST_CASE("periodic entries agree in every cell") {
  for (const auto& m : {square2(), genus2_square3()}) {
    REQUIRE(m.periodicity().periodic);
    for (int e = 0; e < m.graph().n_edges(); ++e)
      for (const Cell& c : {Cell(1, 0), Cell(0, 1), Cell(-2, 3)})
        CHECK(std::abs(fock_entry_at(m, e, c) - m.entry(e)) < 1e-12 * std::abs(m.entry(e)));
  }
}

TEST_CASE("kernel functions are in the kernel of K") {
  for (const auto& m : {square2(), square_octagon(), genus2_square3()}) {
    for (const PointLift& p : probes(m.curve(), 6)) {
      for (int w = 0; w < m.graph().n_white(); ++w)
        CHECK(right_kernel_residual(m, w, QuadVertex::white(0, Cell(1, -1)), p.lift) < 1e-9);
      for (int b = 0; b < m.graph().n_black(); ++b)
        CHECK(left_kernel_residual(m, b, QuadVertex::black(0, Cell(0, 2)), p.lift) < 1e-9);
    }
  }
}

TEST_CASE("K g zeta decomposes into dlog plus holomorphic forms") {
  for (const auto& m : {square2(), genus2_square3()})
    for (const PointLift& p : probes(m.curve(), 4))
      for (int e = 0; e < m.graph().n_edges(); ++e) CHECK(faydiff_residual(m, e, p) < 1e-8);
}

TEST_CASE("Fay identities on sampled points") {
  FayReport g1 = check_fay(*unit_torus(), 40, 7);
  CHECK(g1.samples == 40);
  CHECK(g1.fay < 1e-9);
  CHECK(g1.fay_fock < 1e-9);
  FayReport g2 = check_fay(*genus2_curve_periodic(), 20, 7);
  CHECK(g2.fay < 1e-7);
  CHECK(g2.fay_fock < 1e-7);
}

TEST_CASE("characteristic polynomial of the square lattice") {
  auto m = square2();
  CharPoly P = char_poly(m);
  auto support = P.support();
  CHECK(support.size() == 5);
  CHECK(same_polygon_up_to_translation(P.newton_corners(), newton_polygon(m.tracks()).corners()));
  // Real coefficients up to round-off.
  for (const Cell& c : support) CHECK(std::abs(P.coefficient(c.x(), c.y()).imag()) < 1e-12 * P.norm());
  // det K(z, w) against the interpolant.
  for (cd z : {cd(0.7, 0.2), cd(-1.3, 0.4)})
    for (cd w : {cd(0.3, -0.9), cd(1.1, 0.6)})
      CHECK(std::abs(build_K(m, z, w).determinant() - P(z, w)) < 1e-12 * P.norm() * 10);
}

TEST_CASE("spectral curve parametrization") {
  for (const auto& m : {square2(), square_octagon(), genus2_square3()}) {
    CharPoly P = char_poly(m);
    CHECK(same_polygon_up_to_translation(P.newton_corners(), newton_polygon(m.tracks()).corners()));
    std::vector<Eigen::VectorXcd> lifts;
    for (const PointLift& p : probes(m.curve(), 12)) lifts.push_back(p.lift);
    Calibration cal = calibrate_scale(m, P, lifts);
    CHECK(cal.residual < 1e-7);
    CHECK(std::abs(cal.lambda - 1.0) < 1e-9);
    CHECK(std::abs(cal.mu - 1.0) < 1e-9);
  }
}

TEST_CASE("oval points map to the real locus") {
  auto m = genus2_square3();
  for (int k = 0; k <= 2; ++k) {
    SpectralPoint sp = spectral_point(m, m.curve().at_oval({k, 0.31}).lift);
    CHECK(std::abs(sp.z.imag()) < 1e-9 * std::abs(sp.z));
    CHECK(std::abs(sp.w.imag()) < 1e-9 * std::abs(sp.w));
  }
}

TEST_CASE("vertex divisors have one point per oval and sum to the Riemann constant") {
  for (const auto& m : {square2(), genus2_square3()}) {
    for (int w = 0; w < m.graph().n_white(); ++w) {
      auto div = divisor_of_vertex(m, w);
      CHECK(int(div.size()) == m.genus());
      for (int j = 0; j < int(div.size()); ++j) CHECK(div[j].oval == j + 1);
      CHECK(divisor_residual(m, w) < 1e-8);
    }
  }
}

}  // TEST_SUITE
