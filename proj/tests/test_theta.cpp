#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fock/theta.hpp"
#include "support.hpp"

using namespace fock;
using namespace testing_support;

namespace {

// Classical q-series for theta_3(pi z | tau), summed until terms underflow.
cd jacobi_theta3(cd z, cd tau) {
  const double pi = std::numbers::pi;
  cd q = std::exp(cd(0, pi) * tau);
  cd s = 1.0;
  for (int n = 1; n < 200; ++n) {
    cd qn = std::pow(q, double(n) * n);
    cd t = 2.0 * qn * std::cos(2.0 * pi * double(n) * z);
    s += t;
    if (std::abs(t) < 1e-300) break;
  }
  return s;
}

Eigen::VectorXcd vec1(cd z) {
  Eigen::VectorXcd v(1);
  v[0] = z;
  return v;
}

}  // namespace

TEST_SUITE("theta") {

TEST_CASE("genus-1 value at the origin matches the one-dimensional series") {
  double s = 0;
  for (int n = -30; n <= 30; ++n) s += std::exp(-std::numbers::pi * n * n);
  cd v = theta(vec1(0.0), genus1_omega(1.0));
  CHECK(std::abs(v - s) < 1e-14);
  CHECK(std::abs(v.real() - 1.0864348112133080) < 1e-13);
}

TEST_CASE("diagonal genus-2 matrix factorizes") {
  Eigen::MatrixXcd om = Eigen::MatrixXcd::Identity(2, 2) * cd(0, 1);
  cd v = theta(Eigen::VectorXcd::Zero(2).eval(), PeriodMatrix(om));
  cd v1 = theta(vec1(0.0), genus1_omega(1.0));
  CHECK(std::abs(v - v1 * v1) < 1e-13);
}

TEST_CASE("genus-1 values agree with the Jacobi q-series") {
  for (int k = 0; k < 200; ++k) {
    double t = uniform(0.4, 2.5);
    cd z(uniform(-1, 1), uniform(-0.6 * t, 0.6 * t));
    cd a = theta(vec1(z), genus1_omega(t));
    cd b = jacobi_theta3(z, cd(0, t));
    CHECK(std::abs(a - b) <= 1e-11 * std::abs(b));
  }
}

TEST_CASE("integer shifts leave theta unchanged") {
  PeriodMatrix om = genus2_omega();
  Eigen::VectorXcd z = random_cvec(2, 1, 0.5);
  Eigen::VectorXcd m(2);
  m << 2, -1;
  CHECK(std::abs(theta(z, om) - theta((z + m).eval(), om)) < 1e-12);
}

TEST_CASE("quasi-periodicity in the Omega directions") {
  for (PeriodMatrix om : {genus1_omega(0.8), genus2_omega()}) {
    const int g = om.genus();
    ThetaConfig cfg;
    for (int k = 0; k < 50; ++k) {
      Eigen::VectorXcd z = random_cvec(g, 1, 0.4);
      Eigen::VectorXi mi(g), ni(g);
      for (int i = 0; i < g; ++i) {
        mi[i] = int(std::floor(uniform(-3, 3)));
        ni[i] = int(std::floor(uniform(-2, 3)));
      }
      Eigen::VectorXcd n = ni.cast<cd>();
      Eigen::VectorXcd shift = mi.cast<cd>() + om.omega() * n;
      cd lhs = theta((z + shift).eval(), om, cfg);
      cd ex = std::exp(cd(0, -std::numbers::pi) * (n.transpose() * (2.0 * z + om.omega() * n))(0, 0));
      cd rhs = ex * theta(z, om, cfg);
      CHECK(std::abs(lhs - rhs) < 10 * cfg.tol * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST_CASE("zero characteristic reduces to theta") {
  PeriodMatrix om = genus2_omega();
  Eigen::VectorXcd z = random_cvec(2, 1, 0.5);
  CHECK(std::abs(theta_char(ThetaChar::zero(2), z, om) - theta(z, om)) < 1e-15);
}

TEST_CASE("odd genus-1 characteristic vanishes at the origin") {
  ThetaChar c = ThetaChar::half(Eigen::VectorXi::Ones(1), Eigen::VectorXi::Ones(1));
  CHECK(c.parity() == 1);
  CHECK(std::abs(theta_char(c, vec1(0.0), genus1_omega(1.3))) < 1e-14);
}

TEST_CASE("parity under negation") {
  PeriodMatrix om = genus2_omega();
  for (int a = 0; a < 16; ++a) {
    ThetaChar c{Eigen::VectorXi(2), Eigen::VectorXi(2)};
    c.p << (a & 1), ((a >> 1) & 1);
    c.pp << ((a >> 2) & 1), ((a >> 3) & 1);
    Eigen::VectorXcd z = random_cvec(2, 1, 0.3);
    cd plus = theta_char(c, z, om), minus = theta_char(c, (-z).eval(), om);
    double sgn = c.parity() ? -1.0 : 1.0;
    CHECK(std::abs(minus - sgn * plus) < 1e-12);
  }
}

TEST_CASE("reality and positivity on real arguments") {
  PeriodMatrix om = genus2_omega();
  ThetaChar c0{Eigen::VectorXi::Zero(2), Eigen::VectorXi(2)};
  c0.pp << 1, 0;
  bool pos = false, neg = false;
  ThetaChar c1{Eigen::VectorXi(2), Eigen::VectorXi::Zero(2)};
  c1.p << 1, 0;
  for (int k = 0; k < 200; ++k) {
    Eigen::VectorXcd z = random_rvec(2, 2).cast<cd>();
    cd v = theta_char(c0, z, om);
    CHECK(std::abs(v.imag()) < 1e-14);
    CHECK(v.real() > 0);
    cd w = theta_char(c1, z, om);
    CHECK(std::abs(w.imag()) < 1e-13);
    pos |= w.real() > 0;
    neg |= w.real() < 0;
    Eigen::VectorXcd u = random_cvec(2, 1, 0.4);
    CHECK(std::abs(theta_char(c1, u.conjugate().eval(), om) - std::conj(theta_char(c1, u, om))) < 1e-13);
  }
  CHECK(pos);
  CHECK(neg);
}

TEST_CASE("characteristic shift identity") {
  PeriodMatrix om = genus2_omega();
  const double pi = std::numbers::pi;
  for (int k = 0; k < 30; ++k) {
    ThetaChar d{Eigen::VectorXi(2), Eigen::VectorXi(2)}, gm{Eigen::VectorXi(2), Eigen::VectorXi(2)};
    for (int i = 0; i < 2; ++i) {
      d.p[i] = int(std::floor(uniform(-2, 3)));
      d.pp[i] = int(std::floor(uniform(-2, 3)));
      gm.p[i] = int(std::floor(uniform(-2, 3)));
      gm.pp[i] = int(std::floor(uniform(-2, 3)));
    }
    Eigen::VectorXcd z = random_cvec(2, 1, 0.3);
    Eigen::VectorXcd gp = gm.delta_p().cast<cd>(), gpp = gm.delta_pp().cast<cd>();
    Eigen::VectorXcd dpp = d.delta_pp().cast<cd>();
    cd lhs = theta_char(d, (z + gpp + om.omega() * gp).eval(), om);
    ThetaChar sum{d.p + gm.p, d.pp + gm.pp};
    cd ex = std::exp(cd(0, -pi) * (gp.transpose() * (2.0 * z + 2.0 * dpp + 2.0 * gpp + om.omega() * gp))(0, 0));
    cd rhs = ex * theta_char(sum, z, om);
    CHECK(std::abs(lhs - rhs) < 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("gradient matches central differences") {
  PeriodMatrix om1 = genus1_omega(1.0);
  cd z = 0.3;
  const double h = 1e-5;
  cd fd = (theta(vec1(z + h), om1) - theta(vec1(z - h), om1)) / (2 * h);
  CHECK(std::abs(grad_theta(vec1(z), om1)[0] - fd) < 1e-8);
  PeriodMatrix om = genus2_omega();
  for (int k = 0; k < 20; ++k) {
    Eigen::VectorXcd x = random_cvec(2, 1, 0.3);
    Eigen::VectorXcd gr = grad_theta(x, om);
    for (int i = 0; i < 2; ++i) {
      Eigen::VectorXcd e = Eigen::VectorXcd::Zero(2);
      e[i] = h;
      cd d = (theta((x + e).eval(), om) - theta((x - e).eval(), om)) / (2 * h);
      CHECK(std::abs(gr[i] - d) < 1e-6 * std::max(1.0, std::abs(d)));
    }
  }
}

TEST_CASE("gradient of an even function vanishes at the origin") {
  PeriodMatrix om = genus2_omega();
  CHECK(grad_theta(Eigen::VectorXcd::Zero(2).eval(), om).norm() < 1e-13);
  Eigen::VectorXcd a = vec1(0.3), b = vec1(1.3);
  PeriodMatrix om1 = genus1_omega(0.7);
  CHECK(std::abs(grad_log_theta(a, om1)[0] - grad_log_theta(b, om1)[0]) < 1e-12);
}

TEST_CASE("odd characteristic selection") {
  ThetaChar c1 = pick_odd_characteristic(genus1_omega(1.0));
  CHECK(c1.p[0] == 1);
  CHECK(c1.pp[0] == 1);
  Eigen::MatrixXcd om = Eigen::MatrixXcd::Identity(2, 2) * cd(0, 1);
  PeriodMatrix pm(om);
  ThetaChar c2 = pick_odd_characteristic(pm);
  CHECK(c2.parity() == 1);
  CHECK(std::abs(theta_char(c2, Eigen::VectorXcd::Zero(2).eval(), pm)) < 1e-14);
  CHECK(grad_theta_char(c2, Eigen::VectorXcd::Zero(2).eval(), pm).norm() > 0.1);
}

TEST_CASE("invalid period matrices are rejected") {
  Eigen::MatrixXcd om(1, 1);
  om(0, 0) = cd(0, -1);
  CHECK_THROWS_AS(PeriodMatrix{om}, Error);
  Eigen::MatrixXcd nonsym(2, 2);
  nonsym << cd(0, 1), cd(0, 0.2), cd(0, 0.1), cd(0, 1);
  CHECK_THROWS_AS(PeriodMatrix{nonsym}, Error);
}

TEST_CASE("large imaginary part overflows the plain value but not the log form") {
  PeriodMatrix om = genus1_omega(1.0);
  Eigen::VectorXcd z = vec1(cd(0.1, 30.0));
  CHECK_THROWS_AS(theta(z, om), Error);
  ThetaSum<double> s = theta_sum(z, om);
  CHECK(std::isfinite(s.log().real()));
}

}
