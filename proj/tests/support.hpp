#pragma once

#include <Eigen/Dense>

#include <complex>
#include <random>

#include "fock/kasteleyn.hpp"
#include "fock/theta.hpp"

namespace testing_support {

using fock::cd;

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240611);
  return gen;
}

inline double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng()); }

inline Eigen::VectorXcd random_cvec(int g, double re, double im) {
  Eigen::VectorXcd z(g);
  for (int i = 0; i < g; ++i) z[i] = cd(uniform(-re, re), uniform(-im, im));
  return z;
}

inline Eigen::VectorXd random_rvec(int g, double a) {
  Eigen::VectorXd z(g);
  for (int i = 0; i < g; ++i) z[i] = uniform(-a, a);
  return z;
}

inline fock::PeriodMatrix genus2_omega() {
  Eigen::MatrixXcd om(2, 2);
  om << cd(0, 1.1), cd(0, 0.3), cd(0, 0.3), cd(0, 0.9);
  return fock::PeriodMatrix(om);
}

inline fock::PeriodMatrix genus1_omega(double t) {
  Eigen::MatrixXcd om(1, 1);
  om(0, 0) = cd(0, t);
  return fock::PeriodMatrix(om);
}

inline Eigen::Matrix2i lattice(int a, int b, int c, int d) {
  Eigen::Matrix2i L;
  L << a, b, c, d;
  return L;
}

inline Eigen::VectorXd rvec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(xs.size());
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline std::shared_ptr<const fock::MCurve> unit_torus() {
  static auto c = fock::make_genus1(1.0);
  return c;
}

inline std::shared_ptr<const fock::MCurve> genus2_curve_periodic() {
  static auto c = fock::make_hyperelliptic({-3, -2, 0.9, 0.95, 1, 3});
  return c;
}

// Same data as the packaged models.
inline fock::FockModel square1() {
  return fock::FockModel(unit_torus(), fock::square_lattice(lattice(1, -1, 1, 1)), {0, 0.25, 0.5, 0.75}, rvec({0.23}));
}
inline fock::FockModel square2() {
  return fock::FockModel(unit_torus(), fock::square_lattice(lattice(2, 0, 0, 2)), {0, 0.2, 0.5, 0.7}, rvec({0.23}));
}
inline fock::FockModel hexagonal() {
  return fock::FockModel(unit_torus(), fock::hexagonal_lattice(), {0.1, 0.4, 0.8}, rvec({0.23}));
}
inline fock::FockModel square_octagon() {
  return fock::FockModel(unit_torus(), fock::square_octagon_lattice(), {0.7, 0, 0.5, 0.2}, rvec({0.23}));
}
inline fock::FockModel genus2_square3() {
  return fock::FockModel(genus2_curve_periodic(), fock::square_lattice(lattice(3, 0, 1, 2)),
                         {0.7698997810436181, 0.9477889730010667, 1.052211026998933, 1.230100218956381},
                         rvec({0.23, 0.61}));
}

}  // namespace testing_support
