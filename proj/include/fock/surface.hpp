#pragma once

#include <Eigen/Dense>

#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "fock/theta.hpp"

namespace fock {

enum class CurveKind { Genus1, Hyperelliptic };

struct OvalPoint {
  int oval = 0;
  double s = 0;
};

// A point of the curve together with its Abel-Jacobi lift (base point x0 on A0).
// coord is the chart coordinate: u for the torus, x for the hyperelliptic model.
struct PointLift {
  Eigen::VectorXcd lift;
  cd coord = 0;
  int oval = -1;
  double s = 0;

  bool on_oval() const { return oval >= 0; }
};

struct SurfaceConfig {
  double tol = 1e-13;
  ThetaConfig theta;
};

// Lattice coordinates (a, b) with v = a + Omega b.
struct LatticeCoords {
  Eigen::VectorXd a, b;
};

class MCurve {
 public:
  virtual ~MCurve() = default;

  virtual CurveKind kind() const = 0;
  virtual std::string describe() const = 0;

  int genus() const { return omega_.genus(); }
  const PeriodMatrix& period_matrix() const { return omega_; }
  const SurfaceConfig& config() const { return cfg_; }

  // Abel-Jacobi lift of an oval point; s is not reduced mod 1, so the lift is
  // continuous in s and gains e_j (or 1 on A0) per turn.
  virtual PointLift at_oval(const OvalPoint& p) const = 0;
  // d lift / ds along the oval.
  virtual Eigen::VectorXcd oval_velocity(const OvalPoint& p) const = 0;
  // Chart coordinate of an oval point.
  virtual cd oval_coord(const OvalPoint& p) const = 0;
  // Interior point of Sigma+ given by its chart coordinate, lifted along a
  // path that leaves A0 at the crossing parameter s_cross.
  virtual PointLift interior(cd coord, double s_cross) const = 0;
  virtual bool in_sigma_plus(cd coord) const = 0;
  // Normalized holomorphic forms against d(coord).
  virtual Eigen::VectorXcd forms_at(cd coord) const = 0;
  // Lift at `to` from the lift at `from`, integrating along the chart segment.
  virtual Eigen::VectorXcd transport(cd from, const Eigen::VectorXcd& lift_from, cd to) const = 0;

  PointLift involution(const PointLift& p) const {
    PointLift q = p;
    q.lift = p.lift.conjugate();
    q.coord = std::conj(p.coord);
    return q;
  }

  cd zeta_at(cd coord, const ThetaChar& odd) const;

  LatticeCoords lattice_coords(const Eigen::VectorXcd& v) const;
  Eigen::VectorXcd reduce_mod_lattice(const Eigen::VectorXcd& v) const;
  double lattice_distance(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) const;

  // Zeros of x -> theta(e + lift(x)) for real e, one per oval A_1..A_g.
  std::vector<OvalPoint> theta_divisor(const Eigen::VectorXd& e) const;
  // Theta divisor sum residual against the stored Riemann constant.
  double riemann_residual(const Eigen::VectorXd& e) const;
  const Eigen::VectorXcd& riemann_constant() const { return delta_; }

 protected:
  void finish_setup();
  Eigen::VectorXcd riemann_from_probe(const Eigen::VectorXd& e) const;

  PeriodMatrix omega_;
  SurfaceConfig cfg_;
  Eigen::VectorXcd delta_;
};

class Genus1Curve : public MCurve {
 public:
  explicit Genus1Curve(double tau_im, SurfaceConfig cfg = {});
  CurveKind kind() const override { return CurveKind::Genus1; }
  std::string describe() const override;
  double tau_im() const { return tau_im_; }

  PointLift at_oval(const OvalPoint& p) const override;
  Eigen::VectorXcd oval_velocity(const OvalPoint& p) const override;
  cd oval_coord(const OvalPoint& p) const override;
  PointLift interior(cd coord, double s_cross) const override;
  bool in_sigma_plus(cd coord) const override;
  Eigen::VectorXcd forms_at(cd coord) const override;
  Eigen::VectorXcd transport(cd from, const Eigen::VectorXcd& lift_from, cd to) const override;

 private:
  double tau_im_;
};

// y^2 = -prod (x - lambda_i); the real ovals lie over [lambda_{2j-1}, lambda_{2j}]
// (j = 1..g, one-based) and A0 over [lambda_{2g+1}, lambda_{2g+2}].
class HyperellipticCurve : public MCurve {
 public:
  explicit HyperellipticCurve(std::vector<double> branch_points, SurfaceConfig cfg = {});
  CurveKind kind() const override { return CurveKind::Hyperelliptic; }
  std::string describe() const override;
  const std::vector<double>& branch_points() const { return lam_; }

  PointLift at_oval(const OvalPoint& p) const override;
  Eigen::VectorXcd oval_velocity(const OvalPoint& p) const override;
  cd oval_coord(const OvalPoint& p) const override;
  PointLift interior(cd coord, double s_cross) const override;
  bool in_sigma_plus(cd coord) const override;
  Eigen::VectorXcd forms_at(cd coord) const override;
  Eigen::VectorXcd transport(cd from, const Eigen::VectorXcd& lift_from, cd to) const override;

  // Branch of y on the closed upper half plane belonging to Sigma+.
  cd y_upper(cd x) const;
  // Unnormalized forms x^{k-1} dx / y at an upper-half-plane point.
  Eigen::VectorXcd raw_forms_upper(cd x) const;
  const Eigen::MatrixXcd& normalization() const { return C_; }

 private:
  struct Interval {
    int lo, hi;  // branch point indices
    double c, h;
    double sheet;  // +1 when y(s) = y_upper(x) on s in (0, 1/2)
  };
  Interval interval(int oval) const;
  Eigen::VectorXcd raw_oval_integral(int oval, double s0, double s1) const;
  Eigen::VectorXcd raw_oval_density(int oval, double s) const;
  Eigen::VectorXcd raw_cut_integral(int m) const;
  Eigen::VectorXcd raw_segment(cd a, cd b) const;

  std::vector<double> lam_;
  int g_;
  cd kappa_;
  Eigen::MatrixXcd C_;                  // omega = C * raw forms
  std::vector<Eigen::VectorXcd> gamma_;  // raw lift at the right end of oval j (index j)
};

std::shared_ptr<const MCurve> make_genus1(double tau_im, SurfaceConfig cfg = {});
std::shared_ptr<const MCurve> make_hyperelliptic(std::vector<double> branch_points, SurfaceConfig cfg = {});

}  // namespace fock
