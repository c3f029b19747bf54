#pragma once

// Fock's Kasteleyn operator in the reduced gauge where the prime form is
// replaced by E(x, y) = theta[odd](y - x). Face weights, the spectral curve
// and all probabilities are unchanged by this substitution; raw entries
// differ from the unreduced ones by a positive factor per edge.

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <vector>

#include "fock/graph.hpp"
#include "fock/surface.hpp"

namespace fock {

struct ModelOptions {
  bool strict = true;           // reject non-minimal graphs and invalid angle maps
  double periodic_tol = 1e-8;
};

class FockModel {
 public:
  FockModel(std::shared_ptr<const MCurve> curve, PeriodicBipartiteGraph graph, std::vector<double> angles,
            Eigen::VectorXd t, ModelOptions opt = {});

  const MCurve& curve() const { return *curve_; }
  std::shared_ptr<const MCurve> curve_ptr() const { return curve_; }
  const PeriodicBipartiteGraph& graph() const { return graph_; }
  const TrackSet& tracks() const { return tracks_; }
  const AngleMap& angles() const { return angles_; }
  const AbelMap& abel() const { return abel_; }
  const Eigen::VectorXd& t() const { return t_; }
  const ThetaChar& odd() const { return odd_; }
  const ModelOptions& options() const { return opt_; }
  int genus() const { return curve_->genus(); }

  const MinimalityReport& minimality() const { return minimal_; }
  const AngleValidation& angle_validation() const { return valid_; }
  const PeriodicityReport& periodicity() const { return periodic_; }

  // Lifted discrete Abel map.
  Eigen::VectorXd d_face(const FaceRef& f) const { return lift_of(abel_.at_face(f), angles_); }
  Eigen::VectorXd d_white(int w, const Cell& c = Cell::Zero()) const { return lift_of(abel_.at_white(w, c), angles_); }
  Eigen::VectorXd d_black(int b, const Cell& c = Cell::Zero()) const { return lift_of(abel_.at_black(b, c), angles_); }

  // Cached edge weights.
  const std::vector<cd>& entries() const { return entries_; }
  cd entry(int e) const { return entries_[e]; }

  // Same graph and curve with other angles or t.
  FockModel with_t(Eigen::VectorXd t) const;
  FockModel with_angles(std::vector<double> angles) const;

 private:
  std::shared_ptr<const MCurve> curve_;
  PeriodicBipartiteGraph graph_;
  TrackSet tracks_;
  AngleMap angles_;
  AbelMap abel_;
  Eigen::VectorXd t_;
  ThetaChar odd_;
  ModelOptions opt_;
  MinimalityReport minimal_;
  AngleValidation valid_;
  PeriodicityReport periodic_;
  std::vector<cd> entries_;
};

// Weight of edge e computed from thetas; t_lift defaults to the model's t.
cd fock_entry(const FockModel& m, int e);
cd fock_entry(const FockModel& m, int e, const Eigen::VectorXd& t_lift);
// Weight of the copy of e whose white endpoint sits in cell c. Equals
// fock_entry(m, e) for every c when the operator is periodic.
cd fock_entry_at(const FockModel& m, int e, const Cell& c);

// prod K(w_j b_j) / prod K(w_j b_{j+1}) around the face.
cd face_weight(const FockModel& m, int f);
cd face_weight(const PeriodicBipartiteGraph& g, const std::vector<cd>& entries, int f);

struct FaceCheck {
  int face = 0;
  int degree = 0;
  cd weight = 0;
  double phase_error = 0;
};

struct KasteleynReport {
  bool pass = true;
  double max_error = 0;
  std::vector<FaceCheck> faces;
  std::vector<int> failing;
};

KasteleynReport check_kasteleyn_condition(const FockModel& m, double tol = 1e-8);

// K(z, w) as a Laurent matrix: one term per edge.
struct KasteleynMatrix {
  struct Term {
    int w, b;
    cd coef;
    Cell offset;
  };
  int n_white = 0, n_black = 0;
  std::vector<Term> terms;

  Eigen::MatrixXcd operator()(cd z, cd w) const;
};

KasteleynMatrix kasteleyn_matrix(const FockModel& m);
KasteleynMatrix kasteleyn_matrix(const PeriodicBipartiteGraph& g, const std::vector<cd>& entries);
Eigen::MatrixXcd build_K(const FockModel& m, cd z, cd w);

// P(z, w) = sum c(i, j) z^(m0 + i) w^(n0 + j).
struct CharPoly {
  int m0 = 0, n0 = 0;
  Eigen::MatrixXcd c;

  cd operator()(cd z, cd w) const;
  double norm() const;  // max |coefficient|
  std::vector<Cell> support(double rel_tol = 1e-9) const;
  std::vector<Cell> newton_corners(double rel_tol = 1e-9) const;
  cd coefficient(int i, int j) const;
};

// Interpolates det K on a grid of roots of unity sized by the exponent box.
CharPoly char_poly(const KasteleynMatrix& K);
CharPoly char_poly(const FockModel& m);

struct SpectralPoint {
  cd z, w;
  cd log_z, log_w;
};

// z = prod E(alpha_T, u)^(-v_T), w = prod E(alpha_T, u)^(h_T).
SpectralPoint spectral_point(const FockModel& m, const Eigen::VectorXcd& u_lift);

// Scale (lambda, mu) with P(lambda z(u), mu w(u)) = 0. In the reduced gauge the
// identity scale already works; this checks it on the probes.
struct Calibration {
  cd lambda = 1, mu = 1;
  double residual = 0;  // max |P| / ||P|| over the probes
};
Calibration calibrate_scale(const FockModel& m, const CharPoly& P, const std::vector<Eigen::VectorXcd>& probes,
                            double tol = 1e-7);

enum class VertexKind { White, Black };

struct QuadVertex {
  VertexKind kind = VertexKind::White;
  int index = 0;
  Cell cell = Cell::Zero();

  static QuadVertex white(int w, Cell c = Cell::Zero()) { return {VertexKind::White, w, c}; }
  static QuadVertex black(int b, Cell c = Cell::Zero()) { return {VertexKind::Black, b, c}; }
};

// log of the vertex factor N_x(u); g_{x,y} = N_y / N_x.
cd log_vertex_factor(const FockModel& m, const QuadVertex& x, const Eigen::VectorXcd& u_lift);
cd kernel_g(const FockModel& m, const QuadVertex& x, const QuadVertex& y, const Eigen::VectorXcd& u_lift);

// sum over edges at w of K(w,b) g_{b,x}(u), relative to the largest term.
double right_kernel_residual(const FockModel& m, int w, const QuadVertex& x, const Eigen::VectorXcd& u_lift);
// sum over edges at b of g_{x,w}(u) K(w,b), relative to the largest term.
double left_kernel_residual(const FockModel& m, int b, const QuadVertex& x, const Eigen::VectorXcd& u_lift);

// K(w,b) g_{b,w}(u) zeta(u) against d log(E(u,beta)/E(u,alpha)) + sum c_j omega_j,
// both evaluated against d(coord) at a curve point. Relative residual.
double faydiff_residual(const FockModel& m, int e, const PointLift& p);

// Reduced Fay identities. Arguments are lifts of curve points; s and t arbitrary.
double fay_residual(const PeriodMatrix& om, const ThetaChar& odd, const Eigen::VectorXcd& alpha,
                    const Eigen::VectorXcd& beta, const Eigen::VectorXcd& gamma, const Eigen::VectorXcd& u,
                    const Eigen::VectorXcd& s, const ThetaConfig& cfg = {});
double fay_fock_residual(const PeriodMatrix& om, const ThetaChar& odd, const Eigen::VectorXcd& a,
                         const Eigen::VectorXcd& b, const Eigen::VectorXcd& c, const Eigen::VectorXcd& d,
                         const Eigen::VectorXcd& t, const ThetaConfig& cfg = {});

struct FayReport {
  double fay = 0, fay_fock = 0;
  int samples = 0;
};

// Samples curve points on the ovals and in the interior.
FayReport check_fay(const MCurve& curve, int samples, std::uint64_t seed = 1);

// Zeros of s -> theta(t + lift(A_j(s)) + d(w)), one per oval A_1..A_g.
std::vector<OvalPoint> divisor_of_vertex(const FockModel& m, int w);
// Distance mod the lattice between sum lift(div w) + d(w) + t and the Riemann constant.
double divisor_residual(const FockModel& m, int w);

}  // namespace fock
