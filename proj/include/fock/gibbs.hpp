#pragma once

// Gibbs measures of a periodic Fock model indexed by a point u0 of the closed
// half Sigma+: the inverse operator by Fourier integration or by contour
// integration of the kernel, local edge probabilities, slopes, surface tension,
// free energy and exact torus partition functions.

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "fock/kasteleyn.hpp"
#include "fock/spectral.hpp"

namespace fock {

enum class Phase { Liquid, Solid, Gaseous };

const char* to_string(Phase p);

// u0 on an oval (oval 0 solid, oval k gaseous) or in the interior. Interior
// points carry the A0 crossing used for their lift.
struct PhasePoint {
  Phase phase = Phase::Liquid;
  int oval = -1;
  PointLift point;
  double s_cross = 0.25;

  static PhasePoint on_oval(const MCurve& c, const OvalPoint& p);
  static PhasePoint interior(const MCurve& c, cd coord, double s_cross = 0.25);
};

Phase classify_phase(const PhasePoint& p);

// B(u0) = (-log|w(u0)|, log|z(u0)|).
MagneticField magnetic_field(const FockModel& m, const PhasePoint& p);

// A field strictly inside the complement component of an oval point, or B(u0)
// for interior points.
MagneticField representative_field(const FockModel& m, const PhasePoint& p, double step = 1.0);

// Reference point u1 on A0: middle of the arc between the last and first angle.
double reference_s(const FockModel& m);

// ---------------------------------------------------------------- inverse

// Blocks A_c(b, w) = K^{-1}(b + c, w) for a list of offsets c.
struct InverseBlocks {
  std::vector<Cell> offsets;
  std::vector<Eigen::MatrixXcd> blocks;  // n_black x n_white
  double min_abs_det = 0;                // tensor route only

  const Eigen::MatrixXcd& at(const Cell& c) const;
};

struct FourierConfig {
  int order = 64;              // tensor grid size per direction
  double singular_floor = 1e-10;
  double rel_tol = 1e-12;      // semi-analytic route
  double abs_tol = 1e-13;
};

// Tensor trapezoid rule on the torus |z| = e^By, |w| = e^-Bx.
InverseBlocks inverse_fourier(const FockModel& m, const MagneticField& B, const std::vector<Cell>& offsets,
                              const FourierConfig& cfg = {});

// Same integral with the inner w-integral done by residues and the outer one
// adaptively between root crossings; any B, inside the amoeba or not.
InverseBlocks inverse_fourier_adaptive(const FockModel& m, const CharPoly& P, const MagneticField& B,
                                       const std::vector<Cell>& offsets, const FourierConfig& cfg = {});

// K^{-1}(b at cb, w at cw) for genus 1 by integrating g_{b,w} zeta du along a
// contour from conj(u0) to u0 through the allowed part of A0.
cd inverse_contour(const FockModel& m, const PhasePoint& p, int b, const Cell& cb, int w, const Cell& cw,
                   double tol = 1e-12);

// Allowed A0 crossing for the pair, or SectorBlocked.
double crossing_parameter(const FockModel& m, int b, const Cell& cb, int w, const Cell& cw);

using InverseFn = std::function<cd(int b, const Cell& cb, int w, const Cell& cw)>;

InverseFn fourier_inverse_fn(const FockModel& m, const MagneticField& B, const FourierConfig& cfg = {});
InverseFn adaptive_inverse_fn(const FockModel& m, const MagneticField& B, const FourierConfig& cfg = {});
InverseFn contour_inverse_fn(const FockModel& m, const PhasePoint& p, double tol = 1e-12);

// ---------------------------------------------------------------- probabilities

// Edge copy: edge index plus the cell of its white endpoint.
struct EdgeCopy {
  int edge = 0;
  Cell cell = Cell::Zero();
};

// prod K(e_i) det A(b_i, w_j).
double cylinder_probability(const FockModel& m, const std::vector<EdgeCopy>& edges, const InverseFn& inv);

double edge_probability(const FockModel& m, int e, const InverseFn& inv);

// Closed forms: indicator on A0, oval Abel difference on A_k, boundary values
// of arguments in the interior.
double edge_probability_local(const FockModel& m, int e, const PhasePoint& p);
std::vector<double> edge_probabilities_local(const FockModel& m, const PhasePoint& p);

// max over white vertices of |sum of incident probabilities - 1|.
double white_sum_defect(const FockModel& m, const std::vector<double>& probs);

// ---------------------------------------------------------------- slopes and thermodynamics

struct Slope {
  double s = 0, t = 0;
};

// sum_e (e ^ gamma) (P(e) - 1_{M1}(e)), M1 the frozen matching at u1.
Slope slope(const FockModel& m, const PhasePoint& p);
Slope slope_from_probabilities(const FockModel& m, const std::vector<double>& probs);
// -(1/pi) arg z and arg w along a path from u1 to u0.
Slope slope_dlog(const FockModel& m, const PhasePoint& p);
// sum over tracks T with u0 < alpha_T < u1 (cyclically) of (v_T, -h_T).
Slope slope_solid(const FockModel& m, double s0);

struct Thermodynamics {
  MagneticField B;
  Slope slope;
  double surface_tension = 0;
  double free_energy = 0;
  double legendre_residual = 0;  // |F - (s Bx + t By - sigma)|
};

// Path integrals from u1 to u0 for interior points.
Thermodynamics thermodynamics(const FockModel& m, const PhasePoint& p, double tol = 1e-11);

// ---------------------------------------------------------------- torus

struct TorusResult {
  double Z = 0;
  std::vector<double> edge_frequency;  // per edge of the fundamental domain
  long long matchings = 0;             // brute force only
};

// Exact partition function of the n x n quotient with edge weights
// |K_e| rz^dx rw^dy, by sign classes of the coefficients of det K_n(z, w).
TorusResult torus_partition_function(const FockModel& m, int n, const MagneticField& B = {});
// Enumeration of all perfect matchings.
TorusResult brute_force_torus(const FockModel& m, int n, const MagneticField& B = {});

}  // namespace fock
