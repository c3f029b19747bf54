#pragma once

// Periodic bipartite graphs given by a fundamental domain with a rotation
// system, their train-tracks, Newton polygon and discrete Abel map.
//
// Conventions. Edge e joins white w (cell 0) to black b (cell offset).
// The face left of w->b is f, the face to its right is f'. The track with
// the alpha role at e runs from (w,f') to (b,f); the beta track from (b,f')
// to (w,f).

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "fock/errors.hpp"

namespace fock {

class MCurve;

using Cell = Eigen::Vector2i;

struct GraphEdge {
  int w = 0, b = 0;
  Cell offset = Cell::Zero();
};

// Oriented edge: from_white means w -> b.
struct Dart {
  int edge = 0;
  bool from_white = true;
};

struct Face {
  std::vector<Dart> darts;   // counterclockwise boundary, face on the left
  std::vector<Cell> cells;   // tail cell of each dart relative to the face anchor
  int degree() const { return int(darts.size()); }
};

// A face copy: face index and the cell of its anchor.
struct FaceRef {
  int face = 0;
  Cell cell = Cell::Zero();
};

class PeriodicBipartiteGraph {
 public:
  PeriodicBipartiteGraph() = default;
  PeriodicBipartiteGraph(int n_white, int n_black, std::vector<GraphEdge> edges,
                         std::vector<std::vector<int>> rot_white, std::vector<std::vector<int>> rot_black);

  int n_white() const { return n_white_; }
  int n_black() const { return n_black_; }
  int n_edges() const { return int(edges_.size()); }
  int n_faces() const { return int(faces_.size()); }
  const GraphEdge& edge(int e) const { return edges_[e]; }
  const std::vector<GraphEdge>& edges() const { return edges_; }
  const std::vector<int>& rotation(bool white, int v) const { return white ? rot_w_[v] : rot_b_[v]; }
  const Face& face(int f) const { return faces_[f]; }
  const std::vector<Face>& faces() const { return faces_; }

  int next_ccw(bool white, int v, int e) const;
  int prev_ccw(bool white, int v, int e) const;

  FaceRef face_left(int e) const;   // left of w -> b, relative to w's cell
  FaceRef face_right(int e) const;  // right of w -> b, relative to w's cell

  // Edges whose white endpoint is w (in rotation order).
  const std::vector<int>& edges_at_white(int w) const { return rot_w_[w]; }
  const std::vector<int>& edges_at_black(int b) const { return rot_b_[b]; }

 private:
  void build_faces();

  int n_white_ = 0, n_black_ = 0;
  std::vector<GraphEdge> edges_;
  std::vector<std::vector<int>> rot_w_, rot_b_;
  std::vector<int> pos_w_, pos_b_;
  std::vector<Face> faces_;
  std::vector<FaceRef> dart_face_;  // by dart index 2e + (from_white ? 0 : 1), relative to tail cell
};

struct TrackCrossing {
  int edge = 0;
  bool alpha = true;
};

struct TrainTrack {
  std::vector<TrackCrossing> crossings;
  Cell homology = Cell::Zero();  // (h, v)
};

struct TrackSet {
  std::vector<TrainTrack> tracks;
  std::vector<int> alpha, beta;  // track index per edge
  int size() const { return int(tracks.size()); }
};

TrackSet extract_train_tracks(const PeriodicBipartiteGraph& g);

struct MinimalityReport {
  bool minimal = true;
  std::vector<std::string> witnesses;
};

MinimalityReport check_minimal(const PeriodicBipartiteGraph& g, const TrackSet& t);

inline int cross2(const Cell& a, const Cell& b) { return a.x() * b.y() - a.y() * b.x(); }

// Lattice polygon P_1 = 0, P_{j+1} = P_j + [T_{order_j}].
struct NewtonPolygon {
  std::vector<Cell> points;
  std::vector<int> order;
  int twice_area = 0;

  // Corners only (collinear boundary points removed), counterclockwise.
  std::vector<Cell> corners() const;
  std::vector<Cell> interior_points() const;
  bool contains(const Eigen::Vector2d& p, double tol, bool strict) const;
};

// Tracks sorted by direction, starting from the smallest polar angle in (-pi, pi].
NewtonPolygon newton_polygon(const TrackSet& t);
NewtonPolygon newton_polygon(const TrackSet& t, const std::vector<int>& order);

// Same polygon up to translation (compares corner lists).
bool same_polygon_up_to_translation(std::vector<Cell> a, std::vector<Cell> b);

struct AngleMap {
  std::vector<double> s;               // A0 parameter per track, inside one window
  std::vector<Eigen::VectorXd> lift;   // Abel-Jacobi lift per track (real on A0)

  int genus() const { return lift.empty() ? 0 : int(lift[0].size()); }
  // Tracks sorted by s (stable).
  std::vector<int> order() const;
};

// Lifts s_T through the curve after normalizing into [min s, min s + 1).
AngleMap make_angle_map(const MCurve& curve, std::vector<double> s);

struct AngleValidation {
  bool valid = true;
  std::string diagnostics;
};

AngleValidation validate_angle_map(const TrackSet& t, const AngleMap& a);

// Integer bookkeeping of the discrete Abel map: every quad-graph vertex gets a
// coefficient vector over tracks, d(x) = sum_T D_T(x) alpha_T.
struct AbelMap {
  std::vector<Eigen::VectorXi> white, black, face;  // at cell 0
  Eigen::VectorXi period_x, period_y;               // D(x + (1,0)) - D(x), D(x + (0,1)) - D(x)

  Eigen::VectorXi shifted(const Eigen::VectorXi& d, const Cell& c) const {
    return d + c.x() * period_x + c.y() * period_y;
  }
  Eigen::VectorXi at_face(const FaceRef& f) const { return shifted(face[f.face], f.cell); }
  Eigen::VectorXi at_black(int b, const Cell& c) const { return shifted(black[b], c); }
  Eigen::VectorXi at_white(int w, const Cell& c = Cell::Zero()) const { return shifted(white[w], c); }
};

AbelMap discrete_abel_map(const PeriodicBipartiteGraph& g, const TrackSet& t, int base_face = 0);

// sum_T D_T lift_T
Eigen::VectorXd lift_of(const Eigen::VectorXi& d, const AngleMap& a);

// phi_k = sum_j P_j (a_j - a_{j-1})_k with tracks in angle order.
std::vector<Eigen::Vector2d> phi_map(const TrackSet& t, const AngleMap& a);

struct PeriodicityReport {
  bool periodic = false;
  std::vector<Cell> points;
  double max_deviation = 0;
};

PeriodicityReport is_operator_periodic(const TrackSet& t, const AngleMap& a, double tol = 1e-8);

// Builds rotations from planar positions: lattice columns are the periods,
// edge offsets are in lattice coordinates.
PeriodicBipartiteGraph embedded_graph(const std::vector<Eigen::Vector2d>& white_pos,
                                      const std::vector<Eigen::Vector2d>& black_pos,
                                      const Eigen::Matrix2d& lattice, std::vector<GraphEdge> edges);

// Square lattice Z^2 modulo the sublattice spanned by the columns of L
// (columns with even coordinate sum). Whites on even sites.
PeriodicBipartiteGraph square_lattice(const Eigen::Matrix2i& L);
PeriodicBipartiteGraph hexagonal_lattice();
// Square-octagon lattice; two squares per fundamental domain.
PeriodicBipartiteGraph square_octagon_lattice();

// n1 x n2 cover of g: copy (v, i, j) has index v + n_v (i + n1 j).
PeriodicBipartiteGraph supercell(const PeriodicBipartiteGraph& g, int n1, int n2);

}  // namespace fock
