#pragma once

// Local moves on periodic bipartite graphs (applied in every period) and the
// transport of a Fock model through them.

#include <vector>

#include "fock/gibbs.hpp"
#include "fock/kasteleyn.hpp"

namespace fock {

enum class MoveKind { Expand2Valent, Shrink2Valent, Spider };

const char* to_string(MoveKind k);

struct MoveResult {
  MoveKind kind = MoveKind::Spider;
  PeriodicBipartiteGraph graph;
  std::vector<int> edge_map;   // old edge -> new edge, -1 if removed
  std::vector<int> white_map;  // old white -> new white, -1 if removed
  std::vector<int> black_map;
};

// Split vertex v: the contiguous rotation block [first, first + count) moves to
// a new vertex joined to v through a new 2-valent vertex of the other colour.
MoveResult expand_2valent(const PeriodicBipartiteGraph& g, bool white, int v, int first, int count);

// Contract a 2-valent vertex together with its two neighbours.
MoveResult shrink_2valent(const PeriodicBipartiteGraph& g, bool white, int x);

// Contracted square move on a quadrilateral face with trivalent corners: the
// corners, the square and the four legs are replaced by a square on the far
// ends of the legs.
MoveResult spider_move(const PeriodicBipartiteGraph& g, int face);

// Faces of g whose boundary consists of trivalent corners, usable for spider_move.
std::vector<int> spider_faces(const PeriodicBipartiteGraph& g);

// Fock model on the moved graph: the same curve, angles carried along the
// train-tracks and t shifted so that t + d agrees at a preserved vertex.
FockModel transport_model(const FockModel& m, const MoveResult& r, ModelOptions opt = {});

struct MoveReport {
  int untouched_faces = 0;
  double face_weight_error = 0;   // max relative change of untouched face weights
  double charpoly_deviation = 0;  // max |P_new - c z^a w^b P_old| / max |P_new|
  int compared_edges = 0;
  double probability_error = 0;   // max change over edges away from the move
  double fay_fock = 0;            // residual at the four angles of a spider move
  double anchor_spread = 0;       // variation of D_new - D_old over preserved vertices
};

// Probabilities are compared through the Fourier inverse at the field of u0.
MoveReport check_move_invariance(const FockModel& before, const FockModel& after, const MoveResult& r,
                                 const PhasePoint& u0);

}  // namespace fock
