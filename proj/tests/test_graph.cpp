#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "fock/graph.hpp"
#include "fock/surface.hpp"

using namespace fock;

namespace {

Eigen::Matrix2i lattice(int a, int b, int c, int d) {
  Eigen::Matrix2i L;
  L << a, b, c, d;
  return L;
}

// Vertices - edges + faces of the fundamental domain.
int euler(const PeriodicBipartiteGraph& g) { return g.n_white() + g.n_black() - g.n_edges() + g.n_faces(); }

// Hexagonal lattice with edge 0 doubled into a bigon.
PeriodicBipartiteGraph doubled_hexagon() {
  PeriodicBipartiteGraph h = hexagonal_lattice();
  std::vector<GraphEdge> edges = h.edges();
  edges.push_back(edges[0]);
  std::vector<int> rw = h.rotation(true, 0), rb = h.rotation(false, 0);
  rw.insert(std::find(rw.begin(), rw.end(), 0) + 1, 3);
  rb.insert(std::find(rb.begin(), rb.end(), 0), 3);
  return PeriodicBipartiteGraph(1, 1, edges, {rw}, {rb});
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("lattices are embedded on the torus") {
  for (const auto& g : {square_lattice(lattice(1, -1, 1, 1)), square_lattice(lattice(2, 0, 0, 2)),
                        square_lattice(lattice(3, 0, 1, 2)), hexagonal_lattice(), square_octagon_lattice()}) {
    CHECK(euler(g) == 0);
    int darts = 0;
    for (const Face& f : g.faces()) {
      CHECK(f.degree() % 2 == 0);
      darts += f.degree();
    }
    CHECK(darts == 2 * g.n_edges());
  }
  auto so = square_octagon_lattice();
  std::vector<int> deg;
  for (const Face& f : so.faces()) deg.push_back(f.degree());
  std::sort(deg.begin(), deg.end());
  CHECK(deg == std::vector<int>{4, 4, 8, 8});
}

TEST_CASE("square lattice quotient sizes") {
  auto g = square_lattice(lattice(2, 0, 0, 2));
  CHECK(g.n_white() == 2);
  CHECK(g.n_black() == 2);
  CHECK(g.n_edges() == 8);
  CHECK_THROWS_AS(square_lattice(lattice(1, 0, 0, 1)), Error);
}

TEST_CASE("face boundaries alternate colours and close up") {
  auto g = square_octagon_lattice();
  for (const Face& f : g.faces()) {
    for (int i = 0; i < f.degree(); ++i) {
      const Dart& d = f.darts[i];
      const Dart& n = f.darts[(i + 1) % f.degree()];
      CHECK(d.from_white != n.from_white);
      const GraphEdge& e = g.edge(d.edge);
      Cell head = f.cells[i] + (d.from_white ? Cell(e.offset) : Cell(-e.offset));
      CHECK(head == f.cells[(i + 1) % f.degree()]);
    }
  }
}

TEST_CASE("each edge is crossed by two distinct tracks") {
  for (const auto& g : {square_lattice(lattice(3, 0, 1, 2)), hexagonal_lattice(), square_octagon_lattice()}) {
    TrackSet t = extract_train_tracks(g);
    Cell total = Cell::Zero();
    std::vector<int> visits(g.n_edges(), 0);
    for (const auto& tr : t.tracks) {
      total += tr.homology;
      for (const auto& c : tr.crossings) ++visits[c.edge];
    }
    CHECK(total == Cell::Zero());
    for (int e = 0; e < g.n_edges(); ++e) {
      CHECK(visits[e] == 2);
      CHECK(t.alpha[e] != t.beta[e]);
    }
  }
}

TEST_CASE("track homology of the square lattice") {
  TrackSet t = extract_train_tracks(square_lattice(lattice(1, -1, 1, 1)));
  REQUIRE(t.size() == 4);
  std::vector<Cell> h;
  for (const auto& tr : t.tracks) h.push_back(tr.homology);
  auto has = [&](int x, int y) { return std::count(h.begin(), h.end(), Cell(x, y)) == 1; };
  CHECK((has(1, 0) && has(-1, 0) && has(0, 1) && has(0, -1)));
}

TEST_CASE("Newton polygons") {
  auto sq = newton_polygon(extract_train_tracks(square_lattice(lattice(1, -1, 1, 1))));
  CHECK(sq.twice_area == 2);
  CHECK(sq.corners().size() == 4);
  CHECK(sq.interior_points().empty());

  auto s2 = newton_polygon(extract_train_tracks(square_lattice(lattice(2, 0, 0, 2))));
  CHECK(s2.twice_area == 4);
  CHECK(s2.interior_points().size() == 1);

  auto s3 = newton_polygon(extract_train_tracks(square_lattice(lattice(3, 0, 1, 2))));
  CHECK(s3.interior_points().size() == 2);

  auto hx = newton_polygon(extract_train_tracks(hexagonal_lattice()));
  CHECK(hx.twice_area == 1);
  CHECK(hx.corners().size() == 3);

  auto so = square_octagon_lattice();
  auto np = newton_polygon(extract_train_tracks(so));
  CHECK(np.interior_points().size() == 1);
  CHECK(same_polygon_up_to_translation(np.corners(), s2.corners()));
}

TEST_CASE("minimal lattices and a bigon") {
  for (const auto& g : {square_lattice(lattice(2, 0, 0, 2)), hexagonal_lattice(), square_octagon_lattice()})
    CHECK(check_minimal(g, extract_train_tracks(g)).minimal);
  auto bad = doubled_hexagon();
  CHECK(euler(bad) == 0);
  auto rep = check_minimal(bad, extract_train_tracks(bad));
  CHECK_FALSE(rep.minimal);
  CHECK_FALSE(rep.witnesses.empty());
}

TEST_CASE("supercell multiplies the fundamental domain") {
  auto g = square_octagon_lattice();
  auto s = supercell(g, 2, 3);
  CHECK(s.n_white() == 6 * g.n_white());
  CHECK(s.n_edges() == 6 * g.n_edges());
  CHECK(s.n_faces() == 6 * g.n_faces());
  CHECK(euler(s) == 0);
  auto ts = extract_train_tracks(s);
  CHECK(check_minimal(s, ts).minimal);
  CHECK(newton_polygon(ts).twice_area == 6 * newton_polygon(extract_train_tracks(g)).twice_area);
}

TEST_CASE("angle maps respect the cyclic order of directions") {
  auto g = square_lattice(lattice(2, 0, 0, 2));
  TrackSet t = extract_train_tracks(g);
  Genus1Curve c(1.0);
  CHECK(validate_angle_map(t, make_angle_map(c, {0, 0.2, 0.5, 0.7})).valid);
  CHECK(validate_angle_map(t, make_angle_map(c, {0.3, 0.5, 0.8, 1.0})).valid);
  auto bad = validate_angle_map(t, make_angle_map(c, {0.2, 0, 0.5, 0.7}));
  CHECK_FALSE(bad.valid);
  CHECK_FALSE(bad.diagnostics.empty());
  auto tied = validate_angle_map(t, make_angle_map(c, {0.2, 0.2, 0.5, 0.7}));
  CHECK_FALSE(tied.valid);
}

TEST_CASE("lifts normalised into one window") {
  Genus1Curve c(1.0);
  AngleMap a = make_angle_map(c, {0.9, 0.2, 1.5});
  // Window [0.2, 1.2).
  CHECK(a.s[0] == doctest::Approx(0.9));
  CHECK(a.s[1] == doctest::Approx(0.2));
  CHECK(a.s[2] == doctest::Approx(0.5));
  CHECK(a.order() == std::vector<int>{1, 2, 0});
}

TEST_CASE("discrete Abel map across each edge") {
  for (const auto& g : {square_lattice(lattice(3, 0, 1, 2)), square_octagon_lattice()}) {
    TrackSet t = extract_train_tracks(g);
    AbelMap am = discrete_abel_map(g, t);
    for (int e = 0; e < g.n_edges(); ++e) {
      const GraphEdge& ge = g.edge(e);
      FaceRef f = g.face_left(e), fr = g.face_right(e);
      Eigen::VectorXi d = am.at_face(f) - am.at_face(fr);
      Eigen::VectorXi expect = Eigen::VectorXi::Zero(t.size());
      expect[t.beta[e]] += 1;
      expect[t.alpha[e]] -= 1;
      CHECK(d == expect);
      Eigen::VectorXi wb = Eigen::VectorXi::Zero(t.size());
      wb[t.alpha[e]] += 1;
      wb[t.beta[e]] += 1;
      CHECK(am.at_black(ge.b, ge.offset) - am.at_white(ge.w) == wb);
    }
    // Going once around the torus adds the homology intersections.
    for (int i = 0; i < t.size(); ++i) {
      CHECK(am.period_x[i] == t.tracks[i].homology.y());
      CHECK(am.period_y[i] == -t.tracks[i].homology.x());
    }
  }
}

TEST_CASE("phi map sums to integers only for periodic angles") {
  auto g = square_lattice(lattice(2, 0, 0, 2));
  TrackSet t = extract_train_tracks(g);
  Genus1Curve c(1.0);
  CHECK(is_operator_periodic(t, make_angle_map(c, {0, 0.2, 0.5, 0.7})).periodic);
  auto sq1 = square_lattice(lattice(1, -1, 1, 1));
  auto r = is_operator_periodic(extract_train_tracks(sq1), make_angle_map(c, {0, 0.25, 0.5, 0.75}));
  CHECK_FALSE(r.periodic);
}

}  // TEST_SUITE
