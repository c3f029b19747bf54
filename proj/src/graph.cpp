#include "fock/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

#include "fock/surface.hpp"

namespace fock {

namespace {

int dart_index(const Dart& d) { return 2 * d.edge + (d.from_white ? 0 : 1); }

std::string cell_str(const Cell& c) {
  std::ostringstream os;
  os << "(" << c.x() << "," << c.y() << ")";
  return os.str();
}

int floor_div(long long a, long long b) {
  long long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return int(q);
}

}  // namespace

PeriodicBipartiteGraph::PeriodicBipartiteGraph(int n_white, int n_black, std::vector<GraphEdge> edges,
                                               std::vector<std::vector<int>> rot_white,
                                               std::vector<std::vector<int>> rot_black)
    : n_white_(n_white), n_black_(n_black), edges_(std::move(edges)),
      rot_w_(std::move(rot_white)), rot_b_(std::move(rot_black)) {
  const int E = n_edges();
  if (n_white_ <= 0 || n_black_ <= 0 || E == 0) throw Error(ErrorCode::DegenerateGraph, "empty graph");
  if (int(rot_w_.size()) != n_white_ || int(rot_b_.size()) != n_black_)
    throw Error(ErrorCode::InputError, "rotation system does not list every vertex");
  for (const GraphEdge& e : edges_)
    if (e.w < 0 || e.w >= n_white_ || e.b < 0 || e.b >= n_black_)
      throw Error(ErrorCode::InputError, "edge endpoint out of range");
  pos_w_.assign(E, -1);
  pos_b_.assign(E, -1);
  auto fill = [&](const std::vector<std::vector<int>>& rot, std::vector<int>& pos, bool white) {
    for (int v = 0; v < int(rot.size()); ++v) {
      if (rot[v].size() < 2)
        throw Error(ErrorCode::DegenerateGraph, std::string(white ? "white" : "black") + " vertex " +
                                                    std::to_string(v) + " has degree below 2");
      for (int i = 0; i < int(rot[v].size()); ++i) {
        int e = rot[v][i];
        if (e < 0 || e >= E) throw Error(ErrorCode::InputError, "rotation refers to an unknown edge");
        int end = white ? edges_[e].w : edges_[e].b;
        if (end != v || pos[e] != -1)
          throw Error(ErrorCode::InputError, "rotation system is inconsistent at edge " + std::to_string(e));
        pos[e] = i;
      }
    }
  };
  fill(rot_w_, pos_w_, true);
  fill(rot_b_, pos_b_, false);
  for (int e = 0; e < E; ++e)
    if (pos_w_[e] < 0 || pos_b_[e] < 0)
      throw Error(ErrorCode::InputError, "edge " + std::to_string(e) + " missing from a rotation");
  build_faces();
}

int PeriodicBipartiteGraph::next_ccw(bool white, int v, int e) const {
  const auto& r = white ? rot_w_[v] : rot_b_[v];
  int i = white ? pos_w_[e] : pos_b_[e];
  return r[(i + 1) % r.size()];
}

int PeriodicBipartiteGraph::prev_ccw(bool white, int v, int e) const {
  const auto& r = white ? rot_w_[v] : rot_b_[v];
  int i = white ? pos_w_[e] : pos_b_[e];
  return r[(i + r.size() - 1) % r.size()];
}

void PeriodicBipartiteGraph::build_faces() {
  const int E = n_edges();
  dart_face_.assign(2 * E, FaceRef{-1, Cell::Zero()});
  faces_.clear();
  for (int d0 = 0; d0 < 2 * E; ++d0) {
    if (dart_face_[d0].face >= 0) continue;
    Face f;
    Dart d{d0 / 2, d0 % 2 == 0};
    Cell cell = Cell::Zero();
    const int id = int(faces_.size());
    for (int guard = 0;; ++guard) {
      if (guard > 2 * E) throw Error(ErrorCode::EmbeddingInvalid, "face traversal does not close");
      f.darts.push_back(d);
      f.cells.push_back(cell);
      dart_face_[dart_index(d)] = {id, Cell(-cell)};
      const GraphEdge& ge = edges_[d.edge];
      bool head_white = !d.from_white;
      int head = head_white ? ge.w : ge.b;
      cell += d.from_white ? ge.offset : Cell(-ge.offset);
      int e2 = prev_ccw(head_white, head, d.edge);
      d = Dart{e2, head_white};
      if (dart_index(d) == d0) break;
      if (dart_face_[dart_index(d)].face >= 0)
        throw Error(ErrorCode::EmbeddingInvalid, "face traversal revisits a dart");
    }
    if (cell != Cell::Zero())
      throw Error(ErrorCode::EmbeddingInvalid, "face boundary is not contractible: net offset " + cell_str(cell));
    faces_.push_back(std::move(f));
  }
  if (n_white_ + n_black_ - E + n_faces() != 0)
    throw Error(ErrorCode::EmbeddingInvalid, "Euler characteristic of the embedding is not zero");
}

FaceRef PeriodicBipartiteGraph::face_left(int e) const { return dart_face_[2 * e]; }

FaceRef PeriodicBipartiteGraph::face_right(int e) const {
  FaceRef f = dart_face_[2 * e + 1];
  f.cell += edges_[e].offset;
  return f;
}

// ---------------------------------------------------------------- tracks

TrackSet extract_train_tracks(const PeriodicBipartiteGraph& g) {
  const int E = g.n_edges();
  TrackSet ts;
  ts.alpha.assign(E, -1);
  ts.beta.assign(E, -1);
  for (int start = 0; start < 2 * E; ++start) {
    int e0 = start / 2;
    bool a0 = start % 2 == 0;
    if ((a0 ? ts.alpha[e0] : ts.beta[e0]) >= 0) continue;
    TrainTrack tr;
    const int id = ts.size();
    int e = e0;
    bool alpha = a0;
    for (int guard = 0;; ++guard) {
      if (guard > 2 * E) throw Error(ErrorCode::EmbeddingInvalid, "train-track does not close");
      (alpha ? ts.alpha[e] : ts.beta[e]) = id;
      tr.crossings.push_back({e, alpha});
      if (alpha) {
        const GraphEdge& ge = g.edge(e);
        int e2 = g.prev_ccw(false, ge.b, e);
        tr.homology += ge.offset - g.edge(e2).offset;
        e = e2;
      } else {
        e = g.next_ccw(true, g.edge(e).w, e);
      }
      alpha = !alpha;
      if (e == e0 && alpha == a0) break;
    }
    ts.tracks.push_back(std::move(tr));
  }
  return ts;
}

MinimalityReport check_minimal(const PeriodicBipartiteGraph& g, const TrackSet& t) {
  MinimalityReport rep;
  const int n = t.size();
  Eigen::MatrixXi count = Eigen::MatrixXi::Zero(n, n);
  for (int e = 0; e < g.n_edges(); ++e) {
    int a = t.alpha[e], b = t.beta[e];
    if (a == b) {
      rep.minimal = false;
      rep.witnesses.push_back("track " + std::to_string(a) + " crosses itself at edge " + std::to_string(e));
      continue;
    }
    ++count(a, b);
    ++count(b, a);
  }
  for (int i = 0; i < n; ++i) {
    const Cell& hi = t.tracks[i].homology;
    if (hi == Cell::Zero()) {
      rep.minimal = false;
      rep.witnesses.push_back("track " + std::to_string(i) + " is null-homologous");
    } else if (std::gcd(std::abs(hi.x()), std::abs(hi.y())) != 1) {
      rep.minimal = false;
      rep.witnesses.push_back("track " + std::to_string(i) + " has non-primitive homology " + cell_str(hi));
    }
    for (int j = i + 1; j < n; ++j) {
      const Cell& hj = t.tracks[j].homology;
      int expected = std::abs(cross2(hi, hj));
      // antiparallel lifts may form bigons, crossing an even number of times
      if (expected == 0 && hi.dot(hj) < 0) {
        if (count(i, j) % 2 != 0) {
          rep.minimal = false;
          rep.witnesses.push_back("antiparallel tracks " + std::to_string(i) + "," + std::to_string(j) +
                                  " cross an odd number of times");
        }
        continue;
      }
      if (count(i, j) != expected) {
        rep.minimal = false;
        rep.witnesses.push_back("tracks " + std::to_string(i) + "," + std::to_string(j) + " cross " +
                                std::to_string(count(i, j)) + " times, expected " + std::to_string(expected));
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------- Newton polygon

std::vector<Cell> NewtonPolygon::corners() const {
  std::vector<Cell> out;
  const int r = int(points.size());
  for (int i = 0; i < r; ++i) {
    const Cell& p = points[(i + r - 1) % r];
    const Cell& c = points[i];
    const Cell& q = points[(i + 1) % r];
    if (cross2(c - p, q - c) != 0) out.push_back(c);
  }
  return out;
}

bool NewtonPolygon::contains(const Eigen::Vector2d& p, double tol, bool strict) const {
  const int r = int(points.size());
  for (int i = 0; i < r; ++i) {
    Eigen::Vector2d a = points[i].cast<double>(), b = points[(i + 1) % r].cast<double>();
    Eigen::Vector2d d = b - a;
    if (d.norm() == 0) continue;
    double c = (d.x() * (p - a).y() - d.y() * (p - a).x()) / d.norm();
    if (strict ? c <= tol : c < -tol) return false;
  }
  return true;
}

std::vector<Cell> NewtonPolygon::interior_points() const {
  std::vector<Cell> out;
  int x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  for (const Cell& c : points) {
    x0 = std::min(x0, c.x());
    x1 = std::max(x1, c.x());
    y0 = std::min(y0, c.y());
    y1 = std::max(y1, c.y());
  }
  for (int x = x0; x <= x1; ++x)
    for (int y = y0; y <= y1; ++y)
      if (contains(Eigen::Vector2d(x, y), 1e-12, true)) out.emplace_back(x, y);
  return out;
}

NewtonPolygon newton_polygon(const TrackSet& t, const std::vector<int>& order) {
  NewtonPolygon np;
  np.order = order;
  Cell p = Cell::Zero();
  for (int i : order) {
    np.points.push_back(p);
    p += t.tracks[i].homology;
  }
  if (p != Cell::Zero()) throw Error(ErrorCode::DegenerateGraph, "track homologies do not sum to zero");
  const int r = int(np.points.size());
  for (int i = 0; i < r; ++i) np.twice_area += cross2(np.points[i], np.points[(i + 1) % r]);
  if (np.twice_area <= 0) throw Error(ErrorCode::DegenerateGraph, "Newton polygon has no positive area");
  return np;
}

NewtonPolygon newton_polygon(const TrackSet& t) {
  std::vector<int> order(t.size());
  std::iota(order.begin(), order.end(), 0);
  auto ang = [&](int i) {
    const Cell& h = t.tracks[i].homology;
    return std::atan2(double(h.y()), double(h.x()));
  };
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return ang(a) < ang(b); });
  return newton_polygon(t, order);
}

bool same_polygon_up_to_translation(std::vector<Cell> a, std::vector<Cell> b) {
  if (a.size() != b.size()) return false;
  auto norm = [](std::vector<Cell>& v) {
    auto less = [](const Cell& p, const Cell& q) { return p.x() < q.x() || (p.x() == q.x() && p.y() < q.y()); };
    std::sort(v.begin(), v.end(), less);
    Cell m = v.front();
    for (Cell& c : v) c -= m;
  };
  norm(a);
  norm(b);
  return a == b;
}

// ---------------------------------------------------------------- angles

std::vector<int> AngleMap::order() const {
  std::vector<int> o(s.size());
  std::iota(o.begin(), o.end(), 0);
  std::stable_sort(o.begin(), o.end(), [&](int a, int b) { return s[a] < s[b]; });
  return o;
}

AngleMap make_angle_map(const MCurve& curve, std::vector<double> s) {
  if (s.empty()) throw Error(ErrorCode::InputError, "empty angle map");
  AngleMap a;
  const double s1 = *std::min_element(s.begin(), s.end());
  for (double& x : s) x -= std::floor(x - s1);
  a.s = s;
  for (double x : s) a.lift.push_back(curve.at_oval({0, x}).lift.real());
  return a;
}

AngleValidation validate_angle_map(const TrackSet& t, const AngleMap& a) {
  AngleValidation v;
  if (int(a.s.size()) != t.size() || int(a.lift.size()) != t.size()) {
    v.valid = false;
    v.diagnostics = "angle map size does not match the number of tracks";
    return v;
  }
  std::vector<int> o = a.order();
  const int r = int(o.size());
  double turn = 0;
  std::ostringstream os;
  for (int k = 0; k < r; ++k) {
    int i = o[k], j = o[(k + 1) % r];
    const Cell &hi = t.tracks[i].homology, &hj = t.tracks[j].homology;
    int c = cross2(hi, hj), d = hi.dot(hj);
    bool parallel = c == 0 && d > 0;
    if (c < 0 || (c == 0 && d <= 0 && r > 1)) {
      v.valid = false;
      os << "tracks " << i << "," << j << " break the cyclic order; ";
    }
    if (!parallel && k + 1 < r && a.s[i] == a.s[j]) {
      v.valid = false;
      os << "non-parallel tracks " << i << "," << j << " share an angle; ";
    }
    double th = std::atan2(double(c), double(d));
    if (th < 0) th += 2 * std::numbers::pi;
    turn += th;
  }
  if (v.valid && std::abs(turn - 2 * std::numbers::pi) > 1e-9) {
    v.valid = false;
    os << "directions wind " << turn / (2 * std::numbers::pi) << " times; ";
  }
  v.diagnostics = os.str();
  return v;
}

// ---------------------------------------------------------------- Abel map

AbelMap discrete_abel_map(const PeriodicBipartiteGraph& g, const TrackSet& t, int base_face) {
  const int n = t.size();
  AbelMap am;
  am.period_x = Eigen::VectorXi::Zero(n);
  am.period_y = Eigen::VectorXi::Zero(n);
  for (int i = 0; i < n; ++i) {
    am.period_x[i] = t.tracks[i].homology.y();
    am.period_y[i] = -t.tracks[i].homology.x();
  }
  // node ids: whites, blacks, faces
  const int NW = g.n_white(), NB = g.n_black(), NF = g.n_faces();
  struct Rel {
    int to;
    Cell from_cell, to_cell;
    Eigen::VectorXi delta;
  };
  std::vector<std::vector<Rel>> adj(NW + NB + NF);
  auto unit = [&](int i) {
    Eigen::VectorXi v = Eigen::VectorXi::Zero(n);
    v[i] = 1;
    return v;
  };
  auto link = [&](int x, Cell cx, int y, Cell cy, const Eigen::VectorXi& d) {
    adj[x].push_back({y, cx, cy, d});
    adj[y].push_back({x, cy, cx, Eigen::VectorXi(-d)});
  };
  for (int e = 0; e < g.n_edges(); ++e) {
    const GraphEdge& ge = g.edge(e);
    FaceRef f = g.face_left(e), fr = g.face_right(e);
    Eigen::VectorXi ea = unit(t.alpha[e]), eb = unit(t.beta[e]);
    int w = ge.w, b = NW + ge.b, F = NW + NB + f.face, Fr = NW + NB + fr.face;
    link(F, f.cell, b, ge.offset, ea);
    link(F, f.cell, w, Cell::Zero(), Eigen::VectorXi(-eb));
    link(Fr, fr.cell, b, ge.offset, eb);
    link(w, Cell::Zero(), Fr, fr.cell, ea);
  }
  std::vector<Eigen::VectorXi> val(adj.size());
  std::vector<bool> seen(adj.size(), false);
  const int root = NW + NB + base_face;
  val[root] = Eigen::VectorXi::Zero(n);
  seen[root] = true;
  std::deque<int> q{root};
  auto at = [&](int x, const Cell& c) -> Eigen::VectorXi { return am.shifted(val[x], c); };
  while (!q.empty()) {
    int x = q.front();
    q.pop_front();
    for (const Rel& r : adj[x]) {
      Eigen::VectorXi target = at(x, r.from_cell) + r.delta;
      if (!seen[r.to]) {
        val[r.to] = target - r.to_cell.x() * am.period_x - r.to_cell.y() * am.period_y;
        seen[r.to] = true;
        q.push_back(r.to);
      } else if (at(r.to, r.to_cell) != target) {
        throw Error(ErrorCode::Inconsistent, "discrete Abel map does not close around a quadrilateral");
      }
    }
  }
  for (int x = 0; x < int(adj.size()); ++x)
    if (!seen[x]) throw Error(ErrorCode::Inconsistent, "quad-graph is not connected");
  am.white.assign(val.begin(), val.begin() + NW);
  am.black.assign(val.begin() + NW, val.begin() + NW + NB);
  am.face.assign(val.begin() + NW + NB, val.end());
  return am;
}

Eigen::VectorXd lift_of(const Eigen::VectorXi& d, const AngleMap& a) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(a.genus());
  for (int i = 0; i < int(d.size()); ++i)
    if (d[i]) out += double(d[i]) * a.lift[i];
  return out;
}

// ---------------------------------------------------------------- phi

std::vector<Eigen::Vector2d> phi_map(const TrackSet& t, const AngleMap& a) {
  std::vector<int> o = a.order();
  NewtonPolygon np = newton_polygon(t, o);
  const int g = a.genus(), r = int(o.size());
  std::vector<Eigen::Vector2d> phi(g, Eigen::Vector2d::Zero());
  for (int j = 0; j < r; ++j) {
    Eigen::VectorXd d = a.lift[o[j]] - a.lift[o[(j + r - 1) % r]];
    if (j == 0) d.array() += 1.0;
    for (int k = 0; k < g; ++k) phi[k] += np.points[j].cast<double>() * d[k];
  }
  return phi;
}

PeriodicityReport is_operator_periodic(const TrackSet& t, const AngleMap& a, double tol) {
  PeriodicityReport rep;
  rep.periodic = true;
  for (const Eigen::Vector2d& p : phi_map(t, a)) {
    Cell c(int(std::lround(p.x())), int(std::lround(p.y())));
    double dev = (p - c.cast<double>()).cwiseAbs().maxCoeff();
    rep.max_deviation = std::max(rep.max_deviation, dev);
    if (dev > tol) rep.periodic = false;
    rep.points.push_back(c);
  }
  if (rep.periodic) {
    for (size_t i = 0; i < rep.points.size(); ++i)
      for (size_t j = i + 1; j < rep.points.size(); ++j)
        if (rep.points[i] == rep.points[j])
          throw Error(ErrorCode::Inconsistent, "periodic angle map with coinciding interior points");
  }
  return rep;
}

// ---------------------------------------------------------------- generators

PeriodicBipartiteGraph embedded_graph(const std::vector<Eigen::Vector2d>& white_pos,
                                      const std::vector<Eigen::Vector2d>& black_pos,
                                      const Eigen::Matrix2d& lattice, std::vector<GraphEdge> edges) {
  const int NW = int(white_pos.size()), NB = int(black_pos.size());
  std::vector<std::vector<std::pair<double, int>>> aw(NW), ab(NB);
  for (int e = 0; e < int(edges.size()); ++e) {
    const GraphEdge& ge = edges[e];
    Eigen::Vector2d v = black_pos[ge.b] + lattice * ge.offset.cast<double>() - white_pos[ge.w];
    aw[ge.w].push_back({std::atan2(v.y(), v.x()), e});
    ab[ge.b].push_back({std::atan2(-v.y(), -v.x()), e});
  }
  auto finish = [](std::vector<std::vector<std::pair<double, int>>>& a) {
    std::vector<std::vector<int>> rot(a.size());
    for (size_t v = 0; v < a.size(); ++v) {
      std::sort(a[v].begin(), a[v].end());
      for (auto& p : a[v]) rot[v].push_back(p.second);
    }
    return rot;
  };
  return PeriodicBipartiteGraph(NW, NB, std::move(edges), finish(aw), finish(ab));
}

PeriodicBipartiteGraph square_lattice(const Eigen::Matrix2i& L) {
  const long long det = (long long)L(0, 0) * L(1, 1) - (long long)L(0, 1) * L(1, 0);
  if (det == 0) throw Error(ErrorCode::InputError, "sublattice is degenerate");
  for (int c = 0; c < 2; ++c)
    if ((L(0, c) + L(1, c)) % 2 != 0) throw Error(ErrorCode::InputError, "sublattice must preserve colours");
  // reduce p to its representative in the fundamental parallelogram
  auto reduce = [&](const Cell& p, Cell& cell) {
    long long a = (long long)L(1, 1) * p.x() - (long long)L(0, 1) * p.y();
    long long b = -(long long)L(1, 0) * p.x() + (long long)L(0, 0) * p.y();
    cell = Cell(floor_div(a, det), floor_div(b, det));
    return Cell(p - L * cell);
  };
  std::map<std::pair<int, int>, int> wid, bid;
  std::vector<Eigen::Vector2d> wpos, bpos;
  const int R = int(std::abs(L(0, 0)) + std::abs(L(0, 1)) + std::abs(L(1, 0)) + std::abs(L(1, 1)));
  for (int x = -R; x <= R; ++x) {
    for (int y = -R; y <= R; ++y) {
      Cell c;
      Cell r = reduce(Cell(x, y), c);
      auto key = std::make_pair(r.x(), r.y());
      bool white = ((r.x() + r.y()) % 2 + 2) % 2 == 0;
      auto& ids = white ? wid : bid;
      if (!ids.count(key)) {
        int id = int(ids.size());
        ids[key] = id;
        (white ? wpos : bpos).push_back(r.cast<double>());
      }
    }
  }
  // deterministic numbering in lexicographic order of representatives
  auto renumber = [](std::map<std::pair<int, int>, int>& ids, std::vector<Eigen::Vector2d>& pos) {
    int k = 0;
    pos.clear();
    for (auto& [key, id] : ids) {
      id = k++;
      pos.emplace_back(key.first, key.second);
    }
  };
  renumber(wid, wpos);
  renumber(bid, bpos);
  const Cell dirs[4] = {Cell(1, 0), Cell(0, 1), Cell(-1, 0), Cell(0, -1)};
  std::vector<GraphEdge> edges;
  for (auto& [key, w] : wid) {
    Cell r(key.first, key.second);
    for (const Cell& d : dirs) {
      Cell c;
      Cell q = reduce(Cell(r + d), c);
      edges.push_back({w, bid.at({q.x(), q.y()}), c});
    }
  }
  return embedded_graph(wpos, bpos, L.cast<double>(), std::move(edges));
}

PeriodicBipartiteGraph hexagonal_lattice() {
  const double r3 = std::sqrt(3.0);
  Eigen::Matrix2d lat;
  lat << r3, r3 / 2, 0, 1.5;
  std::vector<GraphEdge> edges = {{0, 0, Cell(0, 0)}, {0, 0, Cell(0, -1)}, {0, 0, Cell(1, -1)}};
  return embedded_graph({Eigen::Vector2d(0, 0)}, {Eigen::Vector2d(0, 1)}, lat, std::move(edges));
}

PeriodicBipartiteGraph square_octagon_lattice() {
  const double a = 0.3;
  Eigen::Matrix2d lat;
  lat << 1, -1, 1, 1;
  // whites: A_N, A_S, B_W, B_E; blacks: A_E, A_W, B_N, B_S
  std::vector<Eigen::Vector2d> wp = {{0, a}, {0, -a}, {1 - a, 0}, {1 + a, 0}};
  std::vector<Eigen::Vector2d> bp = {{a, 0}, {-a, 0}, {1, a}, {1, -a}};
  std::vector<GraphEdge> edges = {
      {0, 0, Cell(0, 0)}, {0, 1, Cell(0, 0)}, {1, 0, Cell(0, 0)}, {1, 1, Cell(0, 0)},
      {2, 2, Cell(0, 0)}, {2, 3, Cell(0, 0)}, {3, 2, Cell(0, 0)}, {3, 3, Cell(0, 0)},
      {2, 0, Cell(0, 0)}, {3, 1, Cell(1, -1)}, {0, 3, Cell(0, 1)}, {1, 2, Cell(-1, 0)},
  };
  return embedded_graph(wp, bp, lat, std::move(edges));
}

PeriodicBipartiteGraph supercell(const PeriodicBipartiteGraph& g, int n1, int n2) {
  if (n1 < 1 || n2 < 1) throw Error(ErrorCode::InputError, "supercell factors must be positive");
  const int C = n1 * n2, E = g.n_edges();
  auto copy = [&](int i, int j) { return i + n1 * j; };
  std::vector<GraphEdge> edges;
  edges.reserve(size_t(E) * C);
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i)
      for (int e = 0; e < E; ++e) {
        const GraphEdge& ge = g.edge(e);
        const long long bi = i + ge.offset.x(), bj = j + ge.offset.y();
        const int qx = floor_div(bi, n1), qy = floor_div(bj, n2);
        edges.push_back({ge.w + g.n_white() * copy(i, j), ge.b + g.n_black() * copy(int(bi - qx * n1), int(bj - qy * n2)),
                         Cell(qx, qy)});
      }
  // Edge (e, copy c) is e + E c, keyed by the white end's copy.
  std::vector<std::vector<int>> rw(size_t(g.n_white()) * C), rb(size_t(g.n_black()) * C);
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i) {
      for (int w = 0; w < g.n_white(); ++w)
        for (int e : g.rotation(true, w)) rw[w + g.n_white() * copy(i, j)].push_back(e + E * copy(i, j));
      for (int b = 0; b < g.n_black(); ++b)
        for (int e : g.rotation(false, b)) {
          const Cell& o = g.edge(e).offset;
          const int wi = int(((i - o.x()) % n1 + n1) % n1), wj = int(((j - o.y()) % n2 + n2) % n2);
          rb[b + g.n_black() * copy(i, j)].push_back(e + E * copy(wi, wj));
        }
    }
  return PeriodicBipartiteGraph(g.n_white() * C, g.n_black() * C, std::move(edges), std::move(rw), std::move(rb));
}

}  // namespace fock
