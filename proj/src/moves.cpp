#include "fock/moves.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace fock {

const char* to_string(MoveKind k) {
  switch (k) {
    case MoveKind::Expand2Valent: return "expand2valent";
    case MoveKind::Shrink2Valent: return "shrink2valent";
    case MoveKind::Spider: return "spider";
  }
  return "unknown";
}

namespace {

// Mutable copy of a graph; removed items are flagged and dropped by build().
struct Editor {
  std::vector<GraphEdge> edges;
  std::vector<bool> edge_alive;
  std::vector<std::vector<int>> rot_w, rot_b;
  std::vector<bool> w_alive, b_alive;
  int old_edges, old_w, old_b;

  explicit Editor(const PeriodicBipartiteGraph& g)
      : edges(g.edges()), edge_alive(g.n_edges(), true), w_alive(g.n_white(), true), b_alive(g.n_black(), true),
        old_edges(g.n_edges()), old_w(g.n_white()), old_b(g.n_black()) {
    for (int w = 0; w < g.n_white(); ++w) rot_w.push_back(g.rotation(true, w));
    for (int b = 0; b < g.n_black(); ++b) rot_b.push_back(g.rotation(false, b));
  }

  int add_white() {
    rot_w.emplace_back();
    w_alive.push_back(true);
    return int(rot_w.size()) - 1;
  }
  int add_black() {
    rot_b.emplace_back();
    b_alive.push_back(true);
    return int(rot_b.size()) - 1;
  }
  int add_edge(int w, int b, const Cell& off) {
    edges.push_back({w, b, off});
    edge_alive.push_back(true);
    return int(edges.size()) - 1;
  }
  std::vector<int>& rot(bool white, int v) { return white ? rot_w[v] : rot_b[v]; }

  MoveResult build(MoveKind kind) const {
    MoveResult r;
    r.kind = kind;
    std::vector<int> wmap(rot_w.size(), -1), bmap(rot_b.size(), -1), emap(edges.size(), -1);
    int nw = 0, nb = 0, ne = 0;
    for (size_t i = 0; i < rot_w.size(); ++i)
      if (w_alive[i]) wmap[i] = nw++;
    for (size_t i = 0; i < rot_b.size(); ++i)
      if (b_alive[i]) bmap[i] = nb++;
    std::vector<GraphEdge> out;
    for (size_t e = 0; e < edges.size(); ++e)
      if (edge_alive[e]) {
        emap[e] = ne++;
        out.push_back({wmap[edges[e].w], bmap[edges[e].b], edges[e].offset});
      }
    auto remap = [&](const std::vector<std::vector<int>>& rot, const std::vector<bool>& alive) {
      std::vector<std::vector<int>> o;
      for (size_t v = 0; v < rot.size(); ++v) {
        if (!alive[v]) continue;
        std::vector<int> row;
        for (int e : rot[v]) row.push_back(emap[e]);
        o.push_back(row);
      }
      return o;
    };
    r.graph = PeriodicBipartiteGraph(nw, nb, out, remap(rot_w, w_alive), remap(rot_b, b_alive));
    r.edge_map.assign(emap.begin(), emap.begin() + old_edges);
    r.white_map.assign(wmap.begin(), wmap.begin() + old_w);
    r.black_map.assign(bmap.begin(), bmap.begin() + old_b);
    return r;
  }
};

int other_end(const GraphEdge& e, bool from_white) { return from_white ? e.b : e.w; }

}  // namespace

MoveResult expand_2valent(const PeriodicBipartiteGraph& g, bool white, int v, int first, int count) {
  const auto& rot = g.rotation(white, v);
  const int deg = int(rot.size());
  if (count < 1 || count > deg - 1) throw Error(ErrorCode::InputError, "split block must leave edges on both sides");
  Editor ed(g);
  std::vector<int> block, rest;
  for (int i = 0; i < deg; ++i) {
    int e = rot[(first + i) % deg];
    (i < count ? block : rest).push_back(e);
  }
  // v keeps `rest` plus the edge to x; the new vertex v2 takes `block` plus its edge to x.
  const int v2 = white ? ed.add_white() : ed.add_black();
  const int x = white ? ed.add_black() : ed.add_white();
  const int e_vx = white ? ed.add_edge(v, x, Cell::Zero()) : ed.add_edge(x, v, Cell::Zero());
  const int e_v2x = white ? ed.add_edge(v2, x, Cell::Zero()) : ed.add_edge(x, v2, Cell::Zero());
  for (int e : block) (white ? ed.edges[e].w : ed.edges[e].b) = v2;
  std::vector<int> rv = rest;
  rv.insert(rv.begin(), e_vx);
  ed.rot(white, v) = rv;
  std::vector<int> r2 = block;
  r2.push_back(e_v2x);
  ed.rot(white, v2) = r2;
  ed.rot(!white, x) = {e_vx, e_v2x};
  return ed.build(MoveKind::Expand2Valent);
}

MoveResult shrink_2valent(const PeriodicBipartiteGraph& g, bool white, int x) {
  const auto& rx = g.rotation(white, x);
  if (rx.size() != 2) throw Error(ErrorCode::InputError, "vertex is not 2-valent");
  const int e1 = rx[0], e2 = rx[1];
  const bool ucol = !white;
  const int u1 = other_end(g.edge(e1), white), u2 = other_end(g.edge(e2), white);
  // Cells of u1, u2 relative to x.
  auto cell_of = [&](int e) { return white ? Cell(g.edge(e).offset) : Cell(-g.edge(e).offset); };
  const Cell s = cell_of(e2) - cell_of(e1);
  if (u1 == u2) throw Error(ErrorCode::DegenerateGraph, "both neighbours are copies of one vertex");
  Editor ed(g);
  // Re-express the edges of u2 relative to u1.
  for (int e : g.rotation(ucol, u2)) {
    if (e == e2) continue;
    GraphEdge& ge = ed.edges[e];
    if (ucol) {
      ge.w = u1;
      ge.offset += s;
    } else {
      ge.b = u1;
      ge.offset -= s;
    }
  }
  const auto& r1 = g.rotation(ucol, u1);
  const auto& r2 = g.rotation(ucol, u2);
  std::vector<int> merged;
  for (int e : r1) {
    if (e != e1) {
      merged.push_back(e);
      continue;
    }
    int k = int(std::find(r2.begin(), r2.end(), e2) - r2.begin());
    for (size_t i = 1; i < r2.size(); ++i) merged.push_back(r2[(k + i) % r2.size()]);
  }
  ed.rot(ucol, u1) = merged;
  ed.rot(ucol, u2).clear();
  (ucol ? ed.w_alive : ed.b_alive)[u2] = false;
  (white ? ed.w_alive : ed.b_alive)[x] = false;
  ed.edge_alive[e1] = ed.edge_alive[e2] = false;
  return ed.build(MoveKind::Shrink2Valent);
}

namespace {

struct Corner {
  bool white;
  int v;
  Cell cell;  // relative to the face anchor
  int leg;
  bool far_white;
  int far;
  Cell far_cell;
};

std::vector<Corner> square_corners(const PeriodicBipartiteGraph& g, int face) {
  const Face& f = g.face(face);
  if (f.degree() != 4) throw Error(ErrorCode::InputError, "spider move needs a quadrilateral face");
  std::vector<Corner> c(4);
  for (int i = 0; i < 4; ++i) {
    const Dart& d = f.darts[i];
    const Dart& prev = f.darts[(i + 3) % 4];
    const GraphEdge& ge = g.edge(d.edge);
    Corner& k = c[i];
    k.white = d.from_white;
    k.v = d.from_white ? ge.w : ge.b;
    k.cell = f.cells[i];
    const auto& rot = g.rotation(k.white, k.v);
    if (rot.size() != 3) throw Error(ErrorCode::InputError, "spider move needs trivalent corners");
    k.leg = -1;
    for (int e : rot)
      if (e != d.edge && e != prev.edge) k.leg = e;
    if (k.leg < 0 || d.edge == prev.edge) throw Error(ErrorCode::InputError, "corner has no leg");
    const GraphEdge& le = g.edge(k.leg);
    k.far_white = !k.white;
    k.far = k.white ? le.b : le.w;
    k.far_cell = k.white ? Cell(k.cell + le.offset) : Cell(k.cell - le.offset);
  }
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      if (c[i].white == c[j].white && c[i].v == c[j].v)
        throw Error(ErrorCode::InputError, "square corners repeat in the fundamental domain");
      if (c[i].leg == c[j].leg) throw Error(ErrorCode::InputError, "legs repeat in the fundamental domain");
    }
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (c[i].far_white == c[j].white && c[i].far == c[j].v)
        throw Error(ErrorCode::InputError, "a leg ends on the square");
  return c;
}

}  // namespace

std::vector<int> spider_faces(const PeriodicBipartiteGraph& g) {
  std::vector<int> out;
  for (int f = 0; f < g.n_faces(); ++f) {
    try {
      square_corners(g, f);
      out.push_back(f);
    } catch (const Error&) {
    }
  }
  return out;
}

MoveResult spider_move(const PeriodicBipartiteGraph& g, int face) {
  std::vector<Corner> c = square_corners(g, face);
  const Face& f = g.face(face);
  Editor ed(g);
  // New square edges L_i -- L_{i+1}.
  std::vector<int> ne(4);
  for (int i = 0; i < 4; ++i) {
    const Corner& a = c[i];
    const Corner& b = c[(i + 1) % 4];
    const Corner& wc = a.far_white ? a : b;
    const Corner& bc = a.far_white ? b : a;
    ne[i] = ed.add_edge(wc.far, bc.far, Cell(bc.far_cell - wc.far_cell));
  }
  // At L_i the leg is replaced by the edges to L_{i+1} then L_{i-1}, counterclockwise.
  for (int i = 0; i < 4; ++i) {
    auto& rot = ed.rot(c[i].far_white, c[i].far);
    auto it = std::find(rot.begin(), rot.end(), c[i].leg);
    *it = ne[(i + 3) % 4];
    rot.insert(it, ne[i]);
  }
  for (int i = 0; i < 4; ++i) {
    (c[i].white ? ed.w_alive : ed.b_alive)[c[i].v] = false;
    ed.rot(c[i].white, c[i].v).clear();
    ed.edge_alive[c[i].leg] = false;
    ed.edge_alive[f.darts[i].edge] = false;
  }
  return ed.build(MoveKind::Spider);
}

// ---------------------------------------------------------------- model transport

namespace {

// New track -> old track through preserved edges.
std::vector<int> track_map(const TrackSet& old_t, const TrackSet& new_t, const MoveResult& r) {
  std::vector<int> map(new_t.size(), -1);
  auto bind = [&](int nt, int ot) {
    if (map[nt] >= 0 && map[nt] != ot) throw Error(ErrorCode::Inconsistent, "train-tracks do not survive the move");
    map[nt] = ot;
  };
  for (size_t e = 0; e < r.edge_map.size(); ++e) {
    int n = r.edge_map[e];
    if (n < 0) continue;
    bind(new_t.alpha[n], old_t.alpha[e]);
    bind(new_t.beta[n], old_t.beta[e]);
  }
  for (int x : map)
    if (x < 0) throw Error(ErrorCode::Inconsistent, "a train-track avoids every preserved edge");
  return map;
}

}  // namespace

FockModel transport_model(const FockModel& m, const MoveResult& r, ModelOptions opt) {
  TrackSet nt = extract_train_tracks(r.graph);
  std::vector<int> map = track_map(m.tracks(), nt, r);
  std::vector<double> s(nt.size());
  for (int T = 0; T < nt.size(); ++T) s[T] = m.angles().s[map[T]];
  FockModel draft(m.curve_ptr(), r.graph, s, m.t(), opt);
  int w = 0;
  while (w < int(r.white_map.size()) && r.white_map[w] < 0) ++w;
  if (w == int(r.white_map.size())) throw Error(ErrorCode::Inconsistent, "no white vertex survives the move");
  Eigen::VectorXd t = m.t() + m.d_white(w) - draft.d_white(r.white_map[w]);
  return draft.with_t(t);
}

// ---------------------------------------------------------------- invariance

namespace {

// Old face -> new face when the boundary survives unchanged.
std::vector<int> untouched_faces(const PeriodicBipartiteGraph& a, const PeriodicBipartiteGraph& b,
                                 const MoveResult& r) {
  std::vector<int> out(a.n_faces(), -1);
  for (int f = 0; f < a.n_faces(); ++f) {
    const Face& F = a.face(f);
    int target = -1;
    bool ok = true;
    for (const Dart& d : F.darts) {
      int e = r.edge_map[d.edge];
      if (e < 0) {
        ok = false;
        break;
      }
      int nf = d.from_white ? b.face_left(e).face : b.face_right(e).face;
      if (target >= 0 && nf != target) ok = false;
      target = nf;
    }
    if (ok && b.face(target).degree() == F.degree()) out[f] = target;
  }
  return out;
}

double charpoly_deviation(const CharPoly& a, const CharPoly& b) {
  auto sa = a.support(1e-10), sb = b.support(1e-10);
  auto lex = [](const Cell& p, const Cell& q) { return p.x() < q.x() || (p.x() == q.x() && p.y() < q.y()); };
  std::sort(sa.begin(), sa.end(), lex);
  std::sort(sb.begin(), sb.end(), lex);
  if (sa.size() != sb.size()) return 1.0;
  const Cell shift = sb.front() - sa.front();
  // Least-squares scale over the union of supports.
  cd num = 0;
  double den = 0;
  for (const Cell& p : sa) {
    cd ca = a.coefficient(p.x(), p.y()), cb = b.coefficient(p.x() + shift.x(), p.y() + shift.y());
    num += std::conj(ca) * cb;
    den += std::norm(ca);
  }
  cd c = num / den;
  double dev = 0;
  for (const Cell& p : sa)
    dev = std::max(dev, std::abs(b.coefficient(p.x() + shift.x(), p.y() + shift.y()) - c * a.coefficient(p.x(), p.y())));
  for (const Cell& p : sb)
    dev = std::max(dev, std::abs(b.coefficient(p.x(), p.y()) - c * a.coefficient(p.x() - shift.x(), p.y() - shift.y())));
  return dev / b.norm();
}

}  // namespace

MoveReport check_move_invariance(const FockModel& before, const FockModel& after, const MoveResult& r,
                                 const PhasePoint& u0) {
  MoveReport rep;
  const auto& ga = before.graph();
  const auto& gb = after.graph();
  std::vector<int> fmap = untouched_faces(ga, gb, r);
  for (int f = 0; f < ga.n_faces(); ++f) {
    if (fmap[f] < 0) continue;
    ++rep.untouched_faces;
    cd wa = face_weight(before, f), wb = face_weight(after, fmap[f]);
    rep.face_weight_error = std::max(rep.face_weight_error, std::abs(wa - wb) / std::abs(wa));
  }

  // Anchoring: D_new - D_old should be one constant over preserved vertices.
  {
    Eigen::VectorXd ref;
    for (size_t w = 0; w < r.white_map.size(); ++w) {
      if (r.white_map[w] < 0) continue;
      Eigen::VectorXd d = (after.t() + after.d_white(r.white_map[w])) - (before.t() + before.d_white(int(w)));
      if (ref.size() == 0) ref = d;
      rep.anchor_spread = std::max(rep.anchor_spread, (d - ref).cwiseAbs().maxCoeff());
    }
  }

  if (before.periodicity().periodic && after.periodicity().periodic) {
    rep.charpoly_deviation = charpoly_deviation(char_poly(before), char_poly(after));
    // Edges whose two faces are untouched.
    std::vector<bool> touched(ga.n_faces(), true);
    for (int f = 0; f < ga.n_faces(); ++f) touched[f] = fmap[f] < 0;
    MagneticField B = representative_field(before, u0);
    InverseFn ia = adaptive_inverse_fn(before, B), ib = adaptive_inverse_fn(after, B);
    for (int e = 0; e < ga.n_edges(); ++e) {
      if (r.edge_map[e] < 0 || touched[ga.face_left(e).face] || touched[ga.face_right(e).face]) continue;
      double pa = edge_probability(before, e, ia), pb = edge_probability(after, r.edge_map[e], ib);
      rep.probability_error = std::max(rep.probability_error, std::abs(pa - pb));
      ++rep.compared_edges;
    }
  }

  if (r.kind == MoveKind::Spider) {
    // The spider relation is the reduced Fay identity at the four angles around the square.
    std::vector<int> faces_removed;
    for (int f = 0; f < ga.n_faces(); ++f)
      if (fmap[f] < 0 && ga.face(f).degree() == 4) faces_removed.push_back(f);
    for (int f : faces_removed) {
      std::vector<Eigen::VectorXcd> a;
      for (const Dart& d : ga.face(f).darts) {
        int T = d.from_white ? before.tracks().alpha[d.edge] : before.tracks().beta[d.edge];
        a.push_back(before.angles().lift[T].cast<cd>());
      }
      Eigen::VectorXcd t = (before.t() + before.d_face({f, Cell::Zero()})).cast<cd>();
      rep.fay_fock = std::max(rep.fay_fock, fay_fock_residual(before.curve().period_matrix(), before.odd(), a[0], a[1],
                                                              a[2], a[3], t, before.curve().config().theta));
    }
  }
  return rep;
}

}  // namespace fock
