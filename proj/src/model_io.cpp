#include "fock/model_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json_text.hpp"

namespace fock {

using nlohmann::json;

namespace detail {

namespace {

void write(std::string& out, const json& j, int indent, int depth) {
  auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(size_t(indent * d), ' ');
  };
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      // Small records of scalars stay on one line.
      bool flat = j.size() <= 4;
      for (const auto& x : j) flat = flat && (!x.is_structured() || (x.is_array() && x.size() <= 4));
      for (const auto& x : j)
        if (x.is_array())
          for (const auto& y : x) flat = flat && !y.is_structured();
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += flat ? ", " : ",";
        first = false;
        if (!flat) newline(depth + 1);
        out += json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        write(out, it.value(), indent, depth + 1);
      }
      if (!flat) newline(depth);
      out += '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Short scalar arrays stay on one line.
      bool flat = j.size() <= 4;
      for (const auto& x : j) flat = flat && !x.is_structured();
      out += '[';
      for (size_t i = 0; i < j.size(); ++i) {
        if (i) out += flat ? ", " : ",";
        if (!flat) newline(depth + 1);
        write(out, j[i], indent, depth + 1);
      }
      if (!flat) newline(depth);
      out += ']';
      return;
    }
    case json::value_t::number_float:
      out += std::isfinite(j.get<double>()) ? format_double(j.get<double>()) : "null";
      return;
    default:
      out += j.dump();
  }
}

}  // namespace

std::string json_text(const json& j, int indent) {
  std::string out;
  write(out, j, indent, 0);
  return out;
}

}  // namespace detail

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s = buf;
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

namespace {

[[noreturn]] void schema(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::InputError, "model schema: " + path + ": " + what);
}

const json& field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) schema(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) schema(path, "missing field '" + key + "'");
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) schema(path, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) schema(path, "expected an integer");
  return j.get<int>();
}

const json& array(const json& j, const std::string& path) {
  if (!j.is_array()) schema(path, "expected an array");
  return j;
}

std::string id_of(const json& j, const std::string& path) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  schema(path, "expected a string or integer id");
}

std::shared_ptr<const MCurve> parse_backend(const json& j) {
  const std::string type = field(j, "type", "/backend").is_string() ? j["type"].get<std::string>() : "";
  if (type == "genus1") return make_genus1(number(field(j, "tau_im", "/backend"), "/backend/tau_im"));
  if (type == "hyperelliptic") {
    std::vector<double> bp;
    const json& a = array(field(j, "branch_points", "/backend"), "/backend/branch_points");
    for (size_t i = 0; i < a.size(); ++i) bp.push_back(number(a[i], "/backend/branch_points/" + std::to_string(i)));
    return make_hyperelliptic(bp);
  }
  schema("/backend/type", "expected \"genus1\" or \"hyperelliptic\"");
}

PeriodicBipartiteGraph parse_graph(const json& j) {
  std::map<std::string, int> white, black;
  const json& ws = array(field(j, "whites", "/graph"), "/graph/whites");
  const json& bs = array(field(j, "blacks", "/graph"), "/graph/blacks");
  for (size_t i = 0; i < ws.size(); ++i)
    if (!white.emplace(id_of(ws[i], "/graph/whites/" + std::to_string(i)), int(i)).second)
      schema("/graph/whites/" + std::to_string(i), "duplicate id");
  for (size_t i = 0; i < bs.size(); ++i) {
    std::string id = id_of(bs[i], "/graph/blacks/" + std::to_string(i));
    if (white.count(id) || !black.emplace(id, int(i)).second)
      schema("/graph/blacks/" + std::to_string(i), "duplicate id");
  }
  std::vector<GraphEdge> edges;
  const json& es = array(field(j, "edges", "/graph"), "/graph/edges");
  for (size_t i = 0; i < es.size(); ++i) {
    const std::string p = "/graph/edges/" + std::to_string(i);
    std::string w = id_of(field(es[i], "w", p), p + "/w"), b = id_of(field(es[i], "b", p), p + "/b");
    if (!white.count(w)) schema(p + "/w", "unknown white vertex '" + w + "'");
    if (!black.count(b)) schema(p + "/b", "unknown black vertex '" + b + "'");
    const json& off = array(field(es[i], "offset", p), p + "/offset");
    if (off.size() != 2) schema(p + "/offset", "expected [dx, dy]");
    edges.push_back({white[w], black[b], Cell(integer(off[0], p + "/offset/0"), integer(off[1], p + "/offset/1"))});
  }
  std::vector<std::vector<int>> rw(white.size()), rb(black.size());
  std::vector<bool> seen_w(white.size()), seen_b(black.size());
  const json& rot = field(j, "rotations", "/graph");
  if (!rot.is_object()) schema("/graph/rotations", "expected an object");
  for (auto it = rot.begin(); it != rot.end(); ++it) {
    const std::string p = "/graph/rotations/" + it.key();
    std::vector<int> list;
    const json& a = array(it.value(), p);
    for (size_t k = 0; k < a.size(); ++k) {
      int e = integer(a[k], p + "/" + std::to_string(k));
      if (e < 0 || e >= int(edges.size())) schema(p + "/" + std::to_string(k), "edge index out of range");
      list.push_back(e);
    }
    if (auto w = white.find(it.key()); w != white.end()) {
      rw[w->second] = list;
      seen_w[w->second] = true;
    } else if (auto b = black.find(it.key()); b != black.end()) {
      rb[b->second] = list;
      seen_b[b->second] = true;
    } else {
      schema(p, "unknown vertex");
    }
  }
  for (auto& [id, i] : white)
    if (!seen_w[i]) schema("/graph/rotations", "missing rotation of '" + id + "'");
  for (auto& [id, i] : black)
    if (!seen_b[i]) schema("/graph/rotations", "missing rotation of '" + id + "'");
  return PeriodicBipartiteGraph(int(white.size()), int(black.size()), std::move(edges), std::move(rw), std::move(rb));
}

json cell_json(const Cell& c) { return json::array({c.x(), c.y()}); }

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json backend_json(const MCurve& c) {
  if (auto* g1 = dynamic_cast<const Genus1Curve*>(&c)) return {{"type", "genus1"}, {"tau_im", g1->tau_im()}};
  auto& h = dynamic_cast<const HyperellipticCurve&>(c);
  return {{"type", "hyperelliptic"}, {"branch_points", h.branch_points()}};
}

}  // namespace

FockModel ModelFile::build(ModelOptions opt) const { return FockModel(curve, graph, angles, t, opt); }

ModelFile parse_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InputError, std::string("model parse: ") + e.what());
  }
  if (!j.is_object()) schema("", "expected an object");
  ModelFile mf;
  if (j.contains("name")) mf.name = j["name"].is_string() ? j["name"].get<std::string>() : "";
  mf.curve = parse_backend(field(j, "backend", ""));
  mf.graph = parse_graph(field(j, "graph", ""));
  const int n_tracks = extract_train_tracks(mf.graph).size();
  const json& an = field(j, "angles", "");
  if (!an.is_object()) schema("/angles", "expected an object");
  mf.angles.assign(n_tracks, NAN);
  for (auto it = an.begin(); it != an.end(); ++it) {
    const std::string p = "/angles/" + it.key();
    int T = -1;
    if (it.key().size() > 1 && it.key()[0] == 'T') {
      try {
        size_t used = 0;
        T = std::stoi(it.key().substr(1), &used);
        if (used + 1 != it.key().size()) T = -1;
      } catch (const std::exception&) {
        T = -1;
      }
    }
    if (T < 0 || T >= n_tracks) schema(p, "unknown track id (graph has " + std::to_string(n_tracks) + " tracks)");
    if (it.value().contains("lift") && !it.value().contains("s"))
      schema(p, "explicit lifts are not accepted; give the A0 parameter s");
    mf.angles[T] = number(field(it.value(), "s", p), p + "/s");
  }
  for (int T = 0; T < n_tracks; ++T)
    if (std::isnan(mf.angles[T])) schema("/angles", "missing angle of track T" + std::to_string(T));
  const json& tj = array(field(j, "t", ""), "/t");
  if (int(tj.size()) != mf.curve->genus()) schema("/t", "expected " + std::to_string(mf.curve->genus()) + " entries");
  mf.t.resize(tj.size());
  for (size_t i = 0; i < tj.size(); ++i) mf.t[i] = number(tj[i], "/t/" + std::to_string(i));
  return mf;
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InputError, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

std::string dump_model(const FockModel& m, const std::string& name) {
  const auto& g = m.graph();
  json j;
  j["name"] = name;
  j["backend"] = backend_json(m.curve());
  json ws = json::array(), bs = json::array(), es = json::array();
  json rot = json::object();
  for (int w = 0; w < g.n_white(); ++w) ws.push_back("w" + std::to_string(w));
  for (int b = 0; b < g.n_black(); ++b) bs.push_back("b" + std::to_string(b));
  for (const auto& e : g.edges())
    es.push_back({{"w", "w" + std::to_string(e.w)}, {"b", "b" + std::to_string(e.b)}, {"offset", cell_json(e.offset)}});
  for (int w = 0; w < g.n_white(); ++w) rot["w" + std::to_string(w)] = g.rotation(true, w);
  for (int b = 0; b < g.n_black(); ++b) rot["b" + std::to_string(b)] = g.rotation(false, b);
  j["graph"] = {{"whites", ws}, {"blacks", bs}, {"edges", es}, {"rotations", rot}};
  json an = json::object();
  for (int T = 0; T < m.tracks().size(); ++T) an["T" + std::to_string(T)] = {{"s", m.angles().s[T]}};
  j["angles"] = an;
  j["t"] = vec_json(m.t());
  return detail::json_text(j) + "\n";
}

void save_model(const FockModel& m, const std::string& path, const std::string& name) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InputError, "cannot write " + path);
  out << dump_model(m, name);
}

std::string model_hash(const FockModel& m) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : dump_model(m)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

PhasePoint parse_phase(const MCurve& curve, const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InputError, std::string("phase parse: ") + e.what());
  }
  if (j.contains("oval")) {
    int k = integer(j["oval"], "/oval");
    if (k < 0 || k > curve.genus()) schema("/oval", "oval index out of range");
    return PhasePoint::on_oval(curve, {k, number(field(j, "s", ""), "/s")});
  }
  const json& c = array(field(j, "coord", ""), "/coord");
  if (c.size() != 2) schema("/coord", "expected [re, im]");
  cd z(number(c[0], "/coord/0"), number(c[1], "/coord/1"));
  if (!curve.in_sigma_plus(z)) schema("/coord", "point is not in the interior of the half");
  double sc = j.contains("s_cross") ? number(j["s_cross"], "/s_cross") : 0.25;
  return PhasePoint::interior(curve, z, sc);
}

std::string dump_phase(const PhasePoint& p) {
  json j;
  if (p.phase == Phase::Liquid) {
    j = {{"phase", to_string(p.phase)},
         {"coord", json::array({p.point.coord.real(), p.point.coord.imag()})},
         {"s_cross", p.s_cross}};
  } else {
    j = {{"phase", to_string(p.phase)}, {"oval", p.oval}, {"s", p.point.s}};
  }
  return detail::json_text(j, -1);
}

}  // namespace fock
