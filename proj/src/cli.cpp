#include "fock/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "fock/model_io.hpp"
#include "fock/moves.hpp"
#include "json_text.hpp"

namespace fock {

using nlohmann::json;

namespace {

struct Globals {
  double tol = -1;  // per-genus default when negative
  int order = 64;
  std::uint64_t seed = 1;
  std::string out;
};

double fay_tol(const Globals& g, int genus) { return g.tol > 0 ? g.tol : (genus == 1 ? 1e-9 : 1e-7); }

json cells_json(const std::vector<Cell>& cs) {
  json a = json::array();
  for (const Cell& c : cs) a.push_back(json::array({c.x(), c.y()}));
  return a;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    try {
      out.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InputError, "bad integer list '" + s + "'");
    }
  return out;
}

struct Axis {
  double lo, hi;
  int n;
  double at(int i) const { return n == 1 ? lo : lo + (hi - lo) * i / (n - 1); }
};

// "x0:x1:nx,y0:y1:ny"
std::pair<Axis, Axis> parse_grid(const std::string& s) {
  Axis a{}, b{};
  if (std::sscanf(s.c_str(), "%lf:%lf:%d,%lf:%lf:%d", &a.lo, &a.hi, &a.n, &b.lo, &b.hi, &b.n) != 6 || a.n < 1 ||
      b.n < 1)
    throw Error(ErrorCode::InputError, "grid must look like x0:x1:nx,y0:y1:ny");
  return {a, b};
}

std::string read_text(const std::string& arg) {
  if (arg.empty() || arg[0] != '@') return arg;
  std::ifstream in(arg.substr(1));
  if (!in) throw Error(ErrorCode::InputError, "cannot read " + arg.substr(1));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const Globals& g, std::ostream& out, const std::string& text) {
  if (g.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(g.out);
  if (!f) throw Error(ErrorCode::InputError, "cannot write " + g.out);
  f << text;
}

// ---------------------------------------------------------------- check

int cmd_check(const Globals& gl, const std::string& path, int samples, std::ostream& out) {
  ModelFile mf = load_model(path);
  FockModel m = mf.build({false});
  json r;
  r["model"] = mf.name;
  r["hash"] = model_hash(m);
  r["seed"] = gl.seed;
  const auto& mn = m.minimality();
  r["minimal"] = {{"pass", mn.minimal}, {"witnesses", mn.witnesses}};
  const auto& av = m.angle_validation();
  r["angles"] = {{"pass", av.valid}, {"diagnostics", av.diagnostics}};
  const auto& pr = m.periodicity();
  // Reported, not required: a genus g periodic operator needs g interior points of N(G).
  r["periodic"] = {{"value", pr.periodic}, {"max_deviation", pr.max_deviation}};
  KasteleynReport kr = check_kasteleyn_condition(m, gl.tol > 0 ? gl.tol : 1e-8);
  r["kasteleyn"] = {{"pass", kr.pass}, {"max_error", kr.max_error}, {"failing_faces", kr.failing}};
  FayReport fr = check_fay(m.curve(), samples, gl.seed);
  const double ft = fay_tol(gl, m.genus());
  const bool fay_ok = fr.fay < ft && fr.fay_fock < ft;
  r["fay"] = {{"pass", fay_ok}, {"samples", fr.samples}, {"fay", fr.fay}, {"fay_fock", fr.fay_fock}, {"tol", ft}};
  const bool pass = mn.minimal && av.valid && kr.pass && fay_ok;
  r["pass"] = pass;
  emit(gl, out, detail::json_text(r) + "\n");
  return pass ? 0 : 1;
}

// ---------------------------------------------------------------- charpoly

int cmd_charpoly(const Globals& gl, const std::string& path, std::ostream& out) {
  FockModel m = load_model(path).build();
  if (!m.periodicity().periodic) throw Error(ErrorCode::PeriodicityRequired, "the operator is not periodic");
  CharPoly P = char_poly(m);
  json coef = json::object();
  for (const Cell& c : P.support()) {
    cd v = P.coefficient(c.x(), c.y());
    coef[std::to_string(c.x()) + "," + std::to_string(c.y())] = json::array({v.real(), v.imag()});
  }
  auto np = P.newton_corners();
  auto ng = newton_polygon(m.tracks()).corners();
  json r;
  r["coefficients"] = coef;
  r["newton_polygon"] = {{"charpoly", cells_json(np)},
                         {"graph", cells_json(ng)},
                         {"match", same_polygon_up_to_translation(np, ng)}};
  emit(gl, out, detail::json_text(r) + "\n");
  return 0;
}

// ---------------------------------------------------------------- prob

int cmd_prob(const Globals& gl, const std::string& path, const std::string& phase, const std::string& edges,
             const std::string& method, std::ostream& out) {
  FockModel m = load_model(path).build();
  PhasePoint p = parse_phase(m.curve(), read_text(phase));
  std::vector<int> es;
  if (edges.empty())
    for (int e = 0; e < m.graph().n_edges(); ++e) es.push_back(e);
  else
    es = parse_int_list(edges);
  for (int e : es)
    if (e < 0 || e >= m.graph().n_edges()) throw Error(ErrorCode::InputError, "edge index out of range");

  std::vector<double> all(m.graph().n_edges(), NAN);
  std::string provenance;
  if (method == "local") {
    all = edge_probabilities_local(m, p);
    provenance = "local formula";
  } else {
    if (!m.periodicity().periodic) throw Error(ErrorCode::PeriodicityRequired, "the operator is not periodic");
    InverseFn inv;
    if (method == "fourier") {
      FourierConfig cfg;
      cfg.order = gl.order;
      inv = fourier_inverse_fn(m, representative_field(m, p), cfg);
      provenance = "Fourier inverse, order " + std::to_string(gl.order);
    } else if (method == "adaptive") {
      inv = adaptive_inverse_fn(m, representative_field(m, p));
      provenance = "Fourier inverse, residue inner integral";
    } else if (method == "contour") {
      inv = contour_inverse_fn(m, p);
      provenance = "contour inverse";
    } else {
      throw Error(ErrorCode::InputError, "unknown method '" + method + "'");
    }
    for (int e = 0; e < m.graph().n_edges(); ++e) all[e] = edge_probability(m, e, inv);
  }
  json r;
  r["phase"] = json::parse(dump_phase(p));
  r["method"] = method;
  r["provenance"] = provenance;
  json rows = json::array();
  for (int e : es) rows.push_back({{"edge", e}, {"probability", all[e]}});
  r["edges"] = rows;
  r["white_sum_defect"] = white_sum_defect(m, all);
  emit(gl, out, detail::json_text(r) + "\n");
  return 0;
}

// ---------------------------------------------------------------- scan

int cmd_scan(const Globals& gl, const std::string& path, const std::string& what, const std::string& grid,
             int samples, std::ostream& out) {
  FockModel m = load_model(path).build();
  std::ostringstream csv;
  csv.precision(17);
  if (what == "amoeba" || what == "ronkin") {
    if (!m.periodicity().periodic) throw Error(ErrorCode::PeriodicityRequired, "the operator is not periodic");
    CharPoly P = char_poly(m);
    auto [ax, ay] = parse_grid(grid);
    csv << "Bx,By,value\n";
    for (int j = 0; j < ay.n; ++j)
      for (int i = 0; i < ax.n; ++i) {
        MagneticField B{ax.at(i), ay.at(j)};
        double v = what == "amoeba" ? double(amoeba_sample(P, B).inside) : ronkin(P, B);
        csv << format_double(B.Bx) << "," << format_double(B.By) << "," << format_double(v) << "\n";
      }
  } else if (what == "slope") {
    csv << "oval,s,slope_s,slope_t\n";
    for (int k = 0; k <= m.genus(); ++k)
      for (int i = 0; i < samples; ++i) {
        PhasePoint p = PhasePoint::on_oval(m.curve(), {k, (i + 0.5) / samples});
        Slope sl = slope_from_probabilities(m, edge_probabilities_local(m, p));
        csv << k << "," << format_double(p.point.s) << "," << format_double(sl.s) << "," << format_double(sl.t)
            << "\n";
      }
  } else {
    throw Error(ErrorCode::InputError, "--what must be amoeba, ronkin or slope");
  }
  emit(gl, out, csv.str());
  return 0;
}

// ---------------------------------------------------------------- move

MoveResult apply_spec(const PeriodicBipartiteGraph& g, const json& s, size_t i) {
  const std::string p = "move script entry " + std::to_string(i);
  if (!s.is_object() || !s.contains("move") || !s["move"].is_string())
    throw Error(ErrorCode::InputError, p + ": missing \"move\"");
  const std::string kind = s["move"];
  auto get_int = [&](const char* key) {
    if (!s.contains(key) || !s[key].is_number_integer())
      throw Error(ErrorCode::InputError, p + ": missing integer \"" + key + "\"");
    return s[key].get<int>();
  };
  auto get_white = [&]() {
    std::string c = s.value("color", "");
    if (c != "white" && c != "black") throw Error(ErrorCode::InputError, p + ": color must be white or black");
    return c == "white";
  };
  if (kind == "spider") {
    int f = get_int("face");
    if (f < 0 || f >= g.n_faces()) throw Error(ErrorCode::InputError, p + ": face out of range");
    return spider_move(g, f);
  }
  if (kind == "expand") {
    bool w = get_white();
    int v = get_int("vertex");
    if (v < 0 || v >= (w ? g.n_white() : g.n_black())) throw Error(ErrorCode::InputError, p + ": vertex out of range");
    return expand_2valent(g, w, v, get_int("first"), get_int("count"));
  }
  if (kind == "shrink") {
    bool w = get_white();
    int v = get_int("vertex");
    if (v < 0 || v >= (w ? g.n_white() : g.n_black())) throw Error(ErrorCode::InputError, p + ": vertex out of range");
    return shrink_2valent(g, w, v);
  }
  throw Error(ErrorCode::InputError, p + ": unknown move '" + kind + "'");
}

int cmd_move(const Globals& gl, const std::string& path, const std::string& script, const std::string& phase,
             const std::string& model_out, std::ostream& out) {
  ModelFile mf = load_model(path);
  FockModel m = mf.build();
  json steps;
  try {
    steps = json::parse(read_text("@" + script));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InputError, std::string("move script: ") + e.what());
  }
  if (!steps.is_array()) throw Error(ErrorCode::InputError, "move script must be a JSON list");
  PhasePoint p = parse_phase(m.curve(), phase.empty() ? R"({"oval": 1, "s": 0.5})" : read_text(phase));
  json r;
  r["input_hash"] = model_hash(m);
  r["phase"] = json::parse(dump_phase(p));
  json reports = json::array();
  bool pass = true;
  for (size_t i = 0; i < steps.size(); ++i) {
    MoveResult mr = apply_spec(m.graph(), steps[i], i);
    FockModel next = transport_model(m, mr);
    MoveReport rep = check_move_invariance(m, next, mr, p);
    const bool ok = rep.face_weight_error < 1e-12 && rep.charpoly_deviation < 1e-7 && rep.probability_error < 1e-6;
    pass = pass && ok;
    reports.push_back({{"move", to_string(mr.kind)},
                       {"untouched_faces", rep.untouched_faces},
                       {"face_weight_error", rep.face_weight_error},
                       {"charpoly_deviation", rep.charpoly_deviation},
                       {"compared_edges", rep.compared_edges},
                       {"probability_error", rep.probability_error},
                       {"fay_fock", rep.fay_fock},
                       {"pass", ok}});
    m = std::move(next);
  }
  r["moves"] = reports;
  r["output_hash"] = model_hash(m);
  r["pass"] = pass;
  if (!model_out.empty()) save_model(m, model_out, mf.name);
  emit(gl, out, detail::json_text(r) + "\n");
  return pass ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dimer models with Fock weights on periodic minimal bipartite graphs"};
  app.require_subcommand(1);
  Globals gl;
  app.add_option("--tol", gl.tol, "check tolerance")->check(CLI::PositiveNumber);
  app.add_option("--order", gl.order, "Fourier grid size")->check(CLI::Range(4, 4096));
  app.add_option("--seed", gl.seed, "sample seed for check");
  app.add_option("--out", gl.out, "write the result here instead of stdout");

  std::string model, phase, edges, method = "local", what, grid, script, model_out;
  int samples = 50, scan_samples = 16;

  auto* check = app.add_subcommand("check", "Kasteleyn, minimality, angle, periodicity and Fay checks");
  check->add_option("model", model)->required();
  check->add_option("--samples", samples, "Fay samples")->check(CLI::PositiveNumber);

  auto* charpoly = app.add_subcommand("charpoly", "characteristic polynomial and Newton polygon");
  charpoly->add_option("model", model)->required();

  auto* prob = app.add_subcommand("prob", "single-edge probabilities of the Gibbs measure at u0");
  prob->add_option("model", model)->required();
  prob->add_option("--phase", phase, "u0 as JSON, or @file")->required();
  prob->add_option("--edges", edges, "comma separated edge indices (default all)");
  prob->add_option("--method", method, "local | fourier | adaptive | contour");

  auto* scan = app.add_subcommand("scan", "CSV scans");
  scan->add_option("model", model)->required();
  scan->add_option("--what", what, "amoeba | ronkin | slope")->required();
  scan->add_option("--grid", grid, "x0:x1:nx,y0:y1:ny");
  scan->add_option("--samples", scan_samples, "points per oval for slope scans")->check(CLI::PositiveNumber);

  auto* move = app.add_subcommand("move", "apply a move script and report invariance");
  move->add_option("model", model)->required();
  move->add_option("--script", script, "JSON list of moves")->required();
  move->add_option("--phase", phase, "u0 used for probability comparison");
  move->add_option("--model-out", model_out, "write the moved model here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*check) return cmd_check(gl, model, samples, out);
    if (*charpoly) return cmd_charpoly(gl, model, out);
    if (*prob) return cmd_prob(gl, model, phase, edges, method, out);
    if (*scan) return cmd_scan(gl, model, what, grid, scan_samples, out);
    if (*move) return cmd_move(gl, model, script, phase, model_out, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::InputError || e.code() == ErrorCode::PeriodicityRequired ? 2 : 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

}  // namespace fock
