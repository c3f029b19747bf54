#pragma once

// JSON model files.
//
//   {"name": "...",
//    "backend": {"type": "genus1", "tau_im": 1.3}
//             | {"type": "hyperelliptic", "branch_points": [...]},
//    "graph": {"whites": [ids], "blacks": [ids],
//              "edges": [{"w": id, "b": id, "offset": [dx, dy]}, ...],
//              "rotations": {id: [edge indices ccw], ...}},
//    "angles": {"T0": {"s": x}, ...},      // tracks in extraction order
//    "t": [g reals]}
//
// Phase points: {"oval": k, "s": x} or {"coord": [re, im], "s_cross": x}.

#include <memory>
#include <string>
#include <vector>

#include "fock/gibbs.hpp"
#include "fock/kasteleyn.hpp"

namespace fock {

struct ModelFile {
  std::string name;
  std::shared_ptr<const MCurve> curve;
  PeriodicBipartiteGraph graph;
  std::vector<double> angles;
  Eigen::VectorXd t;

  FockModel build(ModelOptions opt = {}) const;
};

// Schema violations throw InputError naming the offending JSON path.
ModelFile parse_model(const std::string& text);
ModelFile load_model(const std::string& path);

std::string dump_model(const FockModel& m, const std::string& name = "");
void save_model(const FockModel& m, const std::string& path, const std::string& name = "");

// FNV-1a of the canonical dump.
std::string model_hash(const FockModel& m);

PhasePoint parse_phase(const MCurve& curve, const std::string& text);
std::string dump_phase(const PhasePoint& p);

// 17 significant digits.
std::string format_double(double x);

}  // namespace fock
