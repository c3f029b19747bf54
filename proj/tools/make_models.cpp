// Writes the packaged models into the directory given as the first argument.

#include <filesystem>
#include <iostream>

#include "fock/model_io.hpp"

using namespace fock;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(xs.size());
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Eigen::Matrix2i lattice(int a, int b, int c, int d) {
  Eigen::Matrix2i L;
  L << a, b, c, d;
  return L;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_models <dir>\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  auto torus = make_genus1(1.0);
  auto g2 = make_hyperelliptic({-3, -2, 0.9, 0.95, 1, 3});
  struct Entry {
    const char* name;
    FockModel model;
  };
  // Genus 2: angles solved so that both ovals give distinct interior points.
  const std::vector<Entry> models = {
      {"square1", FockModel(torus, square_lattice(lattice(1, -1, 1, 1)), {0, 0.25, 0.5, 0.75}, vec({0.23}))},
      {"square2", FockModel(torus, square_lattice(lattice(2, 0, 0, 2)), {0, 0.2, 0.5, 0.7}, vec({0.23}))},
      {"hexagonal", FockModel(torus, hexagonal_lattice(), {0.1, 0.4, 0.8}, vec({0.23}))},
      {"square_octagon", FockModel(torus, square_octagon_lattice(), {0.7, 0, 0.5, 0.2}, vec({0.23}))},
      {"genus2_square3",
       FockModel(g2, square_lattice(lattice(3, 0, 1, 2)),
                 {0.7698997810436181, 0.9477889730010667, 1.052211026998933, 1.230100218956381}, vec({0.23, 0.61}))},
  };
  for (const auto& e : models) {
    save_model(e.model, (dir / (std::string(e.name) + ".json")).string(), e.name);
    std::cout << e.name << " " << model_hash(e.model) << "\n";
  }
  return 0;
}
