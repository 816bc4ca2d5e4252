// Dumps the fixed oracle instances to plain-text files so an independent
// solver (tools/solve_oracle.py) can produce the reference solutions in
// tests/data/. Usage: export-oracle-instances <output-dir>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "../tests/oracle_instances.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: export-oracle-instances <output-dir>\n";
    return 2;
  }
  const std::string dir = argv[1];
  char buf[40];
  for (const auto& inst : lrm::testing::oracle_instances()) {
    lrm::MatX x;
    const auto problem = lrm::testing::build_problem(inst, &x);
    std::ofstream out(dir + "/instance_" + std::to_string(inst.id) + ".txt");
    out << inst.n << ' ' << inst.m << ' ' << lrm::to_string(inst.q) << ' ';
    std::snprintf(buf, sizeof(buf), "%.17g", inst.eta);
    out << buf << '\n';
    for (Eigen::Index i = 0; i < inst.m; ++i) {
      for (Eigen::Index j = 0; j < inst.n; ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", problem.ensemble.vectors(i, j));
        out << buf << (j + 1 == inst.n ? '\n' : ' ');
      }
    }
    for (Eigen::Index i = 0; i < inst.m; ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", problem.b[i]);
      out << buf << '\n';
    }
    if (!out) {
      std::cerr << "write failed for instance " << inst.id << '\n';
      return 1;
    }
  }
  std::cout << "exported " << lrm::testing::oracle_instances().size()
            << " instances to " << dir << '\n';
  return 0;
}
