#pragma once

// Ten fixed seeded desk-scale instances shared by the solver tests, the
// acceptance suite, and the offline oracle pipeline
// (tools/export_oracle_instances + tools/solve_oracle.py). The reference
// solutions live in tests/data/oracle_<id>.txt and were computed by an
// independent conic solver.

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrm/analysis.hpp"

namespace lrm::testing {

struct OracleInstance {
  int id;
  Eigen::Index n, r, m;
  NormIndex q;
  double eta;
  std::uint64_t seed;
};

inline std::vector<OracleInstance> oracle_instances() {
  return {
      {0, 4, 1, 20, NormIndex::L2, 0.0, 101},
      {1, 4, 1, 24, NormIndex::L2, 0.01, 102},
      {2, 5, 1, 30, NormIndex::L2, 0.0, 103},
      {3, 5, 2, 36, NormIndex::L2, 0.05, 104},
      {4, 6, 1, 36, NormIndex::L2, 0.0, 105},
      {5, 6, 2, 40, NormIndex::L2, 0.02, 106},
      {6, 4, 1, 20, NormIndex::LInf, 0.005, 107},
      {7, 5, 1, 28, NormIndex::LInf, 0.0, 108},
      {8, 4, 2, 24, NormIndex::L1, 0.05, 109},
      {9, 6, 3, 40, NormIndex::L2, 0.0, 110},
  };
}

// Deterministic problem construction, same seed-splitting path as run_trial.
inline RecoveryProblem build_problem(const OracleInstance& inst,
                                     MatX* x_out = nullptr) {
  const auto frame_seed = derive_seed(inst.seed, {1});
  const auto instance_seed = derive_seed(inst.seed, {2});
  const auto noise_seed = derive_seed(inst.seed, {3});
  const MeasurementEnsemble e =
      tight_frame_ensemble(inst.m, inst.n, frame_seed);
  const MatX x = random_rank_r(inst.n, inst.r,
                               {SpectrumKind::UnitSigns, 0.0}, instance_seed);
  const NoiseSpec noise{inst.eta, inst.q, NoiseModel::ScaledGaussian};
  const auto noisy = add_noise(apply(e, x), noise, noise_seed);
  if (x_out) *x_out = x;
  return {e, noisy.b, inst.eta, inst.q};
}

inline MatX load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Eigen::Index n = 0;
  in >> n;
  MatX m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (!(in >> m(i, j))) throw std::runtime_error("truncated " + path);
  return m;
}

#ifdef LRM_TEST_DATA_DIR
inline MatX load_oracle_solution(int id) {
  return load_matrix(std::string(LRM_TEST_DATA_DIR) + "/oracle_" +
                     std::to_string(id) + ".txt");
}
#endif

}  // namespace lrm::testing
