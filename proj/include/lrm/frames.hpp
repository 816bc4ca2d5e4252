#pragma once

#include <Eigen/Dense>
#include <Eigen/QR>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "lrm/matrix_core.hpp"
#include "lrm/rng.hpp"

namespace lrm {

enum class EnsembleKind { TightFrame, Gaussian };

inline std::string to_string(EnsembleKind k) {
  return k == EnsembleKind::TightFrame ? "TightFrame" : "Gaussian";
}

// m x n matrix with orthonormal columns, Haar-uniform on the Stiefel manifold.
struct StiefelFrame {
  Eigen::Index m = 0;
  Eigen::Index n = 0;
  MatX q;  // m x n, q^T q = I_n
  std::uint64_t seed = 0;
};

// Rows of `vectors` are the measurement vectors a_j.
struct MeasurementEnsemble {
  EnsembleKind kind = EnsembleKind::TightFrame;
  Eigen::Index m = 0;
  Eigen::Index n = 0;
  MatX vectors;  // m x n
  std::uint64_t seed = 0;
};

struct CouplingPair {
  MatX w;        // n x n symmetric PSD, 1/sqrt(m) times Wishart square root
  MatX g;        // m x n, = sqrt(m) * q * w; entrywise standard normal
  double kappa;  // lambda_max(w) / lambda_min(w)
};

// i.i.d. standard normal entries, filled row-major so the layout is part of
// the reproducibility contract.
inline MatX sample_gaussian_matrix(Eigen::Index m, Eigen::Index n,
                                   std::uint64_t seed) {
  if (m < 1 || n < 1)
    throw std::invalid_argument("sample_gaussian_matrix: dims must be >= 1");
  Rng rng(seed);
  MatX out(m, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = rng.gaussian();
  return out;
}

// Gaussian + thin QR with the diag(R) > 0 sign convention, which makes the
// resulting Q Haar-uniform.
inline StiefelFrame sample_stiefel(Eigen::Index m, Eigen::Index n,
                                   std::uint64_t seed) {
  if (n < 1 || m < n)
    throw std::invalid_argument("sample_stiefel: need m >= n >= 1");
  auto factor = [&](std::uint64_t s, MatX& q_out) -> bool {
    const MatX a = sample_gaussian_matrix(m, n, s);
    Eigen::HouseholderQR<MatX> qr(a);
    MatX q = qr.householderQ() * MatX::Identity(m, n);
    const MatX r = qr.matrixQR().topRows(n).template triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(r(j, j)) < 1e-12) return false;
      if (r(j, j) < 0) q.col(j) = -q.col(j);
    }
    q_out = std::move(q);
    return true;
  };
  StiefelFrame frame;
  frame.m = m;
  frame.n = n;
  frame.seed = seed;
  if (!factor(seed, frame.q)) {
    // Rank-deficient draw has probability zero; resample once.
    std::uint64_t retry = seed;
    retry = splitmix64(retry);
    if (!factor(retry, frame.q))
      throw std::runtime_error("sample_stiefel: degenerate Gaussian draw twice");
  }
  return frame;
}

// a_j = sqrt(m) * (row j of Q); tightness sum_j a_j a_j^T = m I follows.
inline MeasurementEnsemble to_measurement_frame(const StiefelFrame& frame) {
  MeasurementEnsemble e;
  e.kind = EnsembleKind::TightFrame;
  e.m = frame.m;
  e.n = frame.n;
  e.seed = frame.seed;
  e.vectors = std::sqrt(static_cast<double>(frame.m)) * frame.q;
  return e;
}

inline MeasurementEnsemble tight_frame_ensemble(Eigen::Index m, Eigen::Index n,
                                                std::uint64_t seed) {
  return to_measurement_frame(sample_stiefel(m, n, seed));
}

inline MeasurementEnsemble gaussian_ensemble(Eigen::Index m, Eigen::Index n,
                                             std::uint64_t seed) {
  MeasurementEnsemble e;
  e.kind = EnsembleKind::Gaussian;
  e.m = m;
  e.n = n;
  e.seed = seed;
  e.vectors = sample_gaussian_matrix(m, n, seed);
  return e;
}

// W = (1/sqrt(m)) * sqrt(A A^T) via the spectral square root (the coupling
// needs the symmetric root, not Cholesky); G = Q W.
inline CouplingPair wishart_coupling(const StiefelFrame& frame,
                                     std::uint64_t seed) {
  const Eigen::Index n = frame.n;
  const Eigen::Index m = frame.m;
  const MatX a = sample_gaussian_matrix(n, m, seed);
  const MatX s = a * a.transpose();
  const auto eig = eig_sym(s);
  if (eig.values.minCoeff() < 1e-12)
    throw std::runtime_error("wishart_coupling: degenerate Wishart draw");
  const VecX roots = eig.values.cwiseSqrt() / std::sqrt(static_cast<double>(m));
  CouplingPair pair;
  pair.w = eig.vectors * roots.asDiagonal() * eig.vectors.transpose();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j) pair.w(i, j) = pair.w(j, i);
  // The coupled Gaussian matrix pairs with the sqrt(m)-scaled frame rows.
  pair.g = std::sqrt(static_cast<double>(m)) * frame.q * pair.w;
  pair.kappa = roots.maxCoeff() / roots.minCoeff();
  return pair;
}

// Text serialization for experiment replay.
// Header line: "kind m n seed", then m rows of n values, %.17g precision.
inline void save_ensemble(const std::string& path,
                          const MeasurementEnsemble& e) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_ensemble: cannot open " + path);
  out << to_string(e.kind) << ' ' << e.m << ' ' << e.n << ' ' << e.seed << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < e.m; ++i) {
    for (Eigen::Index j = 0; j < e.n; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", e.vectors(i, j));
      out << buf << (j + 1 == e.n ? '\n' : ' ');
    }
  }
  if (!out) throw std::runtime_error("save_ensemble: write failed for " + path);
}

inline MeasurementEnsemble load_ensemble(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_ensemble: cannot open " + path);
  std::string kind;
  MeasurementEnsemble e;
  in >> kind >> e.m >> e.n >> e.seed;
  if (!in || (kind != "TightFrame" && kind != "Gaussian") || e.m < 1 || e.n < 1)
    throw std::runtime_error("load_ensemble: malformed header in " + path);
  e.kind = kind == "TightFrame" ? EnsembleKind::TightFrame
                                : EnsembleKind::Gaussian;
  e.vectors.resize(e.m, e.n);
  for (Eigen::Index i = 0; i < e.m; ++i)
    for (Eigen::Index j = 0; j < e.n; ++j)
      if (!(in >> e.vectors(i, j)))
        throw std::runtime_error("load_ensemble: truncated data in " + path);
  return e;
}

}  // namespace lrm
