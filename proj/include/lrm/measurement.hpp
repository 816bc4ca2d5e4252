#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "lrm/frames.hpp"
#include "lrm/rng.hpp"

namespace lrm {

// Norm index q for the noise constraint; LInf is the q = infinity case.
enum class NormIndex { L1, L2, LInf };

inline std::string to_string(NormIndex q) {
  switch (q) {
    case NormIndex::L1: return "1";
    case NormIndex::L2: return "2";
    default: return "inf";
  }
}

inline double lq_norm(const VecX& v, NormIndex q) {
  switch (q) {
    case NormIndex::L1: return v.lpNorm<1>();
    case NormIndex::L2: return v.norm();
    default: return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
  }
}

// m^{1/q}; the natural scale of the noise term in the error bound.
inline double m_pow_inv_q(Eigen::Index m, NormIndex q) {
  switch (q) {
    case NormIndex::L1: return static_cast<double>(m);
    case NormIndex::L2: return std::sqrt(static_cast<double>(m));
    default: return 1.0;
  }
}

enum class NoiseModel { ScaledGaussian, UniformBox, AdversarialZero };

inline std::string to_string(NoiseModel m) {
  switch (m) {
    case NoiseModel::ScaledGaussian: return "ScaledGaussian";
    case NoiseModel::UniformBox: return "UniformBox";
    default: return "AdversarialZero";
  }
}

struct NoiseSpec {
  double eta = 0.0;
  NormIndex q = NormIndex::L2;
  NoiseModel model = NoiseModel::ScaledGaussian;
};

// Component j of the measurement map: a_j^T X a_j. Evaluated as a quadratic
// form; the rank-one matrices a_j a_j^T are never materialized.
inline VecX apply(const MeasurementEnsemble& e, const MatX& x) {
  if (x.rows() != e.n || x.cols() != e.n)
    throw std::invalid_argument("apply: matrix dimension does not match ensemble");
  return (e.vectors * x).cwiseProduct(e.vectors).rowwise().sum();
}

// Adjoint of the measurement map: sum_j y_j a_j a_j^T, symmetric by
// construction.
inline MatX adjoint(const MeasurementEnsemble& e, const VecX& y) {
  if (y.size() != e.m)
    throw std::invalid_argument("adjoint: vector length does not match ensemble");
  MatX out = e.vectors.transpose() * y.asDiagonal() * e.vectors;
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < i; ++j) out(i, j) = out(j, i);
  return out;
}

struct OperatorNormEstimate {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// ||A|| = sqrt(lambda_max(A* A)) by power iteration on X -> A*(A(X)).
// Deterministic start at the normalized identity direction.
inline OperatorNormEstimate operator_norm(const MeasurementEnsemble& e,
                                          double tol = 1e-9,
                                          int max_iter = 1000) {
  if (tol <= 0) throw std::invalid_argument("operator_norm: tol must be > 0");
  const Eigen::Index n = e.n;
  MatX x = MatX::Identity(n, n) / std::sqrt(static_cast<double>(n));
  double rayleigh = 0.0;
  OperatorNormEstimate est;
  for (int it = 1; it <= max_iter; ++it) {
    MatX y = adjoint(e, apply(e, x));
    const double next = y.norm();
    const double rq = (x.cwiseProduct(y)).sum();  // <x, A*A x>, x is unit
    est.iterations = it;
    if (next == 0.0) {
      est.value = 0.0;
      est.converged = true;
      return est;
    }
    x = y / next;
    if (rayleigh > 0.0 && std::abs(rq - rayleigh) <= tol * std::abs(rq)) {
      est.value = std::sqrt(rq);
      est.converged = true;
      return est;
    }
    rayleigh = rq;
  }
  est.value = std::sqrt(rayleigh);
  est.converged = false;
  return est;
}

struct NoisyMeasurement {
  VecX b;  // perturbed measurements
  VecX w;  // the perturbation actually applied, ||w||_q <= eta
};

// Draws w per the model, rescaled so ||w||_q <= eta holds exactly.
inline NoisyMeasurement add_noise(const VecX& b, const NoiseSpec& spec,
                                  std::uint64_t seed) {
  if (spec.eta < 0) throw std::invalid_argument("add_noise: eta must be >= 0");
  const Eigen::Index m = b.size();
  VecX w = VecX::Zero(m);
  if (spec.eta > 0 && spec.model != NoiseModel::AdversarialZero) {
    Rng rng(seed);
    if (spec.model == NoiseModel::UniformBox) {
      for (Eigen::Index i = 0; i < m; ++i)
        w[i] = spec.eta * (2.0 * rng.uniform() - 1.0);
      // Uniform box is the q = inf natural model; rescale if another q was
      // requested so the constraint still holds exactly.
      const double norm = lq_norm(w, spec.q);
      if (norm > spec.eta) w *= spec.eta / norm;
    } else {
      for (Eigen::Index i = 0; i < m; ++i) w[i] = rng.gaussian();
      const double norm = lq_norm(w, spec.q);
      const double radius = spec.eta * rng.uniform();
      w = norm > 0 ? VecX(w * (radius / norm)) : VecX::Zero(m);
    }
  }
  return {b + w, w};
}

}  // namespace lrm
