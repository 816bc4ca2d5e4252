#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrm/matrix_core.hpp"
#include "lrm/measurement.hpp"

namespace lrm {

struct RecoveryProblem {
  MeasurementEnsemble ensemble;
  VecX b;
  double eta = 0.0;
  NormIndex q = NormIndex::L2;
};

struct SolverConfig {
  int max_iter = 50000;
  double tol_primal = 1e-9;  // relative iterate change
  double tol_dual = 1e-9;
  double step_ratio = 1.0;   // sigma / tau balance
  int check_every = 10;      // convergence test cadence
  int stall_window = 200;    // checkpoints without constraint progress
  std::string trace_path;    // optional per-checkpoint CSV
};

struct RecoveryResult {
  MatX x_sharp;
  int iterations = 0;
  bool converged = false;
  bool stalled = false;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double constraint_residual = 0.0;  // ||A(X#) - b||_q
  double objective = 0.0;            // ||X#||_1
};

struct CertifyReport {
  bool feasible = false;
  double constraint_residual = 0.0;
  double objective = 0.0;
};

// Euclidean projection of v onto the ball {y : ||y - center||_q <= radius}.
inline VecX ball_project(const VecX& v, const VecX& center, double radius,
                         NormIndex q) {
  if (v.size() != center.size())
    throw std::invalid_argument("ball_project: dimension mismatch");
  if (radius < 0) throw std::invalid_argument("ball_project: radius must be >= 0");
  VecX d = v - center;
  switch (q) {
    case NormIndex::L2: {
      const double norm = d.norm();
      if (norm <= radius) return v;
      return center + d * (radius / std::max(norm, 1e-300));
    }
    case NormIndex::LInf:
      return center + d.cwiseMax(-radius).cwiseMin(radius);
    case NormIndex::L1: {
      if (d.lpNorm<1>() <= radius) return v;
      // Sorted-threshold projection onto the l1 ball.
      VecX mag = d.cwiseAbs();
      std::vector<double> sorted(mag.data(), mag.data() + mag.size());
      std::sort(sorted.begin(), sorted.end(), std::greater<double>());
      double cumulative = 0.0;
      double active_sum = 0.0;
      std::size_t active = 0;
      for (std::size_t k = 0; k < sorted.size(); ++k) {
        cumulative += sorted[k];
        if (sorted[k] - (cumulative - radius) / static_cast<double>(k + 1) > 0) {
          active = k + 1;
          active_sum = cumulative;
        }
      }
      const double theta =
          std::max((active_sum - radius) / static_cast<double>(active), 0.0);
      VecX shrunk = (mag.array() - theta).max(0.0);
      return center + shrunk.cwiseProduct(d.cwiseSign());
    }
  }
  throw std::invalid_argument("ball_project: unsupported norm index");
}

// Recomputes feasibility and objective from scratch, independent of any
// solver state.
inline CertifyReport certify(const RecoveryProblem& p, const MatX& z) {
  if (z.rows() != p.ensemble.n || z.cols() != p.ensemble.n)
    throw std::invalid_argument("certify: dimension mismatch");
  CertifyReport rep;
  rep.constraint_residual = lq_norm(apply(p.ensemble, z) - p.b, p.q);
  rep.objective = norms(z).nuclear;
  const double slack = 1e-6 * std::max(1.0, lq_norm(p.b, p.q));
  rep.feasible = rep.constraint_residual <= p.eta + slack;
  return rep;
}

// Nuclear norm minimization subject to ||A(Z) - b||_q <= eta, solved by
// primal-dual proximal splitting: the nuclear norm enters through its prox
// (eigenvalue soft-thresholding) and the constraint through the projection
// onto the lq ball, via the Moreau identity for the indicator's conjugate.
// Steps satisfy sigma * tau * L^2 <= 1. Initialization Z = 0, u = 0.
inline RecoveryResult recover(const RecoveryProblem& p,
                              const SolverConfig& cfg = {}) {
  const Eigen::Index n = p.ensemble.n;
  if (p.b.size() != p.ensemble.m)
    throw std::invalid_argument("recover: measurement length mismatch");
  if (p.eta < 0) throw std::invalid_argument("recover: eta must be >= 0");

  const auto norm_est = operator_norm(p.ensemble, 1e-6, 2000);
  const double op_norm = std::max(norm_est.value, 1e-30);
  const double sigma = cfg.step_ratio / op_norm;
  const double tau = 1.0 / (sigma * op_norm * op_norm);

  MatX z = MatX::Zero(n, n);
  MatX z_bar = z;
  VecX u = VecX::Zero(p.ensemble.m);

  std::ofstream trace;
  if (!cfg.trace_path.empty()) {
    trace.open(cfg.trace_path);
    trace << "iter,objective,constraint_residual,primal_change,dual_change\n";
  }

  RecoveryResult res;
  double best_constraint = std::numeric_limits<double>::infinity();
  int checkpoints_since_progress = 0;

  for (int it = 1; it <= cfg.max_iter; ++it) {
    // Dual ascent on the constraint indicator's conjugate.
    const VecX az_bar = apply(p.ensemble, z_bar);
    const VecX arg = u / sigma + az_bar;
    VecX u_new = sigma * (arg - ball_project(arg, p.b, p.eta, p.q));

    // Primal descent through the nuclear-norm prox.
    MatX z_new = svt(z - tau * adjoint(p.ensemble, u_new), tau);
    z_bar = 2.0 * z_new - z;

    const double primal_change =
        (z_new - z).norm() / std::max(1.0, z_new.norm());
    const double dual_change =
        (u_new - u).norm() / std::max(1.0, u_new.norm());
    z = std::move(z_new);
    u = std::move(u_new);
    res.iterations = it;
    res.primal_residual = primal_change;
    res.dual_residual = dual_change;

    if (!z.allFinite() || !u.allFinite())
      throw std::runtime_error("recover: non-finite iterate at iteration " +
                               std::to_string(it));

    if (it % cfg.check_every == 0 || it == cfg.max_iter) {
      const double constraint = lq_norm(apply(p.ensemble, z) - p.b, p.q);
      if (trace.is_open()) {
        trace << it << ',' << norms(z).nuclear << ',' << constraint << ','
              << primal_change << ',' << dual_change << '\n';
      }
      if (constraint < best_constraint * (1.0 - 1e-12) ||
          constraint <= p.eta + 1e-6 * std::max(1.0, lq_norm(p.b, p.q))) {
        best_constraint = std::min(best_constraint, constraint);
        checkpoints_since_progress = 0;
      } else if (++checkpoints_since_progress >= cfg.stall_window) {
        res.stalled = true;
      }
      if (primal_change < cfg.tol_primal && dual_change < cfg.tol_dual) {
        res.converged = true;
        break;
      }
    }
  }

  res.x_sharp = z;
  res.constraint_residual = lq_norm(apply(p.ensemble, z) - p.b, p.q);
  res.objective = norms(z).nuclear;
  return res;
}

}  // namespace lrm
