#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "lrm/frames.hpp"
#include "lrm/matrix_core.hpp"
#include "lrm/measurement.hpp"
#include "lrm/rng.hpp"
#include "lrm/solver.hpp"

namespace lrm {

// ---------------------------------------------------------------------------
// Null space property quantities (head/tail split plus image norm).

struct NspTerms {
  double head_frob = 0.0;     // ||M_r||_2
  double tail_nuclear = 0.0;  // ||M_{r,c}||_1
  double image_norm = 0.0;    // ||A(M)||_q
  Eigen::Index r = 0;
  NormIndex q = NormIndex::L2;
};

inline NspTerms nsp_terms(const MatX& m, Eigen::Index r,
                          const MeasurementEnsemble& e, NormIndex q) {
  if (r < 1 || r > m.rows())
    throw std::invalid_argument("nsp_terms: r out of range [1, n]");
  const auto split = rank_split(m, r);
  NspTerms t;
  t.head_frob = split.head.norm();
  t.tail_nuclear = split.tail.sum();
  t.image_norm = lq_norm(apply(e, m), q);
  t.r = r;
  t.q = q;
  return t;
}

// The NSP inequality with constants (rho, tau); small additive slack absorbs
// floating-point noise.
inline bool nsp_holds(const NspTerms& t, double rho, double tau) {
  return t.head_frob <=
         (rho / std::sqrt(static_cast<double>(t.r))) * t.tail_nuclear +
             tau * t.image_norm + 1e-12;
}

struct NspProbeReport {
  double worst_ratio = 0.0;  // max head_frob / ((1/sqrt r) tail + image)
  MatX witness;
  NspTerms witness_terms;
  int trials = 0;
};

namespace detail {

// Orthonormal basis index for vectorized symmetric matrices (upper triangle,
// off-diagonals scaled by sqrt 2 so the Frobenius inner product is preserved).
inline Eigen::Index sym_dim(Eigen::Index n) { return n * (n + 1) / 2; }

inline VecX sym_vec(const MatX& m) {
  const Eigen::Index n = m.rows();
  VecX v(sym_dim(n));
  const double root2 = std::sqrt(2.0);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    v[k++] = m(i, i);
    for (Eigen::Index j = i + 1; j < n; ++j) v[k++] = root2 * m(i, j);
  }
  return v;
}

inline MatX sym_unvec(const VecX& v, Eigen::Index n) {
  MatX m(n, n);
  const double inv_root2 = 1.0 / std::sqrt(2.0);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = v[k++];
    for (Eigen::Index j = i + 1; j < n; ++j) {
      m(i, j) = inv_root2 * v[k];
      m(j, i) = m(i, j);
      ++k;
    }
  }
  return m;
}

// The measurement map flattened to an m x n(n+1)/2 matrix over the
// orthonormal symmetric basis.
inline MatX flatten_operator(const MeasurementEnsemble& e) {
  MatX op(e.m, sym_dim(e.n));
  for (Eigen::Index j = 0; j < e.m; ++j) {
    const VecX a = e.vectors.row(j).transpose();
    op.row(j) = sym_vec(MatX(a * a.transpose())).transpose();
  }
  return op;
}

inline MatX random_symmetric(Eigen::Index n, Rng& rng) {
  MatX raw(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) raw(i, j) = rng.gaussian();
  return sym_from_dense(raw).matrix;
}

}  // namespace detail

namespace detail {

// Best rank-r approximation (by |eigenvalue| truncation).
inline MatX rank_truncate(const MatX& m, Eigen::Index r) {
  const auto eig = eig_sym(m);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) {
                     return std::abs(eig.values[a]) > std::abs(eig.values[b]);
                   });
  MatX out = MatX::Zero(m.rows(), m.cols());
  for (Eigen::Index k = 0; k < r; ++k) {
    const Eigen::Index i = order[static_cast<std::size_t>(k)];
    out += eig.values[i] * eig.vectors.col(i) * eig.vectors.col(i).transpose();
  }
  return out;
}

}  // namespace detail

// Randomized NSP falsifier. Samples random symmetric directions plus
// near-kernel directions (deflated against the adjoint's row space via least
// squares, optionally refined by alternating rank-r truncation with
// re-deflation to hunt for low-rank kernel elements) and reports the worst
// observed quotient
//   head_frob / ((1/sqrt r) tail_nuclear + image_norm)
// with unit image scale. A heuristic lower bound on NSP failure, never a
// certificate.
inline NspProbeReport nsp_probe(const MeasurementEnsemble& e, Eigen::Index r,
                                NormIndex q, int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("nsp_probe: trials must be >= 1");
  if (r < 1 || r > e.n) throw std::invalid_argument("nsp_probe: r out of range");
  const Eigen::Index n = e.n;
  const MatX op = detail::flatten_operator(e);
  const Eigen::CompleteOrthogonalDecomposition<MatX> cod(op);
  auto deflate = [&](const MatX& m) -> MatX {
    return m - detail::sym_unvec(cod.solve(op * detail::sym_vec(m)), n);
  };

  NspProbeReport rep;
  rep.trials = trials;
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(t)}));
    MatX candidate = detail::random_symmetric(n, rng);
    if (t % 3 != 0) {
      candidate = deflate(candidate);
      if (candidate.norm() < 1e-12) continue;  // trivial kernel, skip
    }
    if (t % 3 == 2) {
      // Alternate between the rank-r cone and the kernel.
      for (int round = 0; round < 40; ++round) {
        candidate = deflate(detail::rank_truncate(candidate, r));
        const double norm = candidate.norm();
        if (norm < 1e-12) break;
        candidate /= norm;
      }
      if (candidate.norm() < 1e-12) continue;
    }
    candidate /= candidate.norm();
    const NspTerms terms = nsp_terms(candidate, r, e, q);
    const double denom =
        terms.tail_nuclear / std::sqrt(static_cast<double>(r)) +
        terms.image_norm;
    const double ratio = terms.head_frob / std::max(denom, 1e-300);
    if (ratio > rep.worst_ratio) {
      rep.worst_ratio = ratio;
      rep.witness = candidate;
      rep.witness_terms = terms;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Random instances and error metrics.

enum class SpectrumKind { UnitSigns, UniformPositive, PowerDecay };

struct SpectrumModel {
  SpectrumKind kind = SpectrumKind::UnitSigns;
  double alpha = 1.0;  // PowerDecay exponent
};

inline std::string to_string(const SpectrumModel& m) {
  switch (m.kind) {
    case SpectrumKind::UnitSigns: return "UnitSigns";
    case SpectrumKind::UniformPositive: return "UniformPositive";
    default: return "PowerDecay(" + std::to_string(m.alpha) + ")";
  }
}

// X = V diag(spectrum) V^T with Haar-uniform V. UnitSigns and UniformPositive
// are exactly rank r; PowerDecay fills all n eigenvalues lambda_i = i^{-alpha}.
inline MatX random_rank_r(Eigen::Index n, Eigen::Index r,
                          const SpectrumModel& model, std::uint64_t seed) {
  if (r < 1 || r > n)
    throw std::invalid_argument("random_rank_r: r out of range [1, n]");
  const Eigen::Index width = model.kind == SpectrumKind::PowerDecay ? n : r;
  const StiefelFrame basis = sample_stiefel(n, width, seed);
  VecX spectrum(width);
  Rng rng(derive_seed(seed, {0x5eedULL}));
  for (Eigen::Index i = 0; i < width; ++i) {
    switch (model.kind) {
      case SpectrumKind::UnitSigns:
        spectrum[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
        break;
      case SpectrumKind::UniformPositive:
        spectrum[i] = 0.5 + 0.5 * rng.uniform();
        break;
      case SpectrumKind::PowerDecay:
        spectrum[i] = std::pow(static_cast<double>(i + 1), -model.alpha);
        break;
    }
  }
  MatX x = basis.q * spectrum.asDiagonal() * basis.q.transpose();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j) x(i, j) = x(j, i);
  return x;
}

struct RecoveryError {
  double abs_frob = 0.0;
  double rel_frob = 0.0;
  double tail_term = 0.0;  // (1/sqrt r) ||X_{r,c}||_1
};

inline RecoveryError recovery_error(const MatX& x, const MatX& x_sharp,
                                    Eigen::Index r) {
  if (x.rows() != x_sharp.rows() || x.cols() != x_sharp.cols())
    throw std::invalid_argument("recovery_error: dimension mismatch");
  RecoveryError err;
  err.abs_frob = (x - x_sharp).norm();
  err.rel_frob = err.abs_frob / std::max(x.norm(), 1e-30);
  err.tail_term = rank_split(x, r).tail.sum() /
                  std::sqrt(static_cast<double>(r));
  return err;
}

// ---------------------------------------------------------------------------
// Experiment tables.

struct ExperimentRow {
  Eigen::Index n = 0, r = 0, m = 0;
  NormIndex q = NormIndex::L2;
  double eta = 0.0;
  std::uint64_t seed = 0;
  double rel_err = 0.0;
  double abs_err = 0.0;
  double tail_term = 0.0;
  double noise_term = 0.0;  // eta / m^{1/q}
  bool success = false;
  int iterations = 0;
  double runtime_ms = 0.0;
  bool converged = false;
};

struct ExperimentTable {
  std::vector<ExperimentRow> rows;
  double success_tol = 1e-3;
};

inline constexpr const char* kCsvHeader =
    "n,r,m,q,eta,seed,rel_err,abs_err,tail_term,noise_term,success,"
    "iterations,runtime_ms,converged";

struct TrialSpec {
  Eigen::Index n, r, m;
  NormIndex q = NormIndex::L2;
  double eta = 0.0;
  NoiseModel noise_model = NoiseModel::ScaledGaussian;
  SpectrumModel spectrum;
  std::uint64_t seed = 0;
};

// One full trial: fresh frame, fresh instance, measure, perturb, solve.
inline ExperimentRow run_trial(const TrialSpec& spec, const SolverConfig& cfg,
                               double success_tol) {
  if (spec.m < spec.n)
    throw std::invalid_argument("run_trial: frame requires m >= n");
  const auto frame_seed = derive_seed(spec.seed, {1});
  const auto instance_seed = derive_seed(spec.seed, {2});
  const auto noise_seed = derive_seed(spec.seed, {3});

  const auto t0 = std::chrono::steady_clock::now();
  const MeasurementEnsemble e = tight_frame_ensemble(spec.m, spec.n, frame_seed);
  const MatX x = random_rank_r(spec.n, spec.r, spec.spectrum, instance_seed);
  const NoiseSpec noise{spec.eta, spec.q, spec.noise_model};
  const auto noisy = add_noise(apply(e, x), noise, noise_seed);

  ExperimentRow row;
  row.n = spec.n;
  row.r = spec.r;
  row.m = spec.m;
  row.q = spec.q;
  row.eta = spec.eta;
  row.seed = spec.seed;
  row.noise_term = spec.eta / m_pow_inv_q(spec.m, spec.q);
  try {
    const RecoveryResult res =
        recover({e, noisy.b, spec.eta, spec.q}, cfg);
    const RecoveryError err = recovery_error(x, res.x_sharp, spec.r);
    row.rel_err = err.rel_frob;
    row.abs_err = err.abs_frob;
    row.tail_term = err.tail_term;
    row.success = err.rel_frob <= success_tol;
    row.iterations = res.iterations;
    row.converged = res.converged;
  } catch (const std::runtime_error&) {
    // Divergence is recorded per-row, never fatal to a sweep.
    row.rel_err = std::numeric_limits<double>::infinity();
    row.abs_err = std::numeric_limits<double>::infinity();
    row.success = false;
    row.converged = false;
  }
  const auto t1 = std::chrono::steady_clock::now();
  row.runtime_ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count();
  return row;
}

// Runs trials, optionally across threads; rows come back in spec order
// regardless of completion order.
inline ExperimentTable run_trials(const std::vector<TrialSpec>& specs,
                                  const SolverConfig& cfg, double success_tol,
                                  int threads = 1) {
  ExperimentTable table;
  table.success_tol = success_tol;
  table.rows.resize(specs.size());
  const int workers =
      std::max(1, std::min<int>(threads, static_cast<int>(specs.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < specs.size(); ++i)
      table.rows[i] = run_trial(specs[i], cfg, success_tol);
    return table;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < specs.size();
           i = next.fetch_add(1))
        table.rows[i] = run_trial(specs[i], cfg, success_tol);
    });
  }
  for (auto& th : pool) th.join();
  return table;
}

// Exact-recovery success fraction across a (n, r, m) grid, eta = 0,
// UnitSigns instances. Per-trial seeds derive from (root_seed, cell indices).
inline ExperimentTable phase_transition(const std::vector<Eigen::Index>& n_list,
                                        const std::vector<Eigen::Index>& r_list,
                                        const std::vector<Eigen::Index>& m_grid,
                                        int trials, const SolverConfig& cfg,
                                        std::uint64_t root_seed,
                                        double success_tol = 1e-3,
                                        int threads = 1) {
  std::vector<TrialSpec> specs;
  for (std::size_t ni = 0; ni < n_list.size(); ++ni)
    for (std::size_t ri = 0; ri < r_list.size(); ++ri)
      for (std::size_t mi = 0; mi < m_grid.size(); ++mi)
        for (int t = 0; t < trials; ++t) {
          TrialSpec spec;
          spec.n = n_list[ni];
          spec.r = r_list[ri];
          spec.m = m_grid[mi];
          spec.spectrum = {SpectrumKind::UnitSigns, 0.0};
          spec.seed = derive_seed(
              root_seed, {static_cast<std::uint64_t>(ni),
                          static_cast<std::uint64_t>(ri),
                          static_cast<std::uint64_t>(mi),
                          static_cast<std::uint64_t>(t)});
          specs.push_back(spec);
        }
  return run_trials(specs, cfg, success_tol, threads);
}

// Noise robustness sweep at fixed geometry, ScaledGaussian perturbations.
inline ExperimentTable noise_sweep(Eigen::Index n, Eigen::Index r,
                                   Eigen::Index m, NormIndex q,
                                   const std::vector<double>& eta_list,
                                   int trials, const SolverConfig& cfg,
                                   std::uint64_t root_seed,
                                   double success_tol = 1e-3,
                                   int threads = 1) {
  std::vector<TrialSpec> specs;
  for (std::size_t ei = 0; ei < eta_list.size(); ++ei)
    for (int t = 0; t < trials; ++t) {
      TrialSpec spec;
      spec.n = n;
      spec.r = r;
      spec.m = m;
      spec.q = q;
      spec.eta = eta_list[ei];
      spec.noise_model = NoiseModel::ScaledGaussian;
      spec.spectrum = {SpectrumKind::UnitSigns, 0.0};
      spec.seed = derive_seed(root_seed, {static_cast<std::uint64_t>(ei),
                                          static_cast<std::uint64_t>(t)});
      specs.push_back(spec);
    }
  return run_trials(specs, cfg, success_tol, threads);
}

// Stability sweep over approximately low-rank PowerDecay instances, eta = 0.
inline ExperimentTable stability_sweep(Eigen::Index n, Eigen::Index r,
                                       Eigen::Index m,
                                       const std::vector<double>& alpha_list,
                                       int trials, const SolverConfig& cfg,
                                       std::uint64_t root_seed,
                                       double success_tol = 1e-3,
                                       int threads = 1) {
  std::vector<TrialSpec> specs;
  for (std::size_t ai = 0; ai < alpha_list.size(); ++ai)
    for (int t = 0; t < trials; ++t) {
      TrialSpec spec;
      spec.n = n;
      spec.r = r;
      spec.m = m;
      spec.spectrum = {SpectrumKind::PowerDecay, alpha_list[ai]};
      spec.seed = derive_seed(root_seed, {static_cast<std::uint64_t>(ai),
                                          static_cast<std::uint64_t>(t)});
      specs.push_back(spec);
    }
  return run_trials(specs, cfg, success_tol, threads);
}

// ---------------------------------------------------------------------------
// PhaseLift rank-one extraction.

struct PhaseLiftExtract {
  VecX x_hat;
  double confidence = 0.0;  // top positive eigenvalue mass, 1 = exact rank one
};

inline PhaseLiftExtract phaselift_extract(const MatX& x_sharp) {
  const auto eig = eig_sym(x_sharp);
  PhaseLiftExtract out;
  const double top = eig.values[0];
  if (top <= 0) {
    out.x_hat = VecX::Zero(x_sharp.rows());
    out.confidence = 0.0;
    return out;
  }
  out.x_hat = std::sqrt(top) * eig.vectors.col(0);
  out.confidence = top / std::max(eig.values.cwiseAbs().sum(), 1e-300);
  return out;
}

// Sign-invariant vector error for PhaseLift comparisons.
inline double sign_invariant_error(const VecX& x_hat, const VecX& x) {
  return std::min((x_hat - x).norm(), (x_hat + x).norm());
}

}  // namespace lrm
