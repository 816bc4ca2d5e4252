#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace lrm {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatX = Mat<double>;
using VecX = Vec<double>;

// Spectral tolerances sit at ~100x double epsilon scaled by desk-scale n.
inline constexpr double kSpectralTol = 1e-10;

template <typename Scalar>
struct Symmetrized {
  Mat<Scalar> matrix;     // (raw + raw^T) / 2
  Scalar asymmetry;       // ||raw - raw^T||_F, caller diagnostic
};

// Symmetric part of a square matrix. Throws on non-square input.
template <typename Derived>
Symmetrized<typename Derived::Scalar> sym_from_dense(
    const Eigen::MatrixBase<Derived>& raw) {
  using Scalar = typename Derived::Scalar;
  if (raw.rows() != raw.cols())
    throw std::invalid_argument("sym_from_dense: input is not square");
  Mat<Scalar> sym = (raw + raw.transpose()) * Scalar(0.5);
  // Exact symmetry regardless of rounding in the expression above.
  for (Eigen::Index i = 0; i < sym.rows(); ++i)
    for (Eigen::Index j = 0; j < i; ++j) sym(i, j) = sym(j, i);
  Scalar asym = (raw - raw.transpose()).norm();
  return {std::move(sym), asym};
}

template <typename Scalar>
struct EigSym {
  Vec<Scalar> values;    // descending
  Mat<Scalar> vectors;   // column j pairs with values[j]
};

// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending.
// Ties keep the solver's original order (ascending index after the flip).
template <typename Derived>
EigSym<typename Derived::Scalar> eig_sym(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> solver(m);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error(
        "eig_sym: eigensolver failed to converge (n=" +
        std::to_string(m.rows()) +
        ", ||M||_F=" + std::to_string(static_cast<double>(m.norm())) + ")");
  const Eigen::Index n = m.rows();
  EigSym<Scalar> out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

template <typename Scalar>
struct RankSplitT {
  Eigen::Index r;
  Vec<Scalar> head;  // r largest singular values, descending
  Vec<Scalar> tail;  // remaining n - r, descending
};

using RankSplit = RankSplitT<double>;

// Head/tail split of the singular values (|eigenvalues| for symmetric M).
// Ties at the boundary break by descending magnitude then ascending
// eigenvalue index.
template <typename Derived>
RankSplitT<typename Derived::Scalar> rank_split(
    const Eigen::MatrixBase<Derived>& m, Eigen::Index r) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = m.rows();
  if (r < 0 || r > n)
    throw std::invalid_argument("rank_split: r out of range [0, n]");
  const auto eig = eig_sym(m);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) {
                     return std::abs(eig.values[a]) > std::abs(eig.values[b]);
                   });
  RankSplitT<Scalar> out;
  out.r = r;
  out.head.resize(r);
  out.tail.resize(n - r);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar sv = std::abs(eig.values[order[static_cast<std::size_t>(i)]]);
    if (i < r)
      out.head[i] = sv;
    else
      out.tail[i - r] = sv;
  }
  return out;
}

template <typename Scalar>
struct NormsT {
  Scalar nuclear;
  Scalar frobenius;
  Scalar spectral;
};

using Norms = NormsT<double>;

// Schatten norms of a symmetric matrix from its spectrum.
template <typename Derived>
NormsT<typename Derived::Scalar> norms(const Eigen::MatrixBase<Derived>& m) {
  const auto vals = eig_sym(m).values;
  return {vals.cwiseAbs().sum(), vals.norm(), vals.cwiseAbs().maxCoeff()};
}

// Eigenvalue soft-thresholding: the proximal operator of t * nuclear norm
// on symmetric matrices.
template <typename Derived>
Mat<typename Derived::Scalar> svt(const Eigen::MatrixBase<Derived>& m,
                                  typename Derived::Scalar t) {
  using Scalar = typename Derived::Scalar;
  if (t < Scalar(0)) throw std::invalid_argument("svt: threshold must be >= 0");
  auto eig = eig_sym(m);
  Vec<Scalar> shrunk = eig.values.unaryExpr([t](Scalar v) {
    const Scalar mag = std::abs(v) - t;
    return mag > Scalar(0) ? (v > Scalar(0) ? mag : -mag) : Scalar(0);
  });
  Mat<Scalar> out =
      eig.vectors * shrunk.asDiagonal() * eig.vectors.transpose();
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < i; ++j) out(i, j) = out(j, i);
  return out;
}

}  // namespace lrm
