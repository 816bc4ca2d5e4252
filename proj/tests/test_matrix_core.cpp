#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "lrm/matrix_core.hpp"
#include "lrm/rng.hpp"

using lrm::MatX;
using lrm::VecX;

namespace {

MatX random_symmetric(Eigen::Index n, lrm::Rng& rng) {
  MatX raw(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) raw(i, j) = rng.gaussian();
  return lrm::sym_from_dense(raw).matrix;
}

}  // namespace

TEST_CASE("sym_from_dense symmetrizes and reports asymmetry") {
  MatX a(2, 2);
  a << 1, 2, 2, 3;
  auto sym = lrm::sym_from_dense(a);
  CHECK(sym.matrix == a);
  CHECK(sym.asymmetry == 0.0);

  MatX skew(2, 2);
  skew << 0, 1, -1, 0;
  auto killed = lrm::sym_from_dense(skew);
  CHECK(killed.matrix.isZero(0.0));
  // ||raw - raw^T||_F = ||[[0,2],[-2,0]]||_F = 2*sqrt(2)
  CHECK(killed.asymmetry == doctest::Approx(2.0 * std::sqrt(2.0)));

  MatX one(1, 1);
  one << 5;
  CHECK(lrm::sym_from_dense(one).matrix(0, 0) == 5.0);

  CHECK_THROWS_AS(lrm::sym_from_dense(MatX::Zero(2, 3)),
                  std::invalid_argument);
}

TEST_CASE("eig_sym on fixed spectra") {
  MatX d = VecX::Zero(3).asDiagonal();
  d.diagonal() << 3, 1, -2;
  auto eig = lrm::eig_sym(d);
  CHECK(eig.values[0] == doctest::Approx(3.0));
  CHECK(eig.values[1] == doctest::Approx(1.0));
  CHECK(eig.values[2] == doctest::Approx(-2.0));
  // columns are signed permutations of identity columns
  CHECK((eig.vectors.cwiseAbs() - MatX::Identity(3, 3)).cwiseAbs().maxCoeff() ==
        doctest::Approx(0.0).epsilon(1e-12));

  auto id = lrm::eig_sym(MatX::Identity(3, 3));
  CHECK(id.values.isApproxToConstant(1.0, 1e-14));

  MatX swap(2, 2);
  swap << 0, 1, 1, 0;
  auto sw = lrm::eig_sym(swap);
  CHECK(sw.values[0] == doctest::Approx(1.0));
  CHECK(sw.values[1] == doctest::Approx(-1.0));
  const double inv_root2 = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(sw.vectors(0, 0)) == doctest::Approx(inv_root2));
  CHECK(std::abs(sw.vectors(1, 0)) == doctest::Approx(inv_root2));
  CHECK(sw.vectors(0, 0) * sw.vectors(1, 0) > 0);   // same sign: (1,1)/sqrt 2
  CHECK(sw.vectors(0, 1) * sw.vectors(1, 1) < 0);   // opposite: (1,-1)/sqrt 2
}

TEST_CASE("eig_sym reconstruction and orthogonality on random matrices") {
  lrm::Rng rng(42);
  for (Eigen::Index n : {2, 5, 17, 64, 256}) {
    const MatX m = random_symmetric(n, rng);
    const auto eig = lrm::eig_sym(m);
    const MatX rebuilt =
        eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
    CHECK((rebuilt - m).norm() <= 1e-10 * std::max(1.0, m.norm()));
    const MatX gram = eig.vectors.transpose() * eig.vectors;
    CHECK((gram - MatX::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-10);
    for (Eigen::Index i = 1; i < n; ++i)
      CHECK(eig.values[i - 1] >= eig.values[i]);
  }
}

TEST_CASE("rank_split examples and bounds") {
  MatX d = MatX::Zero(3, 3);
  d.diagonal() << 3, 1, -2;

  auto split = lrm::rank_split(d, 1);
  REQUIRE(split.head.size() == 1);
  CHECK(split.head[0] == doctest::Approx(3.0));
  REQUIRE(split.tail.size() == 2);
  CHECK(split.tail[0] == doctest::Approx(2.0));
  CHECK(split.tail[1] == doctest::Approx(1.0));

  auto zero_split = lrm::rank_split(d, 0);
  CHECK(zero_split.head.size() == 0);
  CHECK(zero_split.tail.size() == 3);

  auto full = lrm::rank_split(d, 3);
  CHECK(full.tail.size() == 0);

  CHECK_THROWS_AS(lrm::rank_split(d, 4), std::invalid_argument);
  CHECK_THROWS_AS(lrm::rank_split(d, -1), std::invalid_argument);
}

TEST_CASE("rank_split conservation against nuclear norm") {
  lrm::Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const MatX m = random_symmetric(12, rng);
    const double nuclear = lrm::norms(m).nuclear;
    for (Eigen::Index r : {0, 1, 5, 12}) {
      const auto split = lrm::rank_split(m, r);
      const double total = split.head.sum() + split.tail.sum();
      CHECK(std::abs(total - nuclear) <= 1e-10 * nuclear);
      if (split.head.size() > 0 && split.tail.size() > 0)
        CHECK(split.head.minCoeff() >= split.tail.maxCoeff());
    }
  }
}

TEST_CASE("norms on fixed matrices") {
  MatX d = MatX::Zero(3, 3);
  d.diagonal() << 3, 1, -2;
  auto nm = lrm::norms(d);
  CHECK(nm.nuclear == doctest::Approx(6.0));
  CHECK(nm.frobenius == doctest::Approx(std::sqrt(14.0)));
  CHECK(nm.spectral == doctest::Approx(3.0));

  auto zero = lrm::norms(MatX::Zero(4, 4));
  CHECK(zero.nuclear == 0.0);
  CHECK(zero.frobenius == 0.0);
  CHECK(zero.spectral == 0.0);

  for (Eigen::Index n : {1, 5, 9}) {
    auto id = lrm::norms(MatX::Identity(n, n));
    CHECK(id.nuclear == doctest::Approx(static_cast<double>(n)));
    CHECK(id.frobenius == doctest::Approx(std::sqrt(static_cast<double>(n))));
    CHECK(id.spectral == doctest::Approx(1.0));
  }
}

TEST_CASE("norm ordering holds on random inputs") {
  lrm::Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.uniform() * 14);
    const auto nm = lrm::norms(random_symmetric(n, rng));
    CHECK(nm.nuclear >= nm.frobenius - 1e-12);
    CHECK(nm.frobenius >= nm.spectral - 1e-12);
    CHECK(nm.nuclear <= std::sqrt(static_cast<double>(n)) * nm.frobenius +
                            1e-12);
  }
}

TEST_CASE("svt examples") {
  MatX d = MatX::Zero(3, 3);
  d.diagonal() << 3, 1, -2;
  const MatX shrunk = lrm::svt(d, 1.0);
  MatX expected = MatX::Zero(3, 3);
  expected.diagonal() << 2, 0, -1;
  CHECK((shrunk - expected).cwiseAbs().maxCoeff() < 1e-12);

  lrm::Rng rng(11);
  const MatX m = random_symmetric(6, rng);
  CHECK((lrm::svt(m, 0.0) - m).cwiseAbs().maxCoeff() < 1e-12);

  MatX tiny(1, 1);
  tiny << 0.5;
  CHECK(lrm::svt(tiny, 1.0)(0, 0) == 0.0);

  CHECK_THROWS_AS(lrm::svt(m, -1.0), std::invalid_argument);
}

TEST_CASE("svt is nonexpansive") {
  lrm::Rng rng(99);
  for (double t : {0.1, 1.0, 10.0}) {
    for (int trial = 0; trial < 100; ++trial) {
      const MatX a = random_symmetric(8, rng);
      const MatX b = random_symmetric(8, rng);
      CHECK((lrm::svt(a, t) - lrm::svt(b, t)).norm() <=
            (a - b).norm() + 1e-12);
    }
  }
}

TEST_CASE("svt minimizes t*nuclear + half squared distance") {
  // Grid/perturbation check on 3x3 diagonal instances: the prox value must
  // beat every perturbed candidate.
  lrm::Rng rng(5);
  auto objective = [](const MatX& z, const MatX& m, double t) {
    return t * lrm::norms(z).nuclear + 0.5 * (z - m).squaredNorm();
  };
  for (int trial = 0; trial < 10; ++trial) {
    MatX m = MatX::Zero(3, 3);
    m.diagonal() << 4.0 * rng.gaussian(), 4.0 * rng.gaussian(),
        4.0 * rng.gaussian();
    for (double t : {0.3, 1.0, 2.5}) {
      const MatX prox = lrm::svt(m, t);
      const double best = objective(prox, m, t);
      for (int k = 0; k < 40; ++k) {
        const MatX perturbed =
            prox + 0.05 * random_symmetric(3, rng);
        CHECK(objective(perturbed, m, t) >= best - 1e-10);
      }
      // Diagonal grid candidates around the prox diagonal.
      for (double d0 : {-0.2, 0.0, 0.2})
        for (double d1 : {-0.2, 0.0, 0.2})
          for (double d2 : {-0.2, 0.0, 0.2}) {
            MatX candidate = prox;
            candidate(0, 0) += d0;
            candidate(1, 1) += d1;
            candidate(2, 2) += d2;
            CHECK(objective(candidate, m, t) >= best - 1e-10);
          }
    }
  }
}
