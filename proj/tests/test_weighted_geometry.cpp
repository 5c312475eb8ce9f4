#include "doctest.h"
#include "support.hpp"
#include "varclust/errors.hpp"

using namespace varclust;
using namespace testing;

TEST_CASE("weights validate positivity and unit sum") {
  CHECK_THROWS_AS(Weights{Vector::Constant(3, 0.5)}, ValidationError);
  Vector bad(3);
  bad << 0.5, 0.6, -0.1;
  CHECK_THROWS_AS(Weights{bad}, ValidationError);
  CHECK_THROWS_AS(Weights{Vector{}}, ValidationError);
  CHECK_THROWS_AS(Weights::uniform(0), ValidationError);
  const Weights w = Weights::normalized(Vector::Constant(4, 2.0));
  CHECK(w.values().sum() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(w[0] == doctest::Approx(0.25));
}

TEST_CASE("w_dot against direct summation") {
  Rng rng(1);
  const Index n = 9;
  const Vector x = normal_vector(n, rng);
  const Vector y = normal_vector(n, rng);
  double direct = 0.0;
  for (Index i = 0; i < n; ++i) direct += x[i] * y[i];
  CHECK(w_dot(x, y, Weights::uniform(n)) == doctest::Approx(direct / n).epsilon(1e-14));
  const Weights w = random_weights(n, rng);
  CHECK(w_dot(x, y, w) == doctest::Approx(w_dot(y, x, w)).epsilon(1e-15));
  CHECK_THROWS_AS(w_dot(x, normal_vector(n + 1, rng), w), ValidationError);
}

TEST_CASE("centering and standardizing") {
  const Weights u = Weights::uniform(3);
  Vector x(3);
  x << 1, 2, 3;
  const Vector c = center(x, u);
  CHECK(c[0] == doctest::Approx(-1.0));
  CHECK(c[1] == doctest::Approx(0.0));
  CHECK(c[2] == doctest::Approx(1.0));
  CHECK(center(Vector::Constant(3, 7.0), u).cwiseAbs().maxCoeff() < 1e-15);
  CHECK_THROWS_AS(standardize(Vector::Constant(3, 7.0), u), ValidationError);

  Rng rng(2);
  const Weights w = random_weights(12, rng);
  const Vector s = standardize(normal_vector(12, rng), w);
  CHECK(std::abs(w_dot(s, Vector::Ones(12), w)) < 1e-14);
  CHECK(w_norm(s, w) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(max_abs_diff(standardize(s, w), s) < 1e-12);
  CHECK(w_dot(s, s, w) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("adjoint is an involution and self-adjoint on resultants") {
  Rng rng(3);
  const Index n = 7;
  const Weights w = random_weights(n, rng);
  const Matrix a = normal_matrix(n, n, rng);
  CHECK(max_abs_diff(adjoint(adjoint(a, w), w), a) < 1e-12);

  const Matrix sym = a + a.transpose();
  CHECK(max_abs_diff(adjoint(sym, Weights::uniform(n)), sym) < 1e-14);

  const Resultant r = random_resultant(n, 2, w, rng);
  CHECK(max_abs_diff(adjoint(r.op, w), r.op) < 1e-12);
}

TEST_CASE("operator_dot: trace identity, symmetry and inner product properties") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = uniform_int(rng, 3, 9);
    const Weights w = random_weights(n, rng);
    const Matrix a = normal_matrix(n, n, rng);
    const Matrix b = normal_matrix(n, n, rng);
    const double ab = operator_dot(a, b, w);
    CHECK(ab == doctest::Approx(operator_dot(b, a, w)).epsilon(1e-12));
    CHECK(ab == doctest::Approx(entrywise_dot(a, b, w)).epsilon(1e-12));
    CHECK(ab == doctest::Approx((adjoint(a, w) * b).trace()).epsilon(1e-12));

    const Resultant p = random_resultant(n, 2, w, rng);
    const Resultant q = random_resultant(n, 1, w, rng);
    CHECK(operator_dot(p.op, q.op, w) == doctest::Approx(spsd_dot(p.op, q.op)).epsilon(1e-12));
    CHECK(operator_dot(p.op, p.op, w) > 0.0);
    const double s = uniform(rng, -2, 2);
    CHECK(operator_dot(p.op + s * q.op, a, w) ==
          doctest::Approx(operator_dot(p.op, a, w) + s * operator_dot(q.op, a, w)).epsilon(1e-10));
  }
  CHECK(operator_dot(Matrix::Zero(3, 3), Matrix::Zero(3, 3), Weights::uniform(3)) == 0.0);
  CHECK_THROWS_AS(operator_dot(Matrix::Zero(3, 3), Matrix::Zero(4, 4), Weights::uniform(3)), ValidationError);
}

TEST_CASE("rank-1 resultants of standardized variables: [xx'W | yy'W] = <x|y>^2") {
  Rng rng(5);
  const Index n = 10;
  const Weights w = random_weights(n, rng);
  const Vector x = standardize(normal_vector(n, rng), w);
  const Vector y = standardize(normal_vector(n, rng), w);
  const Matrix px = x * x.transpose() * w.values().asDiagonal();
  const Matrix py = y * y.transpose() * w.values().asDiagonal();
  const double c = w_dot(x, y, w);
  CHECK(operator_dot(px, py, w) == doctest::Approx(c * c).epsilon(1e-12));
  CHECK(operator_dot(px, px, w) == doctest::Approx(1.0).epsilon(1e-12));

  // W-orthogonal lines give orthogonal projectors.
  Vector z = y - w_dot(y, x, w) * x;
  z /= w_norm(z, w);
  const Matrix pz = z * z.transpose() * w.values().asDiagonal();
  CHECK(std::abs(operator_dot(px, pz, w)) < 1e-12);
}

TEST_CASE("w_spsd_eigen: reconstruction, orthonormality, symmetric-similarity oracle") {
  Rng rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = uniform_int(rng, 3, 10);
    const Weights w = random_weights(n, rng);
    const Matrix x = normal_matrix(n, uniform_int(rng, 1, static_cast<int>(n)), rng);
    const Matrix a = center_columns(x, w) * random_spd(x.cols(), rng) * center_columns(x, w).transpose() *
                     w.values().asDiagonal();
    const WEigen e = w_spsd_eigen(a, w);
    const Matrix rec = e.vectors * e.values.asDiagonal() * e.vectors.transpose() * w.values().asDiagonal();
    CHECK(max_abs_diff(rec, a) <= 1e-10 * a.norm());
    const Matrix g = e.vectors.transpose() * w.values().asDiagonal() * e.vectors;
    CHECK(max_abs_diff(g, Matrix::Identity(g.rows(), g.cols())) < 1e-10);
    for (Index i = 1; i < e.values.size(); ++i) CHECK(e.values[i - 1] >= e.values[i]);
    CHECK(e.values.minCoeff() >= 0.0);

    // Oracle: eigenvalues of W^{1/2} A W^{-1/2} symmetrized, via a general solver.
    const Matrix s = w.sqrt().asDiagonal() * a * w.inv_sqrt().asDiagonal();
    Eigen::EigenSolver<Matrix> es(s);
    std::vector<double> ev;
    for (Index i = 0; i < n; ++i) ev.push_back(es.eigenvalues()[i].real());
    std::sort(ev.rbegin(), ev.rend());
    for (Index i = 0; i < e.values.size(); ++i) CHECK(e.values[i] == doctest::Approx(ev[i]).epsilon(1e-8));
  }
}

TEST_CASE("w_spsd_eigen: examples and errors") {
  Rng rng(7);
  const Index n = 6;
  const Weights w = random_weights(n, rng);
  const Vector x = standardize(normal_vector(n, rng), w);
  const WEigen e = w_spsd_eigen(x * x.transpose() * w.values().asDiagonal(), w);
  REQUIRE(e.values.size() == 1);
  CHECK(e.values[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(std::abs(w_dot(e.vectors.col(0), x, w)) - 1.0) < 1e-10);

  // Centring projector: every non-zero eigenvalue is 1.
  const Weights u = Weights::uniform(n);
  const Matrix p = Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / n);
  const WEigen pe = w_spsd_eigen(2.0 * p, u);
  CHECK(pe.values.size() == n - 1);
  CHECK((pe.values.array() - 2.0).abs().maxCoeff() < 1e-12);

  Matrix asym = Matrix::Identity(n, n);
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(w_spsd_eigen(asym, u), NumericalError);
  CHECK_THROWS_AS(w_spsd_eigen(-Matrix::Identity(n, n), u), NumericalError);
  CHECK_FALSE(is_w_spsd(-Matrix::Identity(n, n), u));
  CHECK(is_w_spsd(p, u));
}

TEST_CASE("numerical rank counts values above 1e-10 of the largest") {
  Vector v(4);
  v << 1.0, 1e-3, 5e-11, 0.0;
  CHECK(numerical_rank(v) == 2);
  CHECK(numerical_rank(Vector::Zero(3)) == 0);
}

TEST_CASE("w_orthonormal_polar: examples") {
  Rng rng(8);
  const Index n = 8;
  // Uniform weights: G = W V0 with V0 W-orthonormal is already polar.
  const Weights u = Weights::uniform(n);
  const Matrix v0 = random_w_orthonormal(n, 3, u, rng);
  CHECK(max_abs_diff(w_orthonormal_polar(u.values().asDiagonal() * v0, u), v0) < 1e-12);

  const Weights w = random_weights(n, rng);
  const Matrix vw = random_w_orthonormal(n, 2, w, rng);
  CHECK(max_abs_diff(w_orthonormal_polar(3.7 * (w.values().asDiagonal() * vw), w), vw) < 1e-12);

  Matrix deficient = normal_matrix(n, 2, rng);
  deficient.col(1) = 2.0 * deficient.col(0);
  CHECK_THROWS_AS(w_orthonormal_polar(deficient, w), NumericalError);
}

TEST_CASE("w_orthonormal_polar: feasibility and optimality over 1000 random frames") {
  Rng rng(9);
  const Index n = 7;
  const Index h = 3;
  const Weights w = random_weights(n, rng);
  const Matrix g = normal_matrix(n, h, rng);
  const Matrix v = w_orthonormal_polar(g, w);
  const Matrix vtwv = v.transpose() * w.values().asDiagonal() * v;
  CHECK(max_abs_diff(vtwv, Matrix::Identity(h, h)) < 1e-12);
  const double best = (v.transpose() * g).trace();
  for (int i = 0; i < 1000; ++i) {
    const Matrix u = random_w_orthonormal(n, h, w, rng);
    CHECK((u.transpose() * g).trace() <= best + 1e-12);
  }
}

TEST_CASE("spd_sqrt and fix_column_signs") {
  Rng rng(10);
  const Matrix m = random_spd(4, rng);
  const Matrix r = spd_sqrt(m);
  CHECK(max_abs_diff(r * r, m) < 1e-10);
  CHECK_THROWS_AS(spd_sqrt(-m), ValidationError);
  Matrix u(2, 2);
  u << -3, 1, 2, -5;
  fix_column_signs(u);
  CHECK(u(0, 0) == 3);
  CHECK(u(1, 1) == 5);
}
