#include <doctest.h>

#include <cmath>

#include "nakano/positivity.hpp"
#include "nakano/serialize.hpp"
#include "test_support.hpp"

using namespace nakano;
using namespace nakano::testing;

TEST_CASE("convexity_verdict") {
  GridSpec grid = square(-1.0, 1.0, 41);

  PositivityReport convex =
      convexity_verdict(scalar_from(grid, [](auto x) { return x[0] * x[0] + x[1] * x[1]; }));
  CHECK(convex.verdict == Verdict::Semipositive);
  CHECK(convex.worst_eigenvalue == doctest::Approx(2.0).epsilon(1e-8));

  PositivityReport saddle =
      convexity_verdict(scalar_from(grid, [](auto x) { return x[0] * x[0] - x[1] * x[1]; }));
  CHECK(saddle.verdict == Verdict::Indefinite);
  CHECK(saddle.worst_eigenvalue == doctest::Approx(-2.0).epsilon(1e-8));
  CHECK(std::abs(saddle.witness(1)) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(saddle.witness(0)) <= 1e-8);

  PositivityReport affine =
      convexity_verdict(scalar_from(grid, [](auto x) { return 3.0 * x[0] - x[1]; }));
  CHECK(affine.verdict == Verdict::Semipositive);
  CHECK(std::abs(affine.worst_eigenvalue) <= 1e-10);
}

TEST_CASE("nakano_verdict") {
  GridSpec grid = square(-1.0, 1.0, 41, 2);
  PositivityReport ident = nakano_verdict(MatrixField::identity(grid));
  CHECK(ident.verdict == Verdict::Semipositive);
  CHECK(ident.worst_eigenvalue == 0.0);

  GridSpec g1 = square(-1.0, 1.0, 81, 1);
  PositivityReport gauss = nakano_verdict(
      metric_from_weight(scalar_from(g1, [](auto x) { return x[0] * x[0] + x[1] * x[1]; })));
  CHECK(gauss.verdict == Verdict::Semipositive);

  PositivityReport anti = nakano_verdict(
      metric_from_weight(scalar_from(g1, [](auto x) { return -(x[0] * x[0] + x[1] * x[1]); })));
  CHECK(anti.verdict == Verdict::Indefinite);
}

TEST_CASE("witness certifies the worst eigenvalue") {
  GridSpec grid = square(-1.0, 1.0, 41, 1);
  ScalarField phi = scalar_from(grid, [](auto x) {
    return x[0] * x[0] - 0.5 * x[1] * x[1] + 0.3 * x[0] * x[1];
  });
  MatrixField g = metric_from_weight(phi);
  PositivityReport rep = nakano_verdict(g);
  CHECK(rep.witness.norm() == doctest::Approx(1.0).epsilon(1e-12));

  CurvatureTensor theta = curvature_tensor(g);
  Eigen::MatrixXd gram = nakano_gram(g, theta, g.grid().flat(rep.worst_node));
  CHECK(std::abs(rep.witness.dot(gram * rep.witness) - rep.worst_eigenvalue) <=
        1e-10 * rep.scale);
}

TEST_CASE("verdict is invariant under axis reordering") {
  GridSpec grid = box({-1.0, -0.5}, {1.0, 0.5}, {41, 21}, 1);
  GridSpec swapped = box({-0.5, -1.0}, {0.5, 1.0}, {21, 41}, 1);
  auto phi_fn = [](double a, double b) { return a * a - 0.8 * b * b + 0.1 * a * b; };
  MatrixField g = metric_from_weight(
      scalar_from(grid, [&](auto x) { return phi_fn(x[0], x[1]); }));
  MatrixField gs = metric_from_weight(
      scalar_from(swapped, [&](auto x) { return phi_fn(x[1], x[0]); }));
  PositivityReport a = nakano_verdict(g), b = nakano_verdict(gs);
  CHECK(a.verdict == b.verdict);
  CHECK(a.worst_eigenvalue == doctest::Approx(b.worst_eigenvalue).epsilon(1e-10));
}

TEST_CASE("rank-1 consistency between the two verdicts") {
  GridSpec grid = square(-1.0, 1.0, 61, 1);
  Rng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    // random quadratic with eigenvalues clear of the tolerance band
    double l1 = rng.uniform(0.2, 2.0), l2 = rng.uniform(0.2, 2.0);
    const int kind = trial % 3;
    if (kind == 1) l2 = -l2;  // indefinite
    if (kind == 2) l2 = 0.0;  // semidefinite: axis-aligned, where the FD
                              // curvature error in the flat direction is zero
    const double ang = kind == 2 ? 0.0 : rng.uniform(0, 3.14);
    const double c = std::cos(ang), s = std::sin(ang);
    // A = R diag(l1,l2) R^T
    const double a11 = c * c * l1 + s * s * l2;
    const double a22 = s * s * l1 + c * c * l2;
    const double a12 = c * s * (l1 - l2);
    ScalarField phi = scalar_from(grid, [&](auto x) {
      return 0.5 * (a11 * x[0] * x[0] + 2 * a12 * x[0] * x[1] + a22 * x[1] * x[1]);
    });
    PositivityReport pc = convexity_verdict(phi);
    PositivityReport pn = nakano_verdict(metric_from_weight(phi));
    CAPTURE(trial);
    CHECK(pc.verdict == pn.verdict);
  }
}

TEST_CASE("threads do not change the report") {
  GridSpec grid = square(-1.0, 1.0, 51, 1);
  MatrixField g = metric_from_weight(scalar_from(grid, [](auto x) {
    return std::sin(x[0]) * 0.3 + x[1] * x[1];
  }));
  PositivityReport one = nakano_verdict(g, 1e-7, 1);
  PositivityReport four = nakano_verdict(g, 1e-7, 4);
  CHECK(one.verdict == four.verdict);
  CHECK(one.worst_node == four.worst_node);
  CHECK(one.worst_eigenvalue == four.worst_eigenvalue);
}

TEST_CASE("report serializes with all fields") {
  GridSpec grid = square(-1.0, 1.0, 21, 1);
  PositivityReport rep = convexity_verdict(
      scalar_from(grid, [](auto x) { return x[0] * x[0] - x[1] * x[1]; }));
  Json j = to_json(rep);
  for (const char* key : {"verdict", "worst_node", "worst_eigenvalue", "witness", "scale",
                          "tau", "worst_is_boundary", "interior_worst_eigenvalue",
                          "boundary_worst_eigenvalue"})
    CHECK(j.contains(key));
  CHECK(j["verdict"] == "indefinite");
}
