#include <doctest.h>

#include <cmath>

#include "nakano/constructions.hpp"
#include "nakano/diffops.hpp"
#include "nakano/quadrature.hpp"
#include "test_support.hpp"

using namespace nakano;
using namespace nakano::testing;

TEST_CASE("partial: exactness and convergence") {
  GridSpec grid = box({0.0}, {1.0}, {11});
  ScalarField c = scalar_from(grid, [](auto) { return 4.2; });
  CHECK(partial(c, 0).max_abs() == 0.0);

  ScalarField lin = scalar_from(grid, [](auto x) { return x[0]; });
  ScalarField dlin = partial(lin, 0);
  for (std::size_t i = 0; i < grid.node_count(); ++i)
    CHECK(dlin[i] == doctest::Approx(1.0).epsilon(1e-13));

  // sin(x1) at h = 1e-2 against the closed-form cosine samples
  GridSpec fine = box({0.0}, {2.0}, {201});
  ScalarField s = scalar_from(fine, [](auto x) { return std::sin(x[0]); });
  ScalarField ds = partial(s, 0);
  double err = 0.0;
  for (std::size_t i = 0; i < fine.node_count(); ++i)
    err = std::max(err, std::abs(ds[i] - std::cos(fine.node_coords(i)[0])));
  CHECK(err <= 1e-3);

  CHECK_THROWS_AS(partial(c, 1), AxisError);
}

TEST_CASE("hessian") {
  // psi_s with s = 3 has Hessian 6I at every interior node, exactly
  GridSpec grid = square(-1.0, 1.0, 21);
  ScalarField psi3 = scalar_from(grid, [](auto x) {
    return 3.0 * (x[0] * x[0] + x[1] * x[1] - 0.25);
  });
  HessianField h = hessian(psi3);
  for (std::size_t flat = 0; flat < grid.node_count(); ++flat) {
    if (grid.is_boundary(flat)) continue;
    CHECK((h.at(flat) - 6.0 * Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <=
          1e-12);
  }

  ScalarField affine = scalar_from(grid, [](auto x) { return 2 * x[0] - x[1] + 1; });
  HessianField ha = hessian(affine);
  for (std::size_t flat = 0; flat < grid.node_count(); ++flat)
    CHECK(ha.at(flat).cwiseAbs().maxCoeff() <= 1e-12);

  // x1^4: second derivative 12 x1^2 = 12 at x1 = 1 within 1e-2
  GridSpec g1 = box({0.0}, {2.0}, {201});
  ScalarField quart = scalar_from(g1, [](auto x) { return std::pow(x[0], 4); });
  HessianField hq = hessian(quart);
  CHECK(hq.at(100)(0, 0) == doctest::Approx(12.0).epsilon(1e-2 / 12.0));

  // inverse invariant: H * H^{-1} = I within 1e-8 relative
  HessianField hpd = hessian(psi3);
  hpd.ensure_inverse(1e-10);
  for (std::size_t flat = 0; flat < grid.node_count(); flat += 7) {
    Eigen::MatrixXd prod = Eigen::MatrixXd(hpd.at(flat)) * hpd.inverse_at(flat);
    CHECK((prod - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("curvature_tensor") {
  // constant identity metric: zero curvature exactly
  GridSpec grid = square(-1.0, 1.0, 11, 2);
  CurvatureTensor t0 = curvature_tensor(MatrixField::identity(grid));
  CHECK(t0.max_abs() == 0.0);

  // r=1, g = e^{-phi}, phi = x1^2 + 3 x2^2: theta == Hess phi
  GridSpec g2 = square(-1.0, 1.0, 201);
  ScalarField phi = scalar_from(g2, [](auto x) {
    return x[0] * x[0] + 3.0 * x[1] * x[1];
  });
  CurvatureTensor th = curvature_tensor(metric_from_weight(phi));
  double err = 0.0;
  const double expected[2][2] = {{2.0, 0.0}, {0.0, 6.0}};
  for (std::size_t flat = 0; flat < g2.node_count(); ++flat) {
    if (g2.in_collar(flat, 2)) continue;
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t k = 0; k < 2; ++k)
        err = std::max(err, std::abs(th.block(flat, j, k)(0, 0) - expected[j][k]));
  }
  CHECK(err <= 1e-2);

  // n=1, r=2, g = diag(e^x, e^{2x}): g^{-1} g' is constant, so theta vanishes
  GridSpec g3 = box({0.0}, {1.0}, {41}, 2);
  MatrixField diag = matrix_from(g3, [](auto x) {
    Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
    m(0, 0) = std::exp(x[0]);
    m(1, 1) = std::exp(2.0 * x[0]);
    return m;
  });
  CurvatureTensor td = curvature_tensor(diag);
  double inner_err = 0.0;
  for (std::size_t flat = 0; flat < g3.node_count(); ++flat) {
    if (g3.in_collar(flat, 2)) continue;
    inner_err = std::max(inner_err, td.block(flat, 0, 0).cwiseAbs().maxCoeff());
  }
  CHECK(inner_err <= 1e-12);

  MatrixField singular = matrix_from(g3, [](auto x) {
    Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
    m(0, 0) = x[0];  // hits zero at the left edge
    m(1, 1) = 1.0;
    return m;
  });
  CHECK_THROWS_AS(curvature_tensor(singular), NotPositiveDefiniteError);
}

TEST_CASE("curvature agrees with the expanded product rule") {
  // Independent oracle: -d_k(g^{-1} d_j g) expands to
  // g^{-1}(d_k g) g^{-1}(d_j g) - g^{-1} d_k d_j g, assembled here from its
  // own finite-difference passes. The two routes differ by the discrete
  // product-rule gap, O(h^2) away from the boundary.
  GridSpec grid = square(-1.0, 1.0, 81, 2);
  MatrixField g = matrix_from(grid, [](auto x) {
    Eigen::Matrix2d m;
    m << 2.0 + std::exp(-x[0] * x[0]), 0.3 * std::sin(x[0] + x[1]),
        0.3 * std::sin(x[0] + x[1]), 1.5 + 0.2 * x[1] * x[1];
    return m;
  });
  CurvatureTensor theta = curvature_tensor(g);

  std::vector<MatrixField> dg = {partial(g, 0), partial(g, 1)};
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig;
  double err = 0.0;
  for (std::size_t j = 0; j < 2; ++j) {
    std::vector<MatrixField> ddg = {partial(dg[j], 0), partial(dg[j], 1)};
    for (std::size_t k = 0; k < 2; ++k) {
      for (std::size_t flat = 0; flat < grid.node_count(); ++flat) {
        if (grid.in_collar(flat, 2)) continue;
        eig.compute(Eigen::Matrix2d(g.at(flat)));
        Eigen::Matrix2d ginv = eig.eigenvectors() *
                               eig.eigenvalues().cwiseInverse().asDiagonal() *
                               eig.eigenvectors().transpose();
        Eigen::Matrix2d expanded = ginv * Eigen::Matrix2d(dg[k].at(flat)) * ginv *
                                       Eigen::Matrix2d(dg[j].at(flat)) -
                                   ginv * Eigen::Matrix2d(ddg[k].at(flat));
        err = std::max(err,
                       (expanded - Eigen::Matrix2d(theta.block(flat, j, k))).cwiseAbs().maxCoeff());
      }
    }
  }
  CHECK(err <= 5e-3);
}

TEST_CASE("curvature matches the scalar Hessian at order 2") {
  auto run = [](std::size_t pts) {
    GridSpec grid = square(-1.0, 1.0, pts);
    ScalarField phi = scalar_from(grid, [](auto x) {
      return 0.6 * x[0] * x[0] + 0.4 * x[1] * x[1] + 0.3 * x[0] * x[1] +
             0.05 * std::sin(2.0 * x[0]) * std::cos(x[1]);
    });
    CurvatureTensor th = curvature_tensor(metric_from_weight(phi));
    HessianField hs = hessian(phi);
    double err = 0.0;
    for (std::size_t flat = 0; flat < grid.node_count(); ++flat) {
      if (grid.in_collar(flat, 2)) continue;
      for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t k = 0; k < 2; ++k)
          err = std::max(err, std::abs(th.block(flat, j, k)(0, 0) -
                                       hs.at(flat)(static_cast<Eigen::Index>(j),
                                                   static_cast<Eigen::Index>(k))));
    }
    return err;
  };
  const double e1 = run(51), e2 = run(101);
  CHECK(e1 / e2 >= 3.0);
}

TEST_CASE("d0 and d1") {
  GridSpec grid = square(-1.0, 1.0, 21, 2);
  SectionField cu = section_from(grid, [](auto) { return Eigen::Vector2d(1.0, -2.0); });
  OneForm dcu = d0(cu);
  CHECK(dcu.max_abs() == 0.0);

  SectionField ux = section_from(grid, [](auto x) { return Eigen::Vector2d(x[0], 0); });
  OneForm dux = d0(ux);
  for (std::size_t flat = 0; flat < grid.node_count(); ++flat) {
    CHECK(dux.component(0).at(flat)(0) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(dux.component(0).at(flat)(1) == 0.0);
    CHECK(dux.component(1).at(flat).cwiseAbs().maxCoeff() <= 1e-13);
  }

  // bilinear potential: exact on interior nodes
  SectionField uxy = section_from(grid, [](auto x) {
    return Eigen::Vector2d(x[0] * x[1], 0);
  });
  OneForm duxy = d0(uxy);
  for (std::size_t flat = 0; flat < grid.node_count(); ++flat) {
    if (grid.is_boundary(flat)) continue;
    auto x = grid.node_coords(flat);
    CHECK(duxy.component(0).at(flat)(0) == doctest::Approx(x[1]).epsilon(1e-12));
    CHECK(duxy.component(1).at(flat)(0) == doctest::Approx(x[0]).epsilon(1e-12));
  }

  // rotation form: (d alpha)_12 = 2 exactly
  GridSpec g1 = square(-1.0, 1.0, 21, 1);
  OneForm rot = oneform_from(g1, {[](auto x) { return Eigen::VectorXd::Constant(1, -x[1]); },
                                  [](auto x) { return Eigen::VectorXd::Constant(1, x[0]); }});
  TwoForm drot = d1(rot);
  for (std::size_t flat = 0; flat < g1.node_count(); ++flat)
    CHECK(drot.component(0, 1).at(flat)(0) == doctest::Approx(2.0).epsilon(1e-13));

  OneForm zero(g1, {SectionField::zero(g1), SectionField::zero(g1)});
  CHECK(d1(zero).max_abs() == 0.0);
}

TEST_CASE("discrete Schwarz symmetry: d1 after d0 vanishes") {
  GridSpec grid = square(-1.0, 1.0, 33, 2);
  Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const double a = rng.uniform(0.5, 2.0), b = rng.uniform(-1.0, 1.0);
    SectionField u = section_from(grid, [&](auto x) {
      return Eigen::Vector2d(std::sin(a * x[0] + b * x[1]),
                             std::exp(0.3 * x[0] * x[1]));
    });
    TwoForm ddu = d1(d0(u));
    const double scale = 1.0 + u.max_abs();
    CHECK(ddu.max_abs() <= 1e-10 * scale);
  }
}

TEST_CASE("d_star") {
  // g = I, alpha = x1 e1 dx1: d* alpha = -e1 exactly
  GridSpec grid = square(-1.0, 1.0, 17, 2);
  OneForm alpha = oneform_from(grid, {[](auto x) { return Eigen::Vector2d(x[0], 0); },
                                      [](auto) { return Eigen::Vector2d::Zero().eval(); }});
  SectionField ds = d_star(alpha, MatrixField::identity(grid));
  for (std::size_t flat = 0; flat < grid.node_count(); ++flat) {
    CHECK(ds.at(flat)(0) == doctest::Approx(-1.0).epsilon(1e-13));
    CHECK(std::abs(ds.at(flat)(1)) <= 1e-13);
  }

  OneForm zero(grid, {SectionField::zero(grid), SectionField::zero(grid)});
  CHECK(d_star(zero, MatrixField::identity(grid)).max_abs() == 0.0);

  // r=1: d* against the weighted divergence delta_phi on smooth random data
  GridSpec g1 = square(-1.0, 1.0, 101, 1);
  Rng rng(11);
  for (int trial = 0; trial < 3; ++trial) {
    const double w0 = rng.uniform(0.5, 1.5), w1 = rng.uniform(0.5, 1.5);
    ScalarField phi = scalar_from(g1, [&](auto x) {
      return w0 * x[0] * x[0] + w1 * x[1] * x[1] + 0.2 * x[0] * x[1];
    });
    OneForm a = oneform_from(
        g1, {[&](auto x) { return Eigen::VectorXd::Constant(1, std::sin(w0 + x[0] + x[1])); },
             [&](auto x) { return Eigen::VectorXd::Constant(1, std::cos(w1 * x[0])); }});
    SectionField lhs = d_star(a, metric_from_weight(phi));

    // delta_phi alpha = -sum_i (d alpha_i/dx_i - phi_i alpha_i)
    std::vector<ScalarField> dphi = {partial(phi, 0), partial(phi, 1)};
    std::vector<SectionField> da = {partial(a.component(0), 0), partial(a.component(1), 1)};
    double err = 0.0;
    for (std::size_t flat = 0; flat < g1.node_count(); ++flat) {
      if (g1.in_collar(flat, 2)) continue;
      const double expect = -(da[0].at(flat)(0) - dphi[0][flat] * a.component(0).at(flat)(0) +
                              da[1].at(flat)(0) - dphi[1][flat] * a.component(1).at(flat)(0));
      err = std::max(err, std::abs(lhs.at(flat)(0) - expect));
    }
    CHECK(err <= 2e-3);  // O(h^2) gap between g^{-1} dg and -dphi
  }
}

TEST_CASE("adjointness of d0 and d_star under refinement") {
  auto residual = [](std::size_t pts) {
    GridSpec grid = square(-1.0, 1.0, pts, 1);
    ScalarField chi = plateau_cutoff({0.0, 0.0}, 0.85, grid);
    OneForm alpha = oneform_from(
        grid, {[&](auto x) { return Eigen::VectorXd::Constant(1, std::sin(1 + x[0] - 0.4 * x[1])); },
               [&](auto x) { return Eigen::VectorXd::Constant(1, std::cos(0.7 * x[0] + x[1])); }});
    // cut off so the form vanishes on a 2-node collar
    std::vector<SectionField> cut;
    for (std::size_t i = 0; i < 2; ++i) {
      std::vector<double> v(grid.node_count());
      for (std::size_t flat = 0; flat < grid.node_count(); ++flat)
        v[flat] = alpha.component(i).at(flat)(0) * chi[flat];
      cut.emplace_back(grid, std::move(v));
    }
    OneForm ac(grid, std::move(cut));
    SectionField u = section_from(grid, [](auto x) {
      return Eigen::VectorXd::Constant(1, std::exp(0.3 * x[0]) * std::cos(0.5 * x[1]));
    });
    ScalarField phi = scalar_from(grid, [](auto x) {
      return 0.6 * x[0] * x[0] + 0.4 * x[1] * x[1] + 0.2 * x[0] * x[1];
    });
    MatrixField g = metric_from_weight(phi);
    QuadratureRule rule(grid);
    const double a = inner_forms(d0(u), ac, g, rule);
    const double b = inner_sections(u, d_star(ac, g), g, rule);
    return std::abs(a - b);
  };
  const double r1 = residual(41), r2 = residual(81), r3 = residual(161);
  CHECK(r1 / r2 >= 3.0);
  CHECK(r2 / r3 >= 3.0);
}

TEST_CASE("nakano_gram") {
  GridSpec grid = square(-1.0, 1.0, 11, 2);
  MatrixField ident = MatrixField::identity(grid);
  CurvatureTensor t0 = curvature_tensor(ident);
  CHECK(nakano_gram(ident, t0, 60).cwiseAbs().maxCoeff() == 0.0);

  // r=1, phi = x1^2 - x2^2: Gram ~ e^{-phi} diag(2, -2), indefinite everywhere
  GridSpec g1 = square(-1.0, 1.0, 101, 1);
  ScalarField phi = scalar_from(g1, [](auto x) { return x[0] * x[0] - x[1] * x[1]; });
  MatrixField g = metric_from_weight(phi);
  CurvatureTensor th = curvature_tensor(g);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  for (std::size_t flat = 0; flat < g1.node_count(); flat += 97) {
    if (g1.in_collar(flat, 2)) continue;
    const double w = std::exp(-phi[flat]);
    Eigen::MatrixXd m = nakano_gram(g, th, flat);
    CHECK(m(0, 0) == doctest::Approx(2.0 * w).epsilon(5e-3));
    CHECK(m(1, 1) == doctest::Approx(-2.0 * w).epsilon(5e-3));
    eig.compute(m, Eigen::EigenvaluesOnly);
    CHECK(eig.eigenvalues().minCoeff() < 0.0);
  }

  // quadratic-form identity against the double sum, on random stacked vectors
  GridSpec g2 = square(-1.0, 1.0, 21, 2);
  MatrixField gm = matrix_from(g2, [](auto x) {
    Eigen::Matrix2d m;
    m << 2.0 + x[0] * x[0], 0.3 * x[1], 0.3 * x[1], 1.5;
    return m;
  });
  CurvatureTensor t2 = curvature_tensor(gm);
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t flat = static_cast<std::size_t>(rng.integer(0, 440));
    Eigen::VectorXd u(4);
    for (int i = 0; i < 4; ++i) u(i) = rng.uniform(-1.0, 1.0);
    Eigen::MatrixXd m = nakano_gram(gm, t2, flat);
    double direct = 0.0;
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t k = 0; k < 2; ++k)
        direct += (gm.at(flat) * (t2.block(flat, j, k) * u.segment(2 * j, 2)))
                      .dot(u.segment(2 * k, 2));
    CHECK(u.dot(m * u) == doctest::Approx(direct).epsilon(1e-12));
  }

  // convex weight: positive semidefinite Gram
  ScalarField conv = scalar_from(g1, [](auto x) { return x[0] * x[0] + x[1] * x[1]; });
  MatrixField gc = metric_from_weight(conv);
  CurvatureTensor tc = curvature_tensor(gc);
  for (std::size_t flat = 0; flat < g1.node_count(); flat += 101) {
    if (g1.in_collar(flat, 2)) continue;
    eig.compute(nakano_gram(gc, tc, flat), Eigen::EigenvaluesOnly);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-6);
  }
}
