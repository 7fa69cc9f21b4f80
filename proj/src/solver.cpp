#include "nakano/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nakano {

namespace {

void check_support(const OneForm& f, std::size_t collar, const char* what) {
  const GridSpec& grid = f.grid();
  const double tol = 1e-12 * (1.0 + f.max_abs());
  for (std::size_t flat = 0; flat < grid.node_count(); ++flat) {
    if (!grid.in_collar(flat, collar)) continue;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (f.component(i).at(flat).cwiseAbs().maxCoeff() > tol)
        throw SupportError(std::string(what) +
                           ": input form is not zero on the boundary collar (node " +
                           index_to_string(grid.unflat(flat)) + ")");
    }
  }
}

// Trapezoidal staircase integral of f from the min corner, accumulating the
// axes in the given order. After step t the values are final on the
// sub-lattice where all later axes sit at index 0; the last step covers the
// whole grid.
std::vector<double> staircase(const OneForm& f, const std::vector<std::size_t>& order) {
  const GridSpec& grid = f.grid();
  const std::size_t n = grid.dim(), r = grid.rank(), N = grid.node_count();
  std::vector<double> u(N * r, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t a = order[t];
    const std::size_t stride = grid.stride(a);
    const double half_h = 0.5 * grid.spacing()[a];
    std::span<const double> fa = f.component(a).values();
    for (std::size_t flat = 0; flat < N; ++flat) {
      bool active = true;
      for (std::size_t s = t + 1; s < n && active; ++s)
        active = grid.axis_index(flat, order[s]) == 0;
      if (!active || grid.axis_index(flat, a) == 0) continue;
      const std::size_t prev = flat - stride;
      for (std::size_t c = 0; c < r; ++c)
        u[flat * r + c] = u[prev * r + c] + half_h * (fa[prev * r + c] + fa[flat * r + c]);
    }
  }
  return u;
}

}  // namespace

double closedness_residual(const OneForm& f) {
  TwoForm df = d1(f);
  const GridSpec& grid = f.grid();
  double res = 0.0;
  for (const auto& comp : df.components())
    for (std::size_t flat = 0; flat < grid.node_count(); ++flat) {
      if (grid.is_boundary(flat)) continue;
      res = std::max(res, comp.at(flat).cwiseAbs().maxCoeff());
    }
  return res;
}

SectionField solve_potential(const OneForm& f, double tau_closed) {
  const GridSpec& grid = f.grid();
  const std::size_t n = grid.dim();
  const double scale = 1.0 + f.max_abs();

  const double res = closedness_residual(f);
  if (res > tau_closed * scale) throw ClosednessError(res);

  std::vector<std::size_t> fwd(n), rev(n);
  std::iota(fwd.begin(), fwd.end(), std::size_t{0});
  rev = fwd;
  std::reverse(rev.begin(), rev.end());

  std::vector<double> u = staircase(f, fwd);
  if (n > 1) {
    const std::vector<double> u_rev = staircase(f, rev);
    double mismatch = 0.0;
    for (std::size_t p = 0; p < u.size(); ++p)
      mismatch = std::max(mismatch, std::abs(u[p] - u_rev[p]));
    // Discretely the two staircase orders agree only up to the trapezoid/
    // central-difference consistency gap, which scales like h^2 d f_a/dx_a.
    double fd_allowance = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      const double h = grid.spacing()[a];
      fd_allowance += 0.5 * h * h * partial(f.component(a), a).max_abs();
    }
    const double tol = tau_closed * scale + fd_allowance;
    if (mismatch > tol) throw PathMismatchError(mismatch, tol);
  }
  return SectionField(grid, std::move(u));
}

SectionField minimal_solution(const SectionField& u, const MatrixField& g,
                              const ScalarField& psi, const QuadratureRule& rule) {
  const GridSpec& grid = u.grid();
  if (!(g.grid() == grid) || !(psi.grid() == grid) || !(rule.grid() == grid))
    throw GridError("minimal_solution: grid mismatch");
  const std::size_t r = grid.rank(), N = grid.node_count();
  const auto ri = static_cast<Eigen::Index>(r);

  // Entrywise weighted sums, each via the deterministic pairwise reduction.
  std::vector<std::vector<double>> mass_terms(r * r, std::vector<double>(N));
  std::vector<std::vector<double>> rhs_terms(r, std::vector<double>(N));
  for (std::size_t flat = 0; flat < N; ++flat) {
    const double we = rule.weight(flat) * std::exp(-psi[flat]);
    ConstMatView gm = g.at(flat);
    Eigen::VectorXd gu = gm * u.at(flat);
    for (std::size_t i = 0; i < r; ++i) {
      rhs_terms[i][flat] = we * gu(static_cast<Eigen::Index>(i));
      for (std::size_t j = 0; j < r; ++j)
        mass_terms[i * r + j][flat] =
            we * gm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  Eigen::MatrixXd mass(ri, ri);
  Eigen::VectorXd rhs(ri);
  for (std::size_t i = 0; i < r; ++i) {
    rhs(static_cast<Eigen::Index>(i)) = pairwise_sum(rhs_terms[i]);
    for (std::size_t j = 0; j < r; ++j)
      mass(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          pairwise_sum(mass_terms[i * r + j]);
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (mass + mass.transpose()));
  const double lmax = eig.eigenvalues().cwiseAbs().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  if (!(lmin > 1e-14 * std::max(lmax, 1e-300)))
    throw MassSingularError("mass matrix int g e^{-psi} is numerically singular");
  Eigen::VectorXd shift = eig.eigenvectors() *
                          eig.eigenvalues().cwiseInverse().asDiagonal() *
                          eig.eigenvectors().transpose() * rhs;

  std::vector<double> out(N * r);
  for (std::size_t flat = 0; flat < N; ++flat)
    for (std::size_t c = 0; c < r; ++c)
      out[flat * r + c] = u.values()[flat * r + c] - shift(static_cast<Eigen::Index>(c));
  return SectionField(grid, std::move(out));
}

EstimateReport check_optimal_estimate(const MatrixField& g, const ScalarWeight& psi,
                                      const OneForm& f, const QuadratureRule& rule,
                                      const EstimateOptions& opts) {
  const GridSpec& grid = f.grid();
  if (!(g.grid() == grid) || !(psi.field.grid() == grid) || !(rule.grid() == grid))
    throw GridError("check_optimal_estimate: grid mismatch");

  check_support(f, opts.collar, "check_optimal_estimate");

  EstimateReport report;
  report.eps_base = opts.eps_rep;
  report.closedness_residual = closedness_residual(f);

  SectionField u0 = solve_potential(f, opts.tau_closed);
  SectionField u = minimal_solution(u0, g, psi.field, rule);
  report.lhs = inner_sections(u, u, g, psi.field, rule);
  report.rhs = hess_inv_pairing(f, psi.hessian, g, psi.field, rule, opts.tau_conv);

  std::vector<double> collar_terms;
  collar_terms.reserve(grid.node_count());
  for (std::size_t flat = 0; flat < grid.node_count(); ++flat)
    if (grid.in_collar(flat, opts.collar))
      collar_terms.push_back(rule.weight(flat) * std::exp(-psi.field[flat]));
  report.boundary_mass = pairwise_sum(collar_terms);

  report.eps_rep = opts.eps_rep + (report.rhs > 0.0 ? report.boundary_mass / report.rhs : 0.0);
  report.holds = report.lhs <= report.rhs * (1.0 + report.eps_rep);
  return report;
}

EstimateReport check_optimal_estimate(const MatrixField& g, const ScalarField& psi,
                                      const OneForm& f, const QuadratureRule& rule,
                                      const EstimateOptions& opts) {
  return check_optimal_estimate(g, make_scalar_weight(psi), f, rule, opts);
}

BochnerRecord bochner_residual(const OneForm& alpha, const MatrixField& g,
                               const QuadratureRule& rule, std::size_t collar) {
  const GridSpec& grid = alpha.grid();
  if (!(g.grid() == grid) || !(rule.grid() == grid))
    throw GridError("bochner_residual: grid mismatch");
  check_support(alpha, collar, "bochner_residual");

  const std::size_t n = grid.dim();

  SectionField ds = d_star(alpha, g);
  double lhs = inner_sections(ds, ds, g, rule);
  TwoForm da = d1(alpha);
  for (const auto& comp : da.components()) lhs += inner_sections(comp, comp, g, rule);

  CurvatureTensor theta = curvature_tensor(g);
  std::vector<double> curv_terms(grid.node_count());
  for (std::size_t flat = 0; flat < grid.node_count(); ++flat) {
    double s = 0.0;
    ConstMatView gm = g.at(flat);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        s += alpha.component(j).at(flat).dot(
            gm * (theta.block(flat, i, j) * alpha.component(i).at(flat)));
    curv_terms[flat] = rule.weight(flat) * s;
  }
  double rhs = pairwise_sum(curv_terms);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      SectionField dai = partial(alpha.component(i), j);
      rhs += inner_sections(dai, dai, g, rule);
    }

  BochnerRecord rec;
  rec.lhs = lhs;
  rec.rhs = rhs;
  rec.residual = std::abs(lhs - rhs);
  const double denom = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  rec.relative = rec.residual / denom;
  return rec;
}

CauchySchwarzRecord cauchy_schwarz_check(const OneForm& f, const OneForm& alpha,
                                         const MatrixField& g,
                                         const CurvatureTensor& theta,
                                         const QuadratureRule& rule, double eps_rep) {
  const GridSpec& grid = f.grid();
  if (!(alpha.grid() == grid) || !(g.grid() == grid) || !(theta.grid() == grid) ||
      !(rule.grid() == grid))
    throw GridError("cauchy_schwarz_check: grid mismatch");
  const std::size_t n = grid.dim(), r = grid.rank(), N = grid.node_count();
  const auto nr = static_cast<Eigen::Index>(n * r);

  std::vector<double> a_terms(N), b_terms(N), c_terms(N);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  Eigen::VectorXd fs(nr), as(nr), gf(nr);
  for (std::size_t flat = 0; flat < N; ++flat) {
    ConstMatView gm = g.at(flat);
    for (std::size_t i = 0; i < n; ++i) {
      fs.segment(static_cast<Eigen::Index>(i * r), static_cast<Eigen::Index>(r)) =
          f.component(i).at(flat);
      as.segment(static_cast<Eigen::Index>(i * r), static_cast<Eigen::Index>(r)) =
          alpha.component(i).at(flat);
      gf.segment(static_cast<Eigen::Index>(i * r), static_cast<Eigen::Index>(r)) =
          gm * f.component(i).at(flat);
    }
    Eigen::MatrixXd m = nakano_gram(g, theta, flat);
    a_terms[flat] = rule.weight(flat) * gf.dot(as);
    c_terms[flat] = rule.weight(flat) * as.dot(m * as);
    if (gf.cwiseAbs().maxCoeff() == 0.0 && fs.cwiseAbs().maxCoeff() == 0.0) {
      b_terms[flat] = 0.0;
      continue;
    }
    eig.compute(m);
    const double lmin = eig.eigenvalues().minCoeff();
    if (!(lmin > 0.0)) throw GramNotPDError(grid.unflat(flat), lmin);
    Eigen::VectorXd minv_gf = eig.eigenvectors() *
                              eig.eigenvalues().cwiseInverse().asDiagonal() *
                              eig.eigenvectors().transpose() * gf;
    b_terms[flat] = rule.weight(flat) * gf.dot(minv_gf);
  }

  CauchySchwarzRecord rec;
  const double a = pairwise_sum(a_terms);
  rec.lhs = a * a;
  rec.rhs = pairwise_sum(b_terms) * pairwise_sum(c_terms);
  rec.holds = rec.lhs <= rec.rhs * (1.0 + eps_rep);
  return rec;
}

}  // namespace nakano
