#include "nakano/diffops.hpp"

#include <cmath>

#include "nakano/parallel.hpp"

namespace nakano {

namespace {

// Core stencil pass: `arity` doubles per node, derivative along `axis`.
std::vector<double> partial_raw(const GridSpec& grid, std::span<const double> v,
                                std::size_t arity, std::size_t axis) {
  if (axis >= grid.dim()) throw AxisError(axis, grid.dim());
  const std::size_t stride = grid.stride(axis) * arity;
  const std::size_t pts = grid.points()[axis];
  const double inv2h = 1.0 / (2.0 * grid.spacing()[axis]);
  std::vector<double> out(v.size());
  for (std::size_t flat = 0; flat < grid.node_count(); ++flat) {
    const std::size_t ia = grid.axis_index(flat, axis);
    const std::size_t base = flat * arity;
    for (std::size_t c = 0; c < arity; ++c) {
      const std::size_t p = base + c;
      // One-sided stencils in difference form so constants cancel exactly.
      if (ia == 0)
        out[p] = (3.0 * (v[p + stride] - v[p]) + (v[p + stride] - v[p + 2 * stride])) * inv2h;
      else if (ia + 1 == pts)
        out[p] = (3.0 * (v[p] - v[p - stride]) - (v[p - stride] - v[p - 2 * stride])) * inv2h;
      else
        out[p] = (v[p + stride] - v[p - stride]) * inv2h;
    }
  }
  return out;
}

}  // namespace

ScalarField partial(const ScalarField& f, std::size_t axis) {
  return ScalarField(f.grid(), partial_raw(f.grid(), f.values(), 1, axis));
}

SectionField partial(const SectionField& f, std::size_t axis) {
  return SectionField(f.grid(), partial_raw(f.grid(), f.values(), f.grid().rank(), axis));
}

MatrixField partial(const MatrixField& f, std::size_t axis) {
  const std::size_t r = f.grid().rank();
  return MatrixField(f.grid(), partial_raw(f.grid(), f.values(), r * r, axis));
}

CurvatureTensor::CurvatureTensor(GridSpec grid, std::vector<double> blocks)
    : grid_(std::move(grid)), blocks_(std::move(blocks)) {
  const std::size_t n = grid_.dim(), r = grid_.rank();
  if (blocks_.size() != grid_.node_count() * n * n * r * r)
    throw ShapeError("curvature block count does not match grid");
  for (double b : blocks_)
    if (!std::isfinite(b)) throw NonFiniteError("curvature tensor contains a non-finite value");
}

double CurvatureTensor::max_abs() const {
  double m = 0.0;
  for (double b : blocks_) m = std::max(m, std::abs(b));
  return m;
}

HessianField::HessianField(GridSpec grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  const std::size_t n = grid_.dim();
  if (values_.size() != grid_.node_count() * n * n)
    throw ShapeError("hessian value count does not match grid");
  for (double v : values_)
    if (!std::isfinite(v)) throw NonFiniteError("hessian field contains a non-finite value");
}

ConstMatView HessianField::inverse_at(std::size_t flat) const {
  const auto n = static_cast<Eigen::Index>(grid_.dim());
  return ConstMatView(inverses_.data() + flat * grid_.dim() * grid_.dim(), n, n);
}

void HessianField::ensure_inverse(double tau_conv) {
  if (has_inverse()) return;
  const std::size_t n = grid_.dim();
  inverses_.resize(values_.size());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  for (std::size_t flat = 0; flat < grid_.node_count(); ++flat) {
    Eigen::MatrixXd h = at(flat);
    eig.compute(h);
    const double lmin = eig.eigenvalues().minCoeff();
    if (!(lmin > tau_conv)) {
      inverses_.clear();
      throw HessianNotPDError(grid_.unflat(flat), lmin);
    }
    Eigen::MatrixXd inv = eig.eigenvectors() *
                          eig.eigenvalues().cwiseInverse().asDiagonal() *
                          eig.eigenvectors().transpose();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        inverses_[(flat * n + i) * n + j] =
            inv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
}

double HessianField::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  double lmin = std::numeric_limits<double>::infinity();
  for (std::size_t flat = 0; flat < grid_.node_count(); ++flat) {
    eig.compute(Eigen::MatrixXd(at(flat)), Eigen::EigenvaluesOnly);
    lmin = std::min(lmin, eig.eigenvalues().minCoeff());
  }
  return lmin;
}

ScalarWeight make_scalar_weight(const ScalarField& psi) {
  return ScalarWeight{psi, hessian(psi)};
}

HessianField hessian(const ScalarField& psi) {
  const GridSpec& grid = psi.grid();
  const std::size_t n = grid.dim();
  std::vector<ScalarField> firsts;
  firsts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) firsts.push_back(partial(psi, i));
  std::vector<double> h(grid.node_count() * n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      ScalarField hij = partial(firsts[i], j);
      if (i == j) {
        for (std::size_t flat = 0; flat < grid.node_count(); ++flat)
          h[(flat * n + i) * n + i] = hij[flat];
      } else {
        // The two mixed orders agree up to rounding (the stencils commute);
        // store the average so the field is symmetric exactly.
        ScalarField hji = partial(firsts[j], i);
        for (std::size_t flat = 0; flat < grid.node_count(); ++flat) {
          const double v = 0.5 * (hij[flat] + hji[flat]);
          h[(flat * n + i) * n + j] = v;
          h[(flat * n + j) * n + i] = v;
        }
      }
    }
  }
  return HessianField(grid, std::move(h));
}

CurvatureTensor curvature_tensor(const MatrixField& g, int threads) {
  const GridSpec& grid = g.grid();
  const std::size_t n = grid.dim(), r = grid.rank(), N = grid.node_count();

  // First pass: A_j = g^{-1} dg/dx_j as a (generally asymmetric) matrix field.
  std::vector<MatrixField> dg;
  dg.reserve(n);
  for (std::size_t j = 0; j < n; ++j) dg.push_back(partial(g, j));
  std::vector<std::vector<double>> a(n, std::vector<double>(N * r * r));
  parallel_for(N, threads, [&](std::size_t begin, std::size_t end) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    for (std::size_t flat = begin; flat < end; ++flat) {
      Eigen::MatrixXd gm = g.at(flat);
      eig.compute(0.5 * (gm + gm.transpose()));
      const double lmin = eig.eigenvalues().minCoeff();
      if (!(lmin > 0.0)) throw NotPositiveDefiniteError(grid.unflat(flat), lmin);
      Eigen::MatrixXd ginv = eig.eigenvectors() *
                             eig.eigenvalues().cwiseInverse().asDiagonal() *
                             eig.eigenvectors().transpose();
      for (std::size_t j = 0; j < n; ++j) {
        Eigen::MatrixXd aj = ginv * dg[j].at(flat);
        for (std::size_t p = 0; p < r; ++p)
          for (std::size_t q = 0; q < r; ++q)
            a[j][(flat * r + p) * r + q] =
                aj(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
      }
    }
  });

  // Second pass: theta_jk = -d(A_j)/dx_k, elementwise.
  std::vector<double> blocks(N * n * n * r * r);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<double> dajk = partial_raw(grid, a[j], r * r, k);
      for (std::size_t flat = 0; flat < N; ++flat)
        for (std::size_t e = 0; e < r * r; ++e)
          blocks[((flat * n + j) * n + k) * r * r + e] = -dajk[flat * r * r + e];
    }
  }
  return CurvatureTensor(grid, std::move(blocks));
}

OneForm d0(const SectionField& u) {
  std::vector<SectionField> comps;
  comps.reserve(u.grid().dim());
  for (std::size_t i = 0; i < u.grid().dim(); ++i) comps.push_back(partial(u, i));
  return OneForm(u.grid(), std::move(comps));
}

TwoForm d1(const OneForm& alpha) {
  const GridSpec& grid = alpha.grid();
  const std::size_t n = grid.dim();
  std::vector<SectionField> comps;
  comps.reserve(TwoForm::pair_count(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      SectionField dj = partial(alpha.component(j), i);
      SectionField di = partial(alpha.component(i), j);
      std::vector<double> v(dj.values().size());
      for (std::size_t p = 0; p < v.size(); ++p) v[p] = dj.values()[p] - di.values()[p];
      comps.emplace_back(grid, std::move(v));
    }
  }
  return TwoForm(grid, std::move(comps));
}

SectionField d_star(const OneForm& alpha, const MatrixField& g) {
  const GridSpec& grid = alpha.grid();
  if (!(g.grid() == grid)) throw GridError("d_star: metric grid mismatch");
  const std::size_t n = grid.dim(), r = grid.rank(), N = grid.node_count();

  std::vector<MatrixField> dg;
  std::vector<SectionField> da;
  dg.reserve(n);
  da.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    dg.push_back(partial(g, i));
    da.push_back(partial(alpha.component(i), i));
  }

  std::vector<double> out(N * r);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  for (std::size_t flat = 0; flat < N; ++flat) {
    Eigen::MatrixXd gm = g.at(flat);
    eig.compute(0.5 * (gm + gm.transpose()));
    const double lmin = eig.eigenvalues().minCoeff();
    if (!(lmin > 0.0)) throw NotPositiveDefiniteError(grid.unflat(flat), lmin);
    Eigen::MatrixXd ginv = eig.eigenvectors() *
                           eig.eigenvalues().cwiseInverse().asDiagonal() *
                           eig.eigenvectors().transpose();
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(r));
    for (std::size_t i = 0; i < n; ++i)
      acc += ginv * (dg[i].at(flat) * alpha.component(i).at(flat)) +
             Eigen::VectorXd(da[i].at(flat));
    for (std::size_t c = 0; c < r; ++c)
      out[flat * r + c] = -acc(static_cast<Eigen::Index>(c));
  }
  return SectionField(grid, std::move(out));
}

Eigen::MatrixXd nakano_gram(const MatrixField& g, const CurvatureTensor& theta,
                            std::size_t flat) {
  const GridSpec& grid = g.grid();
  if (!(theta.grid() == grid))
    throw ShapeError("curvature tensor and metric live on different grids");
  const std::size_t n = grid.dim(), r = grid.rank();
  const auto nr = static_cast<Eigen::Index>(n * r);
  Eigen::MatrixXd m(nr, nr);
  Eigen::MatrixXd gm = g.at(flat);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j)
      m.block(static_cast<Eigen::Index>(k * r), static_cast<Eigen::Index>(j * r),
              static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r)) =
          gm * theta.block(flat, j, k);
  return 0.5 * (m + m.transpose());
}

}  // namespace nakano
