#pragma once

#include <Eigen/Dense>
#include <optional>

#include "nakano/grid.hpp"

namespace nakano {

/// Grid-indexed n x n array of r x r curvature blocks theta_jk, computed
/// elementwise as theta_jk = -d/dx_k ( g^{-1} dg/dx_j ).
class CurvatureTensor {
public:
  CurvatureTensor(GridSpec grid, std::vector<double> blocks);

  const GridSpec& grid() const { return grid_; }
  ConstMatView block(std::size_t flat, std::size_t j, std::size_t k) const {
    const std::size_t n = grid_.dim(), r = grid_.rank();
    const auto ri = static_cast<Eigen::Index>(r);
    return ConstMatView(blocks_.data() + ((flat * n + j) * n + k) * r * r, ri, ri);
  }
  std::span<const double> blocks() const { return blocks_; }
  double max_abs() const;

private:
  GridSpec grid_;
  std::vector<double> blocks_;
};

/// One n x n symmetric matrix per node, optionally with per-node inverses.
class HessianField {
public:
  HessianField(GridSpec grid, std::vector<double> values);

  const GridSpec& grid() const { return grid_; }
  ConstMatView at(std::size_t flat) const {
    const auto n = static_cast<Eigen::Index>(grid_.dim());
    return ConstMatView(values_.data() + flat * grid_.dim() * grid_.dim(), n, n);
  }
  bool has_inverse() const { return !inverses_.empty(); }
  ConstMatView inverse_at(std::size_t flat) const;

  /// Computes per-node inverses; nodes whose smallest eigenvalue is at or
  /// below tau_conv raise HessianNotPD.
  void ensure_inverse(double tau_conv);
  double min_eigenvalue() const;

private:
  GridSpec grid_;
  std::vector<double> values_;
  std::vector<double> inverses_;
};

/// C^2 scalar weight bundled with its finite-difference Hessian.
struct ScalarWeight {
  ScalarField field;
  HessianField hessian;
};

ScalarWeight make_scalar_weight(const ScalarField& psi);

/// First partial derivative along `axis`: three-point central stencils at
/// interior nodes, second-order one-sided stencils at the two boundary
/// layers. Exact on fields affine in the axis coordinate.
ScalarField partial(const ScalarField& f, std::size_t axis);
SectionField partial(const SectionField& f, std::size_t axis);
MatrixField partial(const MatrixField& f, std::size_t axis);

/// H_ij = partial(partial(psi, i), j), symmetrized as (H + H^T)/2.
HessianField hessian(const ScalarField& psi);

CurvatureTensor curvature_tensor(const MatrixField& g, int threads = 1);

/// Exterior differential on sections: (du)_i = partial(u, i).
OneForm d0(const SectionField& u);

/// Exterior differential on 1-forms: (d alpha)_{ij} = partial(alpha_j, i) -
/// partial(alpha_i, j) for i < j.
TwoForm d1(const OneForm& alpha);

/// Formal adjoint of d with respect to the metric g and Lebesgue measure:
/// d* alpha = -sum_i ( g^{-1} (dg/dx_i) alpha_i + d(alpha_i)/dx_i ).
SectionField d_star(const OneForm& alpha, const MatrixField& g);

/// Symmetrized (n r) x (n r) Gram matrix of the Nakano form at one node:
/// block (k, j) is g * theta_jk, so that u^T M u = sum_{j,k}
/// <theta_jk u_j, u_k>_g for stacked u = (u_1, ..., u_n). Only the symmetric
/// part enters the quadratic form, and positivity verdicts use exactly it.
Eigen::MatrixXd nakano_gram(const MatrixField& g, const CurvatureTensor& theta,
                            std::size_t flat);

}  // namespace nakano
