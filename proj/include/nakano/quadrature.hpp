#pragma once

#include "nakano/diffops.hpp"
#include "nakano/grid.hpp"

namespace nakano {

/// Tensor-product trapezoidal weights: per-axis h * (1/2, 1, ..., 1, 1/2),
/// multiplied across axes. All weights are positive and sum to the box
/// volume, which the positivity properties of the inner products rely on.
class QuadratureRule {
public:
  explicit QuadratureRule(const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }
  double weight(std::size_t flat) const { return weights_[flat]; }
  std::span<const double> weights() const { return weights_; }

private:
  GridSpec grid_;
  std::vector<double> weights_;
};

/// Deterministic pairwise (tree) reduction; the summation order is fixed by
/// the data layout, so results are bit-for-bit reproducible.
double pairwise_sum(std::span<const double> values);

double integrate(const ScalarField& f, const QuadratureRule& rule);

/// int v^T g u e^{-psi} dx.
double inner_sections(const SectionField& u, const SectionField& v,
                      const MatrixField& g, const ScalarField& psi,
                      const QuadratureRule& rule);

/// Unweighted variant (psi = 0).
double inner_sections(const SectionField& u, const SectionField& v,
                      const MatrixField& g, const QuadratureRule& rule);

/// sum_i inner_sections(alpha_i, beta_i, ...).
double inner_forms(const OneForm& alpha, const OneForm& beta, const MatrixField& g,
                   const ScalarField& psi, const QuadratureRule& rule);
double inner_forms(const OneForm& alpha, const OneForm& beta, const MatrixField& g,
                   const QuadratureRule& rule);

/// int sum_{i,j} psi^{ij} <f_i, f_j>_g e^{-psi} dx, with psi^{ij} the
/// per-node inverse of the Hessian H. Every node must satisfy
/// lambda_min(H) > tau_conv (strict convexity).
double hess_inv_pairing(const OneForm& f, const HessianField& hess,
                        const MatrixField& g, const ScalarField& psi,
                        const QuadratureRule& rule, double tau_conv = 1e-10);

}  // namespace nakano
