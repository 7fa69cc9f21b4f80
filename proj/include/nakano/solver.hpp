#pragma once

#include "nakano/diffops.hpp"
#include "nakano/grid.hpp"
#include "nakano/quadrature.hpp"

namespace nakano {

/// The two sides of the optimal d-L2 estimate together with the diagnostics
/// that bound how far the truncated-box computation is from the statement on
/// R^n. `eps_rep` is the tolerance actually used in the comparison:
/// the base tolerance plus boundary_mass/rhs.
struct EstimateReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  double closedness_residual = 0.0;
  double boundary_mass = 0.0;
  double eps_rep = 0.0;
  double eps_base = 0.0;
};

struct BochnerRecord {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double relative = 0.0;
};

struct CauchySchwarzRecord {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

struct EstimateOptions {
  double eps_rep = 1e-6;
  double tau_conv = 1e-10;
  double tau_closed = 1e-8;
  std::size_t collar = 2;
};

/// Maximum-entry residual of d1(f) over interior nodes.
double closedness_residual(const OneForm& f);

/// Solves du = f on the box by trapezoidal line integration along the
/// axis-ordered staircase path from the min corner. Requires f to be
/// discretely d-closed: interior d1 residual within tau_closed*(1+max|f|).
/// A cross-check integrates along the reversed axis order; the two paths
/// must agree within the closedness tolerance plus the O(h^2) discretization
/// allowance 1/2 * sum_a h_a^2 * max|d f_a / dx_a|.
SectionField solve_potential(const OneForm& f, double tau_closed = 1e-8);

/// Subtracts the weighted mean c* = (int g e^{-psi})^{-1} (int g u e^{-psi});
/// the result is orthogonal to all constant sections in <<.,.>>_{g,psi} and
/// is the minimal-norm solution among u + const.
SectionField minimal_solution(const SectionField& u, const MatrixField& g,
                              const ScalarField& psi, const QuadratureRule& rule);

/// Runs the full pipeline: u = minimal_solution(solve_potential(f)), then
/// compares int <u,u>_g e^{-psi} against int <(Hess psi)^{-1} f, f>_g e^{-psi}.
EstimateReport check_optimal_estimate(const MatrixField& g, const ScalarWeight& psi,
                                      const OneForm& f, const QuadratureRule& rule,
                                      const EstimateOptions& opts = {});
EstimateReport check_optimal_estimate(const MatrixField& g, const ScalarField& psi,
                                      const OneForm& f, const QuadratureRule& rule,
                                      const EstimateOptions& opts = {});

/// Both sides of the Bochner identity
///   ||d* a||_g^2 + ||d a||_g^2 =
///   int sum <theta_ij a_i, a_j>_g + int sum |d a_i / dx_j|_g^2
/// for a compactly supported alpha (zero on a `collar`-node boundary collar).
BochnerRecord bochner_residual(const OneForm& alpha, const MatrixField& g,
                               const QuadratureRule& rule, std::size_t collar = 2);

/// Generalized Cauchy-Schwarz: <<f,a>>_g^2 <= <<Theta^{-1}f,f>>_g <<Theta a,a>>_g,
/// with the Theta pairings taken pointwise through the stacked Nakano Gram.
CauchySchwarzRecord cauchy_schwarz_check(const OneForm& f, const OneForm& alpha,
                                         const MatrixField& g,
                                         const CurvatureTensor& theta,
                                         const QuadratureRule& rule,
                                         double eps_rep = 1e-6);

}  // namespace nakano
