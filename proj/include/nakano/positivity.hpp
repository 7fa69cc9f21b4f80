#pragma once

#include <Eigen/Dense>
#include <string>

#include "nakano/diffops.hpp"
#include "nakano/grid.hpp"

namespace nakano {

enum class Verdict { Positive, Semipositive, Indefinite };

std::string to_string(Verdict v);

/// Result of a pointwise eigenvalue scan. `worst_eigenvalue` is the minimum
/// over scanned nodes of the smallest eigenvalue of the local quadratic form,
/// `witness` the corresponding unit eigenvector. Boundary nodes use one-sided
/// stencils of lower accuracy; they are scanned but flagged separately.
struct PositivityReport {
  Verdict verdict = Verdict::Semipositive;
  MultiIndex worst_node;
  double worst_eigenvalue = 0.0;
  Eigen::VectorXd witness;
  double scale = 1.0;
  double tau = 0.0;
  bool worst_is_boundary = false;
  double interior_worst_eigenvalue = 0.0;
  double boundary_worst_eigenvalue = 0.0;
};

/// Scans the finite-difference Hessian of phi. Semipositive iff the global
/// minimum eigenvalue is >= -tau*scale, indefinite otherwise.
PositivityReport convexity_verdict(const ScalarField& phi, double tau = 1e-7);

/// Scans the symmetrized Nakano Gram built from curvature_tensor(g) at every
/// node; scale is 1 + max_node |g theta|_max.
PositivityReport nakano_verdict(const MatrixField& g, double tau = 1e-7,
                                int threads = 1);

}  // namespace nakano
