#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "nakano/positivity.hpp"
#include "nakano/quadrature.hpp"

namespace nakano {

/// Parameters of the contradiction construction: a ball B(x0, rho) inside the
/// box, a constant-coefficient direction xi (stacked n*r, unit norm) and a
/// geometric schedule of weight strengths s. Empty center/xi are resolved by
/// falsify_scan from the Nakano scan's negative witness.
struct FalsifierConfig {
  std::vector<double> center;
  double radius = 0.0;
  Eigen::VectorXd xi;
  std::vector<double> s_schedule = default_schedule();
  double margin = 0.0;  // candidate margin c > 0, diagnostic only

  static std::vector<double> default_schedule();
};

/// One evaluation of the s^2-scaled functional. The true values scale like
/// e^{s rho^2/4} and overflow doubles for large s, so each term is stored as
/// mantissa * e^{log_weight_offset}; term_curvature/term_gradient/total are
/// the plain doubles (+-inf once past the representable range).
struct FalsifierRecord {
  double s = 0.0;
  double term_curvature = 0.0;
  double term_gradient = 0.0;
  double total = 0.0;
  double log_weight_offset = 0.0;
  double curvature_mantissa = 0.0;
  double gradient_mantissa = 0.0;
  double gradient_paired_mantissa = 0.0;
  double gradient_unpaired_mantissa = 0.0;
};

struct FalsifierTrace {
  std::vector<FalsifierRecord> records;
  bool violated = false;
  double violated_at = 0.0;
  std::vector<double> center_used;
  Eigen::VectorXd xi_used;
  std::vector<std::string> warnings;
};

/// Smooth plateau cutoff chi(x) = H(|x - x0| / rho) with H = 1 on [0, 1/2],
/// H = 0 on [1, inf) and the mollifier quotient
/// q(u) = e^{-1/(1-u)} / (e^{-1/(1-u)} + e^{-1/u}) on the ramp.
ScalarField plateau_cutoff(const std::vector<double>& center, double radius,
                           const GridSpec& grid);

/// f = d0( (sum_i xi_i (x_i - x0_i)) * chi ): discretely exactly closed and
/// compactly supported, with f_i = xi_i on the inner half-ball.
OneForm seed_form(const FalsifierConfig& cfg, const GridSpec& grid);

/// psi_s(x) = s (|x - x0|^2 - rho^2/4), with its finite-difference Hessian
/// (exactly 2s I at interior nodes).
ScalarWeight psi_s(double s, const FalsifierConfig& cfg, const GridSpec& grid);

/// The s^2-scaled functional with alpha_s = (Hess psi_s)^{-1} f = f/(2s):
/// curvature term plus gradient term under the weight e^{-psi_s}. The total
/// uses the squared-gradient form for r = 1 and the transpose-paired form for
/// r >= 2; both variants are recorded.
FalsifierRecord falsifier_functional(const MatrixField& g, const FalsifierConfig& cfg,
                                     double s, const QuadratureRule& rule);

/// Runs the schedule; the outcome is the first s whose total drops below
/// -tau_viol * (1 + |term_curvature| + |term_gradient|).
FalsifierTrace falsify_scan(const MatrixField& g, const FalsifierConfig& cfg,
                            const QuadratureRule& rule, double tau_viol = 1e-6);

/// Entrywise trapezoidal fiber integral g(x) = int g~(x, y) dy over the
/// trailing rule_y axes. The y-boundary collar must be negligible
/// (max entry <= truncation_rel * global max; pass +inf when the fiber
/// integral is exact as sampled, e.g. y-constant data on a unit box), and
/// the output is validated positive definite.
MatrixField prekopa_pushforward(const MatrixField& gt, const QuadratureRule& rule_y,
                                double truncation_rel = 1e-10);

struct PrekopaRecord {
  Verdict input_verdict = Verdict::Indefinite;
  Verdict output_verdict = Verdict::Indefinite;
  bool consistent = false;
  bool applicable = false;
  PositivityReport input_report;
  PositivityReport output_report;
};

/// input = Nakano verdict of g~ over the joint (x, y) base; output = verdict
/// of the pushforward. `consistent` is the implication "input semipositive =>
/// output semipositive" (vacuously true, applicable = false, when the input
/// is indefinite).
PrekopaRecord prekopa_verify(const MatrixField& gt, const QuadratureRule& rule_y,
                             double tau = 1e-7, double truncation_rel = 1e-10);

}  // namespace nakano
