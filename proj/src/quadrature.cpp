#include "nakano/quadrature.hpp"

#include <cmath>

namespace nakano {

QuadratureRule::QuadratureRule(const GridSpec& grid) : grid_(grid) {
  const std::size_t n = grid_.dim();
  weights_.resize(grid_.node_count());
  for (std::size_t flat = 0; flat < weights_.size(); ++flat) {
    double w = 1.0;
    for (std::size_t a = 0; a < n; ++a) {
      const std::size_t ia = grid_.axis_index(flat, a);
      const bool edge = ia == 0 || ia + 1 == grid_.points()[a];
      w *= grid_.spacing()[a] * (edge ? 0.5 : 1.0);
    }
    weights_[flat] = w;
  }
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

namespace {

void check_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!(a == b)) throw GridError(std::string(what) + ": grid mismatch");
}

std::vector<double> weight_times(const QuadratureRule& rule,
                                 const std::vector<double>& integrand) {
  std::vector<double> out(integrand.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = rule.weight(i) * integrand[i];
  return out;
}

}  // namespace

double integrate(const ScalarField& f, const QuadratureRule& rule) {
  check_grid(f.grid(), rule.grid(), "integrate");
  std::vector<double> terms(f.values().size());
  for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = rule.weight(i) * f[i];
  return pairwise_sum(terms);
}

double inner_sections(const SectionField& u, const SectionField& v,
                      const MatrixField& g, const ScalarField& psi,
                      const QuadratureRule& rule) {
  check_grid(u.grid(), rule.grid(), "inner_sections");
  check_grid(v.grid(), rule.grid(), "inner_sections");
  check_grid(g.grid(), rule.grid(), "inner_sections");
  check_grid(psi.grid(), rule.grid(), "inner_sections");
  std::vector<double> terms(rule.grid().node_count());
  for (std::size_t flat = 0; flat < terms.size(); ++flat)
    terms[flat] = v.at(flat).dot(g.at(flat) * u.at(flat)) * std::exp(-psi[flat]);
  return pairwise_sum(weight_times(rule, terms));
}

double inner_sections(const SectionField& u, const SectionField& v,
                      const MatrixField& g, const QuadratureRule& rule) {
  check_grid(u.grid(), rule.grid(), "inner_sections");
  check_grid(v.grid(), rule.grid(), "inner_sections");
  check_grid(g.grid(), rule.grid(), "inner_sections");
  std::vector<double> terms(rule.grid().node_count());
  for (std::size_t flat = 0; flat < terms.size(); ++flat)
    terms[flat] = v.at(flat).dot(g.at(flat) * u.at(flat));
  return pairwise_sum(weight_times(rule, terms));
}

double inner_forms(const OneForm& alpha, const OneForm& beta, const MatrixField& g,
                   const ScalarField& psi, const QuadratureRule& rule) {
  check_grid(alpha.grid(), rule.grid(), "inner_forms");
  check_grid(beta.grid(), rule.grid(), "inner_forms");
  check_grid(g.grid(), rule.grid(), "inner_forms");
  check_grid(psi.grid(), rule.grid(), "inner_forms");
  std::vector<double> terms(rule.grid().node_count());
  for (std::size_t flat = 0; flat < terms.size(); ++flat) {
    double s = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i)
      s += beta.component(i).at(flat).dot(g.at(flat) * alpha.component(i).at(flat));
    terms[flat] = s * std::exp(-psi[flat]);
  }
  return pairwise_sum(weight_times(rule, terms));
}

double inner_forms(const OneForm& alpha, const OneForm& beta, const MatrixField& g,
                   const QuadratureRule& rule) {
  check_grid(alpha.grid(), rule.grid(), "inner_forms");
  check_grid(beta.grid(), rule.grid(), "inner_forms");
  check_grid(g.grid(), rule.grid(), "inner_forms");
  std::vector<double> terms(rule.grid().node_count());
  for (std::size_t flat = 0; flat < terms.size(); ++flat) {
    double s = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i)
      s += beta.component(i).at(flat).dot(g.at(flat) * alpha.component(i).at(flat));
    terms[flat] = s;
  }
  return pairwise_sum(weight_times(rule, terms));
}

double hess_inv_pairing(const OneForm& f, const HessianField& hess,
                        const MatrixField& g, const ScalarField& psi,
                        const QuadratureRule& rule, double tau_conv) {
  check_grid(f.grid(), rule.grid(), "hess_inv_pairing");
  check_grid(hess.grid(), rule.grid(), "hess_inv_pairing");
  check_grid(g.grid(), rule.grid(), "hess_inv_pairing");
  check_grid(psi.grid(), rule.grid(), "hess_inv_pairing");
  const std::size_t n = rule.grid().dim();
  const auto ni = static_cast<Eigen::Index>(n);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  Eigen::MatrixXd pair(ni, ni);
  std::vector<double> terms(rule.grid().node_count());
  for (std::size_t flat = 0; flat < terms.size(); ++flat) {
    eig.compute(Eigen::MatrixXd(hess.at(flat)));
    const double lmin = eig.eigenvalues().minCoeff();
    if (!(lmin > tau_conv)) throw HessianNotPDError(rule.grid().unflat(flat), lmin);
    Eigen::MatrixXd inv = eig.eigenvectors() *
                          eig.eigenvalues().cwiseInverse().asDiagonal() *
                          eig.eigenvectors().transpose();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        pair(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            f.component(j).at(flat).dot(g.at(flat) * f.component(i).at(flat));
    terms[flat] = (inv.array() * pair.array()).sum() * std::exp(-psi[flat]);
  }
  return pairwise_sum(weight_times(rule, terms));
}

}  // namespace nakano
