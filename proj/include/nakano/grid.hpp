#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nakano/errors.hpp"
#include "nakano/expr.hpp"

namespace nakano {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatView = Eigen::Map<const RowMat>;
using ConstVecView = Eigen::Map<const Eigen::VectorXd>;

/// Uniform tensor-product grid on an axis-aligned box in R^n, carrying the
/// bundle rank r. Nodes are stored row-major with the last axis fastest.
class GridSpec {
public:
  GridSpec(std::vector<double> mins, std::vector<double> maxs,
           std::vector<std::size_t> points, std::size_t rank);

  std::size_t dim() const { return mins_.size(); }
  std::size_t rank() const { return rank_; }
  const std::vector<double>& mins() const { return mins_; }
  const std::vector<double>& maxs() const { return maxs_; }
  const std::vector<std::size_t>& points() const { return points_; }
  const std::vector<double>& spacing() const { return spacing_; }
  std::size_t node_count() const { return node_count_; }
  std::size_t stride(std::size_t axis) const { return strides_[axis]; }

  std::size_t flat(const MultiIndex& idx) const;
  MultiIndex unflat(std::size_t flat) const;
  std::size_t axis_index(std::size_t flat, std::size_t axis) const {
    return (flat / strides_[axis]) % points_[axis];
  }

  std::vector<double> node_coords(const MultiIndex& idx) const;
  std::vector<double> node_coords(std::size_t flat) const;
  /// Nearest node to an arbitrary point; coordinates are clamped to the box.
  MultiIndex coord_to_nearest_index(std::span<const double> point) const;

  /// True when any axis index lies within `width` nodes of either end.
  bool in_collar(std::size_t flat, std::size_t width) const;
  bool is_boundary(std::size_t flat) const { return in_collar(flat, 1); }

  double box_volume() const;

  bool operator==(const GridSpec& other) const;
  bool same_geometry(const GridSpec& other) const;

private:
  std::vector<double> mins_, maxs_, spacing_;
  std::vector<std::size_t> points_, strides_;
  std::size_t rank_;
  std::size_t node_count_;
};

/// One real value per node.
class ScalarField {
public:
  ScalarField(GridSpec grid, std::vector<double> values);

  const GridSpec& grid() const { return grid_; }
  double operator[](std::size_t flat) const { return values_[flat]; }
  std::span<const double> values() const { return values_; }
  double max_abs() const;

private:
  GridSpec grid_;
  std::vector<double> values_;
};

/// One r-vector per node.
class SectionField {
public:
  SectionField(GridSpec grid, std::vector<double> values);
  static SectionField zero(const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }
  ConstVecView at(std::size_t flat) const {
    return ConstVecView(values_.data() + flat * grid_.rank(),
                        static_cast<Eigen::Index>(grid_.rank()));
  }
  std::span<const double> values() const { return values_; }
  double max_abs() const;

private:
  GridSpec grid_;
  std::vector<double> values_;
};

/// One r x r matrix per node (row-major blocks). Symmetry and positive
/// definiteness are enforced where a metric is required, not by the type:
/// derivative fields such as g^{-1} dg/dx_j are generally asymmetric.
class MatrixField {
public:
  MatrixField(GridSpec grid, std::vector<double> values);
  static MatrixField identity(const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }
  ConstMatView at(std::size_t flat) const {
    const auto r = static_cast<Eigen::Index>(grid_.rank());
    return ConstMatView(values_.data() + flat * grid_.rank() * grid_.rank(), r, r);
  }
  std::span<const double> values() const { return values_; }
  double max_abs() const;

private:
  GridSpec grid_;
  std::vector<double> values_;
};

/// Vector-valued 1-form: n section-shaped coefficient arrays f_1..f_n.
class OneForm {
public:
  OneForm(GridSpec grid, std::vector<SectionField> components);

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return components_.size(); }
  const SectionField& component(std::size_t axis) const;
  double max_abs() const;

private:
  GridSpec grid_;
  std::vector<SectionField> components_;
};

/// Vector-valued 2-form with components indexed by axis pairs i<j.
class TwoForm {
public:
  TwoForm(GridSpec grid, std::vector<SectionField> components);

  static std::size_t pair_count(std::size_t n) { return n * (n - 1) / 2; }
  static std::size_t pair_index(std::size_t n, std::size_t i, std::size_t j);

  const GridSpec& grid() const { return grid_; }
  const SectionField& component(std::size_t i, std::size_t j) const;
  const std::vector<SectionField>& components() const { return components_; }
  double max_abs() const;

private:
  GridSpec grid_;
  std::vector<SectionField> components_;
};

/// Variable layout for sampling: the first x_dims axes bind to x1.., the
/// remaining axes to y1... Defaults to all-x.
struct SampleVars {
  std::optional<std::size_t> x_dims;
  Bindings extra;  // pre-bound names such as the scan parameter s
};

ScalarField sample_scalar(const Expr& e, const GridSpec& grid,
                          const SampleVars& vars = {});

/// Samples a square grid of entry expressions into a metric field:
/// checks per-node asymmetry against tau_sym, symmetrizes as (M + M^T)/2 and
/// requires the smallest eigenvalue to exceed tau_pd. Tolerances default to
/// the scale-aware 1e-10*(1+|M|_max) and 1e-12*(1+|M|_max).
MatrixField sample_metric(const std::vector<std::vector<ExprPtr>>& entries,
                          const GridSpec& grid,
                          std::optional<double> tau_sym = {},
                          std::optional<double> tau_pd = {},
                          const SampleVars& vars = {});

/// g = e^{-phi} as a rank-1 metric field.
MatrixField metric_from_weight(const ScalarField& phi);

/// Smallest eigenvalue of the symmetric part over all nodes.
double min_metric_eigenvalue(const MatrixField& g);

}  // namespace nakano
