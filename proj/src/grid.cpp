#include "nakano/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nakano {

std::string index_to_string(const MultiIndex& idx) {
  std::string out = "(";
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(idx[i]);
  }
  return out + ")";
}

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values)
    if (!std::isfinite(v)) throw NonFiniteError(std::string(what) + " contains a non-finite value");
}

}  // namespace

GridSpec::GridSpec(std::vector<double> mins, std::vector<double> maxs,
                   std::vector<std::size_t> points, std::size_t rank)
    : mins_(std::move(mins)), maxs_(std::move(maxs)), points_(std::move(points)), rank_(rank) {
  const std::size_t n = mins_.size();
  if (n == 0) throw GridError("grid needs at least one axis");
  if (maxs_.size() != n || points_.size() != n)
    throw GridError("mins/maxs/points size mismatch");
  if (rank_ == 0) throw GridError("bundle rank must be at least 1");
  require_finite(mins_, "grid mins");
  require_finite(maxs_, "grid maxs");
  spacing_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(mins_[i] < maxs_[i])) throw GridError("mins must be strictly below maxs");
    if (points_[i] < 3) throw GridError("each axis needs at least 3 points");
    spacing_[i] = (maxs_[i] - mins_[i]) / static_cast<double>(points_[i] - 1);
    if (!(spacing_[i] > 0.0)) throw GridError("grid spacing must be strictly positive");
  }
  strides_.assign(n, 1);
  for (std::size_t i = n; i-- > 1;) strides_[i - 1] = strides_[i] * points_[i];
  node_count_ = strides_[0] * points_[0];
}

std::size_t GridSpec::flat(const MultiIndex& idx) const {
  if (idx.size() != dim()) throw IndexError("multi-index dimension mismatch");
  std::size_t f = 0;
  for (std::size_t a = 0; a < dim(); ++a) {
    if (idx[a] >= points_[a])
      throw IndexError("index " + index_to_string(idx) + " out of range on axis " +
                       std::to_string(a));
    f += idx[a] * strides_[a];
  }
  return f;
}

MultiIndex GridSpec::unflat(std::size_t flat) const {
  if (flat >= node_count_) throw IndexError("flat index out of range");
  MultiIndex idx(dim());
  for (std::size_t a = 0; a < dim(); ++a) idx[a] = (flat / strides_[a]) % points_[a];
  return idx;
}

std::vector<double> GridSpec::node_coords(const MultiIndex& idx) const {
  if (idx.size() != dim()) throw IndexError("multi-index dimension mismatch");
  std::vector<double> x(dim());
  for (std::size_t a = 0; a < dim(); ++a) {
    if (idx[a] >= points_[a])
      throw IndexError("index " + index_to_string(idx) + " out of range on axis " +
                       std::to_string(a));
    x[a] = mins_[a] + static_cast<double>(idx[a]) * spacing_[a];
  }
  return x;
}

std::vector<double> GridSpec::node_coords(std::size_t flat) const {
  return node_coords(unflat(flat));
}

MultiIndex GridSpec::coord_to_nearest_index(std::span<const double> point) const {
  if (point.size() != dim()) throw IndexError("point dimension mismatch");
  MultiIndex idx(dim());
  for (std::size_t a = 0; a < dim(); ++a) {
    double t = std::round((point[a] - mins_[a]) / spacing_[a]);
    t = std::clamp(t, 0.0, static_cast<double>(points_[a] - 1));
    idx[a] = static_cast<std::size_t>(t);
  }
  return idx;
}

bool GridSpec::in_collar(std::size_t flat, std::size_t width) const {
  for (std::size_t a = 0; a < dim(); ++a) {
    const std::size_t ia = axis_index(flat, a);
    if (ia < width || ia + width >= points_[a]) return true;
  }
  return false;
}

double GridSpec::box_volume() const {
  double v = 1.0;
  for (std::size_t a = 0; a < dim(); ++a) v *= maxs_[a] - mins_[a];
  return v;
}

bool GridSpec::same_geometry(const GridSpec& other) const {
  return mins_ == other.mins_ && maxs_ == other.maxs_ && points_ == other.points_;
}

bool GridSpec::operator==(const GridSpec& other) const {
  return same_geometry(other) && rank_ == other.rank_;
}

namespace {

double span_max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

ScalarField::ScalarField(GridSpec grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.node_count())
    throw ShapeError("scalar field value count does not match grid");
  require_finite(values_, "scalar field");
}

double ScalarField::max_abs() const { return span_max_abs(values_); }

SectionField::SectionField(GridSpec grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.node_count() * grid_.rank())
    throw ShapeError("section field value count does not match grid");
  require_finite(values_, "section field");
}

SectionField SectionField::zero(const GridSpec& grid) {
  return SectionField(grid, std::vector<double>(grid.node_count() * grid.rank(), 0.0));
}

double SectionField::max_abs() const { return span_max_abs(values_); }

MatrixField::MatrixField(GridSpec grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.node_count() * grid_.rank() * grid_.rank())
    throw ShapeError("matrix field value count does not match grid");
  require_finite(values_, "matrix field");
}

MatrixField MatrixField::identity(const GridSpec& grid) {
  const std::size_t r = grid.rank();
  std::vector<double> v(grid.node_count() * r * r, 0.0);
  for (std::size_t node = 0; node < grid.node_count(); ++node)
    for (std::size_t i = 0; i < r; ++i) v[(node * r + i) * r + i] = 1.0;
  return MatrixField(grid, std::move(v));
}

double MatrixField::max_abs() const { return span_max_abs(values_); }

OneForm::OneForm(GridSpec grid, std::vector<SectionField> components)
    : grid_(std::move(grid)), components_(std::move(components)) {
  if (components_.size() != grid_.dim())
    throw ShapeError("one-form needs exactly n components");
  for (const auto& c : components_)
    if (!(c.grid() == grid_)) throw GridError("one-form components on mismatched grids");
}

const SectionField& OneForm::component(std::size_t axis) const {
  if (axis >= components_.size()) throw AxisError(axis, components_.size());
  return components_[axis];
}

double OneForm::max_abs() const {
  double m = 0.0;
  for (const auto& c : components_) m = std::max(m, c.max_abs());
  return m;
}

std::size_t TwoForm::pair_index(std::size_t n, std::size_t i, std::size_t j) {
  if (!(i < j && j < n)) throw IndexError("two-form pair index requires i < j < n");
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

TwoForm::TwoForm(GridSpec grid, std::vector<SectionField> components)
    : grid_(std::move(grid)), components_(std::move(components)) {
  if (components_.size() != pair_count(grid_.dim()))
    throw ShapeError("two-form needs n(n-1)/2 components");
  for (const auto& c : components_)
    if (!(c.grid() == grid_)) throw GridError("two-form components on mismatched grids");
}

const SectionField& TwoForm::component(std::size_t i, std::size_t j) const {
  return components_[pair_index(grid_.dim(), i, j)];
}

double TwoForm::max_abs() const {
  double m = 0.0;
  for (const auto& c : components_) m = std::max(m, c.max_abs());
  return m;
}

namespace {

// Checks the expression's free variables against the axis naming scheme and
// returns the per-axis variable names.
std::vector<std::string> axis_names(const Expr& e, const GridSpec& grid,
                                    const SampleVars& vars) {
  const std::size_t n = grid.dim();
  const std::size_t nx = vars.x_dims.value_or(n);
  if (nx > n) throw GridError("x_dims exceeds grid dimension");
  std::vector<std::string> names(n);
  for (std::size_t a = 0; a < n; ++a)
    names[a] = a < nx ? "x" + std::to_string(a + 1) : "y" + std::to_string(a - nx + 1);
  std::set<std::string> allowed(names.begin(), names.end());
  for (const auto& [k, v] : vars.extra) allowed.insert(k);
  for (const auto& v : free_vars(e))
    if (!allowed.contains(v)) throw ExprVarError(v);
  return names;
}

}  // namespace

ScalarField sample_scalar(const Expr& e, const GridSpec& grid, const SampleVars& vars) {
  const auto names = axis_names(e, grid, vars);
  Bindings b = vars.extra;
  std::vector<double> out(grid.node_count());
  for (std::size_t flat = 0; flat < grid.node_count(); ++flat) {
    const auto x = grid.node_coords(flat);
    for (std::size_t a = 0; a < grid.dim(); ++a) b[names[a]] = x[a];
    double v;
    try {
      v = eval(e, b);
    } catch (const EvalError& err) {
      throw EvalError(std::string(err.what()) + " at node " +
                      index_to_string(grid.unflat(flat)));
    }
    if (!std::isfinite(v))
      throw EvalError("non-finite value at node " + index_to_string(grid.unflat(flat)));
    out[flat] = v;
  }
  return ScalarField(grid, std::move(out));
}

MatrixField sample_metric(const std::vector<std::vector<ExprPtr>>& entries,
                          const GridSpec& grid, std::optional<double> tau_sym,
                          std::optional<double> tau_pd, const SampleVars& vars) {
  const std::size_t r = grid.rank();
  if (entries.size() != r) throw ShapeError("metric entry grid must be r x r");
  for (const auto& row : entries)
    if (row.size() != r) throw ShapeError("metric entry grid must be r x r");

  std::vector<std::string> names;
  for (const auto& row : entries)
    for (const auto& e : row) {
      auto nm = axis_names(*e, grid, vars);
      if (names.empty()) names = std::move(nm);
    }

  Bindings b = vars.extra;
  std::vector<double> out(grid.node_count() * r * r);
  Eigen::MatrixXd m(r, r);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  for (std::size_t flat = 0; flat < grid.node_count(); ++flat) {
    const auto x = grid.node_coords(flat);
    for (std::size_t a = 0; a < grid.dim(); ++a) b[names[a]] = x[a];
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j) {
        double v;
        try {
          v = eval(*entries[i][j], b);
        } catch (const EvalError& err) {
          throw EvalError(std::string(err.what()) + " at node " +
                          index_to_string(grid.unflat(flat)));
        }
        if (!std::isfinite(v))
          throw EvalError("non-finite metric entry at node " +
                          index_to_string(grid.unflat(flat)));
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      }
    const double mmax = m.cwiseAbs().maxCoeff();
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    const double sym_tol = tau_sym.value_or(1e-10 * (1.0 + mmax));
    if (asym > sym_tol) throw SymmetryError(grid.unflat(flat), asym);
    Eigen::MatrixXd s = 0.5 * (m + m.transpose());
    eig.compute(s, Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues().minCoeff();
    const double pd_tol = tau_pd.value_or(1e-12 * (1.0 + mmax));
    if (!(lmin > pd_tol)) throw NotPositiveDefiniteError(grid.unflat(flat), lmin);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j)
        out[(flat * r + i) * r + j] =
            s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  return MatrixField(grid, std::move(out));
}

MatrixField metric_from_weight(const ScalarField& phi) {
  if (phi.grid().rank() != 1)
    throw ShapeError("metric_from_weight requires a rank-1 grid");
  std::vector<double> v(phi.grid().node_count());
  for (std::size_t flat = 0; flat < v.size(); ++flat) {
    v[flat] = std::exp(-phi[flat]);
    if (!std::isfinite(v[flat]))
      throw EvalError("e^{-phi} overflows at node " +
                      index_to_string(phi.grid().unflat(flat)));
  }
  return MatrixField(phi.grid(), std::move(v));
}

double min_metric_eigenvalue(const MatrixField& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  double lmin = std::numeric_limits<double>::infinity();
  for (std::size_t flat = 0; flat < g.grid().node_count(); ++flat) {
    Eigen::MatrixXd s = g.at(flat);
    s = 0.5 * (s + s.transpose()).eval();
    eig.compute(s, Eigen::EigenvaluesOnly);
    lmin = std::min(lmin, eig.eigenvalues().minCoeff());
  }
  return lmin;
}

}  // namespace nakano
