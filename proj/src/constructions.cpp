#include "nakano/constructions.hpp"

#include <algorithm>
#include <cmath>

namespace nakano {

std::vector<double> FalsifierConfig::default_schedule() {
  std::vector<double> s(15);
  for (std::size_t p = 0; p < s.size(); ++p) s[p] = std::ldexp(1.0, static_cast<int>(p));
  return s;
}

namespace {

void check_ball(const std::vector<double>& center, double radius, const GridSpec& grid) {
  if (center.size() != grid.dim())
    throw DomainError("falsifier center dimension does not match the grid");
  if (!(radius > 0.0)) throw DomainError("falsifier radius must be positive");
  for (std::size_t a = 0; a < grid.dim(); ++a) {
    const double slack = 1e-12 * (grid.maxs()[a] - grid.mins()[a]);
    if (center[a] - radius < grid.mins()[a] - slack ||
        center[a] + radius > grid.maxs()[a] + slack)
      throw DomainError("ball B(x0, rho) is not contained in the domain box");
  }
}

double mollifier_ramp(double u) {
  // q(u) = e^{-1/(1-u)} / (e^{-1/(1-u)} + e^{-1/u}); the underflowed tails
  // continue it smoothly to exactly 1 and 0.
  const double a = std::exp(-1.0 / (1.0 - u));
  const double b = std::exp(-1.0 / u);
  return a / (a + b);
}

double radial_t(std::span<const double> x, const std::vector<double>& center, double radius) {
  double d2 = 0.0;
  for (std::size_t a = 0; a < center.size(); ++a)
    d2 += (x[a] - center[a]) * (x[a] - center[a]);
  return std::sqrt(d2) / radius;
}

}  // namespace

ScalarField plateau_cutoff(const std::vector<double>& center, double radius,
                           const GridSpec& grid) {
  check_ball(center, radius, grid);
  std::vector<double> v(grid.node_count());
  for (std::size_t flat = 0; flat < v.size(); ++flat) {
    const double t = radial_t(grid.node_coords(flat), center, radius);
    if (t <= 0.5)
      v[flat] = 1.0;
    else if (t >= 1.0)
      v[flat] = 0.0;
    else
      v[flat] = mollifier_ramp((t - 0.5) * 2.0);
  }
  return ScalarField(grid, std::move(v));
}

OneForm seed_form(const FalsifierConfig& cfg, const GridSpec& grid) {
  check_ball(cfg.center, cfg.radius, grid);
  const std::size_t n = grid.dim(), r = grid.rank();
  if (cfg.xi.size() != static_cast<Eigen::Index>(n * r))
    throw DomainError("seed_form requires a stacked direction of size n*r");

  ScalarField chi = plateau_cutoff(cfg.center, cfg.radius, grid);
  std::vector<double> v(grid.node_count() * r);
  for (std::size_t flat = 0; flat < grid.node_count(); ++flat) {
    const auto x = grid.node_coords(flat);
    for (std::size_t c = 0; c < r; ++c) {
      double linear = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        linear += cfg.xi(static_cast<Eigen::Index>(i * r + c)) * (x[i] - cfg.center[i]);
      v[flat * r + c] = linear * chi[flat];
    }
  }
  return d0(SectionField(grid, std::move(v)));
}

ScalarWeight psi_s(double s, const FalsifierConfig& cfg, const GridSpec& grid) {
  if (!(s > 0.0)) throw DomainError("psi_s requires s > 0");
  check_ball(cfg.center, cfg.radius, grid);
  std::vector<double> v(grid.node_count());
  for (std::size_t flat = 0; flat < v.size(); ++flat) {
    const auto x = grid.node_coords(flat);
    double d2 = 0.0;
    for (std::size_t a = 0; a < grid.dim(); ++a)
      d2 += (x[a] - cfg.center[a]) * (x[a] - cfg.center[a]);
    v[flat] = s * (d2 - cfg.radius * cfg.radius / 4.0);
  }
  return make_scalar_weight(ScalarField(grid, std::move(v)));
}

namespace {

// Everything s-independent about the functional, built once per scan.
struct FalsifierWorkspace {
  std::vector<double> curvature_form;          // sum <theta_jk f_j, f_k>_g per node
  std::vector<double> gradient_unpaired_form;  // sum |df_j/dx_k|_g^2
  std::vector<double> gradient_paired_form;    // sum <df_j/dx_k, df_k/dx_j>_g
  std::vector<double> f_mass_form;             // <f, f>_g per node
  std::vector<double> dist2;                   // |x - x0|^2
  double theta_noise = 0.0;  // rounding floor of the FD curvature pass
  std::vector<std::string> warnings;

  FalsifierWorkspace(const MatrixField& g, const FalsifierConfig& cfg,
                     const GridSpec& grid) {
    const std::size_t n = grid.dim(), N = grid.node_count();
    OneForm f = seed_form(cfg, grid);
    CurvatureTensor theta = curvature_tensor(g);

    std::vector<SectionField> df;  // df[j*n+k] = d f_j / dx_k
    df.reserve(n * n);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) df.push_back(partial(f.component(j), k));

    curvature_form.resize(N);
    gradient_unpaired_form.resize(N);
    gradient_paired_form.resize(N);
    f_mass_form.resize(N);
    dist2.resize(N);
    for (std::size_t flat = 0; flat < N; ++flat) {
      ConstMatView gm = g.at(flat);
      double c = 0.0, gu = 0.0, gp = 0.0, fm = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        ConstVecView fj = f.component(j).at(flat);
        fm += fj.dot(gm * fj);
        for (std::size_t k = 0; k < n; ++k) {
          c += f.component(k).at(flat).dot(gm * (theta.block(flat, j, k) * fj));
          ConstVecView djk = df[j * n + k].at(flat);
          gu += djk.dot(gm * djk);
          gp += df[k * n + j].at(flat).dot(gm * djk);
        }
      }
      curvature_form[flat] = c;
      gradient_unpaired_form[flat] = gu;
      gradient_paired_form[flat] = gp;
      f_mass_form[flat] = fm;
      const auto x = grid.node_coords(flat);
      double d2 = 0.0;
      for (std::size_t a = 0; a < grid.dim(); ++a)
        d2 += (x[a] - cfg.center[a]) * (x[a] - cfg.center[a]);
      dist2[flat] = d2;
    }

    // Rounding floor of theta = -d(g^{-1} dg): the connection coefficients
    // carry relative rounding that the 1/h stencil amplifies. Integrated
    // against |f|^2_g this bounds the spurious part of the curvature term.
    {
      double amax = 0.0, hmin = grid.spacing()[0];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
      for (std::size_t a = 0; a < grid.dim(); ++a)
        hmin = std::min(hmin, grid.spacing()[a]);
      for (std::size_t j = 0; j < n; ++j) {
        MatrixField dgj = partial(g, j);
        for (std::size_t flat = 0; flat < N; ++flat) {
          Eigen::MatrixXd gm = g.at(flat);
          eig.compute(0.5 * (gm + gm.transpose()));
          Eigen::MatrixXd aj = eig.eigenvectors() *
                               eig.eigenvalues().cwiseInverse().asDiagonal() *
                               eig.eigenvectors().transpose() * dgj.at(flat);
          amax = std::max(amax, aj.cwiseAbs().maxCoeff());
        }
      }
      constexpr double eps = 2.220446049250313e-16;
      theta_noise = 4096.0 * eps * (1.0 + amax) * static_cast<double>(n * n) / hmin;
    }

    for (std::size_t a = 0; a < grid.dim(); ++a) {
      const double across = 0.5 * cfg.radius / grid.spacing()[a];
      if (across < 8.0)
        warnings.push_back("ResolutionWarning: only " + std::to_string(across) +
                           " nodes across the cutoff annulus on axis " + std::to_string(a) +
                           " (want >= 8)");
    }
  }

  FalsifierRecord evaluate(double s, double radius, const QuadratureRule& rule,
                           std::size_t rank) const {
    const std::size_t N = dist2.size();
    // Weight e^{-psi_s} = e^{L} e^{-s |x-x0|^2} with L = s rho^2 / 4 factored
    // out so the integrals stay finite; the s^2 normalization against
    // alpha_s = f/(2s) contributes the flat 1/4.
    const double L = s * radius * radius / 4.0;
    std::vector<double> wc(N), wu(N), wp(N);
    for (std::size_t flat = 0; flat < N; ++flat) {
      const double w = rule.weight(flat) * std::exp(-s * dist2[flat]);
      wc[flat] = w * curvature_form[flat];
      wu[flat] = w * gradient_unpaired_form[flat];
      wp[flat] = w * gradient_paired_form[flat];
    }
    FalsifierRecord rec;
    rec.s = s;
    rec.log_weight_offset = L;
    rec.curvature_mantissa = 0.25 * pairwise_sum(wc);
    rec.gradient_unpaired_mantissa = 0.25 * pairwise_sum(wu);
    rec.gradient_paired_mantissa = 0.25 * pairwise_sum(wp);
    rec.gradient_mantissa =
        rank == 1 ? rec.gradient_unpaired_mantissa : rec.gradient_paired_mantissa;
    const double blowup = std::exp(L);
    auto lift = [blowup](double m) { return m == 0.0 ? 0.0 : m * blowup; };
    rec.term_curvature = lift(rec.curvature_mantissa);
    rec.term_gradient = lift(rec.gradient_mantissa);
    rec.total = lift(rec.curvature_mantissa + rec.gradient_mantissa);
    return rec;
  }

  // Spurious curvature mass in mantissa units at weight strength s.
  double curvature_noise_floor(double s, const QuadratureRule& rule) const {
    std::vector<double> wf(dist2.size());
    for (std::size_t flat = 0; flat < wf.size(); ++flat)
      wf[flat] = rule.weight(flat) * std::exp(-s * dist2[flat]) * f_mass_form[flat];
    return theta_noise * 0.25 * pairwise_sum(wf);
  }
};

FalsifierConfig resolve_config(const MatrixField& g, const FalsifierConfig& cfg,
                               double tau_viol) {
  FalsifierConfig out = cfg;
  if (!(out.radius > 0.0)) throw DomainError("falsifier radius must be positive");
  if (out.s_schedule.empty()) out.s_schedule = FalsifierConfig::default_schedule();
  for (std::size_t i = 0; i + 1 < out.s_schedule.size(); ++i)
    if (!(out.s_schedule[i] < out.s_schedule[i + 1]))
      throw DomainError("s_schedule must be strictly increasing");
  if (!(out.s_schedule.front() > 0.0)) throw DomainError("s values must be positive");

  const GridSpec& grid = g.grid();
  const std::size_t nr = grid.dim() * grid.rank();
  if (out.center.empty() || out.xi.size() == 0) {
    const PositivityReport scan = nakano_verdict(g, tau_viol);
    if (out.xi.size() == 0) {
      if (scan.verdict == Verdict::Indefinite) {
        out.xi = scan.witness;
        if (out.margin <= 0.0) out.margin = -scan.worst_eigenvalue;
      } else {
        out.xi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nr));
        out.xi(0) = 1.0;
      }
    }
    if (out.center.empty()) {
      out.center = scan.verdict == Verdict::Indefinite
                       ? grid.node_coords(scan.worst_node)
                       : [&] {
                           std::vector<double> mid(grid.dim());
                           for (std::size_t a = 0; a < grid.dim(); ++a)
                             mid[a] = 0.5 * (grid.mins()[a] + grid.maxs()[a]);
                           return mid;
                         }();
      // Clamp so the ball fits inside the box.
      for (std::size_t a = 0; a < grid.dim(); ++a) {
        const double lo = grid.mins()[a] + out.radius;
        const double hi = grid.maxs()[a] - out.radius;
        if (lo > hi) throw DomainError("ball of the requested radius cannot fit in the box");
        out.center[a] = std::clamp(out.center[a], lo, hi);
      }
    }
  }
  if (out.xi.size() != static_cast<Eigen::Index>(nr))
    throw DomainError("falsifier direction must have n*r stacked entries");
  const double norm = out.xi.norm();
  if (!(norm > 0.0)) throw DomainError("falsifier direction must be nonzero");
  out.xi /= norm;
  return out;
}

}  // namespace

FalsifierRecord falsifier_functional(const MatrixField& g, const FalsifierConfig& cfg,
                                     double s, const QuadratureRule& rule) {
  if (!(g.grid() == rule.grid())) throw GridError("falsifier_functional: grid mismatch");
  if (!(s > 0.0)) throw DomainError("falsifier functional requires s > 0");
  FalsifierConfig resolved = resolve_config(g, cfg, 1e-7);
  FalsifierWorkspace ws(g, resolved, g.grid());
  return ws.evaluate(s, resolved.radius, rule, g.grid().rank());
}

FalsifierTrace falsify_scan(const MatrixField& g, const FalsifierConfig& cfg,
                            const QuadratureRule& rule, double tau_viol) {
  if (!(g.grid() == rule.grid())) throw GridError("falsify_scan: grid mismatch");
  FalsifierConfig resolved = resolve_config(g, cfg, tau_viol);
  FalsifierWorkspace ws(g, resolved, g.grid());

  FalsifierTrace trace;
  trace.center_used = resolved.center;
  trace.xi_used = resolved.xi;
  trace.warnings = ws.warnings;
  for (double s : resolved.s_schedule) {
    FalsifierRecord rec = ws.evaluate(s, resolved.radius, rule, g.grid().rank());
    // total < -tau_viol * (1 + |term_c| + |term_g|), tested on mantissas so
    // the comparison stays meaningful past the double range. The extra floor
    // keeps amplified curvature rounding (exactly-flat metrics leave ~eps/h
    // crumbs) from reading as a violation.
    const double total_m = rec.curvature_mantissa + rec.gradient_mantissa;
    const double scale_m = std::exp(-std::min(rec.log_weight_offset, 745.0)) +
                           std::abs(rec.curvature_mantissa) +
                           std::abs(rec.gradient_mantissa);
    const double floor_m = ws.curvature_noise_floor(s, rule);
    if (!trace.violated && total_m < -(tau_viol * scale_m + floor_m)) {
      trace.violated = true;
      trace.violated_at = s;
    }
    trace.records.push_back(rec);
  }
  return trace;
}

MatrixField prekopa_pushforward(const MatrixField& gt, const QuadratureRule& rule_y,
                                double truncation_rel) {
  const GridSpec& joint = gt.grid();
  const GridSpec& ygrid = rule_y.grid();
  const std::size_t m = ygrid.dim();
  if (m >= joint.dim())
    throw GridError("prekopa_pushforward: y-rule must cover a strict suffix of the axes");
  const std::size_t nx = joint.dim() - m;
  for (std::size_t a = 0; a < m; ++a) {
    if (joint.mins()[nx + a] != ygrid.mins()[a] || joint.maxs()[nx + a] != ygrid.maxs()[a] ||
        joint.points()[nx + a] != ygrid.points()[a])
      throw GridError("prekopa_pushforward: y-rule does not match the trailing axes");
  }

  const std::size_t r = joint.rank();
  const std::size_t rr = r * r;
  const std::size_t Ny = ygrid.node_count();

  // Truncation diagnostic: the outermost y-slices must carry negligible mass.
  const std::size_t Nx = joint.node_count() / Ny;
  double global_max = gt.max_abs();
  double collar_max = 0.0;
  for (std::size_t yflat = 0; yflat < Ny; ++yflat) {
    if (!ygrid.is_boundary(yflat)) continue;
    for (std::size_t xflat = 0; xflat < Nx; ++xflat) {
      const std::size_t base = (xflat * Ny + yflat) * rr;
      for (std::size_t e = 0; e < rr; ++e)
        collar_max = std::max(collar_max, std::abs(gt.values()[base + e]));
    }
  }
  const double threshold = truncation_rel * global_max;
  if (collar_max > threshold) throw TruncationError(collar_max, threshold);

  GridSpec xgrid(std::vector<double>(joint.mins().begin(), joint.mins().begin() + nx),
                 std::vector<double>(joint.maxs().begin(), joint.maxs().begin() + nx),
                 std::vector<std::size_t>(joint.points().begin(), joint.points().begin() + nx),
                 r);

  std::vector<double> out(xgrid.node_count() * rr);
  std::vector<double> terms(Ny);
  for (std::size_t xflat = 0; xflat < xgrid.node_count(); ++xflat) {
    for (std::size_t e = 0; e < rr; ++e) {
      for (std::size_t yflat = 0; yflat < Ny; ++yflat)
        terms[yflat] = rule_y.weight(yflat) * gt.values()[(xflat * Ny + yflat) * rr + e];
      out[xflat * rr + e] = pairwise_sum(terms);
    }
  }
  MatrixField g(xgrid, std::move(out));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  for (std::size_t flat = 0; flat < xgrid.node_count(); ++flat) {
    Eigen::MatrixXd s = g.at(flat);
    s = 0.5 * (s + s.transpose()).eval();
    eig.compute(s, Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues().minCoeff();
    if (!(lmin > 1e-12 * (1.0 + s.cwiseAbs().maxCoeff())))
      throw NotPositiveDefiniteError(xgrid.unflat(flat), lmin);
  }
  return g;
}

PrekopaRecord prekopa_verify(const MatrixField& gt, const QuadratureRule& rule_y,
                             double tau, double truncation_rel) {
  PrekopaRecord rec;
  rec.input_report = nakano_verdict(gt, tau);
  rec.input_verdict = rec.input_report.verdict;
  MatrixField g = prekopa_pushforward(gt, rule_y, truncation_rel);
  rec.output_report = nakano_verdict(g, tau);
  rec.output_verdict = rec.output_report.verdict;
  rec.applicable = rec.input_verdict != Verdict::Indefinite;
  rec.consistent = !rec.applicable || rec.output_verdict != Verdict::Indefinite;
  return rec;
}

}  // namespace nakano
