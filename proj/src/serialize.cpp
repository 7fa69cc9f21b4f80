#include "nakano/serialize.hpp"

#include <cmath>
#include <cstdio>

namespace nakano {

Json json_number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

namespace {

Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(json_number(v(i)));
  return out;
}

}  // namespace

Json to_json(const PositivityReport& r) {
  Json j;
  j["verdict"] = to_string(r.verdict);
  j["worst_node"] = r.worst_node;
  j["worst_eigenvalue"] = json_number(r.worst_eigenvalue);
  j["witness"] = vector_json(r.witness);
  j["scale"] = json_number(r.scale);
  j["tau"] = json_number(r.tau);
  j["worst_is_boundary"] = r.worst_is_boundary;
  j["interior_worst_eigenvalue"] = json_number(r.interior_worst_eigenvalue);
  j["boundary_worst_eigenvalue"] = json_number(r.boundary_worst_eigenvalue);
  return j;
}

Json to_json(const EstimateReport& r) {
  Json j;
  j["lhs"] = json_number(r.lhs);
  j["rhs"] = json_number(r.rhs);
  j["holds"] = r.holds;
  j["closedness_residual"] = json_number(r.closedness_residual);
  j["boundary_mass"] = json_number(r.boundary_mass);
  j["eps_rep"] = json_number(r.eps_rep);
  j["eps_base"] = json_number(r.eps_base);
  return j;
}

Json to_json(const BochnerRecord& r) {
  Json j;
  j["lhs"] = json_number(r.lhs);
  j["rhs"] = json_number(r.rhs);
  j["residual"] = json_number(r.residual);
  j["relative"] = json_number(r.relative);
  return j;
}

Json to_json(const CauchySchwarzRecord& r) {
  Json j;
  j["lhs"] = json_number(r.lhs);
  j["rhs"] = json_number(r.rhs);
  j["holds"] = r.holds;
  return j;
}

Json to_json(const FalsifierRecord& r) {
  Json j;
  j["s"] = json_number(r.s);
  j["term_curvature"] = json_number(r.term_curvature);
  j["term_gradient"] = json_number(r.term_gradient);
  j["total"] = json_number(r.total);
  j["log_weight_offset"] = json_number(r.log_weight_offset);
  j["curvature_mantissa"] = json_number(r.curvature_mantissa);
  j["gradient_mantissa"] = json_number(r.gradient_mantissa);
  j["gradient_paired_mantissa"] = json_number(r.gradient_paired_mantissa);
  j["gradient_unpaired_mantissa"] = json_number(r.gradient_unpaired_mantissa);
  return j;
}

Json to_json(const FalsifierTrace& t) {
  Json j;
  j["outcome"] = t.violated ? Json{{"violated_at", json_number(t.violated_at)}}
                            : Json("not_violated");
  j["center"] = t.center_used;
  j["xi"] = vector_json(t.xi_used);
  j["warnings"] = t.warnings;
  Json records = Json::array();
  for (const auto& rec : t.records) records.push_back(to_json(rec));
  j["records"] = std::move(records);
  return j;
}

Json to_json(const PrekopaRecord& r) {
  Json j;
  j["input_verdict"] = to_string(r.input_verdict);
  j["output_verdict"] = to_string(r.output_verdict);
  j["consistent"] = r.consistent;
  j["applicable"] = r.applicable;
  j["input_report"] = to_json(r.input_report);
  j["output_report"] = to_json(r.output_report);
  return j;
}

std::string trace_to_csv(const FalsifierTrace& t) {
  std::string out = "s,term_curvature,term_gradient,total\n";
  char buf[128];
  for (const auto& rec : t.records) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", rec.s, rec.term_curvature,
                  rec.term_gradient, rec.total);
    out += buf;
  }
  return out;
}

}  // namespace nakano
