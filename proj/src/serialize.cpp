#include "lcca/serialize.hpp"

#include <cstdio>
#include <set>
#include <sstream>

#include "lcca/errors.hpp"

namespace lcca {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

// Row-major nested array.
json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return {};
  const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[r].size()) != cols)
      throw ParseError("ragged matrix in JSON");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

}  // namespace

json basis_to_json(const BasisSpec& basis) {
  if (basis.kind == BasisSpec::Kind::Linear) return json{{"kind", "linear"}};
  return json{{"kind", "bspline"},
              {"degree", basis.degree},
              {"knots", basis.interior_knots},
              {"range", {basis.lo, basis.hi}}};
}

BasisSpec basis_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "linear") return BasisSpec::linear();
  if (kind == "bspline")
    return BasisSpec::bspline(j.at("degree").get<int>(),
                              j.at("knots").get<std::vector<double>>(),
                              j.at("range").at(0).get<double>(),
                              j.at("range").at(1).get<double>());
  throw ParseError("unknown basis kind: " + kind);
}

json validation_to_json(const ValidationReport& report) {
  return json{{"n", report.n},
              {"p", report.p},
              {"visits",
               {{"min", report.visits_min},
                {"mean", report.visits_mean},
                {"max", report.visits_max}}},
              {"time_range", {report.time_lo, report.time_hi}},
              {"warnings", report.warnings}};
}

json lpca_to_json(const LpcaModel& model) {
  return json{{"basis", basis_to_json(model.basis)},
              {"eigenvalues", vector_to_json(model.eigenvalues)},
              {"noise_variance", model.noise_variance},
              {"loadings", matrix_to_json(model.loadings)},
              {"variance_explained", vector_to_json(model.variance_explained)}};
}

LpcaModel lpca_from_json(const json& j) {
  LpcaModel model;
  model.basis = basis_from_json(j.at("basis"));
  model.eigenvalues = vector_from_json(j.at("eigenvalues"));
  model.noise_variance = j.at("noise_variance").get<double>();
  model.loadings = matrix_from_json(j.at("loadings"));
  model.variance_explained = vector_from_json(j.at("variance_explained"));
  if (model.loadings.rows() % model.basis.size() != 0)
    throw ParseError("loadings rows are not a multiple of the basis count");
  model.p = static_cast<int>(model.loadings.rows()) / model.basis.size();
  return model;
}

json cca_report_json(const CcaModel& cca, const WilksReport& wilks,
                     const std::string& method) {
  json tests = json::array();
  for (const auto& t : wilks.tests)
    tests.push_back(json{{"m", t.m},
                         {"lambda", t.lambda},
                         {"nu", t.nu},
                         {"df1", t.df1},
                         {"df2", t.df2},
                         {"F", t.f},
                         {"p", t.p_value}});
  return json{{"method", method},
              {"correlations", vector_to_json(cca.correlations)},
              {"selected_d", wilks.selected_d},
              {"alpha", wilks.alpha},
              {"ridge", cca.ridge},
              {"tests", std::move(tests)},
              {"weights_x", matrix_to_json(cca.weights_x)},
              {"weights_y", matrix_to_json(cca.weights_y)}};
}

namespace {

void append_display_rows(std::ostringstream& out, const char* set_name,
                         const DisplayTable& table) {
  for (const auto& row : table.rows)
    out << set_name << ',' << row.pair + 1 << ',' << table.variable_names[row.variable]
        << ',' << format_double(row.time) << ',' << format_double(row.value) << '\n';
}

}  // namespace

std::string display_tables_csv(const DisplayTable& x_table, const DisplayTable& y_table) {
  std::ostringstream out;
  out << "set,pair,variable,time,value\n";
  append_display_rows(out, "x", x_table);
  append_display_rows(out, "y", y_table);
  return out.str();
}

std::string variates_csv(const CcaModel& cca, const std::vector<std::string>& subject_ids) {
  std::ostringstream out;
  const int m = cca.pair_count();
  out << "subject_id";
  for (int c = 0; c < m; ++c) out << ",cvx" << c + 1;
  for (int c = 0; c < m; ++c) out << ",cvy" << c + 1;
  out << '\n';
  for (std::size_t i = 0; i < subject_ids.size(); ++i) {
    out << subject_ids[i];
    for (int c = 0; c < m; ++c) out << ',' << format_double(cca.variates_x(i, c));
    for (int c = 0; c < m; ++c) out << ',' << format_double(cca.variates_y(i, c));
    out << '\n';
  }
  return out.str();
}

json sim_config_to_json(const SimConfig& config) {
  return json{{"setting", config.setting},
              {"n", config.n},
              {"r", config.r},
              {"threshold", config.threshold},
              {"reps", config.reps},
              {"seed", config.seed},
              {"noise_sd", config.noise_sd},
              {"alpha", config.alpha},
              {"ridge", config.ridge},
              {"p", config.p},
              {"q", config.q},
              {"subgroup_proportion", config.subgroup_proportion},
              {"subgroup_mean", config.subgroup_mean},
              {"subgroup_scale", config.subgroup_scale}};
}

SimConfig sim_config_from_json(const json& j) {
  static const std::set<std::string> known = {
      "setting", "n", "r", "threshold", "reps", "seed", "noise_sd", "alpha", "ridge",
      "p", "q", "subgroup_proportion", "subgroup_mean", "subgroup_scale"};
  for (const auto& item : j.items())
    if (!known.count(item.key()))
      throw ValidationError("unknown simulation config key: " + item.key());

  SimConfig config;
  config.setting = j.value("setting", config.setting);
  config.n = j.value("n", config.n);
  config.r = j.value("r", config.r);
  config.threshold = j.value("threshold", config.threshold);
  config.reps = j.value("reps", config.reps);
  config.seed = j.value("seed", config.seed);
  config.noise_sd = j.value("noise_sd", config.noise_sd);
  config.alpha = j.value("alpha", config.alpha);
  config.ridge = j.value("ridge", config.ridge);
  config.p = j.value("p", config.p);
  config.q = j.value("q", config.q);
  config.subgroup_proportion = j.value("subgroup_proportion", config.subgroup_proportion);
  config.subgroup_mean = j.value("subgroup_mean", config.subgroup_mean);
  config.subgroup_scale = j.value("subgroup_scale", config.subgroup_scale);
  config.check();
  return config;
}

namespace {

json aggregates_to_json(const MethodAggregates& agg) {
  return json{{"mean_selected", agg.mean_selected},
              {"frac_selected_one", agg.frac_selected_one},
              {"mean_r1", agg.mean_r1},
              {"bias", agg.bias},
              {"sd_r1", agg.sd_r1},
              {"mean_cos_x", agg.mean_cos_x},
              {"sd_cos_x", agg.sd_cos_x},
              {"mean_cos_y", agg.mean_cos_y},
              {"sd_cos_y", agg.sd_cos_y},
              {"mean_varcor_x", agg.mean_varcor_x},
              {"mean_varcor_y", agg.mean_varcor_y},
              {"failures", agg.failures}};
}

}  // namespace

json sim_report_to_json(const SimReport& report) {
  json replicates = json::array();
  for (const auto& m : report.replicates) {
    replicates.push_back(json{{"rep", m.rep},
                              {"lcca",
                               {{"ok", m.lcca_ok},
                                {"selected_d", m.lcca_d},
                                {"r1", m.lcca_r1},
                                {"cos_x", m.lcca_cos_x},
                                {"cos_y", m.lcca_cos_y},
                                {"varcor_x", m.lcca_varcor_x},
                                {"varcor_y", m.lcca_varcor_y},
                                {"error", m.lcca_error}}},
                              {"naive",
                               {{"ok", m.naive_ok},
                                {"selected_d", m.naive_d},
                                {"r1", m.naive_r1},
                                {"cos_x", m.naive_cos_x},
                                {"cos_y", m.naive_cos_y},
                                {"varcor_x", m.naive_varcor_x},
                                {"varcor_y", m.naive_varcor_y},
                                {"error", m.naive_error}}}});
  }
  return json{{"config", sim_config_to_json(report.config)},
              {"aggregates",
               {{"lcca", aggregates_to_json(report.lcca)},
                {"naive", aggregates_to_json(report.naive)}}},
              {"replicates", std::move(replicates)}};
}

std::string replicates_csv(const SimReport& report) {
  std::ostringstream out;
  out << "rep,method,ok,selected_d,r1,cos_x,cos_y,varcor_x,varcor_y\n";
  for (const auto& m : report.replicates) {
    out << m.rep << ",lcca," << (m.lcca_ok ? 1 : 0) << ',' << m.lcca_d << ','
        << format_double(m.lcca_r1) << ',' << format_double(m.lcca_cos_x) << ','
        << format_double(m.lcca_cos_y) << ',' << format_double(m.lcca_varcor_x) << ','
        << format_double(m.lcca_varcor_y) << '\n';
    out << m.rep << ",naive," << (m.naive_ok ? 1 : 0) << ',' << m.naive_d << ','
        << format_double(m.naive_r1) << ',' << format_double(m.naive_cos_x) << ','
        << format_double(m.naive_cos_y) << ',' << format_double(m.naive_varcor_x) << ','
        << format_double(m.naive_varcor_y) << '\n';
  }
  return out.str();
}

}  // namespace lcca
