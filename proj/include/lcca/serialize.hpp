#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "lcca/cca.hpp"
#include "lcca/dataset.hpp"
#include "lcca/lpca.hpp"
#include "lcca/naive.hpp"
#include "lcca/simulator.hpp"

namespace lcca {

using json = nlohmann::ordered_json;

/// printf %.17g: enough digits to reproduce any double exactly.
std::string format_double(double v);

json basis_to_json(const BasisSpec& basis);
BasisSpec basis_from_json(const json& j);

json validation_to_json(const ValidationReport& report);

/// {basis, eigenvalues, noise_variance, loadings (row-major), variance_explained}
json lpca_to_json(const LpcaModel& model);
LpcaModel lpca_from_json(const json& j);

/// Shared result schema for the longitudinal and the naive method:
/// {method, correlations, selected_d, tests:[{m, lambda, nu, df1, df2, F, p}],
///  weights_x, weights_y}
json cca_report_json(const CcaModel& cca, const WilksReport& wilks,
                     const std::string& method);

/// CSV `set,pair,variable,time,value`, one row per retained variable and grid
/// time, for both sets of canonical vectors.
std::string display_tables_csv(const DisplayTable& x_table, const DisplayTable& y_table);

/// CSV of per-subject canonical variates, one column per variate.
std::string variates_csv(const CcaModel& cca, const std::vector<std::string>& subject_ids);

json sim_config_to_json(const SimConfig& config);
SimConfig sim_config_from_json(const json& j);

json sim_report_to_json(const SimReport& report);

/// Flat CSV, one row per replicate per method.
std::string replicates_csv(const SimReport& report);

}  // namespace lcca
