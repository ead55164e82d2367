#include "lcca/dataset.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "lcca/errors.hpp"

namespace lcca {

long LongitudinalDataset::total_visits() const {
  long total = 0;
  for (const auto& t : visit_times) total += t.size();
  return total;
}

Eigen::VectorXd MeanModel::predict(double t) const {
  return coefficients * eval_basis(basis, t);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& field, long line_no) {
  const std::string s = trim(field);
  double value = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    throw ParseError("non-numeric cell '" + field + "'", line_no);
  return value;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct SubjectRows {
  std::vector<double> times;
  std::vector<std::vector<double>> values;
};

}  // namespace

LongitudinalDataset parse_long_csv(std::istream& in, std::optional<int> expected_dim) {
  std::string line;
  long line_no = 0;

  // Header
  if (!std::getline(in, line)) throw ParseError("empty file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_csv_line(line);
  if (header.size() < 3)
    throw ParseError("header must be subject_id,time,<v1>,...", line_no);
  if (trim(header[0]) != "subject_id" || trim(header[1]) != "time")
    throw ParseError("header must start with subject_id,time", line_no);

  LongitudinalDataset ds;
  for (std::size_t k = 2; k < header.size(); ++k)
    ds.variable_names.push_back(trim(header[k]));
  const int p = static_cast<int>(ds.variable_names.size());
  if (expected_dim && *expected_dim != p)
    throw ValidationError("expected " + std::to_string(*expected_dim) +
                          " variables, file has " + std::to_string(p));

  std::unordered_map<std::string, std::size_t> index;
  std::vector<SubjectRows> rows;
  bool any_row = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " columns, got " +
                           std::to_string(fields.size()),
                       line_no);
    const std::string id = trim(fields[0]);
    const double time = parse_number(fields[1], line_no);
    std::vector<double> values(p);
    for (int k = 0; k < p; ++k) values[k] = parse_number(fields[k + 2], line_no);

    auto [it, inserted] = index.try_emplace(id, rows.size());
    if (inserted) {
      ds.subject_ids.push_back(id);
      rows.emplace_back();
    }
    auto& subj = rows[it->second];
    if (std::find(subj.times.begin(), subj.times.end(), time) != subj.times.end())
      throw ValidationError("duplicate (subject, time) pair: (" + id + ", " + fmt17(time) + ")");
    subj.times.push_back(time);
    subj.values.push_back(std::move(values));
    any_row = true;
  }
  if (!any_row) throw ParseError("no data rows");

  // Sort each subject by time and pack into matrices.
  ds.visit_times.reserve(rows.size());
  ds.observations.reserve(rows.size());
  for (auto& subj : rows) {
    const int j_count = static_cast<int>(subj.times.size());
    std::vector<int> order(j_count);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return subj.times[a] < subj.times[b]; });
    Eigen::VectorXd times(j_count);
    Eigen::MatrixXd obs(j_count, p);
    for (int j = 0; j < j_count; ++j) {
      times[j] = subj.times[order[j]];
      for (int k = 0; k < p; ++k) obs(j, k) = subj.values[order[j]][k];
    }
    ds.visit_times.push_back(std::move(times));
    ds.observations.push_back(std::move(obs));
  }
  return ds;
}

LongitudinalDataset parse_long_csv_file(const std::string& path, std::optional<int> expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  return parse_long_csv(in, expected_dim);
}

void serialize_long_csv(const LongitudinalDataset& ds, std::ostream& out) {
  out << "subject_id,time";
  for (const auto& name : ds.variable_names) out << ',' << name;
  out << '\n';
  for (int i = 0; i < ds.n(); ++i) {
    const auto& times = ds.visit_times[i];
    const auto& obs = ds.observations[i];
    for (Eigen::Index j = 0; j < times.size(); ++j) {
      out << ds.subject_ids[i] << ',' << fmt17(times[j]);
      for (Eigen::Index k = 0; k < obs.cols(); ++k) out << ',' << fmt17(obs(j, k));
      out << '\n';
    }
  }
}

std::string serialize_long_csv(const LongitudinalDataset& ds) {
  std::ostringstream out;
  serialize_long_csv(ds, out);
  return out.str();
}

ValidationReport validate(const LongitudinalDataset& ds) {
  ValidationReport report;
  report.n = ds.n();
  report.p = ds.p();
  if (ds.n() == 0) throw ValidationError("dataset has no subjects");

  report.visits_min = std::numeric_limits<int>::max();
  report.time_lo = std::numeric_limits<double>::infinity();
  report.time_hi = -std::numeric_limits<double>::infinity();
  long total_visits = 0;
  for (int i = 0; i < ds.n(); ++i) {
    const int j_count = static_cast<int>(ds.visit_times[i].size());
    total_visits += j_count;
    report.visits_min = std::min(report.visits_min, j_count);
    report.visits_max = std::max(report.visits_max, j_count);
    report.time_lo = std::min(report.time_lo, ds.visit_times[i].minCoeff());
    report.time_hi = std::max(report.time_hi, ds.visit_times[i].maxCoeff());
    if (!ds.visit_times[i].allFinite() || !ds.observations[i].allFinite())
      throw ValidationError("non-finite value for subject " + ds.subject_ids[i]);
    if (j_count == 1)
      report.warnings.push_back("subject " + ds.subject_ids[i] + " has a single visit");
  }
  report.visits_mean = static_cast<double>(total_visits) / ds.n();

  // Constant variables: identical value at every visit of every subject.
  for (int k = 0; k < ds.p(); ++k) {
    const double first = ds.observations[0](0, k);
    bool constant = true;
    for (int i = 0; i < ds.n() && constant; ++i)
      constant = (ds.observations[i].col(k).array() == first).all();
    if (constant)
      report.warnings.push_back("variable " + ds.variable_names[k] +
                                " is constant (zero variance)");
  }
  return report;
}

std::pair<CenteredDataset, MeanModel> center(const LongitudinalDataset& ds,
                                             const BasisSpec& basis) {
  const int r = basis.size();
  const long rows = ds.total_visits();
  if (rows < r)
    throw NumericalError("centering: " + std::to_string(rows) +
                         " visits cannot identify " + std::to_string(r) +
                         " mean coefficients");

  Eigen::MatrixXd design(rows, r);
  Eigen::MatrixXd response(rows, ds.p());
  long row = 0;
  for (int i = 0; i < ds.n(); ++i) {
    for (Eigen::Index j = 0; j < ds.visit_times[i].size(); ++j, ++row) {
      design.row(row) = eval_basis(basis, ds.visit_times[i][j]);
      response.row(row) = ds.observations[i].row(j);
    }
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < r)
    throw NumericalError("centering design is rank-deficient (rank " +
                         std::to_string(qr.rank()) + " < " + std::to_string(r) +
                         " basis functions); visit times do not span the basis");
  Eigen::MatrixXd coef = qr.solve(response);  // R x p

  MeanModel mean{coef.transpose(), basis};
  CenteredDataset centered{ds};
  for (int i = 0; i < ds.n(); ++i) {
    auto& obs = centered.data.observations[i];
    for (Eigen::Index j = 0; j < ds.visit_times[i].size(); ++j)
      obs.row(j) -= (coef.transpose() * eval_basis(basis, ds.visit_times[i][j])).transpose();
  }
  return {std::move(centered), std::move(mean)};
}

}  // namespace lcca
