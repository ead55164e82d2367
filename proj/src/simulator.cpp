#include "lcca/simulator.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "lcca/errors.hpp"
#include "lcca/parallel.hpp"

namespace lcca {

namespace {

constexpr std::uint64_t kLoadingsStream = 0xffffffffffffffffull;

}  // namespace

void SimConfig::check() const {
  if (setting < 1 || setting > 3) throw ValidationError("setting must be 1, 2 or 3");
  if (n < 10) throw ValidationError("n must be at least 10");
  if (reps < 1) throw ValidationError("reps must be at least 1");
  if (!(r >= 0.0 && r < 1.0)) throw ValidationError("r must be in [0, 1)");
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw ValidationError("threshold must be in (0, 1]");
  if (noise_sd < 0.0) throw ValidationError("noise_sd must be nonnegative");
  if (p < 1 || q < 1) throw ValidationError("p and q must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must be in (0, 1)");
  if (ridge < 0.0) throw ValidationError("ridge must be nonnegative");
  if (setting == 3) {
    if (!(subgroup_proportion >= 0.1 && subgroup_proportion <= 0.5))
      throw ValidationError("subgroup_proportion must be in [0.1, 0.5]");
    if (subgroup_scale <= 0.0) throw ValidationError("subgroup_scale must be positive");
  }
  if (latent_dim() > 2 * std::min(p, q))
    throw ValidationError("latent dimension exceeds the stacked space");
}

Eigen::VectorXd SimConfig::spectrum() const {
  if (setting == 1) {
    Eigen::VectorXd v(3);
    v << 8.0, 4.0, 2.0;
    return v;
  }
  Eigen::VectorXd v(5);
  v << 45.4, 17.2, 7.0, 4.1, 3.8;
  return v;
}

std::vector<Eigen::VectorXd> gen_visit_times(int n, Rng& rng) {
  std::vector<Eigen::VectorXd> times;
  times.reserve(n);
  for (int i = 0; i < n; ++i) {
    const int j_count = 3 + rng.poisson(1.0);
    Eigen::VectorXd t(j_count);
    t[0] = 0.0;
    for (int j = 1; j < j_count; ++j) t[j] = t[j - 1] + rng.uniform(1.0, 2.0);
    times.push_back(std::move(t));
  }
  return times;
}

namespace {

void gram_schmidt(Eigen::MatrixXd& columns) {
  for (Eigen::Index c = 0; c < columns.cols(); ++c) {
    for (Eigen::Index prev = 0; prev < c; ++prev)
      columns.col(c) -= columns.col(prev).dot(columns.col(c)) * columns.col(prev);
    const double norm = columns.col(c).norm();
    if (norm < 1e-12) throw NumericalError("degenerate loading draw in Gram-Schmidt");
    columns.col(c) /= norm;
  }
}

// Component l constant +1 on the first half and -1 on the second half of its
// own index block; the blocks are disjoint, so the set is orthogonal by
// construction and Gram-Schmidt reduces to normalization.
Eigen::MatrixXd block_loadings(int stacked_dim, int n_components) {
  const int block = stacked_dim / n_components;
  if (block < 2) throw ValidationError("stacked dimension too small for block loadings");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(stacked_dim, n_components);
  for (int l = 0; l < n_components; ++l) {
    const int lo = l * block;
    for (int idx = 0; idx < block; ++idx)
      out(lo + idx, l) = idx < block / 2 ? 1.0 : -1.0;
  }
  gram_schmidt(out);
  return out;
}

// Gaussian draws smoothed with a centered moving average of window dim/10,
// applied separately to the intercept and slope halves.
Eigen::MatrixXd smooth_loadings(int obs_dim, int n_components, Rng& rng) {
  const int stacked = 2 * obs_dim;
  const int half_window = std::max(1, obs_dim / 10) / 2;
  Eigen::MatrixXd raw(stacked, n_components);
  for (int l = 0; l < n_components; ++l)
    for (int idx = 0; idx < stacked; ++idx) raw(idx, l) = rng.normal();

  Eigen::MatrixXd out(stacked, n_components);
  for (int l = 0; l < n_components; ++l)
    for (int idx = 0; idx < stacked; ++idx) {
      const int block_lo = idx < obs_dim ? 0 : obs_dim;
      const int block_hi = block_lo + obs_dim;
      const int lo = std::max(block_lo, idx - half_window);
      const int hi = std::min(block_hi - 1, idx + half_window);
      out(idx, l) = raw.col(l).segment(lo, hi - lo + 1).mean();
    }
  gram_schmidt(out);
  return out;
}

}  // namespace

LoadingSet gen_loadings(int setting, int p, int q, int n_components, Rng& rng) {
  if (n_components > 2 * std::min(p, q))
    throw ValidationError("more components than stacked dimensions");
  LoadingSet set;
  if (setting == 1) {
    set.x = block_loadings(2 * p, n_components);
    set.y = block_loadings(2 * q, n_components);
  } else {
    set.x = smooth_loadings(p, n_components, rng);
    set.y = smooth_loadings(q, n_components, rng);
  }
  return set;
}

ScoreDraw gen_scores(int n, const Eigen::VectorXd& eigenvalues, double r,
                     const std::optional<Subgroup3>& subgroups, Rng& rng) {
  if (!(r >= 0.0 && r < 1.0)) throw ValidationError("r must be in [0, 1)");
  if (subgroups && !(subgroups->proportion > 0.0 && subgroups->proportion < 1.0))
    throw ValidationError("subgroup proportion must be in (0, 1)");
  const int dim = static_cast<int>(eigenvalues.size());
  if (dim < 2) throw ValidationError("need at least two components");

  ScoreDraw draw;
  draw.x.resize(n, dim);
  draw.y.resize(n, dim);
  if (subgroups) draw.labels.resize(n);

  const double cross = std::sqrt(1.0 - r * r);
  for (int i = 0; i < n; ++i) {
    int label = 0;
    if (subgroups) {
      label = rng.uniform() < subgroups->proportion ? 1 : 0;
      draw.labels[i] = label;
    }
    for (int k = 0; k < dim; ++k) {
      if (k == 1) {
        if (subgroups) {
          if (label == 1) {
            draw.x(i, k) = subgroups->mean + rng.normal();
            draw.y(i, k) = subgroups->mean + rng.normal();
          } else {
            const double sd = std::sqrt(subgroups->scale);
            draw.x(i, k) = sd * rng.normal();
            draw.y(i, k) = sd * rng.normal();
          }
        } else {
          const double a = rng.normal();
          const double b = rng.normal();
          const double sd = std::sqrt(eigenvalues[k]);
          draw.x(i, k) = sd * a;
          draw.y(i, k) = sd * (r * a + cross * b);
        }
      } else {
        const double sd = std::sqrt(eigenvalues[k]);
        draw.x(i, k) = sd * rng.normal();
        draw.y(i, k) = sd * rng.normal();
      }
    }
  }
  return draw;
}

LongitudinalDataset synthesize(const Eigen::MatrixXd& loadings,
                               const Eigen::MatrixXd& scores,
                               const std::vector<Eigen::VectorXd>& times,
                               double noise_sd, const std::string& variable_prefix,
                               Rng& rng) {
  const int stacked = static_cast<int>(loadings.rows());
  if (stacked % 2 != 0) throw ValidationError("loadings must stack intercept and slope");
  const int p = stacked / 2;
  const int n = static_cast<int>(scores.rows());
  if (static_cast<int>(times.size()) != n)
    throw ValidationError("times and scores disagree on the subject count");
  if (loadings.cols() != scores.cols())
    throw ValidationError("loadings and scores disagree on the component count");

  const auto intercept = loadings.topRows(p);
  const auto slope = loadings.bottomRows(p);

  LongitudinalDataset ds;
  ds.variable_names.reserve(p);
  for (int v = 0; v < p; ++v) ds.variable_names.push_back(variable_prefix + std::to_string(v + 1));
  ds.subject_ids.reserve(n);
  ds.visit_times = times;
  ds.observations.reserve(n);
  for (int i = 0; i < n; ++i) {
    ds.subject_ids.push_back("s" + std::to_string(i + 1));
    const Eigen::VectorXd base = intercept * scores.row(i).transpose();
    const Eigen::VectorXd drift = slope * scores.row(i).transpose();
    Eigen::MatrixXd obs(times[i].size(), p);
    for (Eigen::Index j = 0; j < times[i].size(); ++j) {
      obs.row(j) = (base + times[i][j] * drift).transpose();
      for (int v = 0; v < p; ++v) obs(j, v) += noise_sd * rng.normal();
    }
    ds.observations.push_back(std::move(obs));
  }
  return ds;
}

LoadingSet study_loadings(const SimConfig& config) {
  Rng rng = derive_stream(config.seed, kLoadingsStream);
  return gen_loadings(config.setting, config.p, config.q, config.latent_dim(), rng);
}

GroundTruth gen_ground_truth(const SimConfig& config, const LoadingSet& loadings, Rng& rng) {
  std::optional<Subgroup3> subgroups;
  if (config.setting == 3)
    subgroups = Subgroup3{config.subgroup_proportion, config.subgroup_mean,
                          config.subgroup_scale};
  ScoreDraw draw = gen_scores(config.n, config.spectrum(), config.r, subgroups, rng);
  GroundTruth truth;
  truth.loadings = loadings;
  truth.eigenvalues = config.spectrum();
  truth.scores_x = std::move(draw.x);
  truth.scores_y = std::move(draw.y);
  truth.labels = std::move(draw.labels);
  truth.correlated_component = 1;
  return truth;
}

namespace {

double abs_cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::abs(a.dot(b)) / (na * nb);
}

double abs_pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd ac = a.array() - a.mean();
  const Eigen::VectorXd bc = b.array() - b.mean();
  return abs_cosine(ac, bc);
}

}  // namespace

ReplicateMetrics evaluate_replicate(const GroundTruth& truth, const LccaFit* lcca_fit,
                                    const NaiveFit* naive_fit) {
  ReplicateMetrics metrics;
  const Eigen::VectorXd true_x = truth.loadings.x.col(truth.correlated_component);
  const Eigen::VectorXd true_y = truth.loadings.y.col(truth.correlated_component);
  const Eigen::VectorXd true_scores_x = truth.scores_x.col(truth.correlated_component);
  const Eigen::VectorXd true_scores_y = truth.scores_y.col(truth.correlated_component);

  if (lcca_fit) {
    metrics.lcca_ok = true;
    metrics.lcca_d = lcca_fit->wilks.selected_d;
    metrics.lcca_r1 = lcca_fit->cca.correlations[0];
    metrics.lcca_cos_x =
        abs_cosine(lcca_fit->model_x.loadings * lcca_fit->cca.weights_x.col(0), true_x);
    metrics.lcca_cos_y =
        abs_cosine(lcca_fit->model_y.loadings * lcca_fit->cca.weights_y.col(0), true_y);
    metrics.lcca_varcor_x = abs_pearson(true_scores_x, lcca_fit->cca.variates_x.col(0));
    metrics.lcca_varcor_y = abs_pearson(true_scores_y, lcca_fit->cca.variates_y.col(0));
  }
  if (naive_fit) {
    metrics.naive_ok = true;
    metrics.naive_d = naive_fit->naive.wilks.selected_d;
    metrics.naive_r1 = naive_fit->naive.cca.correlations[0];
    metrics.naive_cos_x = abs_cosine(naive_fit->naive.stacked_vector(0, true), true_x);
    metrics.naive_cos_y = abs_cosine(naive_fit->naive.stacked_vector(0, false), true_y);
    metrics.naive_varcor_x =
        abs_pearson(true_scores_x, naive_fit->naive.cca.variates_x.col(0));
    metrics.naive_varcor_y =
        abs_pearson(true_scores_y, naive_fit->naive.cca.variates_y.col(0));
  }
  return metrics;
}

ReplicateMetrics run_replicate(const SimConfig& config, const LoadingSet& loadings, int rep) {
  Rng rng = derive_stream(config.seed, static_cast<std::uint64_t>(rep));
  const auto times_x = gen_visit_times(config.n, rng);
  const auto times_y = gen_visit_times(config.n, rng);
  const GroundTruth truth = gen_ground_truth(config, loadings, rng);
  const LongitudinalDataset ds_x =
      synthesize(loadings.x, truth.scores_x, times_x, config.noise_sd, "x", rng);
  const LongitudinalDataset ds_y =
      synthesize(loadings.y, truth.scores_y, times_y, config.noise_sd, "y", rng);

  FitOptions options;
  options.threshold = config.threshold;
  options.alpha = config.alpha;
  options.ridge = config.ridge;

  LccaFit lcca_fit;
  NaiveFit naive_fit;
  bool lcca_ok = false, naive_ok = false;
  std::string lcca_error, naive_error;
  try {
    lcca_fit = fit_lcca(ds_x, ds_y, options);
    lcca_ok = true;
  } catch (const std::exception& e) {
    lcca_error = e.what();
  }
  try {
    naive_fit = fit_naive(ds_x, ds_y, options);
    naive_ok = true;
  } catch (const std::exception& e) {
    naive_error = e.what();
  }

  ReplicateMetrics metrics = evaluate_replicate(truth, lcca_ok ? &lcca_fit : nullptr,
                                                naive_ok ? &naive_fit : nullptr);
  metrics.rep = rep;
  metrics.lcca_error = std::move(lcca_error);
  metrics.naive_error = std::move(naive_error);
  return metrics;
}

namespace {

struct Welford {
  long count = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double v) {
    ++count;
    const double d = v - mean;
    mean += d / count;
    m2 += d * (v - mean);
  }
  double sd() const { return count > 1 ? std::sqrt(m2 / (count - 1)) : 0.0; }
};

}  // namespace

SimReport run_study(const SimConfig& config) {
  config.check();
  const LoadingSet loadings = study_loadings(config);

  SimReport report;
  report.config = config;
  report.replicates.resize(config.reps);
  parallel_for_index(config.reps, [&](std::ptrdiff_t k) {
    report.replicates[k] = run_replicate(config, loadings, static_cast<int>(k));
  });

  // Aggregation in replicate order over the successful fits of each method.
  auto aggregate = [&](bool lcca_side) {
    MethodAggregates agg;
    Welford d_stat, r1_stat, cos_x_stat, cos_y_stat, varcor_x_stat, varcor_y_stat;
    long selected_one = 0;
    for (const auto& m : report.replicates) {
      const bool ok = lcca_side ? m.lcca_ok : m.naive_ok;
      if (!ok) {
        ++agg.failures;
        continue;
      }
      const int d = lcca_side ? m.lcca_d : m.naive_d;
      d_stat.add(d);
      if (d == 1) ++selected_one;
      r1_stat.add(lcca_side ? m.lcca_r1 : m.naive_r1);
      cos_x_stat.add(lcca_side ? m.lcca_cos_x : m.naive_cos_x);
      cos_y_stat.add(lcca_side ? m.lcca_cos_y : m.naive_cos_y);
      varcor_x_stat.add(lcca_side ? m.lcca_varcor_x : m.naive_varcor_x);
      varcor_y_stat.add(lcca_side ? m.lcca_varcor_y : m.naive_varcor_y);
    }
    if (d_stat.count > 0) {
      agg.mean_selected = d_stat.mean;
      agg.frac_selected_one = static_cast<double>(selected_one) / d_stat.count;
      agg.mean_r1 = r1_stat.mean;
      agg.bias = r1_stat.mean - config.r;
      agg.sd_r1 = r1_stat.sd();
      agg.mean_cos_x = cos_x_stat.mean;
      agg.sd_cos_x = cos_x_stat.sd();
      agg.mean_cos_y = cos_y_stat.mean;
      agg.sd_cos_y = cos_y_stat.sd();
      agg.mean_varcor_x = varcor_x_stat.mean;
      agg.mean_varcor_y = varcor_y_stat.mean;
    }
    return agg;
  };
  report.lcca = aggregate(true);
  report.naive = aggregate(false);
  return report;
}

}  // namespace lcca
