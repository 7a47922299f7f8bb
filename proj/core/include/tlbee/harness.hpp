#ifndef TLBEE_HARNESS_HPP
#define TLBEE_HARNESS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tlbee/estimators.hpp"
#include "tlbee/toml_lite.hpp"

namespace tlbee {

/// Synthetic hyperparameter recipe: nu = d + 20, kappa = 100, unit scale
/// blocks, source means offset by 10 along the all-ones direction.
struct HyperRecipe {
  double nu = 0.0;  // 0 means d + 20
  double kappa_t = 100.0;
  double kappa_s = 100.0;
  double k_t = 1.0;
  double k_s = 1.0;
  double source_offset = 10.0;
};

/// m_t0 = 0, m_t1 = theta * 1; m_s^y = m_t^{y or 1-y} + offset * 1.
JointHyper make_synthetic_hyper(int d, double alpha, double theta,
                                const HyperRecipe& recipe, bool flip_source);

struct ExperimentConfig {
  int d = 2;
  std::vector<double> alphas{0.1, 0.5, 0.9, 0.95};
  std::vector<int> n_s_list{200};
  std::vector<int> n_t_list{10};  // per class
  double tau = 0.2;
  int N_d = 500;  // dataset replicates per prior draw
  int N_p = 5;    // outer prior replicates
  int N_is = 1000;
  int n_test = 1000;           // per class: calibration and true-error sets
  int n_test_per_theta = 250;  // per posterior draw, non-linear classifiers
  std::string classifier = "qda";  // qda | lda | obtl
  std::vector<std::string> estimators{"bee"};
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_path;
  std::string mode = "standard";  // standard | flipped | mislabeled
  std::string loop_order = "prior_outer";  // prior_outer | prior_inner
  bool use_control_variate = true;
  double calib_tol = 0.005;
  int calib_max_iter = 50;
  int cv_folds = 5;
  int cv_reps = 1;
  int boot_B = 100;
  HyperRecipe recipe;

  static ExperimentConfig from_toml(const TomlLite& toml);
  void validate() const;
};

struct MseRecord {
  int d = 0;
  double alpha = 0.0;
  int n_s = 0;
  int n_t = 0;
  double tau = 0.0;
  std::string classifier;
  std::string estimator;
  double mse = 0.0;
  int n_reps = 0;
  int skipped = 0;
  std::uint64_t seed = 0;
  double runtime_s = 0.0;
  std::string flags;
};

struct RnaSeqConfig {
  std::string target_csv;
  std::string source_csv;
  std::vector<std::string> features;
  int n_t_per_class = 5;
  std::vector<int> n_s_list{10, 30, 50};
  std::vector<double> alpha_grid{0.1, 0.3, 0.5, 0.7, 0.9, 0.99};
  int replicates = 10;
  int permutations = 10;
  double nu = 30.0;
  int N_is = 1000;
  std::uint64_t seed = 0;
  std::string out_path;

  static RnaSeqConfig from_toml(const TomlLite& toml);
};

struct CalibrationResult {
  double theta = 0.0;
  double achieved_error = 0.0;
  int iterations = 0;
  bool converged = false;
  std::array<DomainClassParams, 2> target_params;
};

/// Bisection on the class-1 mean offset until the true-parameter QDA test
/// error hits tau.  Means are redrawn per candidate with common random
/// numbers so the searched function is deterministic.
CalibrationResult calibrate_bayes_error(int d, const HyperRecipe& recipe,
                                        const std::array<Mat, 2>& lambda_t,
                                        double tau, double tol, int max_iter,
                                        int n_test, Rng& rng);

std::vector<MseRecord> run_fixed_classifier_sweep(const ExperimentConfig& cfg);

std::vector<MseRecord> run_obtl_comparison(const ExperimentConfig& cfg);

std::vector<MseRecord> run_flipped_means_sweep(const ExperimentConfig& cfg);

/// Standardization applied during RNA-seq ingestion, per feature.
struct IngestMeta {
  std::vector<std::string> features;
  std::vector<double> target_mean, target_scale;
  std::vector<double> source_mean, source_scale;
};

/// Reads the two CSVs, selects the configured features, standardizes each
/// feature over the pooled classes per domain.
void ingest_rnaseq_csv(const RnaSeqConfig& cfg, LabeledDataset& target,
                       LabeledDataset& source, IngestMeta& meta);

std::vector<MseRecord> run_rnaseq_alpha_sweep(const RnaSeqConfig& cfg);

/// Same sweep on caller-provided datasets (used for synthetic stand-ins).
std::vector<MseRecord> run_rnaseq_alpha_sweep(const RnaSeqConfig& cfg,
                                              const LabeledDataset& target,
                                              const LabeledDataset& source);

/// CSV with a fixed header plus a `.meta.json` sidecar describing the run.
void write_records(const std::vector<MseRecord>& records,
                   const std::string& path,
                   const std::map<std::string, std::string>& meta);

}  // namespace tlbee

#endif  // TLBEE_HARNESS_HPP
