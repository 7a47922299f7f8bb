#ifndef TLBEE_ESTIMATORS_HPP
#define TLBEE_ESTIMATORS_HPP

#include <functional>
#include <string>
#include <vector>

#include "tlbee/classifiers.hpp"

namespace tlbee {

struct BeeConfig {
  int N = 1000;                 // importance-sample count
  int n_test_per_theta = 1000;  // MC test points per draw per class
  bool use_control_variate = true;
  double c = 0.5;
};

struct BeeResult {
  double estimate = 0.0;
  std::array<double, 2> per_class{0.0, 0.0};
  std::array<double, 2> beta_hat{0.0, 0.0};
  std::array<double, 2> cv_correlation{0.0, 0.0};
  std::array<double, 2> ess{0.0, 0.0};
  std::vector<std::string> flags;
};

/// Deterministic mapping from a target training set to a classifier.
using TrainableRule = std::function<Classifier(const LabeledDataset&)>;

/// True error of clf on class y under theta: analytic for linear rules,
/// Monte Carlo otherwise.
double class_error_given_theta(const Classifier& clf,
                               const DomainClassParams& theta_y, int y,
                               const BeeConfig& cfg, Rng& rng);

/// Closed-form expectation of the control-variate function under the
/// importance density.
double cv_expectation(const ImportanceDensity& phi, const LinearClassifier& g,
                      int y);

/// Transfer-learning Bayesian MMSE error estimate of a fixed classifier.
BeeResult tl_bee(const Classifier& clf, const LabeledDataset& data_t,
                 const LabeledDataset& data_s, const JointHyper& hyper,
                 const BeeConfig& cfg, Rng& rng);

/// Target-only Bayesian MMSE error estimate (all weights 1).
BeeResult target_bee(const Classifier& clf, const LabeledDataset& data_t,
                     const JointHyper& hyper, const BeeConfig& cfg, Rng& rng);

double resubstitution(const TrainableRule& rule, const LabeledDataset& data_t);

double cross_validation(const TrainableRule& rule, const LabeledDataset& data_t,
                        int k, int reps, Rng& rng);

double loo(const TrainableRule& rule, const LabeledDataset& data_t);

double bootstrap632(const TrainableRule& rule, const LabeledDataset& data_t,
                    int B, Rng& rng);

}  // namespace tlbee

#endif  // TLBEE_ESTIMATORS_HPP
