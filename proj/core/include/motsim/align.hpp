#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "motsim/core.hpp"

namespace motsim {

/// Affine student-to-teacher feature mapping fitted by least squares.
struct AlignmentMap {
  Eigen::MatrixXd matrix;  // d x d
  Eigen::VectorXd bias;    // d
  double fit_residual = 0.0;  // RMS fit error

  nlohmann::json to_json() const;
  static AlignmentMap from_json(const nlohmann::json& doc);
};

/// Fits M, b minimizing sum ||M * f_student + b - f_teacher||^2.
/// Requires at least d+1 pairs; throws naming the deficiency when the sample
/// matrix is rank deficient.
AlignmentMap fit_alignment(
    const std::vector<std::pair<FeatureVector, FeatureVector>>& pairs);

/// M * f + b. Throws on dimension mismatch.
FeatureVector apply_alignment(const AlignmentMap& map, const FeatureVector& f);

/// Per-identity centroid features for each model domain. Projecting a query
/// onto its own domain's pivots yields a domain-independent
/// identity-similarity vector.
struct PivotMap {
  std::vector<int> identities;      // sorted, one entry per identity
  Eigen::MatrixXd teacher_pivots;   // n_identities x d
  Eigen::MatrixXd student_pivots;   // n_identities x d
};

struct LabeledFeature {
  int identity = 0;
  ModelSource domain = ModelSource::kTeacher;
  FeatureVector feature;
};

/// Centroids per (identity, domain); throws if an identity is missing in
/// either domain.
PivotMap fit_pivots(const std::vector<LabeledFeature>& samples);

/// Cosine similarity of f to each pivot of the given domain, ordered like
/// PivotMap::identities.
Eigen::VectorXd pivot_project(const PivotMap& pivots, ModelSource domain,
                              const FeatureVector& f);

struct LossComponents {
  double heatmap_loss = 0.0;
  double box_loss = 0.0;
  double identity_loss = 0.0;
};

struct LossWeights {
  double omega1 = 0.0;
  double omega2 = 0.0;
};

/// 0.5 * (e^-w1 * (L_heatmap + L_box) + e^-w2 * L_identity + w1 + w2).
double combined_loss(const LossComponents& components,
                     const LossWeights& weights);

/// Mean squared Euclidean distance over paired feature lists. Throws on
/// length or dimension mismatch.
double id_attention_loss(const std::vector<FeatureVector>& student_features,
                         const std::vector<FeatureVector>& teacher_features);

}  // namespace motsim
