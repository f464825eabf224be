#include "motsim/align.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "motsim/assoc.hpp"

namespace motsim {

nlohmann::json AlignmentMap::to_json() const {
  nlohmann::json doc;
  doc["dimension"] = matrix.rows();
  auto& rows = doc["matrix"] = nlohmann::json::array();
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
      rows.push_back(matrix(r, c));  // row-major
    }
  }
  auto& b = doc["bias"] = nlohmann::json::array();
  for (Eigen::Index i = 0; i < bias.size(); ++i) b.push_back(bias(i));
  doc["residual"] = fit_residual;
  return doc;
}

AlignmentMap AlignmentMap::from_json(const nlohmann::json& doc) {
  const auto d = doc.at("dimension").get<Eigen::Index>();
  const auto& m = doc.at("matrix");
  const auto& b = doc.at("bias");
  if (static_cast<Eigen::Index>(m.size()) != d * d ||
      static_cast<Eigen::Index>(b.size()) != d) {
    throw std::invalid_argument("AlignmentMap: inconsistent JSON dimensions");
  }
  AlignmentMap map;
  map.matrix.resize(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      map.matrix(r, c) = m[r * d + c].get<double>();
    }
  }
  map.bias.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) map.bias(i) = b[i].get<double>();
  map.fit_residual = doc.value("residual", 0.0);
  return map;
}

AlignmentMap fit_alignment(
    const std::vector<std::pair<FeatureVector, FeatureVector>>& pairs) {
  if (pairs.empty()) {
    throw std::invalid_argument("fit_alignment: no pairs");
  }
  const Eigen::Index d = pairs.front().first.size();
  const Eigen::Index n = static_cast<Eigen::Index>(pairs.size());
  if (n < d + 1) {
    throw std::invalid_argument(
        "fit_alignment: need at least d+1 pairs, got " + std::to_string(n) +
        " for dimension " + std::to_string(d));
  }

  Eigen::MatrixXd design(n, d + 1);
  Eigen::MatrixXd target(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (pairs[i].first.size() != d || pairs[i].second.size() != d) {
      throw std::invalid_argument("fit_alignment: inconsistent dimensions");
    }
    design.row(i).head(d) = pairs[i].first.transpose();
    design(i, d) = 1.0;
    target.row(i) = pairs[i].second.transpose();
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < d + 1) {
    throw std::invalid_argument(
        "fit_alignment: sample matrix is rank deficient (rank " +
        std::to_string(qr.rank()) + " < " + std::to_string(d + 1) + ")");
  }
  const Eigen::MatrixXd solution = qr.solve(target);  // (d+1) x d

  AlignmentMap map;
  map.matrix = solution.topRows(d).transpose();
  map.bias = solution.row(d).transpose();
  map.fit_residual =
      std::sqrt((design * solution - target).squaredNorm() / n);
  return map;
}

FeatureVector apply_alignment(const AlignmentMap& map,
                              const FeatureVector& f) {
  if (f.size() != map.matrix.cols()) {
    throw std::invalid_argument("apply_alignment: dimension mismatch");
  }
  return map.matrix * f + map.bias;
}

PivotMap fit_pivots(const std::vector<LabeledFeature>& samples) {
  if (samples.empty()) {
    throw std::invalid_argument("fit_pivots: no samples");
  }
  const Eigen::Index d = samples.front().feature.size();
  struct Accum {
    Eigen::VectorXd sum[2];
    int count[2] = {0, 0};
  };
  std::map<int, Accum> by_identity;
  for (const auto& sample : samples) {
    if (sample.feature.size() != d) {
      throw std::invalid_argument("fit_pivots: inconsistent dimensions");
    }
    auto& acc = by_identity[sample.identity];
    const int domain = sample.domain == ModelSource::kTeacher ? 0 : 1;
    if (acc.count[domain] == 0) acc.sum[domain] = Eigen::VectorXd::Zero(d);
    acc.sum[domain] += sample.feature;
    ++acc.count[domain];
  }

  PivotMap pivots;
  pivots.teacher_pivots.resize(static_cast<Eigen::Index>(by_identity.size()),
                               d);
  pivots.student_pivots.resize(static_cast<Eigen::Index>(by_identity.size()),
                               d);
  Eigen::Index row = 0;
  for (const auto& [identity, acc] : by_identity) {
    if (acc.count[0] == 0 || acc.count[1] == 0) {
      throw std::invalid_argument("fit_pivots: identity " +
                                  std::to_string(identity) +
                                  " missing in one domain");
    }
    pivots.identities.push_back(identity);
    pivots.teacher_pivots.row(row) = (acc.sum[0] / acc.count[0]).transpose();
    pivots.student_pivots.row(row) = (acc.sum[1] / acc.count[1]).transpose();
    ++row;
  }
  return pivots;
}

Eigen::VectorXd pivot_project(const PivotMap& pivots, ModelSource domain,
                              const FeatureVector& f) {
  const Eigen::MatrixXd& table = domain == ModelSource::kTeacher
                                     ? pivots.teacher_pivots
                                     : pivots.student_pivots;
  Eigen::VectorXd similarity(table.rows());
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    similarity(i) = cosine_similarity(table.row(i).transpose(), f);
  }
  return similarity;
}

double combined_loss(const LossComponents& components,
                     const LossWeights& weights) {
  return 0.5 * (std::exp(-weights.omega1) *
                    (components.heatmap_loss + components.box_loss) +
                std::exp(-weights.omega2) * components.identity_loss +
                weights.omega1 + weights.omega2);
}

double id_attention_loss(const std::vector<FeatureVector>& student_features,
                         const std::vector<FeatureVector>& teacher_features) {
  if (student_features.size() != teacher_features.size()) {
    throw std::invalid_argument("id_attention_loss: length mismatch");
  }
  if (student_features.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < student_features.size(); ++i) {
    if (student_features[i].size() != teacher_features[i].size()) {
      throw std::invalid_argument("id_attention_loss: dimension mismatch");
    }
    total += (student_features[i] - teacher_features[i]).squaredNorm();
  }
  return total / static_cast<double>(student_features.size());
}

}  // namespace motsim
