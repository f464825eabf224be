#include <doctest.h>

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "motsim/align.hpp"

using namespace motsim;

namespace {

Eigen::MatrixXd random_rotation(int dim, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) m(r, c) = gauss(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd diag = qr.matrixQR().diagonal();
  for (int i = 0; i < dim; ++i) {
    if (diag(i) < 0.0) q.col(i) = -q.col(i);
  }
  return q;
}

std::vector<std::pair<FeatureVector, FeatureVector>> make_pairs(
    const Eigen::MatrixXd& map, const Eigen::VectorXd& bias, int count,
    unsigned seed, double noise_std = 0.0) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, noise_std);
  std::vector<std::pair<FeatureVector, FeatureVector>> pairs;
  const int dim = static_cast<int>(map.rows());
  for (int i = 0; i < count; ++i) {
    FeatureVector f(dim);
    for (int j = 0; j < dim; ++j) f(j) = gauss(rng);
    FeatureVector g = map * f + bias;
    if (noise_std > 0.0) {
      for (int j = 0; j < dim; ++j) g(j) += noise(rng);
    }
    pairs.emplace_back(f, g);
  }
  return pairs;
}

FeatureVector make_feature(std::initializer_list<double> values) {
  FeatureVector f(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) f(i++) = v;
  return f;
}

}  // namespace

TEST_CASE("fit recovers a known rotation plus offset") {
  const int dim = 8;
  const Eigen::MatrixXd truth = random_rotation(dim, 5);
  Eigen::VectorXd bias(dim);
  bias.setLinSpaced(dim, -1.0, 1.0);
  const auto pairs = make_pairs(truth, bias, 40, 6);
  const AlignmentMap fitted = fit_alignment(pairs);
  CHECK((fitted.matrix - truth).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((fitted.bias - bias).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(fitted.fit_residual < 1e-8);
}

TEST_CASE("fit on identical pairs is the identity map") {
  const int dim = 4;
  const auto pairs = make_pairs(Eigen::MatrixXd::Identity(dim, dim),
                                Eigen::VectorXd::Zero(dim), 20, 7);
  const AlignmentMap fitted = fit_alignment(pairs);
  CHECK((fitted.matrix - Eigen::MatrixXd::Identity(dim, dim))
            .cwiseAbs()
            .maxCoeff() < 1e-9);
  CHECK(fitted.bias.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("fit rejects underdetermined sample sets") {
  const int dim = 6;
  const auto pairs = make_pairs(Eigen::MatrixXd::Identity(dim, dim),
                                Eigen::VectorXd::Zero(dim), dim, 8);
  CHECK_THROWS_AS(fit_alignment(pairs), std::invalid_argument);
  CHECK_THROWS_AS(fit_alignment({}), std::invalid_argument);
}

TEST_CASE("fit rejects rank-deficient samples") {
  // All inputs identical: d+5 pairs but a degenerate design.
  std::vector<std::pair<FeatureVector, FeatureVector>> pairs;
  const FeatureVector f = make_feature({1, 2, 3});
  for (int i = 0; i < 8; ++i) pairs.emplace_back(f, f);
  CHECK_THROWS_AS(fit_alignment(pairs), std::invalid_argument);
}

TEST_CASE("apply_alignment checks dimensions") {
  AlignmentMap map;
  map.matrix = Eigen::MatrixXd::Identity(3, 3);
  map.bias = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(apply_alignment(map, make_feature({1, 2})),
                  std::invalid_argument);
  const FeatureVector f = make_feature({1, 2, 3});
  CHECK(apply_alignment(map, f) == f);
}

TEST_CASE("held-out residual stays near the fit residual under noise") {
  const int dim = 6;
  const Eigen::MatrixXd truth = random_rotation(dim, 11);
  const Eigen::VectorXd bias = Eigen::VectorXd::Constant(dim, 0.25);
  const double noise_std = 0.05;
  const auto train = make_pairs(truth, bias, 120, 12, noise_std);
  const auto held_out = make_pairs(truth, bias, 120, 13, noise_std);
  const AlignmentMap fitted = fit_alignment(train);

  double sq = 0.0;
  for (const auto& [f, g] : held_out) {
    sq += (apply_alignment(fitted, f) - g).squaredNorm();
  }
  const double held_out_rms = std::sqrt(sq / held_out.size());
  CHECK(held_out_rms <= 2.0 * fitted.fit_residual + 1e-12);
}

TEST_CASE("more training pairs do not hurt held-out accuracy much") {
  const int dim = 6;
  const Eigen::MatrixXd truth = random_rotation(dim, 21);
  const Eigen::VectorXd bias = Eigen::VectorXd::Zero(dim);
  const auto held_out = make_pairs(truth, bias, 200, 22, 0.05);

  auto held_out_rms = [&](int n_train) {
    const AlignmentMap fitted =
        fit_alignment(make_pairs(truth, bias, n_train, 23, 0.05));
    double sq = 0.0;
    for (const auto& [f, g] : held_out) {
      sq += (apply_alignment(fitted, f) - g).squaredNorm();
    }
    return std::sqrt(sq / held_out.size());
  };

  CHECK(held_out_rms(200) <= held_out_rms(10) + 1e-9);
}

TEST_CASE("alignment map json round trip") {
  AlignmentMap map;
  map.matrix = random_rotation(4, 3);
  map.bias = Eigen::VectorXd::LinSpaced(4, -2.0, 2.0);
  map.fit_residual = 0.125;
  const AlignmentMap back = AlignmentMap::from_json(map.to_json());
  CHECK(back.matrix == map.matrix);
  CHECK(back.bias == map.bias);
  CHECK(back.fit_residual == map.fit_residual);
}

TEST_CASE("pivot projection is stable across feature domains") {
  const int dim = 8;
  const Eigen::MatrixXd rotation = random_rotation(dim, 41);
  std::mt19937 rng(42);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<LabeledFeature> samples;
  std::vector<FeatureVector> identities;
  for (int id = 1; id <= 3; ++id) {
    FeatureVector base(dim);
    for (int j = 0; j < dim; ++j) base(j) = gauss(rng);
    base.normalize();
    identities.push_back(base);
    for (int k = 0; k < 5; ++k) {
      samples.push_back({id, ModelSource::kTeacher, base});
      samples.push_back({id, ModelSource::kStudent, rotation * base});
    }
  }
  const PivotMap pivots = fit_pivots(samples);
  CHECK(pivots.identities == std::vector<int>{1, 2, 3});

  // The same identity seen through either domain should project to nearly
  // the same similarity signature.
  for (int i = 0; i < 3; ++i) {
    const Eigen::VectorXd via_teacher =
        pivot_project(pivots, ModelSource::kTeacher, identities[i]);
    const Eigen::VectorXd via_student = pivot_project(
        pivots, ModelSource::kStudent, rotation * identities[i]);
    CHECK((via_teacher - via_student).cwiseAbs().maxCoeff() < 1e-9);
    Eigen::Index best;
    via_teacher.maxCoeff(&best);
    CHECK(best == i);
  }
}

TEST_CASE("pivot fitting requires both domains per identity") {
  std::vector<LabeledFeature> samples = {
      {1, ModelSource::kTeacher, make_feature({1, 0})},
      {1, ModelSource::kStudent, make_feature({1, 0})},
      {2, ModelSource::kTeacher, make_feature({0, 1})}};
  CHECK_THROWS_AS(fit_pivots(samples), std::invalid_argument);
}

TEST_CASE("combined loss fixed values") {
  const LossComponents parts{0.4, 0.6, 1.0};
  CHECK(combined_loss(parts, {0.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-12));
  const double ln2 = std::log(2.0);
  CHECK(combined_loss(parts, {ln2, 0.0}) ==
        doctest::Approx(1.0966).epsilon(1e-4));
}

TEST_CASE("combined loss penalizes extreme uncertainty weights") {
  const LossComponents parts{0.4, 0.6, 1.0};
  const double base = combined_loss(parts, {0.0, 0.0});
  CHECK(combined_loss(parts, {50.0, 50.0}) > base);
  CHECK(combined_loss(parts, {-50.0, -50.0}) > base);
}

TEST_CASE("id attention loss matches a per-pair oracle") {
  std::mt19937 rng(55);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<FeatureVector> student, teacher;
  double expected = 0.0;
  const int n = 7, dim = 5;
  for (int i = 0; i < n; ++i) {
    FeatureVector s(dim), t(dim);
    for (int j = 0; j < dim; ++j) {
      s(j) = gauss(rng);
      t(j) = gauss(rng);
    }
    student.push_back(s);
    teacher.push_back(t);
    double sq = 0.0;
    for (int j = 0; j < dim; ++j) sq += (s(j) - t(j)) * (s(j) - t(j));
    expected += sq;
  }
  expected /= n;
  CHECK(id_attention_loss(student, teacher) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("id attention loss edge cases") {
  const FeatureVector f = make_feature({1, 2, 3});
  CHECK(id_attention_loss({f}, {f}) == 0.0);
  CHECK_THROWS_AS(id_attention_loss({f}, {f, f}), std::invalid_argument);
  CHECK_THROWS_AS(id_attention_loss({f}, {make_feature({1, 2})}),
                  std::invalid_argument);
}
