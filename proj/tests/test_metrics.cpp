#include <doctest.h>

#include <random>

#include "motsim/metrics.hpp"

using namespace motsim;

namespace {

GroundTruthSequence two_object_world(int frames) {
  GroundTruthSequence gt;
  gt.arena_width = 400.0;
  gt.arena_height = 300.0;
  gt.feature_dim = 4;
  for (int f = 1; f <= frames; ++f) {
    GtFrame frame;
    frame.frame_index = f;
    for (int id = 1; id <= 2; ++id) {
      GtObject obj;
      obj.id = id;
      obj.box = BoundingBox(100.0 * id + 2.0 * f, 50.0, 20.0, 40.0);
      obj.embedding = identity_embedding(1, id, 4);
      frame.objects.push_back(obj);
    }
    gt.frames.push_back(frame);
  }
  return gt;
}

std::vector<ResultFrame> echo_ground_truth(const GroundTruthSequence& gt) {
  std::vector<ResultFrame> hyp;
  for (const auto& frame : gt.frames) {
    ResultFrame out;
    out.frame_index = frame.frame_index;
    for (const auto& obj : frame.objects) out.boxes.emplace_back(obj.id, obj.box);
    hyp.push_back(out);
  }
  return hyp;
}

}  // namespace

TEST_CASE("perfect hypotheses score MOTA and IDF1 of 1") {
  const auto gt = two_object_world(10);
  const auto report = clear_mot(gt, echo_ground_truth(gt));
  CHECK(report.mota == 1.0);
  CHECK(report.idf1 == 1.0);
  CHECK(report.fp == 0);
  CHECK(report.fn == 0);
  CHECK(report.idsw == 0);
  CHECK(report.gt_total == 20);
}

TEST_CASE("empty hypotheses score MOTA 0 with all misses") {
  const auto gt = two_object_world(5);
  const auto report = clear_mot(gt, {});
  CHECK(report.mota == 0.0);
  CHECK(report.fn == 10);
  CHECK(report.fp == 0);
  CHECK(report.idf1 == 0.0);
}

TEST_CASE("clear_mot rejects empty ground truth") {
  CHECK_THROWS_AS(clear_mot(GroundTruthSequence{}, {}), std::invalid_argument);
}

TEST_CASE("a mid-sequence identity swap costs two switches") {
  // Two objects tracked over three frames; the hypothesis ids trade places
  // from frame 2 on. Hand count: 6 matches, 2 switches, no FP/FN, so
  // MOTA = 1 - 2/6 = 0.6667.
  const auto gt = two_object_world(3);
  auto hyp = echo_ground_truth(gt);
  for (std::size_t f = 1; f < hyp.size(); ++f) {
    std::swap(hyp[f].boxes[0].first, hyp[f].boxes[1].first);
  }
  const auto report = clear_mot(gt, hyp);
  CHECK(report.idsw == 2);
  CHECK(report.fp == 0);
  CHECK(report.fn == 0);
  CHECK(report.mota == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  // IDF1 keeps whichever global pairing covers more frames: 4 of 6 boxes.
  CHECK(report.idf1 == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("relabeling every id consistently costs nothing") {
  const auto gt = two_object_world(8);
  auto hyp = echo_ground_truth(gt);
  for (auto& frame : hyp) {
    for (auto& [id, box] : frame.boxes) id += 1000;
  }
  const auto report = clear_mot(gt, hyp);
  CHECK(report.mota == 1.0);
  CHECK(report.idsw == 0);
  CHECK(report.idf1 == 1.0);
}

TEST_CASE("an unmatched extra box is one false positive per frame") {
  const auto gt = two_object_world(4);
  auto hyp = echo_ground_truth(gt);
  for (auto& frame : hyp) {
    frame.boxes.emplace_back(99, BoundingBox(350.0, 200.0, 10.0, 10.0));
  }
  const auto report = clear_mot(gt, hyp);
  CHECK(report.fp == 4);
  CHECK(report.fn == 0);
  CHECK(report.mota == doctest::Approx(1.0 - 4.0 / 8.0).epsilon(1e-9));
}

TEST_CASE("correspondences persist while they clear the gate") {
  // The hypothesis box drifts but keeps IoU above the gate, so no switch is
  // charged even when a closer id appears later.
  GroundTruthSequence gt = two_object_world(2);
  auto hyp = echo_ground_truth(gt);
  auto& drifted = hyp[1].boxes[0].second;
  drifted = BoundingBox(drifted.left() + 3.0, drifted.top(), drifted.width(),
                        drifted.height());
  const auto report = clear_mot(gt, hyp);
  CHECK(report.idsw == 0);
  CHECK(report.fn == 0);
  CHECK(report.fp == 0);
}

TEST_CASE("dropping a true positive never raises MOTA") {
  std::mt19937 rng(13);
  const auto gt = two_object_world(12);
  auto hyp = echo_ground_truth(gt);
  double previous = clear_mot(gt, hyp).mota;
  for (int step = 0; step < 10; ++step) {
    std::uniform_int_distribution<std::size_t> pick_frame(0, hyp.size() - 1);
    auto& frame = hyp[pick_frame(rng)];
    if (frame.boxes.empty()) continue;
    frame.boxes.pop_back();
    const double current = clear_mot(gt, hyp).mota;
    CHECK(current <= previous + 1e-12);
    previous = current;
  }
}

TEST_CASE("IDF1 with half-coverage hypotheses is 2/3") {
  // One gt object over 4 frames, tracked for only 2: IDTP 2, gt 4, hyp 2,
  // IDF1 = 2*2 / (4+2) = 2/3.
  GroundTruthSequence gt;
  gt.feature_dim = 4;
  std::vector<ResultFrame> hyp;
  for (int f = 1; f <= 4; ++f) {
    GtFrame frame;
    frame.frame_index = f;
    GtObject obj;
    obj.id = 1;
    obj.box = BoundingBox(10.0, 10.0, 20.0, 40.0);
    obj.embedding = identity_embedding(1, 1, 4);
    frame.objects.push_back(obj);
    gt.frames.push_back(frame);
    if (f <= 2) {
      ResultFrame out;
      out.frame_index = f;
      out.boxes.emplace_back(5, obj.box);
      hyp.push_back(out);
    }
  }
  CHECK(idf1(gt, hyp) == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("IDF1 picks the globally best identity pairing") {
  // One gt object, two hypothesis ids covering 1 and 3 frames. A global
  // assignment keeps the longer one: IDTP 3, IDF1 = 6/(4+4) = 0.75.
  GroundTruthSequence gt;
  gt.feature_dim = 4;
  std::vector<ResultFrame> hyp;
  for (int f = 1; f <= 4; ++f) {
    GtFrame frame;
    frame.frame_index = f;
    GtObject obj;
    obj.id = 1;
    obj.box = BoundingBox(10.0, 10.0, 20.0, 40.0);
    obj.embedding = identity_embedding(1, 1, 4);
    frame.objects.push_back(obj);
    gt.frames.push_back(frame);

    ResultFrame out;
    out.frame_index = f;
    out.boxes.emplace_back(f == 1 ? 100 : 200, obj.box);
    hyp.push_back(out);
  }
  CHECK(idf1(gt, hyp) == doctest::Approx(0.75).epsilon(1e-9));
}

TEST_CASE("per-frame counts add up to the totals") {
  const auto gt = two_object_world(6);
  auto hyp = echo_ground_truth(gt);
  hyp[2].boxes.pop_back();
  hyp[4].boxes.emplace_back(50, BoundingBox(300.0, 250.0, 10.0, 10.0));
  const auto report = clear_mot(gt, hyp);
  long fp = 0, fn = 0, idsw = 0, total = 0;
  for (const auto& frame : report.per_frame) {
    fp += frame.fp;
    fn += frame.fn;
    idsw += frame.idsw;
    total += frame.gt;
  }
  CHECK(fp == report.fp);
  CHECK(fn == report.fn);
  CHECK(idsw == report.idsw);
  CHECK(total == report.gt_total);
}
