#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "motsim/simworld.hpp"

using namespace motsim;

namespace {

WorldConfig small_world() {
  WorldConfig config;
  config.arena_width = 400.0;
  config.arena_height = 300.0;
  config.n_objects = 6;
  config.frames = 50;
  config.seed = 7;
  config.feature_dim = 8;
  return config;
}

DetectorProfile perfect_detector() {
  DetectorProfile profile;
  profile.base_recall = 1.0;
  profile.occluded_recall = 1.0;
  return profile;
}

bool same_detections(const FrameDetections& a, const FrameDetections& b) {
  if (a.frame_index != b.frame_index) return false;
  if (a.detections.size() != b.detections.size()) return false;
  for (std::size_t i = 0; i < a.detections.size(); ++i) {
    const Detection& x = a.detections[i];
    const Detection& y = b.detections[i];
    if (x.rect.left() != y.rect.left() || x.rect.top() != y.rect.top() ||
        x.rect.width() != y.rect.width() || x.rect.height() != y.rect.height()) {
      return false;
    }
    if (x.feature != y.feature) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("world generation is deterministic") {
  const auto a = generate_world(small_world());
  const auto b = generate_world(small_world());
  REQUIRE(a.frames.size() == b.frames.size());
  for (std::size_t f = 0; f < a.frames.size(); ++f) {
    REQUIRE(a.frames[f].objects.size() == b.frames[f].objects.size());
    for (std::size_t i = 0; i < a.frames[f].objects.size(); ++i) {
      CHECK(a.frames[f].objects[i].box.left() ==
            b.frames[f].objects[i].box.left());
      CHECK(a.frames[f].objects[i].embedding ==
            b.frames[f].objects[i].embedding);
    }
  }
}

TEST_CASE("without births or deaths the object count is constant") {
  const auto world = generate_world(small_world());
  REQUIRE(world.frames.size() == 50);
  for (const auto& frame : world.frames) {
    CHECK(frame.objects.size() == 6);
  }
}

TEST_CASE("objects never leave the arena") {
  auto config = small_world();
  config.speed_range = 8.0;
  config.frames = 200;
  const auto world = generate_world(config);
  for (const auto& frame : world.frames) {
    for (const auto& obj : frame.objects) {
      CHECK(obj.box.left() >= -1e-9);
      CHECK(obj.box.top() >= -1e-9);
      CHECK(obj.box.right() <= config.arena_width + 1e-9);
      CHECK(obj.box.bottom() <= config.arena_height + 1e-9);
    }
  }
}

TEST_CASE("zero speed and noise keep every object stationary") {
  auto config = small_world();
  config.speed_range = 0.0;
  config.motion_noise = 0.0;
  const auto world = generate_world(config);
  const auto& first = world.frames.front();
  for (const auto& frame : world.frames) {
    REQUIRE(frame.objects.size() == first.objects.size());
    for (std::size_t i = 0; i < frame.objects.size(); ++i) {
      CHECK(frame.objects[i].box.left() == first.objects[i].box.left());
      CHECK(frame.objects[i].box.top() == first.objects[i].box.top());
    }
  }
}

TEST_CASE("identity embeddings are unit norm and keyed by (seed, id)") {
  const FeatureVector a = identity_embedding(3, 17, 16);
  CHECK(a.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a == identity_embedding(3, 17, 16));
  CHECK(a != identity_embedding(3, 18, 16));
  CHECK(a != identity_embedding(4, 17, 16));
}

TEST_CASE("a perfect noiseless detector returns every object exactly") {
  const auto world = generate_world(small_world());
  const auto& frame = world.frames[10];
  const auto detections = detect(perfect_detector(), frame, nullptr, 99);
  REQUIRE(detections.detections.size() == frame.objects.size());
  for (std::size_t i = 0; i < frame.objects.size(); ++i) {
    CHECK(detections.detections[i].rect.left() == frame.objects[i].box.left());
    CHECK(detections.detections[i].feature == frame.objects[i].embedding);
  }
}

TEST_CASE("empirical keep rate tracks the recall parameter") {
  auto config = small_world();
  config.n_objects = 20;
  config.frames = 300;
  const auto world = generate_world(config);
  DetectorProfile profile;
  profile.base_recall = 0.9;
  profile.occluded_recall = 0.9;
  long kept = 0, total = 0;
  for (const auto& frame : world.frames) {
    kept += static_cast<long>(detect(profile, frame, nullptr, 5)
                                  .detections.size());
    total += static_cast<long>(frame.objects.size());
  }
  const double rate = static_cast<double>(kept) / static_cast<double>(total);
  // 6000 Bernoulli(0.9) draws; 4 sigma is about 0.0155.
  CHECK(rate == doctest::Approx(0.9).epsilon(0.02));
}

TEST_CASE("attention boost raises the keep probability additively") {
  auto config = small_world();
  config.n_objects = 20;
  config.frames = 300;
  const auto world = generate_world(config);
  DetectorProfile profile;
  profile.base_recall = 0.4;
  profile.occluded_recall = 0.4;
  profile.attention_gain = 0.3;

  long plain = 0, boosted = 0, total = 0;
  for (const auto& frame : world.frames) {
    // Saturated heatmap: attention_at == 1 everywhere inside the arena, so
    // the keep probability becomes exactly 0.4 + 0.3.
    GridSpec spec = GridSpec::for_image(config.arena_width,
                                        config.arena_height, 4.0);
    Heatmap full(spec);
    full.grid().setOnes();
    plain += static_cast<long>(detect(profile, frame, nullptr, 5)
                                   .detections.size());
    boosted += static_cast<long>(detect(profile, frame, &full, 5)
                                     .detections.size());
    total += static_cast<long>(frame.objects.size());
  }
  const double plain_rate = static_cast<double>(plain) / total;
  const double boosted_rate = static_cast<double>(boosted) / total;
  CHECK(plain_rate == doctest::Approx(0.4).epsilon(0.05));
  CHECK(boosted_rate == doctest::Approx(0.7).epsilon(0.05));
}

TEST_CASE("zero attention gain ignores the heatmap bit for bit") {
  const auto world = generate_world(small_world());
  DetectorProfile profile;
  profile.base_recall = 0.7;
  profile.occluded_recall = 0.5;
  profile.localization_std = 1.5;
  profile.clutter_rate = 0.5;
  profile.feature_noise_std = 0.1;
  profile.attention_gain = 0.0;

  GridSpec spec = GridSpec::for_image(400.0, 300.0, 4.0);
  Heatmap full(spec);
  full.grid().setOnes();

  for (const auto& frame : world.frames) {
    CHECK(same_detections(detect(profile, frame, nullptr, 11),
                          detect(profile, frame, &full, 11)));
  }
}

TEST_CASE("keep decisions are shared across profiles with equal recall") {
  // The keep draw is keyed by (seed, frame, id) only, so two detectors with
  // the same recall keep exactly the same objects.
  const auto world = generate_world(small_world());
  DetectorProfile a, b;
  a.base_recall = b.base_recall = 0.6;
  a.occluded_recall = b.occluded_recall = 0.6;
  b.localization_std = 3.0;
  for (const auto& frame : world.frames) {
    CHECK(detect(a, frame, nullptr, 21).detections.size() ==
          detect(b, frame, nullptr, 21).detections.size());
  }
}

TEST_CASE("higher recall never yields fewer detections per frame") {
  const auto world = generate_world(small_world());
  DetectorProfile teacher, student;
  teacher.base_recall = 0.95;
  teacher.occluded_recall = 0.85;
  student.base_recall = 0.7;
  student.occluded_recall = 0.4;
  for (const auto& frame : world.frames) {
    CHECK(detect(teacher, frame, nullptr, 33).detections.size() >=
          detect(student, frame, nullptr, 33).detections.size());
  }
}

TEST_CASE("MOT parsing: canonical lines round trip byte for byte") {
  const std::string text =
      "1,1,100,200,30,60,1,-1,-1,-1\n"
      "1,2,50.5,60.25,20,40,0.9,-1,-1,-1\n"
      "2,1,103,198,30,60,1,-1,-1,-1\n";
  std::istringstream in(text);
  const auto sequence = load_mot_ground_truth(in, 8, 1);
  REQUIRE(sequence.frames.size() == 2);
  CHECK(sequence.frames[0].objects.size() == 2);
  CHECK(sequence.frames[0].objects[1].box.left() == 50.5);
  CHECK(sequence.frames[0].objects[1].conf == 0.9);

  std::ostringstream out;
  save_mot_ground_truth(sequence, out);
  CHECK(out.str() == text);
}

TEST_CASE("MOT parsing errors carry line numbers") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return load_mot_ground_truth(in, 4, 1);
  };
  CHECK_THROWS_WITH_AS(parse("1,1,100,200,30,60,1,-1,-1\n"),
                       doctest::Contains("line 1"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      parse("1,1,100,200,30,60,1,-1,-1,-1\n1,2,1,2,abc,60,1,-1,-1,-1\n"),
      doctest::Contains("line 2"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse("1,1,100,200,0,60,1,-1,-1,-1\n"),
                       doctest::Contains("non-positive"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse("0,1,100,200,30,60,1,-1,-1,-1\n"),
                       doctest::Contains("frame index"),
                       std::invalid_argument);
}

TEST_CASE("blank lines are skipped while numbering still counts them") {
  const std::string text = "1,1,10,10,5,5,1,-1,-1,-1\n\n1,2,20,20,x,5,1,-1,-1,-1\n";
  std::istringstream in(text);
  CHECK_THROWS_WITH_AS(load_mot_ground_truth(in, 4, 1),
                       doctest::Contains("line 3"), std::invalid_argument);
}

TEST_CASE("result serialization uses conf 1 and trailing -1 markers") {
  ResultFrame frame;
  frame.frame_index = 3;
  frame.boxes = {{7, BoundingBox(10.0, 20.0, 30.0, 40.0)},
                 {9, BoundingBox(1.5, 2.0, 3.0, 4.0)}};
  std::ostringstream out;
  save_mot_results({frame}, out);
  CHECK(out.str() ==
        "3,7,10,20,30,40,1,-1,-1,-1\n"
        "3,9,1.5,2,3,4,1,-1,-1,-1\n");
}

TEST_CASE("synthetic world round trips through the MOT format") {
  auto config = small_world();
  config.frames = 20;
  const auto world = generate_world(config);
  std::ostringstream first;
  save_mot_ground_truth(world, first);
  std::istringstream in(first.str());
  const auto parsed = load_mot_ground_truth(in, config.feature_dim, 1);
  std::ostringstream second;
  save_mot_ground_truth(parsed, second);
  CHECK(first.str() == second.str());
}
