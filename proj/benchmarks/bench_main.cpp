#include <benchmark/benchmark.h>

#include <random>

#include "motsim/attention.hpp"
#include "motsim/metrics.hpp"
#include "motsim/scheduler.hpp"

using namespace motsim;

namespace {

Eigen::MatrixXd random_cost(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> value(0.0, 100.0);
  Eigen::MatrixXd cost(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) cost(r, c) = value(rng);
  }
  return cost;
}

std::vector<AttentionObject> random_objects(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> x(0.0, 1088.0);
  std::uniform_real_distribution<double> y(0.0, 608.0);
  std::uniform_real_distribution<double> size(20.0, 120.0);
  std::uniform_real_distribution<double> vel(-5.0, 5.0);
  std::vector<AttentionObject> objects;
  for (int i = 0; i < n; ++i) {
    AttentionObject obj;
    obj.center_x = x(rng);
    obj.center_y = y(rng);
    obj.extent =
        BoundingBox::from_center(obj.center_x, obj.center_y, size(rng),
                                 size(rng));
    obj.velocity_x = vel(rng);
    obj.velocity_y = vel(rng);
    objects.push_back(obj);
  }
  return objects;
}

GroundTruthSequence bench_world(int frames) {
  WorldConfig config;
  config.n_objects = 20;
  config.frames = frames;
  config.occlusion_rate = 0.25;
  config.seed = 9;
  return generate_world(config);
}

void BM_Hungarian(benchmark::State& state) {
  const auto cost = random_cost(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hungarian(cost));
  }
}
BENCHMARK(BM_Hungarian)->Arg(8)->Arg(32)->Arg(128);

void BM_RenderHeatmap(benchmark::State& state) {
  const auto objects = random_objects(static_cast<int>(state.range(0)), 2);
  const GridSpec spec = GridSpec::for_image(1088.0, 608.0, 4.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(render_heatmap(objects, spec));
  }
}
BENCHMARK(BM_RenderHeatmap)->Arg(5)->Arg(20)->Arg(80);

void BM_ExtrapolateAttention(benchmark::State& state) {
  AttentionSnapshot snapshot;
  snapshot.objects = random_objects(20, 3);
  snapshot.heatmap =
      render_heatmap(snapshot.objects, GridSpec::for_image(1088.0, 608.0, 4.0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(extrapolate_attention(snapshot, 3));
  }
}
BENCHMARK(BM_ExtrapolateAttention);

void BM_TrackerStep(benchmark::State& state) {
  const auto world = bench_world(200);
  DetectorProfile detector;
  detector.base_recall = 0.9;
  detector.occluded_recall = 0.6;
  detector.localization_std = 1.5;
  for (auto _ : state) {
    Tracker tracker;
    for (const auto& frame : world.frames) {
      benchmark::DoNotOptimize(
          tracker.step(detect(detector, frame, nullptr, 4)));
    }
  }
}
BENCHMARK(BM_TrackerStep);

void BM_ClearMot(benchmark::State& state) {
  const auto world = bench_world(300);
  DetectorProfile teacher;
  teacher.source = ModelSource::kTeacher;
  teacher.base_recall = 0.95;
  teacher.occluded_recall = 0.85;
  teacher.localization_std = 1.0;
  DetectorProfile student;
  student.base_recall = 0.75;
  student.occluded_recall = 0.4;
  student.localization_std = 2.0;
  const auto result =
      run_pipeline(world, {PolicyKind::kAttTrack, 4, false}, teacher, student,
                   PipelineOptions{}, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(clear_mot(world, result.frames));
  }
}
BENCHMARK(BM_ClearMot);

void BM_Pipeline(benchmark::State& state) {
  const auto world = bench_world(static_cast<int>(state.range(0)));
  DetectorProfile teacher;
  teacher.source = ModelSource::kTeacher;
  teacher.base_recall = 0.95;
  teacher.occluded_recall = 0.85;
  teacher.localization_std = 1.0;
  DetectorProfile student;
  student.base_recall = 0.75;
  student.occluded_recall = 0.4;
  student.localization_std = 2.0;
  student.attention_gain = 0.35;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_pipeline(world,
                                          {PolicyKind::kAttTrack, 4, false},
                                          teacher, student, PipelineOptions{},
                                          5));
  }
}
BENCHMARK(BM_Pipeline)->Arg(100)->Arg(300);

}  // namespace

BENCHMARK_MAIN();
