#pragma once

#include <optional>
#include <string>
#include <vector>

#include "motsim/align.hpp"
#include "motsim/assoc.hpp"
#include "motsim/simworld.hpp"

namespace motsim {

enum class PolicyKind {
  kTeacherOnly,
  kStudentOnly,
  kNaiveMix,
  kAttTrackNoUpdate,
  kAttTrack,
};

const char* to_string(PolicyKind kind);
PolicyKind policy_from_string(const std::string& name);

struct SchedulerPolicy {
  PolicyKind kind = PolicyKind::kAttTrack;
  int keyframe_interval = 4;  // K >= 1; ignored for the *-Only kinds
  bool alignment = false;
};

/// Model choice for a frame at 0-based position `offset` in the sequence.
/// Interleaving kinds run the teacher iff offset mod K == 0.
ModelSource plan(const SchedulerPolicy& policy, int offset);

struct PipelineOptions {
  AssociationConfig assoc;
  KalmanConfig kalman;
  double cell_size = 4.0;
  int velocity_window = 3;
};

struct PipelineResult {
  std::vector<ResultFrame> frames;
  std::vector<ModelSource> model_choices;  // one per frame
  double elapsed_ms = 0.0;   // sum of chosen per-frame model costs
  double wall_ms = 0.0;
  std::optional<AlignmentMap> alignment;

  double simulated_fps() const {
    return elapsed_ms > 0.0 ? 1000.0 * static_cast<double>(frames.size()) /
                                  elapsed_ms
                            : 0.0;
  }
};

/// Runs the full interleaved pipeline over a ground-truth sequence: teacher
/// keyframes rebuild the attention snapshot (heatmap plus per-object
/// velocities from track history); student frames receive the extrapolated
/// heatmap (AttTrack), the stale keyframe heatmap (AttTrackNoUpdate), or
/// nothing (NaiveMix). All detections flow through one shared tracker. When
/// alignment is on, a student-to-teacher feature map is fitted from the
/// first keyframes and applied to every student feature afterwards.
PipelineResult run_pipeline(const GroundTruthSequence& gt,
                            const SchedulerPolicy& policy,
                            const DetectorProfile& teacher,
                            const DetectorProfile& student,
                            const PipelineOptions& options,
                            std::uint64_t seed);

/// Amortized throughput of a K-interleave in frames/second:
/// K / (cost_teacher + (K-1) * cost_student), costs in milliseconds.
double simulated_throughput(double cost_teacher_ms, double cost_student_ms,
                            int k);

}  // namespace motsim
