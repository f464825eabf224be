#include "motsim/scheduler.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace motsim {

const char* to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kTeacherOnly: return "TeacherOnly";
    case PolicyKind::kStudentOnly: return "StudentOnly";
    case PolicyKind::kNaiveMix: return "NaiveMix";
    case PolicyKind::kAttTrackNoUpdate: return "AttTrackNoUpdate";
    case PolicyKind::kAttTrack: return "AttTrack";
  }
  return "unknown";
}

PolicyKind policy_from_string(const std::string& name) {
  if (name == "TeacherOnly") return PolicyKind::kTeacherOnly;
  if (name == "StudentOnly") return PolicyKind::kStudentOnly;
  if (name == "NaiveMix") return PolicyKind::kNaiveMix;
  if (name == "AttTrackNoUpdate") return PolicyKind::kAttTrackNoUpdate;
  if (name == "AttTrack") return PolicyKind::kAttTrack;
  throw std::invalid_argument("unknown policy: " + name);
}

ModelSource plan(const SchedulerPolicy& policy, int offset) {
  if (offset < 0) throw std::invalid_argument("plan: negative frame offset");
  switch (policy.kind) {
    case PolicyKind::kTeacherOnly:
      return ModelSource::kTeacher;
    case PolicyKind::kStudentOnly:
      return ModelSource::kStudent;
    default:
      if (policy.keyframe_interval < 1) {
        throw std::invalid_argument("plan: keyframe interval must be >= 1");
      }
      return offset % policy.keyframe_interval == 0 ? ModelSource::kTeacher
                                                    : ModelSource::kStudent;
  }
}

namespace {

// Pairs raw student and teacher features through the ground truth: a gt
// object contributes a pair when both detectors localized it with IoU > 0.7.
void collect_alignment_pairs(
    const GtFrame& frame, const FrameDetections& teacher_dets,
    const FrameDetections& student_dets,
    std::vector<std::pair<FeatureVector, FeatureVector>>& pairs) {
  constexpr double kPairGate = 0.7;
  for (const auto& obj : frame.objects) {
    const Detection* best_teacher = nullptr;
    const Detection* best_student = nullptr;
    double best_teacher_iou = kPairGate;
    double best_student_iou = kPairGate;
    for (const auto& det : teacher_dets.detections) {
      const double overlap = iou(obj.box, det.rect);
      if (overlap > best_teacher_iou) {
        best_teacher_iou = overlap;
        best_teacher = &det;
      }
    }
    for (const auto& det : student_dets.detections) {
      const double overlap = iou(obj.box, det.rect);
      if (overlap > best_student_iou) {
        best_student_iou = overlap;
        best_student = &det;
      }
    }
    if (best_teacher && best_student) {
      pairs.emplace_back(best_student->feature, best_teacher->feature);
    }
  }
}

}  // namespace

PipelineResult run_pipeline(const GroundTruthSequence& gt,
                            const SchedulerPolicy& policy,
                            const DetectorProfile& teacher,
                            const DetectorProfile& student,
                            const PipelineOptions& options,
                            std::uint64_t seed) {
  if (gt.frames.empty()) {
    throw std::invalid_argument("run_pipeline: empty ground truth");
  }
  const auto wall_start = std::chrono::steady_clock::now();

  Tracker tracker(options.assoc, options.kalman, options.velocity_window);
  const GridSpec spec =
      GridSpec::for_image(gt.arena_width, gt.arena_height, options.cell_size);

  PipelineResult result;
  result.frames.reserve(gt.frames.size());
  result.model_choices.reserve(gt.frames.size());

  // Alignment calibration budget: enough keyframes to see d+1 pairs at the
  // typical per-frame object count, then frozen.
  const bool interleaving = policy.kind != PolicyKind::kTeacherOnly &&
                            policy.kind != PolicyKind::kStudentOnly;
  const bool want_alignment = policy.alignment && interleaving;
  double avg_objects = 0.0;
  for (const auto& frame : gt.frames) {
    avg_objects += static_cast<double>(frame.objects.size());
  }
  avg_objects /= static_cast<double>(gt.frames.size());
  const int dim = gt.feature_dim;
  const int calibration_keyframes =
      static_cast<int>(std::ceil(dim / std::max(1.0, avg_objects))) + 2;
  std::vector<std::pair<FeatureVector, FeatureVector>> calibration_pairs;
  int keyframes_seen = 0;

  std::optional<AttentionSnapshot> snapshot;
  int keyframe_pos = 0;

  for (std::size_t pos = 0; pos < gt.frames.size(); ++pos) {
    const GtFrame& frame = gt.frames[pos];
    const ModelSource choice = plan(policy, static_cast<int>(pos));
    result.model_choices.push_back(choice);
    result.elapsed_ms += choice == ModelSource::kTeacher
                             ? teacher.cost_per_frame_ms
                             : student.cost_per_frame_ms;

    FrameDetections detections;
    if (choice == ModelSource::kTeacher) {
      detections = detect(teacher, frame, nullptr, seed);
      if (want_alignment && !result.alignment &&
          (keyframes_seen < calibration_keyframes ||
           static_cast<int>(calibration_pairs.size()) < dim + 1)) {
        const FrameDetections student_dets =
            detect(student, frame, nullptr, seed);
        collect_alignment_pairs(frame, detections, student_dets,
                                calibration_pairs);
        ++keyframes_seen;
        if (keyframes_seen >= calibration_keyframes &&
            static_cast<int>(calibration_pairs.size()) >= dim + 1) {
          result.alignment = fit_alignment(calibration_pairs);
        }
      }
    } else {
      Heatmap extrapolated;
      const Heatmap* attention = nullptr;
      if (snapshot) {
        if (policy.kind == PolicyKind::kAttTrack) {
          extrapolated = extrapolate_attention(
              *snapshot, static_cast<int>(pos) - keyframe_pos);
          attention = &extrapolated;
        } else if (policy.kind == PolicyKind::kAttTrackNoUpdate) {
          attention = &snapshot->heatmap;
        }
      }
      detections = detect(student, frame, attention, seed);
      if (result.alignment) {
        for (auto& det : detections.detections) {
          det.feature = apply_alignment(*result.alignment, det.feature);
        }
      }
    }

    const std::vector<TrackedBox> tracked = tracker.step(detections);
    ResultFrame out;
    out.frame_index = frame.frame_index;
    out.boxes.reserve(tracked.size());
    for (const auto& box : tracked) out.boxes.emplace_back(box.track_id, box.box);
    result.frames.push_back(std::move(out));

    if (choice == ModelSource::kTeacher) {
      AttentionSnapshot next;
      next.keyframe_index = frame.frame_index;
      for (const auto& box : tracked) {
        const Track* track = nullptr;
        for (const auto& t : tracker.tracks()) {
          if (t.id == box.track_id) {
            track = &t;
            break;
          }
        }
        AttentionObject obj;
        obj.center_x = box.box.center_x();
        obj.center_y = box.box.center_y();
        obj.extent = box.box;
        if (track) {
          const Eigen::Vector2d velocity = estimate_velocity(
              track->center_history, options.velocity_window);
          obj.velocity_x = velocity.x();
          obj.velocity_y = velocity.y();
        }
        obj.track_id = box.track_id;
        next.objects.push_back(obj);
      }
      next.heatmap = render_heatmap(next.objects, spec);
      snapshot = std::move(next);
      keyframe_pos = static_cast<int>(pos);
    }
  }

  result.wall_ms =
      std::chrono::duration<double, std::milli>(
          std::chrono::steady_clock::now() - wall_start)
          .count();
  return result;
}

double simulated_throughput(double cost_teacher_ms, double cost_student_ms,
                            int k) {
  if (cost_teacher_ms <= 0.0 || cost_student_ms <= 0.0) {
    throw std::invalid_argument("simulated_throughput: costs must be > 0");
  }
  if (k < 1) {
    throw std::invalid_argument("simulated_throughput: K must be >= 1");
  }
  return 1000.0 * static_cast<double>(k) /
         (cost_teacher_ms + (k - 1) * cost_student_ms);
}

}  // namespace motsim
