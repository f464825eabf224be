#pragma once

#include <vector>

#include "motsim/simworld.hpp"

namespace motsim {

struct FrameCounts {
  int frame_index = 0;
  long matches = 0;
  long fp = 0;
  long fn = 0;
  long idsw = 0;
  long gt = 0;
};

struct MotReport {
  double mota = 0.0;  // <= 1
  double idf1 = 0.0;  // in [0, 1]
  long fp = 0;
  long fn = 0;
  long idsw = 0;
  long gt_total = 0;
  std::vector<FrameCounts> per_frame;
  double fps_simulated = 0.0;
};

/// CLEAR protocol: previous-frame correspondences persist while they still
/// clear the IoU gate, the rest is matched by Hungarian on (1 - IoU); FP,
/// FN and id switches are accumulated per frame. Also fills idf1.
/// Throws when the ground truth holds no boxes (MOTA undefined).
MotReport clear_mot(const GroundTruthSequence& gt,
                    const std::vector<ResultFrame>& hyp,
                    double iou_gate = 0.5);

/// Identity F1: global gt-id to hyp-id assignment maximizing per-frame
/// IoU-gated coincidences (IDTP); IDF1 = 2 IDTP / (2 IDTP + IDFP + IDFN).
double idf1(const GroundTruthSequence& gt, const std::vector<ResultFrame>& hyp,
            double iou_gate = 0.5);

}  // namespace motsim
