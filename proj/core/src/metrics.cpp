#include "motsim/metrics.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "motsim/assoc.hpp"

namespace motsim {

namespace {

long total_gt_boxes(const GroundTruthSequence& gt) {
  long total = 0;
  for (const auto& frame : gt.frames) {
    total += static_cast<long>(frame.objects.size());
  }
  return total;
}

const ResultFrame* find_hyp_frame(const std::vector<ResultFrame>& hyp,
                                  int frame_index) {
  for (const auto& frame : hyp) {
    if (frame.frame_index == frame_index) return &frame;
  }
  return nullptr;
}

}  // namespace

MotReport clear_mot(const GroundTruthSequence& gt,
                    const std::vector<ResultFrame>& hyp, double iou_gate) {
  if (total_gt_boxes(gt) == 0) {
    throw std::invalid_argument("clear_mot: empty ground truth");
  }

  MotReport report;
  std::map<int, int> correspondence;   // gt id -> hyp id, persists
  std::map<int, int> last_matched_id;  // gt id -> hyp id at its last match

  for (const auto& gt_frame : gt.frames) {
    const ResultFrame* hyp_frame = find_hyp_frame(hyp, gt_frame.frame_index);
    static const std::vector<std::pair<int, BoundingBox>> kEmpty;
    const auto& hyp_boxes = hyp_frame ? hyp_frame->boxes : kEmpty;

    FrameCounts counts;
    counts.frame_index = gt_frame.frame_index;
    counts.gt = static_cast<long>(gt_frame.objects.size());

    std::vector<char> gt_done(gt_frame.objects.size(), 0);
    std::vector<char> hyp_done(hyp_boxes.size(), 0);
    std::vector<std::pair<std::size_t, std::size_t>> matched;

    // Keep surviving correspondences from the previous frame.
    for (std::size_t g = 0; g < gt_frame.objects.size(); ++g) {
      const auto it = correspondence.find(gt_frame.objects[g].id);
      if (it == correspondence.end()) continue;
      for (std::size_t h = 0; h < hyp_boxes.size(); ++h) {
        if (hyp_done[h] || hyp_boxes[h].first != it->second) continue;
        if (iou(gt_frame.objects[g].box, hyp_boxes[h].second) >= iou_gate) {
          matched.emplace_back(g, h);
          gt_done[g] = 1;
          hyp_done[h] = 1;
        }
        break;
      }
    }

    // Hungarian on the leftovers.
    std::vector<std::size_t> free_gt, free_hyp;
    for (std::size_t g = 0; g < gt_done.size(); ++g) {
      if (!gt_done[g]) free_gt.push_back(g);
    }
    for (std::size_t h = 0; h < hyp_done.size(); ++h) {
      if (!hyp_done[h]) free_hyp.push_back(h);
    }
    if (!free_gt.empty() && !free_hyp.empty()) {
      constexpr double kForbidden = 1e9;
      Eigen::MatrixXd cost(free_gt.size(), free_hyp.size());
      for (std::size_t i = 0; i < free_gt.size(); ++i) {
        for (std::size_t j = 0; j < free_hyp.size(); ++j) {
          const double overlap = iou(gt_frame.objects[free_gt[i]].box,
                                     hyp_boxes[free_hyp[j]].second);
          cost(i, j) = overlap >= iou_gate ? 1.0 - overlap : kForbidden;
        }
      }
      for (const auto& [i, j] : hungarian(cost).pairs) {
        if (cost(i, j) >= kForbidden) continue;
        matched.emplace_back(free_gt[i], free_hyp[j]);
        gt_done[free_gt[i]] = 1;
        hyp_done[free_hyp[j]] = 1;
      }
    }

    for (const auto& [g, h] : matched) {
      const int gt_id = gt_frame.objects[g].id;
      const int hyp_id = hyp_boxes[h].first;
      const auto last = last_matched_id.find(gt_id);
      if (last != last_matched_id.end() && last->second != hyp_id) {
        ++counts.idsw;
      }
      last_matched_id[gt_id] = hyp_id;
      correspondence[gt_id] = hyp_id;
      ++counts.matches;
    }
    counts.fn = counts.gt - counts.matches;
    counts.fp = static_cast<long>(hyp_boxes.size()) - counts.matches;

    report.fp += counts.fp;
    report.fn += counts.fn;
    report.idsw += counts.idsw;
    report.gt_total += counts.gt;
    report.per_frame.push_back(counts);
  }

  report.mota = 1.0 - static_cast<double>(report.fp + report.fn +
                                          report.idsw) /
                          static_cast<double>(report.gt_total);
  report.idf1 = idf1(gt, hyp, iou_gate);
  return report;
}

double idf1(const GroundTruthSequence& gt, const std::vector<ResultFrame>& hyp,
            double iou_gate) {
  const long gt_total = total_gt_boxes(gt);
  if (gt_total == 0) {
    throw std::invalid_argument("idf1: empty ground truth");
  }

  std::map<int, Eigen::Index> gt_ids, hyp_ids;
  long hyp_total = 0;
  for (const auto& frame : gt.frames) {
    for (const auto& obj : frame.objects) {
      gt_ids.emplace(obj.id, static_cast<Eigen::Index>(gt_ids.size()));
    }
  }
  for (const auto& frame : hyp) {
    hyp_total += static_cast<long>(frame.boxes.size());
    for (const auto& [id, box] : frame.boxes) {
      hyp_ids.emplace(id, static_cast<Eigen::Index>(hyp_ids.size()));
    }
  }
  if (hyp_ids.empty()) return 0.0;

  // Per-pair coincidence counts: frames where the gt id and hyp id overlap
  // with IoU above the gate.
  Eigen::MatrixXd overlap = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(gt_ids.size()),
      static_cast<Eigen::Index>(hyp_ids.size()));
  for (const auto& gt_frame : gt.frames) {
    const ResultFrame* hyp_frame = find_hyp_frame(hyp, gt_frame.frame_index);
    if (!hyp_frame) continue;
    for (const auto& obj : gt_frame.objects) {
      for (const auto& [id, box] : hyp_frame->boxes) {
        if (iou(obj.box, box) >= iou_gate) {
          overlap(gt_ids.at(obj.id), hyp_ids.at(id)) += 1.0;
        }
      }
    }
  }

  // Maximize total coincidences via min-cost assignment on the complement.
  const double max_entry = overlap.maxCoeff();
  const Assignment assignment =
      hungarian((max_entry - overlap.array()).matrix());
  double idtp = 0.0;
  for (const auto& [i, j] : assignment.pairs) idtp += overlap(i, j);

  return 2.0 * idtp / static_cast<double>(gt_total + hyp_total);
}

}  // namespace motsim
