#include "motsim/simworld.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "motsim/random.hpp"

namespace motsim {

namespace {

// rng stream layout for detect(); object ids from ground truth are small
// positive integers, clutter uses a distant constant.
constexpr std::uint64_t kKeepStream = 0;
constexpr std::uint64_t kNoiseXStream = 1;
constexpr std::uint64_t kNoiseYStream = 2;
constexpr std::uint64_t kFeatureStreamBase = 8;
constexpr std::uint64_t kClutterObject = 0x636c7574746572ULL;
constexpr std::uint64_t kEmbeddingFrame = 0x656d626564ULL;

struct MovingObject {
  int id;
  double cx, cy, vx, vy, w, h;
};

void reflect(double& pos, double& vel, double lo, double hi) {
  if (hi <= lo) {
    pos = (lo + hi) / 2.0;
    return;
  }
  // A couple of bounces at most for realistic speeds.
  while (pos < lo || pos > hi) {
    if (pos < lo) {
      pos = 2.0 * lo - pos;
      vel = -vel;
    } else {
      pos = 2.0 * hi - pos;
      vel = -vel;
    }
  }
}

BoundingBox object_box(const MovingObject& obj) {
  return BoundingBox::from_center(obj.cx, obj.cy, obj.w, obj.h);
}

std::string format_mot_number(double v) {
  const long long rounded = std::llround(v);
  if (std::abs(v) < 9e14 && std::abs(v - static_cast<double>(rounded)) < 1e-9) {
    return std::to_string(rounded);
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  std::string s(buf);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

double parse_field(const std::string& field, int line_number) {
  try {
    std::size_t consumed = 0;
    const double v = std::stod(field, &consumed);
    if (consumed != field.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("MOT parse error at line " +
                                std::to_string(line_number) +
                                ": bad numeric field '" + field + "'");
  }
}

}  // namespace

FeatureVector identity_embedding(std::uint64_t seed, int id, int dim) {
  FeatureVector embedding(dim);
  for (int j = 0; j < dim; ++j) {
    embedding(j) = rng::gaussian(
        {seed, kEmbeddingFrame, static_cast<std::uint64_t>(id),
         static_cast<std::uint64_t>(j)});
  }
  const double norm = embedding.norm();
  if (norm > 0.0) embedding /= norm;
  return embedding;
}

GroundTruthSequence generate_world(const WorldConfig& config) {
  if (config.arena_width <= 0.0 || config.arena_height <= 0.0) {
    throw std::invalid_argument("generate_world: arena must be positive");
  }
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  int next_id = 1;
  auto spawn = [&]() {
    MovingObject obj;
    obj.id = next_id++;
    obj.w = 24.0 + 24.0 * unit(rng);
    obj.h = 64.0 + 64.0 * unit(rng);
    obj.cx = obj.w / 2.0 + (config.arena_width - obj.w) * unit(rng);
    obj.cy = obj.h / 2.0 + (config.arena_height - obj.h) * unit(rng);
    const double speed = config.speed_range * unit(rng);
    const double angle = 2.0 * M_PI * unit(rng);
    obj.vx = speed * std::cos(angle);
    obj.vy = speed * std::sin(angle);
    return obj;
  };

  std::vector<MovingObject> objects;
  objects.reserve(config.n_objects);
  for (int i = 0; i < config.n_objects; ++i) objects.push_back(spawn());

  GroundTruthSequence sequence;
  sequence.arena_width = config.arena_width;
  sequence.arena_height = config.arena_height;
  sequence.feature_dim = config.feature_dim;
  sequence.frames.reserve(config.frames);

  for (int f = 1; f <= config.frames; ++f) {
    GtFrame frame;
    frame.frame_index = f;
    frame.objects.reserve(objects.size());
    for (const auto& obj : objects) {
      GtObject gt;
      gt.id = obj.id;
      gt.box = object_box(obj);
      gt.embedding = identity_embedding(config.seed, obj.id,
                                        config.feature_dim);
      gt.occluded = unit(rng) < config.occlusion_rate;
      frame.objects.push_back(std::move(gt));
    }
    sequence.frames.push_back(std::move(frame));

    // Advance to the next frame.
    for (auto& obj : objects) {
      obj.vx += config.motion_noise * normal(rng);
      obj.vy += config.motion_noise * normal(rng);
      obj.cx += obj.vx;
      obj.cy += obj.vy;
      reflect(obj.cx, obj.vx, obj.w / 2.0, config.arena_width - obj.w / 2.0);
      reflect(obj.cy, obj.vy, obj.h / 2.0, config.arena_height - obj.h / 2.0);
    }
    if (config.death_rate > 0.0) {
      std::erase_if(objects, [&](const MovingObject&) {
        return unit(rng) < config.death_rate;
      });
    }
    if (config.birth_rate > 0.0 && unit(rng) < config.birth_rate) {
      objects.push_back(spawn());
    }
  }
  return sequence;
}

FrameDetections detect(const DetectorProfile& profile, const GtFrame& frame,
                       const Heatmap* attention, std::uint64_t seed) {
  FrameDetections out;
  out.frame_index = frame.frame_index;
  const auto frame_key = static_cast<std::uint64_t>(frame.frame_index);

  for (const auto& obj : frame.objects) {
    const double recall =
        obj.occluded ? profile.occluded_recall : profile.base_recall;
    const double boost =
        attention == nullptr
            ? 0.0
            : profile.attention_gain *
                  attention_at(*attention, obj.box.center_x(),
                               obj.box.center_y());
    const double p = std::clamp(recall + boost, 0.0, 1.0);
    const rng::Key key{seed, frame_key, static_cast<std::uint64_t>(obj.id),
                       kKeepStream};
    if (rng::uniform(key) >= p) continue;

    double left = obj.box.left();
    double top = obj.box.top();
    if (profile.localization_std > 0.0) {
      left += profile.localization_std *
              rng::gaussian(key.with_stream(kNoiseXStream));
      top += profile.localization_std *
             rng::gaussian(key.with_stream(kNoiseYStream));
    }

    FeatureVector feature = profile.feature_transform.size() > 0
                                ? (profile.feature_transform * obj.embedding)
                                      .eval()
                                : obj.embedding;
    if (profile.feature_noise_std > 0.0) {
      for (Eigen::Index j = 0; j < feature.size(); ++j) {
        feature(j) +=
            profile.feature_noise_std *
            rng::gaussian(key.with_stream(
                kFeatureStreamBase + static_cast<std::uint64_t>(j)));
      }
    }

    out.detections.push_back(Detection{
        BoundingBox(left, top, obj.box.width(), obj.box.height()),
        std::move(feature), p, profile.source});
  }

  if (profile.clutter_rate > 0.0) {
    const int dim = frame.objects.empty()
                        ? static_cast<int>(profile.feature_transform.rows())
                        : static_cast<int>(frame.objects.front().embedding
                                               .size());
    const int n_clutter = rng::poisson(
        {seed, frame_key, kClutterObject, 0}, profile.clutter_rate);
    for (int i = 0; i < n_clutter; ++i) {
      const rng::Key key{seed, frame_key,
                         kClutterObject + 1 + static_cast<std::uint64_t>(i),
                         0};
      const double w = 20.0 + 40.0 * rng::uniform(key.with_stream(1));
      const double h = 50.0 + 80.0 * rng::uniform(key.with_stream(2));
      const double left = 1000.0 * rng::uniform(key.with_stream(3));
      const double top = 600.0 * rng::uniform(key.with_stream(4));
      FeatureVector feature(std::max(dim, 1));
      for (Eigen::Index j = 0; j < feature.size(); ++j) {
        feature(j) = rng::gaussian(key.with_stream(
            kFeatureStreamBase + static_cast<std::uint64_t>(j)));
      }
      const double norm = feature.norm();
      if (norm > 0.0) feature /= norm;
      out.detections.push_back(Detection{BoundingBox(left, top, w, h),
                                         std::move(feature), 0.3,
                                         profile.source});
    }
  }
  return out;
}

GroundTruthSequence load_mot_ground_truth(std::istream& in, int feature_dim,
                                          std::uint64_t seed) {
  std::map<int, std::vector<GtObject>> by_frame;
  std::string line;
  int line_number = 0;
  double max_right = 0.0;
  double max_bottom = 0.0;

  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    if (fields.size() != 10) {
      throw std::invalid_argument(
          "MOT parse error at line " + std::to_string(line_number) +
          ": expected 10 comma-separated fields, got " +
          std::to_string(fields.size()));
    }
    const int frame =
        static_cast<int>(parse_field(fields[0], line_number));
    const int id = static_cast<int>(parse_field(fields[1], line_number));
    const double left = parse_field(fields[2], line_number);
    const double top = parse_field(fields[3], line_number);
    const double width = parse_field(fields[4], line_number);
    const double height = parse_field(fields[5], line_number);
    const double conf = parse_field(fields[6], line_number);
    parse_field(fields[7], line_number);
    parse_field(fields[8], line_number);
    parse_field(fields[9], line_number);
    if (frame < 1) {
      throw std::invalid_argument("MOT parse error at line " +
                                  std::to_string(line_number) +
                                  ": frame index must be >= 1");
    }
    if (width <= 0.0 || height <= 0.0) {
      throw std::invalid_argument("MOT parse error at line " +
                                  std::to_string(line_number) +
                                  ": non-positive box extent");
    }
    GtObject obj;
    obj.id = id;
    obj.box = BoundingBox(left, top, width, height);
    obj.embedding = identity_embedding(seed, id, feature_dim);
    obj.conf = conf;
    max_right = std::max(max_right, obj.box.right());
    max_bottom = std::max(max_bottom, obj.box.bottom());
    by_frame[frame].push_back(std::move(obj));
  }

  GroundTruthSequence sequence;
  sequence.feature_dim = feature_dim;
  sequence.arena_width = max_right;
  sequence.arena_height = max_bottom;
  for (auto& [frame, objects] : by_frame) {
    GtFrame gt_frame;
    gt_frame.frame_index = frame;
    gt_frame.objects = std::move(objects);
    sequence.frames.push_back(std::move(gt_frame));
  }
  return sequence;
}

void save_mot_ground_truth(const GroundTruthSequence& sequence,
                           std::ostream& out) {
  for (const auto& frame : sequence.frames) {
    for (const auto& obj : frame.objects) {
      out << frame.frame_index << ',' << obj.id << ','
          << format_mot_number(obj.box.left()) << ','
          << format_mot_number(obj.box.top()) << ','
          << format_mot_number(obj.box.width()) << ','
          << format_mot_number(obj.box.height()) << ','
          << format_mot_number(obj.conf) << ",-1,-1,-1\n";
    }
  }
}

void save_mot_results(const std::vector<ResultFrame>& frames,
                      std::ostream& out) {
  for (const auto& frame : frames) {
    for (const auto& [id, box] : frame.boxes) {
      out << frame.frame_index << ',' << id << ','
          << format_mot_number(box.left()) << ','
          << format_mot_number(box.top()) << ','
          << format_mot_number(box.width()) << ','
          << format_mot_number(box.height()) << ",1,-1,-1,-1\n";
    }
  }
}

}  // namespace motsim
