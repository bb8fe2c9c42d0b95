#include "mindisp/svg.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace mindisp {

namespace {

constexpr double kPixelsPerMeter = 80.0;

class Canvas {
 public:
  explicit Canvas(const WorldBounds& b) : bounds_(b) {
    const Vec2 size = (b.max - b.min) * kPixelsPerMeter;
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(size.x()) << "\" height=\""
         << num(size.y()) << "\" viewBox=\"0 0 " << num(size.x()) << ' ' << num(size.y()) << "\">\n";
    out_ << "<rect x=\"0\" y=\"0\" width=\"" << num(size.x()) << "\" height=\"" << num(size.y())
         << "\" fill=\"white\"/>\n";
  }

  static std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", std::abs(v) < 5e-4 ? 0.0 : v);
    return buf;
  }

  Vec2 map(const Vec2& p) const {
    return {(p.x() - bounds_.min.x()) * kPixelsPerMeter, (bounds_.max.y() - p.y()) * kPixelsPerMeter};
  }

  void shape(const std::vector<ShapePart>& parts, const Pose& pose, const std::string& style) {
    for (const auto& part : parts) {
      if (part.kind == ShapePart::Kind::kCircle) {
        const Vec2 c = map(to_world(pose, part.offset));
        out_ << "<circle cx=\"" << num(c.x()) << "\" cy=\"" << num(c.y()) << "\" r=\""
             << num(part.radius * kPixelsPerMeter) << "\" " << style << "/>\n";
      } else {
        polygon(part.world_rect(pose).corners(), style);
      }
    }
  }

  void polygon(const std::vector<Vec2>& pts, const std::string& style) {
    out_ << "<polygon points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Vec2 p = map(pts[i]);
      out_ << (i ? " " : "") << num(p.x()) << ',' << num(p.y());
    }
    out_ << "\" " << style << "/>\n";
  }

  void path(const Trajectory& traj, const std::string& style) {
    if (traj.empty()) return;
    out_ << "<polyline points=\"";
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const Vec2 p = map(traj[i].position());
      out_ << (i ? " " : "") << num(p.x()) << ',' << num(p.y());
    }
    out_ << "\" fill=\"none\" " << style << "/>\n";
  }

  void marker(const Pose& pose, const std::string& color) {
    const Vec2 c = map(pose.position());
    const Vec2 tip = map(to_world(pose, Vec2(0.2, 0.0)));
    out_ << "<circle cx=\"" << num(c.x()) << "\" cy=\"" << num(c.y()) << "\" r=\"4\" fill=\"" << color
         << "\"/>\n<line x1=\"" << num(c.x()) << "\" y1=\"" << num(c.y()) << "\" x2=\"" << num(tip.x())
         << "\" y2=\"" << num(tip.y()) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
  }

  void comment(const std::string& text) { out_ << "<!-- " << text << " -->\n"; }

  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  WorldBounds bounds_;
  std::ostringstream out_;
};

const char* kFixedStyle = "fill=\"#555555\" stroke=\"#222222\" stroke-width=\"1\"";
const char* kMovableStyle = "fill=\"#c8a165\" fill-opacity=\"0.8\" stroke=\"#6b4f2a\" stroke-width=\"1\"";
const char* kGhostStyle =
    "fill=\"#c8a165\" fill-opacity=\"0.15\" stroke=\"#999999\" stroke-width=\"1\" stroke-dasharray=\"4 3\"";
const char* kDisplacedStyle = "fill=\"cyan\" fill-opacity=\"0.6\" stroke=\"#008b8b\" stroke-width=\"2\"";
const char* kRobotStyle = "fill=\"none\" stroke=\"#1f4fbf\" stroke-width=\"0.5\" stroke-opacity=\"0.4\"";
const char* kPathStyle = "stroke=\"#d62728\" stroke-width=\"2\"";

void draw_robot(Canvas& canvas, const Scenario& s, const Trajectory& traj) {
  std::vector<ShapePart> shape = s.robot.shape;
  if (shape.empty()) {
    for (const auto& sp : s.robot.bounding.spheres) shape.push_back(ShapePart::circle(sp.offset, sp.radius));
  }
  const std::size_t stride = std::max<std::size_t>(1, traj.size() / 25);
  for (std::size_t k = 0; k < traj.size(); k += stride) canvas.shape(shape, traj[k], kRobotStyle);
  if (!traj.empty()) canvas.shape(shape, traj.back(), kRobotStyle);
  canvas.path(traj, kPathStyle);
  canvas.marker(s.start, "#2ca02c");
  canvas.marker(s.goal, "#9467bd");
}

}  // namespace

std::string render_before(const Scenario& scenario, const Trajectory& trajectory) {
  Canvas canvas(scenario.world_bounds);
  canvas.comment(scenario.name + ": original obstacle poses");
  for (const auto& o : scenario.obstacles) {
    canvas.shape(o.shape, o.pose, o.movable() ? kMovableStyle : kFixedStyle);
  }
  draw_robot(canvas, scenario, trajectory);
  return canvas.finish();
}

std::string render_after(const Scenario& scenario, const Trajectory& trajectory,
                         std::span<const Pose> poses) {
  if (poses.size() != scenario.obstacles.size()) {
    throw std::invalid_argument("render_after: one pose per obstacle required");
  }
  Canvas canvas(scenario.world_bounds);
  canvas.comment(scenario.name + ": displaced obstacles highlighted");
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const Obstacle& o = scenario.obstacles[i];
    if (!o.movable()) {
      canvas.shape(o.shape, o.pose, kFixedStyle);
    } else if (poses[i] == o.pose) {
      canvas.shape(o.shape, o.pose, kMovableStyle);
    } else {
      canvas.shape(o.shape, o.pose, kGhostStyle);
      canvas.shape(o.shape, poses[i], kDisplacedStyle);
    }
  }
  draw_robot(canvas, scenario, trajectory);
  return canvas.finish();
}

}  // namespace mindisp
