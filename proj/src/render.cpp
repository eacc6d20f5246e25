#include "posh/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace posh {

namespace {

constexpr double kMargin = 1.0;   // workspace padding, meters
constexpr double kScale = 20.0;   // pixels per meter

std::string num(double v) {
  if (!std::isfinite(v)) v = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

struct Mapper {
  Vec2 lo, hi;
  double height_px;

  double x(double wx) const {
    wx = std::clamp(wx, lo.x(), hi.x());
    return (wx - lo.x()) * kScale;
  }
  // SVG y grows downward; world y grows upward.
  double y(double wy) const {
    wy = std::clamp(wy, lo.y(), hi.y());
    return height_px - (wy - lo.y()) * kScale;
  }
};

void polyline(std::ostringstream& out, const Mapper& m, const std::vector<Vec2>& pts,
              const char* stroke, const char* extra) {
  if (pts.size() < 2) return;
  out << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"2\" " << extra
      << " points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) out << ' ';
    out << num(m.x(pts[i].x())) << ',' << num(m.y(pts[i].y()));
  }
  out << "\"/>\n";
}

}  // namespace

std::string render_svg(const RenderFrame& frame) {
  Mapper m;
  m.lo = frame.ws_min - Vec2(kMargin, kMargin);
  m.hi = frame.ws_max + Vec2(kMargin, kMargin);
  const double width_px = (m.hi.x() - m.lo.x()) * kScale;
  m.height_px = (m.hi.y() - m.lo.y()) * kScale;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(width_px)
      << "\" height=\"" << num(m.height_px) << "\" viewBox=\"0 0 " << num(width_px) << ' '
      << num(m.height_px) << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << num(width_px) << "\" height=\"" << num(m.height_px)
      << "\" fill=\"white\"/>\n";

  // Workspace boundary.
  out << "<rect x=\"" << num(m.x(frame.ws_min.x())) << "\" y=\"" << num(m.y(frame.ws_max.y()))
      << "\" width=\"" << num((frame.ws_max.x() - frame.ws_min.x()) * kScale) << "\" height=\""
      << num((frame.ws_max.y() - frame.ws_min.y()) * kScale)
      << "\" fill=\"none\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";

  for (const Obstacle& ob : frame.obstacles) {
    const Vec2 lo = ob.center - ob.half_extents;
    out << "<rect x=\"" << num(m.x(lo.x())) << "\" y=\"" << num(m.y(ob.center.y() + ob.half_extents.y()))
        << "\" width=\"" << num(2.0 * ob.half_extents.x() * kScale) << "\" height=\""
        << num(2.0 * ob.half_extents.y() * kScale) << "\" fill=\"#808080\"/>\n";
  }

  for (const auto& seg : frame.graph_edges) {
    out << "<line x1=\"" << num(m.x(seg.first.x())) << "\" y1=\"" << num(m.y(seg.first.y()))
        << "\" x2=\"" << num(m.x(seg.second.x())) << "\" y2=\"" << num(m.y(seg.second.y()))
        << "\" stroke=\"#bbbbbb\" stroke-width=\"0.7\"/>\n";
  }

  for (const auto& seg : frame.pruned_segments) {
    out << "<line x1=\"" << num(m.x(seg.first.x())) << "\" y1=\"" << num(m.y(seg.first.y()))
        << "\" x2=\"" << num(m.x(seg.second.x())) << "\" y2=\"" << num(m.y(seg.second.y()))
        << "\" stroke=\"#4169e1\" stroke-width=\"1\" stroke-dasharray=\"4,3\"/>\n";
  }

  polyline(out, m, frame.executed, "#2e8b57", "");
  polyline(out, m, frame.planned, "#d03030", "");

  out << "<circle cx=\"" << num(m.x(frame.goal.x())) << "\" cy=\"" << num(m.y(frame.goal.y()))
      << "\" r=\"" << num(0.3 * kScale) << "\" fill=\"#2e8b57\"/>\n";
  out << "<circle cx=\"" << num(m.x(frame.robot.x())) << "\" cy=\"" << num(m.y(frame.robot.y()))
      << "\" r=\"" << num(frame.robot_radius * kScale) << "\" fill=\"#606060\"/>\n";

  out << "</svg>\n";
  return out.str();
}

}  // namespace posh
