#include "posh/homotopy.hpp"

#include <algorithm>

namespace posh {

std::vector<Letter> raw_signature(const std::vector<Vec2>& path,
                                  const std::vector<Obstacle>& obstacles) {
  std::vector<Letter> word;
  if (path.size() < 2) return word;

  // Rays need distinct x positions; any coincidences get a deterministic
  // per-id nudge far below geometric scales.
  std::vector<double> ray_x(obstacles.size());
  std::vector<double> ray_y(obstacles.size());
  for (std::size_t k = 0; k < obstacles.size(); ++k) {
    ray_x[k] = obstacles[k].center.x();
    ray_y[k] = obstacles[k].center.y();
  }
  for (std::size_t k = 0; k < obstacles.size(); ++k) {
    for (std::size_t m = 0; m < k; ++m) {
      if (ray_x[k] == ray_x[m]) {
        ray_x[k] = obstacles[k].center.x() + obstacles[k].id * 1e-9;
      }
    }
  }

  struct Crossing {
    double t;  // parameter along the segment
    Letter letter;
  };
  std::vector<Crossing> crossings;

  for (std::size_t s = 0; s + 1 < path.size(); ++s) {
    const Vec2& p = path[s];
    const Vec2& q = path[s + 1];
    crossings.clear();
    for (std::size_t k = 0; k < obstacles.size(); ++k) {
      const double cx = ray_x[k];
      // Half-open sides: a point exactly on the ray belongs to the right.
      const bool p_right = p.x() >= cx;
      const bool q_right = q.x() >= cx;
      if (p_right == q_right) continue;
      const double t = (cx - p.x()) / (q.x() - p.x());
      const double y_cross = p.y() + t * (q.y() - p.y());
      if (!(y_cross > ray_y[k])) continue;  // ray starts strictly above the center
      crossings.push_back({t, Letter{obstacles[k].id, /*inverse=*/!q_right}});
    }
    std::sort(crossings.begin(), crossings.end(), [](const Crossing& a, const Crossing& b) {
      if (a.t != b.t) return a.t < b.t;
      return a.letter < b.letter;
    });
    for (const Crossing& c : crossings) word.push_back(c.letter);
  }
  return word;
}

HSignature reduce(std::vector<Letter> word) {
  HSignature out;
  out.word.reserve(word.size());
  for (const Letter& l : word) {
    if (!out.word.empty() && out.word.back().obstacle_id == l.obstacle_id &&
        out.word.back().inverse != l.inverse) {
      out.word.pop_back();
    } else {
      out.word.push_back(l);
    }
  }
  return out;
}

int count_switches(const std::vector<HSignature>& signatures) {
  int switches = 0;
  for (std::size_t i = 1; i < signatures.size(); ++i) {
    if (!(signatures[i] == signatures[i - 1])) ++switches;
  }
  return switches;
}

std::string to_string(const HSignature& sig) {
  std::string out;
  for (std::size_t i = 0; i < sig.word.size(); ++i) {
    if (i > 0) out += ' ';
    if (sig.word[i].inverse) out += '~';
    out += 't';
    out += std::to_string(sig.word[i].obstacle_id);
  }
  return out;
}

}  // namespace posh
