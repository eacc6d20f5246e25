#pragma once

#include <compare>
#include <string>
#include <vector>

#include "posh/environment.hpp"
#include "posh/types.hpp"

namespace posh {

// One crossing of the vertical ray cast upward from an obstacle center:
// left-to-right is the plain letter, right-to-left its inverse.
struct Letter {
  int obstacle_id{0};
  bool inverse{false};

  auto operator<=>(const Letter&) const = default;
};

struct HSignature {
  std::vector<Letter> word;  // reduced: no adjacent inverse pairs

  bool operator==(const HSignature&) const = default;
};

// Raw crossing word of a polyline against every obstacle's upward ray, in
// traversal order. Points on a ray count as already past it (half-open rule),
// and crossings at or below the obstacle center do not count.
std::vector<Letter> raw_signature(const std::vector<Vec2>& path,
                                  const std::vector<Obstacle>& obstacles);

// Free-group normal form: repeatedly deletes adjacent inverse pairs.
HSignature reduce(std::vector<Letter> word);

inline HSignature signature(const std::vector<Vec2>& path,
                            const std::vector<Obstacle>& obstacles) {
  return reduce(raw_signature(path, obstacles));
}

// Number of adjacent positions where the signature changed.
int count_switches(const std::vector<HSignature>& signatures);

// "t1 ~t2" style rendering; the empty word renders as "".
std::string to_string(const HSignature& sig);

}  // namespace posh
