#include "ecco/types.hpp"

#include <cmath>

namespace ecco {

double distance(const Vec2& a, const Vec2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

double pixels_per_frame(double vertical_resolution) {
  return vertical_resolution * (16.0 * vertical_resolution / 9.0);
}

}  // namespace ecco
