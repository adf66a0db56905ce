#ifndef ECCO_TYPES_HPP_
#define ECCO_TYPES_HPP_

#include <stdexcept>
#include <string>
#include <vector>

namespace ecco {

using CameraId = std::string;
using JobId = int;

// Low-dimensional descriptor of what a camera currently sees. Coordinates are
// normalized to [0,1]; all scenes in a scenario share one dimensionality.
using SceneVector = std::vector<double>;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Vec2& a, const Vec2& b);

// Pixels per frame of a 16:9 stream with the given vertical resolution.
double pixels_per_frame(double vertical_resolution);

// A scenario file failed validation. `field` is the path of the offending
// entry, e.g. "cameras[2].scene[0]".
class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// A retraining window cannot cover every active job's measurement pass.
class InfeasibleScheduleError : public std::runtime_error {
 public:
  InfeasibleScheduleError(int window_index, const std::string& what)
      : std::runtime_error(what), window_index_(window_index) {}
  int window_index() const { return window_index_; }

 private:
  int window_index_;
};

}  // namespace ecco

#endif  // ECCO_TYPES_HPP_
