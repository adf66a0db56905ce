#ifndef ECCO_METRICS_HPP_
#define ECCO_METRICS_HPP_

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ecco/types.hpp"

namespace ecco {

// Flat event/sample log of a simulation run. Serialized as a single CSV with
// header `record,window,time_s,camera,job,v1,v2,v3,v4,v5`; the value columns
// are per-kind:
//   accuracy    v1=accuracy
//   request     v1=device accuracy at emission
//   join        v1=group-model accuracy on the request
//   new_job     v1=seed accuracy
//   remove      v1=relative accuracy drop, v2=1 when degenerate (prev acc 0)
//   terminate   (no values)
//   micro       v1=micro index, v2=acc before, v3=acc after
//   job_window  v1=member count, v2=p share, v3=c GPU-seconds,
//               v4=mean delivered bps (job aggregate), v5=micro-windows granted
struct MetricsTrace {
  enum class Kind {
    accuracy,
    request,
    join,
    new_job,
    remove,
    terminate,
    micro,
    job_window,
  };

  struct Row {
    Kind kind = Kind::accuracy;
    int window = 0;
    double time_s = 0.0;
    CameraId camera;  // empty when not camera-scoped
    JobId job = -1;   // -1 when not job-scoped
    double v1 = 0.0, v2 = 0.0, v3 = 0.0, v4 = 0.0, v5 = 0.0;
  };

  std::vector<Row> rows;

  void write_csv(std::ostream& os) const;
};

const char* kind_name(MetricsTrace::Kind kind);

// Parses a trace CSV produced by write_csv. Throws SchemaError on malformed
// input.
MetricsTrace read_trace_csv(std::istream& is);
MetricsTrace read_trace_csv_file(const std::string& path);

// Mean accuracy over cameras, one entry per window.
std::vector<double> mean_accuracy_per_window(const MetricsTrace& trace);
// Last recorded accuracy per camera.
std::map<CameraId, double> final_accuracy(const MetricsTrace& trace);

struct ResponseTime {
  double request_time_s = 0.0;
  std::optional<double> response_s;  // empty when the target was never reached
};

// Per requesting camera: elapsed time from request emission to the first
// window-end accuracy sample at or above target_acc. Zero when the device
// already met the target when it asked.
std::map<CameraId, ResponseTime> response_time(const MetricsTrace& trace,
                                               double target_acc);

// Deterministic fixed-notation formatting used for all CSV output.
std::string format_value(double v);

}  // namespace ecco

#endif  // ECCO_METRICS_HPP_
