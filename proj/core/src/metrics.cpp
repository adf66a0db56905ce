#include "ecco/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ecco {

const char* kind_name(MetricsTrace::Kind kind) {
  switch (kind) {
    case MetricsTrace::Kind::accuracy: return "accuracy";
    case MetricsTrace::Kind::request: return "request";
    case MetricsTrace::Kind::join: return "join";
    case MetricsTrace::Kind::new_job: return "new_job";
    case MetricsTrace::Kind::remove: return "remove";
    case MetricsTrace::Kind::terminate: return "terminate";
    case MetricsTrace::Kind::micro: return "micro";
    case MetricsTrace::Kind::job_window: return "job_window";
  }
  return "?";
}

namespace {

std::optional<MetricsTrace::Kind> parse_kind(const std::string& name) {
  using Kind = MetricsTrace::Kind;
  for (const Kind k : {Kind::accuracy, Kind::request, Kind::join, Kind::new_job,
                       Kind::remove, Kind::terminate, Kind::micro, Kind::job_window}) {
    if (name == kind_name(k)) return k;
  }
  return std::nullopt;
}

}  // namespace

std::string format_value(double v) {
  if (v == 0.0) return "0";  // normalizes -0
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void MetricsTrace::write_csv(std::ostream& os) const {
  os << "record,window,time_s,camera,job,v1,v2,v3,v4,v5\n";
  for (const auto& r : rows) {
    os << kind_name(r.kind) << ',' << r.window << ',' << format_value(r.time_s) << ','
       << r.camera << ',';
    if (r.job >= 0) os << r.job;
    os << ',' << format_value(r.v1) << ',' << format_value(r.v2) << ','
       << format_value(r.v3) << ',' << format_value(r.v4) << ',' << format_value(r.v5)
       << '\n';
  }
}

MetricsTrace read_trace_csv(std::istream& is) {
  MetricsTrace trace;
  std::string line;
  int line_no = 0;
  if (!std::getline(is, line) || line != "record,window,time_s,camera,job,v1,v2,v3,v4,v5")
    throw SchemaError("trace:line 1", "missing or unexpected header");
  ++line_no;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    while (fields.size() < 10) fields.emplace_back();
    if (fields.size() != 10)
      throw SchemaError("trace:line " + std::to_string(line_no), "expected 10 columns");
    MetricsTrace::Row row;
    const auto kind = parse_kind(fields[0]);
    if (!kind)
      throw SchemaError("trace:line " + std::to_string(line_no),
                        "unknown record kind " + fields[0]);
    row.kind = *kind;
    try {
      row.window = std::stoi(fields[1]);
      row.time_s = std::stod(fields[2]);
      row.camera = fields[3];
      row.job = fields[4].empty() ? -1 : std::stoi(fields[4]);
      row.v1 = std::stod(fields[5]);
      row.v2 = std::stod(fields[6]);
      row.v3 = std::stod(fields[7]);
      row.v4 = std::stod(fields[8]);
      row.v5 = std::stod(fields[9]);
    } catch (const std::exception&) {
      throw SchemaError("trace:line " + std::to_string(line_no), "malformed row: " + line);
    }
    trace.rows.push_back(row);
  }
  return trace;
}

MetricsTrace read_trace_csv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  return read_trace_csv(is);
}

std::vector<double> mean_accuracy_per_window(const MetricsTrace& trace) {
  std::map<int, std::pair<double, int>> acc;
  for (const auto& r : trace.rows) {
    if (r.kind != MetricsTrace::Kind::accuracy) continue;
    auto& [sum, count] = acc[r.window];
    sum += r.v1;
    ++count;
  }
  std::vector<double> means;
  means.reserve(acc.size());
  for (const auto& [window, entry] : acc)
    means.push_back(entry.first / std::max(1, entry.second));
  return means;
}

std::map<CameraId, double> final_accuracy(const MetricsTrace& trace) {
  std::map<CameraId, double> final_acc;
  for (const auto& r : trace.rows)
    if (r.kind == MetricsTrace::Kind::accuracy) final_acc[r.camera] = r.v1;
  return final_acc;
}

std::map<CameraId, ResponseTime> response_time(const MetricsTrace& trace,
                                               double target_acc) {
  std::map<CameraId, ResponseTime> result;
  for (const auto& r : trace.rows) {
    if (r.kind != MetricsTrace::Kind::request) continue;
    if (result.count(r.camera)) continue;  // measured from the first request
    ResponseTime rt;
    rt.request_time_s = r.time_s;
    if (r.v1 >= target_acc) rt.response_s = 0.0;
    result[r.camera] = rt;
  }
  for (const auto& r : trace.rows) {
    if (r.kind != MetricsTrace::Kind::accuracy) continue;
    const auto it = result.find(r.camera);
    if (it == result.end() || it->second.response_s) continue;
    if (r.time_s >= it->second.request_time_s && r.v1 >= target_acc)
      it->second.response_s = r.time_s - it->second.request_time_s;
  }
  return result;
}

}  // namespace ecco
