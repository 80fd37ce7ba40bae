#pragma once

// CSV output for projected angles and benchmark metrics.

#include <cstdio>
#include <ostream>
#include <string>

#include "handrig/retarget.hpp"

namespace handrig::io {

inline std::string csv_num(double v) {
  if (v == 0.0) v = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

/// frame,<20 dof names>,clamped
inline void write_angles_header(std::ostream& os, const HandModel& model) {
  os << "frame";
  for (const DofSlot& s : model.dof_layout()) os << ',' << s.name;
  os << ",clamped\n";
}

inline void write_angles_row(std::ostream& os, std::size_t frame, const ProjectedPose& p) {
  os << frame;
  for (double v : p.angles.values) os << ',' << csv_num(v);
  os << ',' << p.clamp_count << '\n';
}

/// One row per method, columns mirroring the accuracy table.
/// `include_time` = false blanks the timing column for byte-stable output.
inline void write_metrics_csv(std::ostream& os, const MetricsReport& r, bool include_time = true) {
  os << "method,mean_error_deg,max_error_deg,rmse_deg,time_ms,samples,clamped\n";
  for (const MethodMetrics& m : r.methods) {
    os << to_string(m.method) << ',' << csv_num(m.overall.mean_deg) << ',' << csv_num(m.overall.max_deg) << ','
       << csv_num(m.overall.rmse_deg) << ',' << (include_time ? csv_num(m.mean_time_ms) : std::string()) << ','
       << m.overall.samples << ',' << m.clamp_count << '\n';
  }
}

inline void write_per_joint_csv(std::ostream& os, const MetricsReport& r) {
  os << "method,joint,mean_error_deg,max_error_deg,rmse_deg,samples\n";
  for (const MethodMetrics& m : r.methods) {
    for (int j = 0; j < kNumJoints; ++j) {
      const ErrorStats& s = m.per_joint[static_cast<std::size_t>(j)];
      os << to_string(m.method) << ',' << kJointNames[static_cast<std::size_t>(j)] << ',' << csv_num(s.mean_deg) << ','
         << csv_num(s.max_deg) << ',' << csv_num(s.rmse_deg) << ',' << s.samples << '\n';
    }
  }
}

/// Fixed-width summary in the layout of the accuracy table.
inline void print_summary(std::ostream& os, const MetricsReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-8s %14s %14s %10s %12s\n", "Method", "Mean Error(°)", "Max Error(°)", "RMSE(°)",
                "Time(ms)");
  os << buf;
  for (const MethodMetrics& m : r.methods) {
    std::snprintf(buf, sizeof buf, "%-8s %13.2f %13.2f %10.2f %12.4f\n", std::string(to_string(m.method)).c_str(),
                  m.overall.mean_deg, m.overall.max_deg, m.overall.rmse_deg, m.mean_time_ms);
    os << buf;
  }
  const OneDofVariantStats& v = r.one_dof_variants;
  std::snprintf(buf, sizeof buf, "one-DOF joints, mean error(°): closed-form %.3f  trace-form %.3f  log-projection %.3f\n",
                v.closed_form.mean_deg, v.trace_form.mean_deg, v.log_projection.mean_deg);
  os << buf;
  os << "poses: " << r.pose_count << ", samples per method: "
     << (r.methods.empty() ? 0 : r.methods.front().overall.samples) << '\n';
}

}  // namespace handrig::io
