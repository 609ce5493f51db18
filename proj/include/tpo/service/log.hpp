#pragma once

#include <iosfwd>
#include <string>

#include "tpo/common/types.hpp"

namespace tpo::service {

/// One logged simulation step.
struct StepRecord {
  double t = 0.0;
  VecX q_left;
  VecX q_right;
  PlanarPose base;
  double pelvis_z = 0.0;
  Vec3 beta = Vec3::Zero();
  Vec3 w = Vec3::Ones();
  Vec3 f_left = Vec3::Zero();   // sensed, object frame
  Vec3 f_right = Vec3::Zero();
  double f_bar = 0.0;
  std::string bt_status;  // one S/F/R/- per node in preorder
  std::string active;     // '+'-joined active action modules
};

/// Fixed-precision number text shared by both log formats.
std::string format_number(double v);

std::string csv_header(const StepRecord& shape);
std::string csv_row(const StepRecord& r);
std::string jsonl_row(const StepRecord& r);

/// Writes CSV and line-delimited JSON side by side. Either stream may be null.
class LogWriter {
 public:
  LogWriter(std::ostream* csv, std::ostream* jsonl) : csv_(csv), jsonl_(jsonl) {}
  void write(const StepRecord& r);
  std::size_t rows() const { return rows_; }

 private:
  std::ostream* csv_;
  std::ostream* jsonl_;
  std::size_t rows_ = 0;
};

}  // namespace tpo::service
