#include "tpo/service/log.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace tpo::service {

namespace {

void append_vec(std::string& out, const VecX& v, char sep) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += format_number(v[i]);
  }
}

std::string json_array(const VecX& v) {
  std::string out = "[";
  append_vec(out, v, ',');
  return out + "]";
}

std::string json_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

VecX base_vec(const StepRecord& r) { return Eigen::Vector4d(r.base.x, r.base.y, r.base.yaw, r.pelvis_z); }

}  // namespace

std::string format_number(double v) {
  if (v == 0.0) return "0";  // folds -0
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string csv_header(const StepRecord& shape) {
  std::string h = "t";
  for (Eigen::Index i = 0; i < shape.q_left.size(); ++i) h += ",q_left_" + std::to_string(i);
  for (Eigen::Index i = 0; i < shape.q_right.size(); ++i) h += ",q_right_" + std::to_string(i);
  h += ",base_x,base_y,base_yaw,pelvis_z,beta_x,beta_y,beta_z,w_x,w_y,w_z";
  h += ",fs_left_x,fs_left_y,fs_left_z,fs_right_x,fs_right_y,fs_right_z,f_bar,bt_status,active";
  return h;
}

std::string csv_row(const StepRecord& r) {
  std::string out = format_number(r.t);
  const auto add = [&](const VecX& v) {
    if (v.size() == 0) return;
    out += ',';
    append_vec(out, v, ',');
  };
  add(r.q_left);
  add(r.q_right);
  add(base_vec(r));
  add(r.beta);
  add(r.w);
  add(r.f_left);
  add(r.f_right);
  out += ',' + format_number(r.f_bar);
  out += ',' + r.bt_status;
  out += ',' + r.active;
  return out;
}

std::string jsonl_row(const StepRecord& r) {
  std::string out = "{\"t\":" + format_number(r.t);
  out += ",\"q\":{\"left\":" + json_array(r.q_left) + ",\"right\":" + json_array(r.q_right) + "}";
  out += ",\"base\":" + json_array(base_vec(r));
  out += ",\"beta\":" + json_array(r.beta);
  out += ",\"w\":" + json_array(r.w);
  out += ",\"f_s\":{\"left\":" + json_array(r.f_left) + ",\"right\":" + json_array(r.f_right) + "}";
  out += ",\"f_bar\":" + format_number(r.f_bar);
  out += ",\"bt\":" + json_string(r.bt_status);
  out += ",\"active\":" + json_string(r.active) + "}";
  return out;
}

void LogWriter::write(const StepRecord& r) {
  if (rows_ == 0 && csv_) *csv_ << csv_header(r) << '\n';
  if (csv_) *csv_ << csv_row(r) << '\n';
  if (jsonl_) *jsonl_ << jsonl_row(r) << '\n';
  ++rows_;
}

}  // namespace tpo::service
