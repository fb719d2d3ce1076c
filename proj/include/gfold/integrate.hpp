#pragma once

#include "gfold/common.hpp"

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace gfold {

using Field = std::function<VectorXd(double t, const VectorXd& y)>;

enum class StiffMode { explicit_rk, semi_implicit };

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  double blowup_norm = 1e6;
  double min_step = 1e-14;
  StiffMode stiff_mode = StiffMode::explicit_rk;
  long max_steps = 20'000'000;
  bool keep_dense = true;  // false: only the last step's interpolant is kept

  void validate() const;
};

enum class Direction { any, increasing, decreasing };

struct EventSpec {
  enum class Kind { coordinate_equals, sign_change, norm_exceeds };
  Kind kind = Kind::coordinate_equals;
  Index index = 0;
  double value = 0.0;
  Direction direction = Direction::any;
  bool terminal = true;
  std::string id;

  static EventSpec coordinate_equals(Index index, double value, std::string id = {},
                                     Direction dir = Direction::any, bool terminal = true);
  static EventSpec sign_change(Index index, std::string id = {}, Direction dir = Direction::any,
                               bool terminal = true);
  static EventSpec norm_exceeds(double threshold, std::string id = {}, bool terminal = true);

  double g(const VectorXd& y) const;
};

struct EventRecord {
  double t;
  VectorXd y;
  std::string id;
};

// Interpolant on [t0, t0 + h] in the nested form r1 + th (r2 + th1 (r3 + th (r4 + th1 r5))).
struct DenseSegment {
  double t0 = 0.0;
  double h = 0.0;
  VectorXd r1, r2, r3, r4, r5;

  VectorXd eval(double t) const;
};

enum class Status { completed, event_terminated, blowup_detected, step_underflow };

const char* to_string(Status s);

struct Trajectory {
  std::vector<double> times;
  std::vector<VectorXd> states;
  std::vector<DenseSegment> segments;
  std::vector<EventRecord> events;
  Status status = Status::completed;
  long rejected_steps = 0;
  long field_evals = 0;

  const VectorXd& final_state() const { return states.back(); }
  double final_time() const { return times.back(); }
  VectorXd at(double t) const;
};

struct IntegrationError : std::runtime_error {
  IntegrationError(const std::string& what, double t, VectorXd y)
      : std::runtime_error(what), t(t), last_state(std::move(y)) {}
  double t;
  VectorXd last_state;
};

Trajectory integrate(const Field& f, const VectorXd& y0, double t0, double t1,
                     const IntegratorConfig& cfg, const std::vector<EventSpec>& events = {});

// First crossing of spec along the dense output, searched segment by segment.
std::optional<EventRecord> locate_section_hit(const Trajectory& traj, const EventSpec& spec);

// Fits 1/|y|_inf linearly in t over the tail and returns its zero.
double blowup_time_estimate(const Trajectory& traj);

std::vector<std::string> galerkin_names(int k0);
void write_csv(std::ostream& os, const Trajectory& traj, const std::vector<std::string>& names);

}  // namespace gfold
