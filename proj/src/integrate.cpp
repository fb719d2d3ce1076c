#include "gfold/integrate.hpp"

#include "gfold/numfmt.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace gfold {

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0) || !(abs_tol > 0)) throw ConfigError("integrator: tolerances must be positive");
  if (!(min_step > 0) || !(min_step < max_step))
    throw ConfigError("integrator: need 0 < min_step < max_step");
  if (!(blowup_norm > 0)) throw ConfigError("integrator: blowup_norm must be positive");
}

EventSpec EventSpec::coordinate_equals(Index index, double value, std::string id, Direction dir,
                                       bool terminal) {
  return {Kind::coordinate_equals, index, value, dir, terminal, std::move(id)};
}

EventSpec EventSpec::sign_change(Index index, std::string id, Direction dir, bool terminal) {
  return {Kind::sign_change, index, 0.0, dir, terminal, std::move(id)};
}

EventSpec EventSpec::norm_exceeds(double threshold, std::string id, bool terminal) {
  return {Kind::norm_exceeds, 0, threshold, Direction::increasing, terminal, std::move(id)};
}

double EventSpec::g(const VectorXd& y) const {
  switch (kind) {
    case Kind::coordinate_equals:
      return y(index) - value;
    case Kind::sign_change:
      return y(index);
    case Kind::norm_exceeds:
      return y.lpNorm<Eigen::Infinity>() - value;
  }
  return 0.0;
}

VectorXd DenseSegment::eval(double t) const {
  const double th = (t - t0) / h;
  const double th1 = 1.0 - th;
  return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
}

const char* to_string(Status s) {
  switch (s) {
    case Status::completed:
      return "completed";
    case Status::event_terminated:
      return "event_terminated";
    case Status::blowup_detected:
      return "blowup_detected";
    case Status::step_underflow:
      return "step_underflow";
  }
  return "?";
}

VectorXd Trajectory::at(double t) const {
  if (segments.empty()) return states.front();
  auto it = std::upper_bound(segments.begin(), segments.end(), t,
                             [](double x, const DenseSegment& s) { return x < s.t0; });
  if (it != segments.begin()) --it;
  return it->eval(std::clamp(t, times.front(), times.back()));
}

namespace {

bool all_finite(const VectorXd& y) { return y.allFinite(); }

double err_norm(const VectorXd& e, const VectorXd& y0, const VectorXd& y1, const IntegratorConfig& c) {
  const Index n = e.size();
  double s = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double sc = c.abs_tol + c.rel_tol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    const double q = e(i) / sc;
    s += q * q;
  }
  return std::sqrt(s / static_cast<double>(n));
}

struct Trial {
  bool ok = false;  // stages finite
  double err = 0.0;
  VectorXd y1, f1;
  DenseSegment seg;
};

class Stepper {
 public:
  Stepper(const Field& f, const IntegratorConfig& cfg, long& evals) : f_(f), cfg_(cfg), evals_(evals) {}
  virtual ~Stepper() = default;
  virtual Trial step(double t, const VectorXd& y, const VectorXd& f0, double h) = 0;
  virtual int order() const = 0;

 protected:
  VectorXd call(double t, const VectorXd& y) {
    ++evals_;
    return f_(t, y);
  }
  const Field& f_;
  const IntegratorConfig& cfg_;
  long& evals_;
};

// Dormand-Prince 5(4) with the Hairer 4th-order continuous extension.
class Dopri5 final : public Stepper {
 public:
  using Stepper::Stepper;
  int order() const override { return 5; }

  Trial step(double t, const VectorXd& y, const VectorXd& k1, double h) override {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                     a76 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;
    constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                     d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                     d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
    Trial tr;
    auto stage = [&](double tt, const VectorXd& yy, VectorXd& out) {
      if (!all_finite(yy)) return false;
      out = call(tt, yy);
      return all_finite(out);
    };
    VectorXd k2, k3, k4, k5, k6, k7;
    if (!stage(t + c2 * h, y + h * a21 * k1, k2)) return tr;
    if (!stage(t + c3 * h, y + h * (a31 * k1 + a32 * k2), k3)) return tr;
    if (!stage(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3), k4)) return tr;
    if (!stage(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), k5)) return tr;
    if (!stage(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), k6)) return tr;
    tr.y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    if (!stage(t + h, tr.y1, k7)) return tr;
    const VectorXd e = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    tr.err = err_norm(e, y, tr.y1, cfg_);
    tr.f1 = k7;
    auto& s = tr.seg;
    s.t0 = t;
    s.h = h;
    s.r1 = y;
    s.r2 = tr.y1 - y;
    s.r3 = h * k1 - s.r2;
    s.r4 = s.r2 - h * k7 - s.r3;
    s.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
    tr.ok = std::isfinite(tr.err);
    return tr;
  }
};

// Verwer's two-stage L-stable Rosenbrock-W method (order 2, embedded order 1) with a
// finite-difference Jacobian. Time is appended as a state so the scheme stays autonomous.
class Ros2 final : public Stepper {
 public:
  using Stepper::Stepper;
  int order() const override { return 2; }

  Trial step(double t, const VectorXd& y, const VectorXd& f0, double h) override {
    constexpr double gamma = 1.0 + 1.0 / sqrt2;
    Trial tr;
    const Index n = y.size();
    MatrixXd J = MatrixXd::Zero(n + 1, n + 1);
    const double sq = std::sqrt(std::numeric_limits<double>::epsilon());
    for (Index j = 0; j <= n; ++j) {
      const double base = (j < n) ? y(j) : t;
      const double dj = sq * std::max(1.0, std::abs(base));
      VectorXd yp = y;
      double tp = t;
      if (j < n)
        yp(j) += dj;
      else
        tp += dj;
      const VectorXd fp = call(tp, yp);
      if (!all_finite(fp)) return tr;
      J.block(0, j, n, 1) = (fp - f0) / dj;
    }
    MatrixXd W = -gamma * h * J;
    W.diagonal().array() += 1.0;
    Eigen::PartialPivLU<MatrixXd> lu(W);
    VectorXd F0(n + 1);
    F0 << f0, 1.0;
    const VectorXd k1 = lu.solve(F0);
    const VectorXd ys = y + h * k1.head(n);
    if (!all_finite(ys)) return tr;
    VectorXd F1(n + 1);
    F1.head(n) = call(t + h * k1(n), ys);
    if (!all_finite(F1.head(n))) return tr;
    F1(n) = 1.0;
    const VectorXd k2 = lu.solve(F1 - 2.0 * k1);
    tr.y1 = y + h * (1.5 * k1.head(n) + 0.5 * k2.head(n));
    if (!all_finite(tr.y1)) return tr;
    tr.f1 = call(t + h, tr.y1);
    if (!all_finite(tr.f1)) return tr;
    const VectorXd e = 0.5 * h * (k1.head(n) + k2.head(n));
    tr.err = err_norm(e, y, tr.y1, cfg_);
    auto& s = tr.seg;
    s.t0 = t;
    s.h = h;
    s.r1 = y;
    s.r2 = tr.y1 - y;
    s.r3 = h * f0 - s.r2;
    s.r4 = s.r2 - h * tr.f1 - s.r3;
    s.r5 = VectorXd::Zero(n);
    tr.ok = std::isfinite(tr.err);
    return tr;
  }
};

bool crosses(double g0, double g1, Direction d) {
  if (g0 == 0.0) return false;
  const bool up = g0 < 0 && g1 >= 0;
  const bool down = g0 > 0 && g1 <= 0;
  switch (d) {
    case Direction::increasing:
      return up;
    case Direction::decreasing:
      return down;
    case Direction::any:
      return up || down;
  }
  return false;
}

double bisect_segment(const DenseSegment& seg, const EventSpec& ev, double a, double b, double ga) {
  for (int it = 0; it < 60; ++it) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    const double gm = ev.g(seg.eval(m));
    if ((ga < 0) == (gm < 0) && gm != 0.0) {
      a = m;
      ga = gm;
    } else {
      b = m;
    }
  }
  return b;
}

double initial_step(Stepper& st, double t0, const VectorXd& y0, const VectorXd& f0,
                    double span, const IntegratorConfig& c, long& evals, const Field& f) {
  VectorXd sc = (c.abs_tol + c.rel_tol * y0.array().abs()).matrix();
  const double n = static_cast<double>(y0.size());
  const double d0 = std::sqrt((y0.array() / sc.array()).square().sum() / n);
  const double d1 = std::sqrt((f0.array() / sc.array()).square().sum() / n);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min({h0, span, c.max_step});
  const VectorXd y1 = y0 + h0 * f0;
  ++evals;
  const VectorXd f1 = f(t0 + h0, y1);
  double d2 = all_finite(f1) ? std::sqrt(((f1 - f0).array() / sc.array()).square().sum() / n) / h0
                             : std::numeric_limits<double>::infinity();
  const double dm = std::max(d1, d2);
  const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                : std::pow(0.01 / dm, 1.0 / st.order());
  return std::min({100 * h0, h1, span, c.max_step});
}

}  // namespace

Trajectory integrate(const Field& f, const VectorXd& y0, double t0, double t1,
                     const IntegratorConfig& cfg, const std::vector<EventSpec>& events) {
  cfg.validate();
  if (!(t0 < t1)) throw DomainError("integrate: need t0 < t1");
  if (!all_finite(y0)) throw DomainError("integrate: initial state not finite");
  for (const auto& ev : events)
    if (ev.kind != EventSpec::Kind::norm_exceeds && (ev.index < 0 || ev.index >= y0.size()))
      throw ShapeError("integrate: event index outside state dimension");

  Trajectory tr;
  tr.times.push_back(t0);
  tr.states.push_back(y0);

  Dopri5 dp(f, cfg, tr.field_evals);
  Ros2 rs(f, cfg, tr.field_evals);
  Stepper& st = cfg.stiff_mode == StiffMode::explicit_rk ? static_cast<Stepper&>(dp) : rs;
  const double q = cfg.stiff_mode == StiffMode::explicit_rk ? 5.0 : 2.0;

  double t = t0;
  VectorXd y = y0;
  ++tr.field_evals;
  VectorXd fy = f(t, y);
  if (!all_finite(fy)) throw IntegrationError("integrate: non-finite derivative", t, y);

  std::vector<double> gprev(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) gprev[i] = events[i].g(y);

  double h = initial_step(st, t0, y0, fy, t1 - t0, cfg, tr.field_evals, f);
  bool last_rejected = false;
  bool nonfinite = false;  // last trial produced a non-finite value
  long steps = 0;

  while (t < t1) {
    if (++steps > cfg.max_steps) throw IntegrationError("integrate: step budget exhausted", t, y);
    if (t + h > t1 || t1 - (t + h) < 1e-12 * h) h = t1 - t;
    if (h < cfg.min_step || t + h == t) {
      if (nonfinite) throw IntegrationError("integrate: non-finite derivative", t, y);
      tr.status = Status::step_underflow;
      return tr;
    }
    Trial trial = st.step(t, y, fy, h);
    nonfinite = !trial.ok;
    if (!trial.ok || trial.err > 1.0) {
      ++tr.rejected_steps;
      const double fac = trial.ok ? std::clamp(0.9 * std::pow(trial.err, -1.0 / q), 0.2, 1.0) : 0.25;
      h *= fac;
      last_rejected = true;
      continue;
    }

    const double tn = (h == t1 - t) ? t1 : t + h;
    if (!cfg.keep_dense) tr.segments.clear();
    tr.segments.push_back(trial.seg);
    const DenseSegment& seg = tr.segments.back();

    // Events inside this step, earliest first.
    struct Hit {
      double t;
      std::size_t i;
    };
    std::vector<Hit> hits;
    std::vector<double> gnew(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
      gnew[i] = events[i].g(trial.y1);
      if (crosses(gprev[i], gnew[i], events[i].direction))
        hits.push_back({gnew[i] == 0.0 ? tn : bisect_segment(seg, events[i], t, tn, gprev[i]), i});
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.t < b.t; });
    for (const auto& hit : hits) {
      const VectorXd ye = hit.t == tn ? trial.y1 : seg.eval(hit.t);
      tr.events.push_back({hit.t, ye, events[hit.i].id});
      if (events[hit.i].terminal) {
        if (hit.t > tr.times.back()) {
          tr.times.push_back(hit.t);
          tr.states.push_back(ye);
        }
        tr.status = Status::event_terminated;
        return tr;
      }
    }
    gprev = gnew;

    t = tn;
    y = trial.y1;
    fy = trial.f1;
    tr.times.push_back(t);
    tr.states.push_back(y);

    if (y.lpNorm<Eigen::Infinity>() > cfg.blowup_norm) {
      tr.status = Status::blowup_detected;
      return tr;
    }

    double fac = std::clamp(0.9 * std::pow(std::max(trial.err, 1e-10), -1.0 / q), 0.2, 5.0);
    if (last_rejected) fac = std::min(fac, 1.0);
    last_rejected = false;
    h = std::min(h * fac, cfg.max_step);
  }
  tr.status = Status::completed;
  return tr;
}

std::optional<EventRecord> locate_section_hit(const Trajectory& traj, const EventSpec& spec) {
  if (traj.states.empty()) return std::nullopt;
  const double tend = traj.final_time();
  double ga = spec.g(traj.states.front());
  for (const auto& seg : traj.segments) {
    const double b = std::min(seg.t0 + seg.h, tend);
    if (b <= seg.t0) break;
    const VectorXd yb = (b == tend) ? traj.final_state() : seg.eval(b);
    const double gb = spec.g(yb);
    if (crosses(ga, gb, spec.direction)) {
      const double th = gb == 0.0 ? b : bisect_segment(seg, spec, seg.t0, b, ga);
      return EventRecord{th, th == b ? yb : seg.eval(th), spec.id};
    }
    ga = gb;
  }
  return std::nullopt;
}

double blowup_time_estimate(const Trajectory& traj) {
  if (traj.status != Status::blowup_detected)
    throw EstimationError("blowup_time_estimate: trajectory did not blow up");
  const double last = traj.final_state().lpNorm<Eigen::Infinity>();
  std::vector<double> ts, ws;
  for (std::size_t i = traj.states.size(); i-- > 0 && ts.size() < 12;) {
    const double n = traj.states[i].lpNorm<Eigen::Infinity>();
    if (n < 1e-3 * last) break;
    ts.push_back(traj.times[i]);
    ws.push_back(1.0 / n);
  }
  if (ts.size() < 3) throw EstimationError("blowup_time_estimate: too few tail samples");
  Eigen::MatrixXd X(ts.size(), 2);
  Eigen::VectorXd w(ts.size());
  const double tref = traj.final_time();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = ts[i] - tref;
    w(i) = ws[i];
  }
  const Eigen::Vector2d c = X.colPivHouseholderQr().solve(w);
  if (!(c(1) < 0)) throw EstimationError("blowup_time_estimate: tail is not growing");
  return tref - c(0) / c(1);
}

std::vector<std::string> galerkin_names(int k0) {
  std::vector<std::string> n;
  for (int k = 1; k <= k0; ++k) n.push_back("u" + std::to_string(k));
  for (int k = 1; k <= k0; ++k) n.push_back("v" + std::to_string(k));
  return n;
}

void write_csv(std::ostream& os, const Trajectory& traj, const std::vector<std::string>& names) {
  os << 't';
  for (const auto& n : names) os << ',' << n;
  os << '\n';
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    os << fmt(traj.times[i]);
    for (Index j = 0; j < traj.states[i].size(); ++j) os << ',' << fmt(traj.states[i](j));
    os << '\n';
  }
  for (const auto& e : traj.events) os << "# event," << e.id << ',' << fmt(e.t) << '\n';
}

}  // namespace gfold
