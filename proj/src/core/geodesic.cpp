#include "core/geodesic.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace finsler {

namespace {

// Dormand-Prince 5(4) tableau
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187, kA53 = 64448.0 / 6561,
                 kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33, kA63 = 46732.0 / 5247,
                 kA64 = 49.0 / 176, kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192,
                 kB5 = -2187.0 / 6784, kB6 = 11.0 / 84;
constexpr double kE1 = 35.0 / 384 - 5179.0 / 57600, kE3 = 500.0 / 1113 - 7571.0 / 16695,
                 kE4 = 125.0 / 192 - 393.0 / 640, kE5 = -2187.0 / 6784 + 92097.0 / 339200,
                 kE6 = 11.0 / 84 - 187.0 / 2100, kE7 = -1.0 / 40;
// dense-output weights
constexpr double kD1 = -12715105075.0 / 11282082432.0;
constexpr double kD3 = 87487479700.0 / 32700410799.0;
constexpr double kD4 = -10690763975.0 / 1880347072.0;
constexpr double kD5 = 701980252875.0 / 199316789632.0;
constexpr double kD6 = -1453857185.0 / 822651844.0;
constexpr double kD7 = 69997945.0 / 29380423.0;

Vec dense_eval(const GeodesicTrace::Segment& s, double t) {
  double th = (t - s.t0) / s.h;
  double th1 = 1.0 - th;
  return s.cont[0] +
         th * (s.cont[1] + th1 * (s.cont[2] + th * (s.cont[3] + th1 * s.cont[4])));
}

}  // namespace

Vec spray(const Metric& metric, const Vec& x, const Vec& y) {
  const int n = metric.dim();
  if (metric.x_independent()) return Vec::Zero(n);

  Mat h_yx(n, n);  // d^2 F^2 / dy_l dx_k
  Vec f2_x(n);     // d F^2 / dx_l
  if (metric.supports_autodiff()) {
    for (int l = 0; l < n; ++l)
      for (int k = 0; k < n; ++k) {
        HDual e = metric.F2_seeded(x, y, l, false, k, true);
        h_yx(l, k) = e.d12;
        if (l == 0) f2_x(k) = e.d2;
      }
  } else {
    const double step = 6.0554544523933429e-06 *
                        std::max(1.0, std::max(x.cwiseAbs().maxCoeff(), y.cwiseAbs().maxCoeff()));
    for (int l = 0; l < n; ++l)
      for (int k = 0; k < n; ++k) {
        Vec xp = x, xm = x, yp = y, ym = y;
        xp[k] += step;
        xm[k] -= step;
        yp[l] += step;
        ym[l] -= step;
        h_yx(l, k) = (metric.F2(xp, yp) - metric.F2(xp, ym) - metric.F2(xm, yp) +
                      metric.F2(xm, ym)) /
                     (4.0 * step * step);
      }
    f2_x = metric.grad_F2_x(x, y);
  }

  FundamentalTensor g = metric.fundamental_tensor(x, y);
  Vec rhs = h_yx * y - f2_x;
  return 0.25 * (g.g_inv * rhs);
}

PhaseState unit_state(const Metric& metric, const Vec& x, const Vec& direction) {
  double f = metric.F(x, direction);
  return {x, direction / f};
}

// ---------------------------------------------------------------------------
// FlowIntegrator

FlowIntegrator::FlowIntegrator(const Metric& metric, const Model& model, const PhaseState& s0,
                               const FlowOptions& options)
    : metric_(metric), model_(model), opt_(options), n_(metric.dim()) {
  if (s0.x.size() != n_ || s0.y.size() != n_)
    throw ArgumentError("flow: state dimension mismatch");
  z_ = Vec(2 * n_);
  z_.head(n_) = s0.x;
  z_.tail(n_) = s0.y;
  dir_ = opt_.backward ? -1.0 : 1.0;
  f0_ = metric_.F(s0.x, s0.y);
  k1_ = rhs(z_);
  h_ = std::min(opt_.h_init, opt_.h_max);
}

Vec FlowIntegrator::rhs(const Vec& z) const {
  Vec dz(2 * n_);
  Vec x = z.head(n_), y = z.tail(n_);
  dz.head(n_) = y;
  dz.tail(n_) = -2.0 * spray(metric_, x, y);
  return dir_ * dz;
}

bool FlowIntegrator::step(double t_limit) {
  if (t_ >= t_limit) return false;
  double h = std::min(h_, opt_.h_max);
  bool clamped = false;
  if (t_ + h >= t_limit) {
    h = t_limit - t_;
    clamped = true;
  }

  for (int attempt = 0;; ++attempt) {
    if (h < 1e-14 * std::max(1.0, t_) || attempt > 60) {
      throw IntegrationError("flow: step size underflow (stiff or singular region)", dir_ * t_,
                             to_std(z_));
    }
    Vec k1 = k1_;
    Vec k2 = rhs(z_ + h * (kA21 * k1));
    Vec k3 = rhs(z_ + h * (kA31 * k1 + kA32 * k2));
    Vec k4 = rhs(z_ + h * (kA41 * k1 + kA42 * k2 + kA43 * k3));
    Vec k5 = rhs(z_ + h * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4));
    Vec k6 = rhs(z_ + h * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 + kA65 * k5));
    Vec z_new = z_ + h * (kB1 * k1 + kB3 * k3 + kB4 * k4 + kB5 * k5 + kB6 * k6);
    Vec k7 = rhs(z_new);
    Vec err_v = h * (kE1 * k1 + kE3 * k3 + kE4 * k4 + kE5 * k5 + kE6 * k6 + kE7 * k7);

    double err = 0.0;
    for (int i = 0; i < 2 * n_; ++i) {
      double sc = opt_.atol + opt_.rtol * std::max(std::abs(z_[i]), std::abs(z_new[i]));
      double e = err_v[i] / sc;
      err += e * e;
    }
    err = std::sqrt(err / (2 * n_));

    if (err <= 1.0) {
      GeodesicTrace::Segment seg;
      seg.t0 = t_;
      seg.h = h;
      Vec ydiff = z_new - z_;
      Vec bspl = h * k1 - ydiff;
      seg.cont.resize(5);
      seg.cont[0] = z_;
      seg.cont[1] = ydiff;
      seg.cont[2] = bspl;
      seg.cont[3] = ydiff - h * k7 - bspl;
      seg.cont[4] = h * (kD1 * k1 + kD3 * k3 + kD4 * k4 + kD5 * k5 + kD6 * k6 + kD7 * k7);
      segments_.push_back(std::move(seg));

      t_ += h;
      z_ = z_new;
      k1_ = k7;  // FSAL
      double f = metric_.F(z_.head(n_), z_.tail(n_));
      f_drift_ = std::max(f_drift_, std::abs(f - f0_));

      double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
      h_ = h * std::clamp(fac, 0.2, 5.0);
      if (clamped) h_ = std::max(h_, opt_.h_init);
      return t_ < t_limit;
    }
    h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
    clamped = false;
  }
}

PhaseState FlowIntegrator::state() const { return {z_.head(n_), z_.tail(n_)}; }

void FlowIntegrator::prune_before(double t_keep) {
  while (segments_.size() > 1 && segments_.front().t0 + segments_.front().h < t_keep)
    segments_.pop_front();
}

PhaseState FlowIntegrator::dense(double t) const {
  if (segments_.empty() || t < segments_.front().t0 - 1e-12 || t > t_ + 1e-12)
    throw ArgumentError("flow: dense-output query outside integrated/retained span");
  t = std::clamp(t, segments_.front().t0, t_);
  // binary search for the segment containing t
  size_t lo = 0, hi = segments_.size() - 1;
  while (lo < hi) {
    size_t mid = (lo + hi) / 2;
    if (segments_[mid].t0 + segments_[mid].h < t)
      lo = mid + 1;
    else
      hi = mid;
  }
  Vec z = dense_eval(segments_[lo], t);
  return {z.head(n_), z.tail(n_)};
}

// ---------------------------------------------------------------------------

PhaseState GeodesicTrace::at(double t) const {
  if (segments.empty()) throw ArgumentError("trace: no dense segments");
  double span = segments.back().t0 + segments.back().h;
  if (t < -1e-12 || t > span + 1e-12) throw ArgumentError("trace: time outside integrated span");
  t = std::clamp(t, 0.0, span);
  size_t lo = 0, hi = segments.size() - 1;
  while (lo < hi) {
    size_t mid = (lo + hi) / 2;
    if (segments[mid].t0 + segments[mid].h < t)
      lo = mid + 1;
    else
      hi = mid;
  }
  Vec z = dense_eval(segments[lo], t);
  int n = static_cast<int>(z.size()) / 2;
  return {z.head(n), z.tail(n)};
}

GeodesicTrace integrate_flow(const Metric& metric, const Model& model, const PhaseState& s0,
                             double t_end, double tol, const FlowOptions& options) {
  if (!(t_end > 0.0)) throw ArgumentError("integrate_flow: t_end must be positive");
  if (!(tol > 0.0)) throw ArgumentError("integrate_flow: tol must be positive");

  FlowOptions opt = options;
  opt.rtol = std::min(opt.rtol, tol * 1e-2);
  opt.atol = std::min(opt.atol, tol * 1e-3);

  FlowIntegrator fi(metric, model, s0, opt);
  GeodesicTrace trace;
  trace.t_end = opt.backward ? -t_end : t_end;

  auto push = [&](double t, const PhaseState& s) {
    trace.times.push_back(t);
    trace.states_unwrapped.push_back(s);
    trace.states.push_back({model.wrap(s.x), s.y});
    trace.F_values.push_back(metric.F(s.x, s.y));
  };

  push(0.0, {s0.x, s0.y});
  if (opt.sample_dt > 0.0) {
    double next = opt.sample_dt;
    bool more = true;
    while (more) {
      more = fi.step(t_end);
      double front = fi.t();
      while (next <= front + 1e-12 && next <= t_end + 1e-12) {
        double tq = std::min(next, front);
        push(tq, fi.dense(tq));
        next += opt.sample_dt;
      }
    }
    if (trace.times.back() < t_end - 1e-12) push(t_end, fi.state());
  } else {
    while (fi.step(t_end)) push(fi.t(), fi.state());
    if (trace.times.back() < t_end - 1e-12) push(t_end, fi.state());
  }

  trace.segments.assign(fi.segments_.begin(), fi.segments_.end());
  double f0 = trace.F_values.front();
  for (double f : trace.F_values) trace.F_drift = std::max(trace.F_drift, std::abs(f - f0));
  trace.F_drift = std::max(trace.F_drift, fi.f_drift());
  if (trace.F_drift > tol)
    throw NumericError("integrate_flow: F drift " + std::to_string(trace.F_drift) +
                       " exceeds tolerance " + std::to_string(tol));
  return trace;
}

// ---------------------------------------------------------------------------
// Liouville volume transport

nlohmann::json LiouvilleReport::to_json() const {
  return {{"ratio", ratio},           {"deviation", deviation}, {"jacobian_det", jacobian_det},
          {"det_g_start", det_g_start}, {"det_g_end", det_g_end}, {"t", t},
          {"central", central}};
}

std::vector<PhaseState> make_symmetric_cell(const PhaseState& center, double h) {
  const int n = static_cast<int>(center.x.size());
  std::vector<PhaseState> cell;
  cell.push_back(center);
  auto offset = [&](int axis, double d) {
    PhaseState s = center;
    if (axis < n)
      s.x[axis] += d;
    else
      s.y[axis - n] += d;
    return s;
  };
  for (int i = 0; i < 2 * n; ++i) cell.push_back(offset(i, 0.5 * h));
  for (int i = 0; i < 2 * n; ++i) cell.push_back(offset(i, -0.5 * h));
  return cell;
}

LiouvilleReport liouville_check(const Metric& metric, const Model& model,
                                const std::vector<PhaseState>& cell, double t,
                                const FlowOptions& options) {
  const int n = metric.dim();
  const size_t m = cell.size();
  if (m < static_cast<size_t>(2 * n + 1))
    throw DomainError("liouville_check: cell needs at least 2n+1 phase points");

  // symmetric layout: center followed by +offsets then -offsets
  bool central = false;
  if (m == static_cast<size_t>(4 * n + 1)) {
    central = true;
    for (int i = 1; i <= 2 * n && central; ++i) {
      Vec pp(2 * n), pm(2 * n), pc(2 * n);
      pp << cell[static_cast<size_t>(i)].x, cell[static_cast<size_t>(i)].y;
      pm << cell[static_cast<size_t>(i + 2 * n)].x, cell[static_cast<size_t>(i + 2 * n)].y;
      pc << cell[0].x, cell[0].y;
      if ((pp + pm - 2.0 * pc).norm() > 1e-12 * (1.0 + pc.norm())) central = false;
    }
  }

  FlowOptions opt = options;
  opt.rtol = std::min(opt.rtol, 1e-12);
  opt.atol = std::min(opt.atol, 1e-14);

  const size_t n_transport = central ? static_cast<size_t>(4 * n + 1)
                                     : static_cast<size_t>(2 * n + 1);
  std::vector<Vec> end(n_transport);
  for (size_t i = 0; i < n_transport; ++i) {
    GeodesicTrace tr = integrate_flow(metric, model, cell[i], t, 1e-4, opt);
    Vec z(2 * n);
    z << tr.states_unwrapped.back().x, tr.states_unwrapped.back().y;
    end[i] = z;
  }

  auto stack = [&](const PhaseState& s) {
    Vec z(2 * n);
    z << s.x, s.y;
    return z;
  };

  Mat e0(2 * n, 2 * n), e1(2 * n, 2 * n);
  for (int i = 0; i < 2 * n; ++i) {
    Vec c0, c1;
    if (central) {
      c0 = 0.5 * (stack(cell[static_cast<size_t>(i + 1)]) -
                  stack(cell[static_cast<size_t>(i + 1 + 2 * n)]));
      c1 = 0.5 * (end[static_cast<size_t>(i + 1)] - end[static_cast<size_t>(i + 1 + 2 * n)]);
    } else {
      c0 = stack(cell[static_cast<size_t>(i + 1)]) - stack(cell[0]);
      c1 = end[static_cast<size_t>(i + 1)] - end[0];
    }
    double s = c0.norm();
    if (s == 0.0) throw DomainError("liouville_check: degenerate cell (repeated point)");
    e0.col(i) = c0 / s;
    e1.col(i) = c1 / s;
  }
  double d0 = e0.determinant();
  if (std::abs(d0) < 1e-8) throw DomainError("liouville_check: degenerate cell (not affinely independent)");
  double d1 = e1.determinant();

  LiouvilleReport rep;
  rep.t = t;
  rep.central = central;
  rep.jacobian_det = std::abs(d1 / d0);
  rep.det_g_start = metric.det_fundamental(cell[0].x, cell[0].y);
  rep.det_g_end = metric.det_fundamental(end[0].head(n), end[0].tail(n));
  rep.ratio = rep.jacobian_det * rep.det_g_end / rep.det_g_start;
  rep.deviation = std::abs(rep.ratio - 1.0);
  return rep;
}

// ---------------------------------------------------------------------------
// Berwald diagnostic

double berwald_deviation(const Metric& metric, const Vec& x, int n_dirs, uint64_t seed) {
  if (n_dirs < 4) throw ArgumentError("berwald_deviation: need at least 4 directions");
  const int n = metric.dim();
  Rng rng(seed);

  std::vector<Vec> dirs;
  dirs.reserve(static_cast<size_t>(n_dirs));
  for (int k = 0; k < n_dirs; ++k) {
    Vec u(n);
    for (int i = 0; i < n; ++i) u[i] = rng.normal();
    if (u.norm() < 1e-8) u[0] = 1.0;
    u.normalize();
    dirs.push_back(unit_state(metric, x, u).y);
  }

  const int m = n * (n + 1) / 2;  // quadratic-form coefficients per component
  Mat design(n_dirs, m);
  Mat values(n_dirs, n);
  for (int k = 0; k < n_dirs; ++k) {
    const Vec& y = dirs[static_cast<size_t>(k)];
    int col = 0;
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) design(k, col++) = y[a] * y[b];
    values.row(k) = spray(metric, x, y).transpose();
  }

  Mat coef = design.colPivHouseholderQr().solve(values);
  Mat fit = design * coef;
  double max_res = (values - fit).cwiseAbs().maxCoeff();
  double fit_mag = fit.cwiseAbs().maxCoeff();
  return max_res / (fit_mag + 1e-12);
}

}  // namespace finsler
