#include "core/distance.hpp"

#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include "core/error.hpp"

namespace finsler {

namespace {

// 16-direction stencil: axis, diagonal and knight moves
constexpr int kStencil[16][2] = {{1, 0},  {-1, 0}, {0, 1},  {0, -1}, {1, 1},  {1, -1},
                                 {-1, 1}, {-1, -1}, {2, 1},  {1, 2},  {-1, 2}, {-2, 1},
                                 {-2, -1}, {-1, -2}, {1, -2}, {2, -1}};

}  // namespace

DistanceField DistanceField::from_source(const Metric& metric, const Model& model,
                                         const GridSpec& spec, const Vec& source) {
  return solve(metric, model, spec, source, true);
}

DistanceField DistanceField::to_target(const Metric& metric, const Model& model,
                                       const GridSpec& spec, const Vec& target) {
  return solve(metric, model, spec, target, false);
}

Vec DistanceField::node_point(int i, int j) const {
  Vec p(2);
  p << spec_.lo[0] + i * hx_, spec_.lo[1] + j * hy_;
  return p;
}

int DistanceField::nearest_node(const Vec& x) const {
  int i = static_cast<int>(std::lround((x[0] - spec_.lo[0]) / hx_));
  int j = static_cast<int>(std::lround((x[1] - spec_.lo[1]) / hy_));
  i = std::clamp(i, 0, spec_.nx - 1);
  j = std::clamp(j, 0, spec_.ny - 1);
  return i + spec_.nx * j;
}

double DistanceField::node_value(int i, int j) const {
  return values_[static_cast<size_t>(i + spec_.nx * j)];
}

double DistanceField::interpolate(const Vec& x) const {
  double fi = (x[0] - spec_.lo[0]) / hx_;
  double fj = (x[1] - spec_.lo[1]) / hy_;
  int i = std::clamp(static_cast<int>(std::floor(fi)), 0, spec_.nx - 2);
  int j = std::clamp(static_cast<int>(std::floor(fj)), 0, spec_.ny - 2);
  double u = std::clamp(fi - i, 0.0, 1.0);
  double v = std::clamp(fj - j, 0.0, 1.0);
  double v00 = node_value(i, j), v10 = node_value(i + 1, j);
  double v01 = node_value(i, j + 1), v11 = node_value(i + 1, j + 1);
  if (!std::isfinite(v00) || !std::isfinite(v10) || !std::isfinite(v01) || !std::isfinite(v11))
    throw NumericError("distance field: unreachable within truncated domain");
  return (1 - u) * (1 - v) * v00 + u * (1 - v) * v10 + (1 - u) * v * v01 + u * v * v11;
}

DistanceField DistanceField::solve(const Metric& metric, const Model& model, const GridSpec& spec,
                                   const Vec& anchor, bool forward) {
  if (metric.dim() != 2) throw ArgumentError("distance field: grid solver is 2-D only");
  DistanceField f;
  f.spec_ = spec;
  f.anchor_ = anchor;
  f.forward_ = forward;
  f.hx_ = (spec.hi[0] - spec.lo[0]) / (spec.nx - 1);
  f.hy_ = (spec.hi[1] - spec.lo[1]) / (spec.ny - 1);

  const int nx = spec.nx, ny = spec.ny;
  const size_t count = static_cast<size_t>(nx) * static_cast<size_t>(ny);
  f.values_.assign(count, std::numeric_limits<double>::infinity());

  const bool wrap_x = model.periodic(0);
  const bool wrap_y = model.periodic(1);

  auto neighbor = [&](int i, int j, int di, int dj, int& ni, int& nj) {
    ni = i + di;
    nj = j + dj;
    if (wrap_x) {
      // only wrap when the grid spans the full period
      if (std::abs((spec.hi[0] - spec.lo[0]) + f.hx_ - model.period(0)) < 1e-9 * model.period(0)) {
        ni = (ni % nx + nx) % nx;
      }
    }
    if (wrap_y) {
      if (std::abs((spec.hi[1] - spec.lo[1]) + f.hy_ - model.period(1)) < 1e-9 * model.period(1)) {
        nj = (nj % ny + ny) % ny;
      }
    }
    return ni >= 0 && ni < nx && nj >= 0 && nj < ny;
  };

  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  int start = f.nearest_node(anchor);
  f.values_[static_cast<size_t>(start)] = 0.0;
  heap.push({0.0, start});

  Vec step(2), mid(2);
  while (!heap.empty()) {
    auto [d, idx] = heap.top();
    heap.pop();
    if (d > f.values_[static_cast<size_t>(idx)] + 1e-15) continue;
    int i = idx % nx, j = idx / nx;
    Vec p = f.node_point(i, j);
    for (const auto& st : kStencil) {
      int ni, nj;
      if (!neighbor(i, j, st[0], st[1], ni, nj)) continue;
      step << st[0] * f.hx_, st[1] * f.hy_;
      // forward field: edge p -> q; reverse field: relax along q -> p
      double w;
      if (forward) {
        mid = p + 0.5 * step;
        w = metric.F(mid, step);
      } else {
        mid = p + 0.5 * step;
        w = metric.F(mid, -step);
      }
      int nidx = ni + nx * nj;
      double nd = d + w;
      if (nd < f.values_[static_cast<size_t>(nidx)] - 1e-15) {
        f.values_[static_cast<size_t>(nidx)] = nd;
        heap.push({nd, nidx});
      }
    }
  }
  return f;
}

std::string DistanceField::csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "# distance field (" << (forward_ ? "from source" : "to target") << " "
     << anchor_[0] << "," << anchor_[1] << "), rows j=0.." << spec_.ny - 1 << "\n";
  for (int j = 0; j < spec_.ny; ++j) {
    for (int i = 0; i < spec_.nx; ++i) {
      if (i) os << ",";
      os << node_value(i, j);
    }
    os << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// shooting

Vec ShootingSolver::endpoint(const Vec& x0, double theta, double tau) {
  Vec dir(2);
  dir << std::cos(theta), std::sin(theta);
  PhaseState s0 = unit_state(metric_, x0, dir);
  FlowOptions fo;
  fo.rtol = 1e-12;
  fo.atol = 1e-14;
  FlowIntegrator fi(metric_, model_, s0, fo);
  while (fi.step(tau)) {
  }
  return fi.state().x;
}

std::optional<double> ShootingSolver::solve(const Vec& x0, const Vec& target, Guess guess) {
  if (!(guess.tau > 0.0)) return std::nullopt;
  double theta = guess.theta;
  double tau = guess.tau;
  const double tau0 = tau;

  Vec r(2);
  for (int it = 0; it < 30; ++it) {
    Vec end = endpoint(x0, theta, tau);
    r = end - target;
    double rn = r.norm();
    if (rn <= 1e-10 * (1.0 + tau)) {
      last_ = {theta, tau};
      return tau;
    }
    // Jacobian: dtheta column by finite difference, dtau column = velocity
    const double dth = 1e-6;
    Vec end_th = endpoint(x0, theta + dth, tau);
    Vec col_th = (end_th - end) / dth;
    Vec dirv(2);
    // end velocity: re-derive by a small tau step
    const double dtau = 1e-6 * std::max(1.0, tau);
    Vec end_tau = endpoint(x0, theta, tau + dtau);
    Vec col_tau = (end_tau - end) / dtau;

    Mat jac(2, 2);
    jac.col(0) = col_th;
    jac.col(1) = col_tau;
    if (std::abs(jac.determinant()) < 1e-14) return std::nullopt;
    Vec delta = jac.partialPivLu().solve(r);
    double step_scale = 1.0;
    if (std::abs(delta[1]) > 0.5 * tau) step_scale = 0.5 * tau / std::abs(delta[1]);
    theta -= step_scale * delta[0];
    tau -= step_scale * delta[1];
    if (!(tau > 1e-12) || tau > 10.0 * tau0 + 10.0) return std::nullopt;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// point-to-point distance

DistanceResult finsler_distance(const Metric& metric, const Model& model, const Vec& x0,
                                const Vec& x1, int resolution) {
  if (metric.dim() != 2) throw ArgumentError("finsler_distance: 2-D charts only");
  if (resolution < 17) throw ArgumentError("finsler_distance: resolution too small");

  GridSpec spec;
  spec.lo = Vec(2);
  spec.hi = Vec(2);
  for (int k = 0; k < 2; ++k) {
    double lo = std::min(x0[k], x1[k]), hi = std::max(x0[k], x1[k]);
    double pad = 0.35 * (hi - lo) + 0.5;
    spec.lo[k] = lo - pad;
    spec.hi[k] = hi + pad;
  }
  if (model.kind() == ModelKind::Torus) {
    // work on the covering plane but keep the window at least one period wide
    for (int k = 0; k < 2; ++k) {
      double p = model.period(k);
      if (spec.hi[k] - spec.lo[k] < p) {
        double c = 0.5 * (spec.lo[k] + spec.hi[k]);
        spec.lo[k] = c - 0.5 * p;
        spec.hi[k] = c + 0.5 * p;
      }
    }
  }

  spec.nx = spec.ny = resolution;
  DistanceField fine = DistanceField::from_source(metric, model, spec, x0);
  GridSpec coarse_spec = spec;
  coarse_spec.nx = coarse_spec.ny = resolution / 2 + 1;
  DistanceField coarse = DistanceField::from_source(metric, model, coarse_spec, x0);

  double d_fine = fine.interpolate(x1);
  double d_coarse = coarse.interpolate(x1);
  double hx = (spec.hi[0] - spec.lo[0]) / (spec.nx - 1);
  double snap = 2.0 * hx;  // endpoint snapping + first-order stencil bias floor
  double err = std::abs(d_fine - d_coarse) + 0.02 * d_fine + snap * 0.1;

  // polish by shooting, seeded with the straight-line guess
  ShootingSolver shooter(metric, model);
  Vec delta = model.min_image_delta(x1, x0);
  ShootingSolver::Guess guess{std::atan2(delta[1], delta[0]), d_fine};
  std::optional<double> polished = shooter.solve(x0, x0 + delta, guess);
  if (polished && *polished <= d_fine + 2.0 * err && *polished > 0.0) {
    return {*polished, 1e-8 * (1.0 + *polished), "shooting"};
  }
  return {d_fine, err, "grid"};
}

}  // namespace finsler
