// Geodesic spray and flow. The flow ODE on the tangent bundle is
//   x' = y,  y' = -2 G(x, y)
// integrated with an adaptive Dormand-Prince 5(4) scheme with dense output.
// y is never rescaled mid-run; the drift of F along the trace is measured and
// used as the accept/reject criterion.
#pragma once

#include <deque>
#include <functional>
#include <vector>

#include <json.hpp>

#include "core/metric.hpp"
#include "core/model.hpp"
#include "core/types.hpp"

namespace finsler {

struct PhaseState {
  Vec x;
  Vec y;
};

// Spray coefficients G^i(x,y); zero for x-independent metrics. Positively
// 2-homogeneous in y.
Vec spray(const Metric& metric, const Vec& x, const Vec& y);

// unit phase state: y scaled so F(x,y) = 1
PhaseState unit_state(const Metric& metric, const Vec& x, const Vec& direction);

struct FlowOptions {
  double rtol = 1e-11;
  double atol = 1e-13;
  double h_max = 1.0;
  double h_init = 1e-3;
  bool backward = false;      // integrate toward negative time
  double sample_dt = 0.0;     // 0: record at accepted steps only
};

struct GeodesicTrace {
  std::vector<double> times;
  std::vector<PhaseState> states;           // positions wrapped by the model
  std::vector<PhaseState> states_unwrapped; // raw chart coordinates
  std::vector<double> F_values;
  double F_drift = 0.0;
  double t_end = 0.0;

  // dense-output segments (always stored)
  struct Segment {
    double t0 = 0.0, h = 0.0;
    std::vector<Vec> cont;  // 5 contribution vectors
  };
  std::vector<Segment> segments;

  // unwrapped phase state at any t inside the integrated span
  PhaseState at(double t) const;
};

// Integrates the flow from s0 for |t_end| time units (sign via options.backward).
// Throws IntegrationError on step-size underflow; throws NumericError if the
// final F-drift exceeds tol.
GeodesicTrace integrate_flow(const Metric& metric, const Model& model, const PhaseState& s0,
                             double t_end, double tol, const FlowOptions& options = {});

// Streaming integrator used by recurrence scans; exposes dense output up to
// the current front without retaining per-step samples.
class FlowIntegrator {
 public:
  FlowIntegrator(const Metric& metric, const Model& model, const PhaseState& s0,
                 const FlowOptions& options = {});

  // advance one accepted step; returns false once t_limit was reached
  bool step(double t_limit);
  double t() const { return t_; }
  PhaseState state() const;
  PhaseState dense(double t) const;  // unwrapped, any t in the retained span
  double f0() const { return f0_; }
  double f_drift() const { return f_drift_; }
  // drop dense segments that end before t_keep (bounds memory on long scans)
  void prune_before(double t_keep);

 private:
  friend GeodesicTrace integrate_flow(const Metric&, const Model&, const PhaseState&, double,
                                      double, const FlowOptions&);
  Vec rhs(const Vec& z) const;

  const Metric& metric_;
  const Model& model_;
  FlowOptions opt_;
  int n_;
  double t_ = 0.0;
  Vec z_;       // (x, y) stacked, unwrapped
  Vec k1_;      // FSAL stage
  double h_ = 0.0;
  double dir_ = 1.0;
  double f0_ = 0.0;
  double f_drift_ = 0.0;
  std::deque<GeodesicTrace::Segment> segments_;
};

struct LiouvilleReport {
  double ratio = 0.0;           // transported dV_omega mass / original mass
  double deviation = 0.0;       // |ratio - 1|
  double jacobian_det = 0.0;    // flow-map Jacobian determinant estimate
  double det_g_start = 0.0;
  double det_g_end = 0.0;
  double t = 0.0;
  bool central = false;         // central-difference cell layout detected
  nlohmann::json to_json() const;
};

// Transports a small phase-space cell by the flow and compares dV_omega
// masses; the density of dV_omega is det g(x,y). The cell must contain at
// least 2n+1 affinely independent points; a symmetric layout (center plus
// +/- offsets, 4n+1 points) is detected and uses central differences.
LiouvilleReport liouville_check(const Metric& metric, const Model& model,
                                const std::vector<PhaseState>& cell, double t,
                                const FlowOptions& options = {});

std::vector<PhaseState> make_symmetric_cell(const PhaseState& center, double h);

// Maximum deviation of G^i(x, .) from its best quadratic fit over sampled
// unit directions, normalized by the fit magnitude. Near zero at Berwald
// points (spray quadratic in y).
double berwald_deviation(const Metric& metric, const Vec& x, int n_dirs, uint64_t seed);

}  // namespace finsler
