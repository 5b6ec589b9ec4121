// Recurrence detection on compact / finite-volume models and convexity
// profiling of scalar functions along geodesics. Together these give the
// desk-scale mechanism behind "finite volume => no nontrivial convex
// functions": recurrent orbits force any function convex along geodesics to
// be constant on them.
#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/geodesic.hpp"
#include "core/metric.hpp"
#include "core/model.hpp"

namespace finsler {

// Named scalar function on the chart. Wrapped-coordinate candidates are
// discontinuous across the period seam on purpose.
struct ScalarFn {
  std::string name;
  std::function<double(const Vec&)> f;
};

// Built-in candidates: coord<k>, sqcoord<k>, sqnorm, sin<k>, wrapped<k>,
// const:<value>, neg_log_profile (warped models).
ScalarFn make_candidate(const std::string& name, const Model& model);

enum class Convexity { Convex, StrictlyConvex, Linear, NonConvex };

std::string convexity_name(Convexity c);

struct ConvexityProfile {
  std::vector<double> values;
  double max_defect = 0.0;        // max over interior nodes of f(mid) - (f(l)+f(r))/2
  double min_second_diff = 0.0;
  double max_abs_second_diff = 0.0;
  Convexity classification = Convexity::Linear;
  nlohmann::json to_json() const;
};

// Midpoint-convexity profile of pre-sampled values on a uniform parameter
// grid. Throws DomainError if the spacing is not uniform.
ConvexityProfile convexity_profile(const std::vector<double>& times,
                                   const std::vector<double>& values, double tol);

// Samples f along the geodesic through s0 on a uniform grid of n_samples
// nodes covering [0, t_len].
ConvexityProfile convexity_along_geodesic(const Metric& metric, const Model& model,
                                          const PhaseState& s0, const ScalarFn& f, double t_len,
                                          int n_samples, double tol);

struct RecurrenceEvent {
  double t = 0.0;
  double phase_distance = 0.0;
};

struct RecurrenceOptions {
  double t_min = 1.0;        // burn-in
  double scan_dt = 0.0;      // 0: derived from eps
  bool early_exit = false;   // stop after the first event
  double flow_tol = 1e-8;
  double h_max = 1.0;
};

struct RecurrenceResult {
  std::vector<RecurrenceEvent> events;
  bool truncated = false;    // orbit left the model's escape window
  double t_reached = 0.0;
  nlohmann::json to_json() const;
};

// Scans the geodesic through u for returns of the phase point to within eps
// of itself (Sasaki-type proxy distance, wrapped chart coordinates).
RecurrenceResult find_recurrences(const Metric& metric, const Model& model, const PhaseState& u,
                                  double t_max, double eps, const RecurrenceOptions& opts = {});

struct CensusResult {
  int n_states = 0;
  int recurrent = 0;
  int truncated = 0;
  double fraction = 0.0;
  double truncation_rate = 0.0;
  nlohmann::json to_json() const;
};

CensusResult recurrence_census(const Metric& metric, const Model& model, int n_states,
                               uint64_t seed, double t_max, double eps,
                               const RecurrenceOptions& opts = {}, int threads = 1);

enum class LemmaVerdict { Pass, Fail, Inconclusive };

struct KeyLemmaResult {
  LemmaVerdict verdict = LemmaVerdict::Inconclusive;
  bool convex_along_samples = false;
  bool recurrent = false;
  double variation = 0.0;
  double bound = 0.0;
  double f_min = 0.0, f_max = 0.0;
  nlohmann::json to_json() const;
};

// Lemma mechanics at orbit level: if f is convex along sampled geodesics and
// u is recurrent, the variation of f along the orbit must vanish.
KeyLemmaResult key_lemma_check(const Metric& metric, const Model& model, const ScalarFn& f,
                               const PhaseState& u, double t_max, double eps, double tol);

struct TheoremBudget {
  int ensemble = 200;
  double t_len = 8.0;
  int samples_per_geodesic = 65;
  int constancy_samples = 400;
  uint64_t seed = 1;
  double tol_scale = 1e-8;
  int threads = 1;
};

struct CandidateOutcome {
  std::string name;
  bool convex_along_ensemble = false;
  bool nonconstant = false;
  double worst_defect = 0.0;
  double value_range = 0.0;
  std::string witness;  // short description of the failing geodesic, if any
};

struct TheoremDemoReport {
  std::string volume_verdict;
  double volume_value = 0.0;
  std::vector<CandidateOutcome> candidates;
  bool exists_convex_nonconstant = false;
  nlohmann::json to_json() const;
};

TheoremDemoReport theorem_demo(const Metric& metric, const Model& model,
                               const std::vector<ScalarFn>& candidates,
                               const TheoremBudget& budget);

}  // namespace finsler
