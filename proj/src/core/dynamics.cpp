#include "core/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace finsler {

namespace {
constexpr double kTwoPi = 6.28318530717958647692;
}

// ---------------------------------------------------------------------------
// candidates

ScalarFn make_candidate(const std::string& name, const Model& model) {
  auto axis_of = [&](const std::string& prefix) {
    int k = std::stoi(name.substr(prefix.size()));
    if (k < 0 || k >= model.dim()) throw ArgumentError("candidate: axis out of range in " + name);
    return k;
  };

  if (name.rfind("coord", 0) == 0 && name.size() > 5 && std::isdigit(name[5])) {
    int k = axis_of("coord");
    return {name, [k](const Vec& x) { return x[k]; }};
  }
  if (name.rfind("sqcoord", 0) == 0) {
    int k = axis_of("sqcoord");
    return {name, [k](const Vec& x) { return x[k] * x[k]; }};
  }
  if (name == "sqnorm") {
    return {name, [](const Vec& x) { return x.squaredNorm(); }};
  }
  if (name.rfind("sin", 0) == 0 && name.size() > 3 && std::isdigit(name[3])) {
    int k = axis_of("sin");
    double freq = model.periodic(k) ? kTwoPi / model.period(k) : 1.0;
    return {name, [k, freq](const Vec& x) { return std::sin(freq * x[k]); }};
  }
  if (name.rfind("wrapped", 0) == 0) {
    int k = axis_of("wrapped");
    if (!model.periodic(k)) throw ArgumentError("candidate: wrapped axis must be periodic");
    Model m = model;
    return {name, [m, k](const Vec& x) { return m.wrap(x)[k]; }};
  }
  if (name.rfind("const:", 0) == 0) {
    double c = std::stod(name.substr(6));
    return {name, [c](const Vec&) { return c; }};
  }
  if (name == "neg_log_profile") {
    if (model.kind() != ModelKind::Warped)
      throw ArgumentError("candidate: neg_log_profile requires a warped model");
    Model m = model;
    return {name, [m](const Vec& x) { return -std::log(m.profile(x[0])); }};
  }
  throw ArgumentError("candidate: unknown function \"" + name + "\"");
}

// ---------------------------------------------------------------------------
// convexity

std::string convexity_name(Convexity c) {
  switch (c) {
    case Convexity::Convex: return "convex";
    case Convexity::StrictlyConvex: return "strictly-convex";
    case Convexity::Linear: return "linear";
    case Convexity::NonConvex: return "non-convex";
  }
  return "?";
}

nlohmann::json ConvexityProfile::to_json() const {
  return {{"classification", convexity_name(classification)},
          {"max_defect", max_defect},
          {"min_second_diff", min_second_diff},
          {"max_abs_second_diff", max_abs_second_diff},
          {"samples", values.size()}};
}

ConvexityProfile convexity_profile(const std::vector<double>& times,
                                   const std::vector<double>& values, double tol) {
  if (times.size() != values.size()) throw ArgumentError("convexity_profile: size mismatch");
  if (times.size() < 3) throw DomainError("convexity_profile: need at least 3 samples");
  const double dt = times[1] - times[0];
  if (!(dt > 0.0)) throw DomainError("convexity_profile: times must increase");
  for (size_t i = 1; i < times.size(); ++i)
    if (std::abs(times[i] - times[i - 1] - dt) > 1e-9 * std::max(1.0, dt))
      throw DomainError("convexity_profile: non-uniform spacing, resample first");

  ConvexityProfile p;
  p.values = values;
  double min_d = std::numeric_limits<double>::infinity();
  double max_abs = 0.0, max_defect = -std::numeric_limits<double>::infinity();
  for (size_t i = 1; i + 1 < values.size(); ++i) {
    double d = values[i + 1] - 2.0 * values[i] + values[i - 1];
    min_d = std::min(min_d, d);
    max_abs = std::max(max_abs, std::abs(d));
    max_defect = std::max(max_defect, -0.5 * d);
  }
  p.min_second_diff = min_d;
  p.max_abs_second_diff = max_abs;
  p.max_defect = max_defect;

  if (max_defect > tol)
    p.classification = Convexity::NonConvex;
  else if (max_abs <= tol)
    p.classification = Convexity::Linear;
  else if (min_d > tol)
    p.classification = Convexity::StrictlyConvex;
  else
    p.classification = Convexity::Convex;
  return p;
}

ConvexityProfile convexity_along_geodesic(const Metric& metric, const Model& model,
                                          const PhaseState& s0, const ScalarFn& f, double t_len,
                                          int n_samples, double tol) {
  if (n_samples < 3) throw ArgumentError("convexity_along_geodesic: need >= 3 samples");
  GeodesicTrace tr = integrate_flow(metric, model, s0, t_len, 1e-6);
  std::vector<double> times(static_cast<size_t>(n_samples)), vals(static_cast<size_t>(n_samples));
  const double dt = t_len / (n_samples - 1);
  for (int i = 0; i < n_samples; ++i) {
    times[static_cast<size_t>(i)] = i * dt;
    vals[static_cast<size_t>(i)] = f.f(tr.at(i * dt).x);
  }
  return convexity_profile(times, vals, tol);
}

// ---------------------------------------------------------------------------
// recurrence

nlohmann::json RecurrenceResult::to_json() const {
  nlohmann::json ev = nlohmann::json::array();
  for (const auto& e : events) ev.push_back({{"t", e.t}, {"phase_distance", e.phase_distance}});
  return {{"events", ev}, {"truncated", truncated}, {"t_reached", t_reached}};
}

RecurrenceResult find_recurrences(const Metric& metric, const Model& model, const PhaseState& u,
                                  double t_max, double eps, const RecurrenceOptions& opts) {
  if (!(t_max > 0.0) || !(eps > 0.0)) throw ArgumentError("find_recurrences: bad budget");

  FlowOptions fo;
  fo.rtol = 1e-12;
  fo.atol = 1e-14;
  fo.h_max = opts.h_max;

  const double dt = opts.scan_dt > 0.0 ? opts.scan_dt
                                       : std::max(std::min(0.02, 0.5 * eps), 1e-3);

  FlowIntegrator fi(metric, model, u, fo);
  const Vec x0 = u.x;
  const Vec y0 = u.y;

  auto dist_at = [&](double t) {
    PhaseState s = fi.dense(t);
    return model.phase_distance(s.x, s.y, x0, y0);
  };

  auto golden_min = [&](double a, double b) {
    const double gr = 0.61803398874989485;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = dist_at(c), fd = dist_at(d);
    for (int it = 0; it < 70 && (b - a) > 1e-13 * std::max(1.0, b); ++it) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - gr * (b - a);
        fc = dist_at(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + gr * (b - a);
        fd = dist_at(d);
      }
    }
    double tm = 0.5 * (a + b);
    return std::make_pair(tm, dist_at(tm));
  };

  RecurrenceResult res;
  double t2 = 0.0, t1 = -1.0, t0 = -1.0;  // last three sample times
  double d2 = 0.0, d1 = 0.0, d0 = 0.0;
  double next = 0.0;
  bool done = false;

  while (!done) {
    bool more = fi.step(t_max);
    if (model.escaped(fi.state().x)) {
      res.truncated = true;
      res.t_reached = fi.t();
      return res;
    }
    double front = fi.t();
    while (next <= front + 1e-12) {
      double tq = std::min(next, front);
      double dq = dist_at(tq);
      t0 = t1; d0 = d1;
      t1 = t2; d1 = d2;
      t2 = tq; d2 = dq;
      if (t0 >= 0.0 && d1 <= d0 && d1 <= d2) {
        double thresh = eps + 2.0 * std::max(std::abs(d1 - d0), std::abs(d2 - d1)) + 1e-12;
        if (d1 < thresh) {
          auto [tm, dm] = golden_min(t0, t2);
          if (dm < eps && tm >= opts.t_min &&
              (res.events.empty() || tm - res.events.back().t > dt)) {
            res.events.push_back({tm, dm});
            if (opts.early_exit) {
              res.t_reached = tm;
              return res;
            }
          }
        }
      }
      next += dt;
    }
    fi.prune_before(front - 4.0 * dt - 2.0);
    if (!more) done = true;
  }
  res.t_reached = t_max;
  return res;
}

nlohmann::json CensusResult::to_json() const {
  return {{"n_states", n_states},
          {"recurrent", recurrent},
          {"truncated", truncated},
          {"fraction", fraction},
          {"truncation_rate", truncation_rate}};
}

CensusResult recurrence_census(const Metric& metric, const Model& model, int n_states,
                               uint64_t seed, double t_max, double eps,
                               const RecurrenceOptions& opts, int threads) {
  if (n_states < 1) throw ArgumentError("recurrence_census: need at least one state");
  const int n = metric.dim();

  std::vector<int> recurrent(static_cast<size_t>(n_states), 0);
  std::vector<int> truncated(static_cast<size_t>(n_states), 0);

  RecurrenceOptions ro = opts;
  ro.early_exit = true;

  parallel_for(n_states, threads, [&](int i) {
    Rng rng(derive_seed(seed, static_cast<uint64_t>(i)));
    Vec x = model.sample_point(rng);
    Vec dir(n);
    for (int k = 0; k < n; ++k) dir[k] = rng.normal();
    if (dir.norm() < 1e-8) dir[0] = 1.0;
    dir.normalize();
    PhaseState u = unit_state(metric, x, dir);
    RecurrenceResult r = find_recurrences(metric, model, u, t_max, eps, ro);
    recurrent[static_cast<size_t>(i)] = r.events.empty() ? 0 : 1;
    truncated[static_cast<size_t>(i)] = r.truncated ? 1 : 0;
  });

  CensusResult c;
  c.n_states = n_states;
  for (int i = 0; i < n_states; ++i) {
    c.recurrent += recurrent[static_cast<size_t>(i)];
    c.truncated += truncated[static_cast<size_t>(i)];
  }
  c.fraction = static_cast<double>(c.recurrent) / n_states;
  c.truncation_rate = static_cast<double>(c.truncated) / n_states;
  return c;
}

// ---------------------------------------------------------------------------
// key lemma and theorem demo

namespace {

// max - min of f along the orbit, streamed with dense sampling
std::pair<double, double> function_extrema_along(const Metric& metric, const Model& model,
                                                 const PhaseState& u, double t_len, double dt,
                                                 const ScalarFn& f) {
  FlowOptions fo;
  fo.rtol = 1e-11;
  fo.atol = 1e-13;
  FlowIntegrator fi(metric, model, u, fo);
  double lo = f.f(u.x), hi = lo;
  double next = dt;
  bool more = true;
  while (more) {
    more = fi.step(t_len);
    double front = fi.t();
    while (next <= front + 1e-12) {
      double v = f.f(fi.dense(std::min(next, front)).x);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      next += dt;
    }
    fi.prune_before(front - 2.0 * dt - 1.0);
    if (model.escaped(fi.state().x)) break;
  }
  return {lo, hi};
}

}  // namespace

nlohmann::json KeyLemmaResult::to_json() const {
  const char* v = verdict == LemmaVerdict::Pass
                      ? "pass"
                      : (verdict == LemmaVerdict::Fail ? "fail" : "inconclusive");
  return {{"verdict", v},
          {"convex_along_samples", convex_along_samples},
          {"recurrent", recurrent},
          {"variation", variation},
          {"bound", bound},
          {"f_min", f_min},
          {"f_max", f_max}};
}

KeyLemmaResult key_lemma_check(const Metric& metric, const Model& model, const ScalarFn& f,
                               const PhaseState& u, double t_max, double eps, double tol) {
  KeyLemmaResult res;

  // convexity screen: the orbit itself plus a few sampled geodesics
  const double screen_len = std::min(t_max, 40.0);
  bool convex_ok = true;
  {
    std::vector<PhaseState> starts{u};
    Rng rng(777);
    for (int k = 0; k < 8; ++k) {
      Vec x = model.sample_point(rng);
      Vec dir(metric.dim());
      for (int i = 0; i < metric.dim(); ++i) dir[i] = rng.normal();
      if (dir.norm() < 1e-8) dir[0] = 1.0;
      starts.push_back(unit_state(metric, x, dir.normalized()));
    }
    for (const auto& s : starts) {
      GeodesicTrace tr = integrate_flow(metric, model, s, screen_len, 1e-6);
      std::vector<double> times, vals;
      const int K = 161;
      double scale = 0.0;
      for (int i = 0; i < K; ++i) {
        double t = screen_len * i / (K - 1);
        times.push_back(t);
        vals.push_back(f.f(tr.at(t).x));
        scale = std::max(scale, std::abs(vals.back()));
      }
      ConvexityProfile p = convexity_profile(times, vals, 1e-8 * (1.0 + scale));
      if (p.classification == Convexity::NonConvex) {
        convex_ok = false;
        break;
      }
    }
  }
  res.convex_along_samples = convex_ok;

  RecurrenceOptions ro;
  ro.early_exit = true;
  RecurrenceResult rec = find_recurrences(metric, model, u, t_max, eps, ro);
  res.recurrent = !rec.events.empty();
  if (!res.recurrent) {
    res.verdict = LemmaVerdict::Inconclusive;
    return res;
  }

  auto [lo, hi] = function_extrema_along(metric, model, u, t_max, 0.02, f);
  res.f_min = lo;
  res.f_max = hi;
  res.variation = hi - lo;
  res.bound = tol * (1.0 + std::abs(f.f(u.x)));
  res.verdict = res.variation <= res.bound ? LemmaVerdict::Pass : LemmaVerdict::Fail;
  return res;
}

nlohmann::json TheoremDemoReport::to_json() const {
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : candidates) {
    cands.push_back({{"name", c.name},
                     {"convex_along_ensemble", c.convex_along_ensemble},
                     {"nonconstant", c.nonconstant},
                     {"worst_defect", c.worst_defect},
                     {"value_range", c.value_range},
                     {"witness", c.witness}});
  }
  return {{"volume_verdict", volume_verdict},
          {"volume_value", volume_value},
          {"candidates", cands},
          {"exists_convex_nonconstant", exists_convex_nonconstant}};
}

TheoremDemoReport theorem_demo(const Metric& metric, const Model& model,
                               const std::vector<ScalarFn>& candidates,
                               const TheoremBudget& budget) {
  TheoremDemoReport rep;

  VolumeResult vol = manifold_volume(metric, model, VolumeKind::HT, 40, 64);
  rep.volume_value = vol.value;
  rep.volume_verdict = vol.verdict == VolumeVerdict::Finite
                           ? "finite"
                           : (vol.verdict == VolumeVerdict::Infinite ? "infinite" : "inconclusive");

  // sample the geodesic ensemble once; all candidates share the positions
  const int E = budget.ensemble;
  const int K = budget.samples_per_geodesic;
  std::vector<std::vector<Vec>> positions(static_cast<size_t>(E));
  parallel_for(E, budget.threads, [&](int e) {
    Rng rng(derive_seed(budget.seed, static_cast<uint64_t>(e)));
    Vec x = model.sample_point(rng);
    Vec dir(metric.dim());
    for (int i = 0; i < metric.dim(); ++i) dir[i] = rng.normal();
    if (dir.norm() < 1e-8) dir[0] = 1.0;
    PhaseState s = unit_state(metric, x, dir.normalized());
    GeodesicTrace tr = integrate_flow(metric, model, s, budget.t_len, 1e-6);
    auto& pos = positions[static_cast<size_t>(e)];
    pos.reserve(static_cast<size_t>(K));
    for (int i = 0; i < K; ++i) pos.push_back(tr.at(budget.t_len * i / (K - 1)).x);
  });

  std::vector<double> times(static_cast<size_t>(K));
  for (int i = 0; i < K; ++i) times[static_cast<size_t>(i)] = budget.t_len * i / (K - 1);

  for (const auto& cand : candidates) {
    CandidateOutcome out;
    out.name = cand.name;
    out.convex_along_ensemble = true;
    out.worst_defect = -std::numeric_limits<double>::infinity();
    for (int e = 0; e < E; ++e) {
      std::vector<double> vals;
      vals.reserve(static_cast<size_t>(K));
      double scale = 0.0;
      for (const Vec& x : positions[static_cast<size_t>(e)]) {
        vals.push_back(cand.f(x));
        scale = std::max(scale, std::abs(vals.back()));
      }
      ConvexityProfile p = convexity_profile(times, vals, budget.tol_scale * (1.0 + scale));
      out.worst_defect = std::max(out.worst_defect, p.max_defect);
      if (p.classification == Convexity::NonConvex && out.convex_along_ensemble) {
        out.convex_along_ensemble = false;
        out.witness = "geodesic " + std::to_string(e) + ": midpoint defect " +
                      std::to_string(p.max_defect);
      }
    }

    Rng rng(derive_seed(budget.seed, 0xc0ffee));
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int i = 0; i < budget.constancy_samples; ++i) {
      double v = cand.f(model.sample_point(rng));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    out.value_range = hi - lo;
    out.nonconstant = out.value_range > 1e-6 * (1.0 + std::max(std::abs(lo), std::abs(hi)));
    if (out.convex_along_ensemble && out.nonconstant) rep.exists_convex_nonconstant = true;
    rep.candidates.push_back(std::move(out));
  }
  return rep;
}

}  // namespace finsler
