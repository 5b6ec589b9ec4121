// Finsler distances, 2-D charts. Two cooperating solvers:
//  - a directed grid graph (16-neighbor stencil, edge weight = one-step
//    Finsler length F(midpoint, step)) solved by Dijkstra, robust and global;
//  - two-point geodesic shooting, which removes the first-order grid
//    anisotropy bias wherever it converges.
// Distances are direction-dependent: d(a,b) != d(b,a) in general.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/geodesic.hpp"
#include "core/metric.hpp"
#include "core/model.hpp"

namespace finsler {

struct GridSpec {
  Vec lo, hi;   // box corners
  int nx = 65, ny = 65;
};

class DistanceField {
 public:
  // single-source field d(source, .) or single-target field d(., target)
  static DistanceField from_source(const Metric& metric, const Model& model, const GridSpec& spec,
                                   const Vec& source);
  static DistanceField to_target(const Metric& metric, const Model& model, const GridSpec& spec,
                                 const Vec& target);

  double node_value(int i, int j) const;
  double interpolate(const Vec& x) const;  // bilinear; throws on unreachable corners
  Vec node_point(int i, int j) const;
  int nearest_node(const Vec& x) const;
  const GridSpec& spec() const { return spec_; }
  bool forward() const { return forward_; }
  const Vec& anchor() const { return anchor_; }

  std::string csv() const;  // matrix of values, row per j

 private:
  DistanceField() = default;
  static DistanceField solve(const Metric& metric, const Model& model, const GridSpec& spec,
                             const Vec& anchor, bool forward);

  GridSpec spec_;
  Vec anchor_;
  bool forward_ = true;
  double hx_ = 0.0, hy_ = 0.0;
  std::vector<double> values_;
};

struct DistanceResult {
  double value = 0.0;
  double error = 0.0;
  std::string method;  // "shooting" or "grid"
};

// Point-to-point distance: grid estimate at two resolutions (Richardson error)
// refined by shooting.
DistanceResult finsler_distance(const Metric& metric, const Model& model, const Vec& x0,
                                const Vec& x1, int resolution = 96);

// Two-point shooting: solve gamma(tau) = target over (initial angle, tau).
class ShootingSolver {
 public:
  ShootingSolver(const Metric& metric, const Model& model) : metric_(metric), model_(model) {}

  struct Guess {
    double theta = 0.0;
    double tau = 0.0;
  };

  // returns unit-speed arrival time (= distance along the connecting
  // geodesic) or nullopt when Newton fails
  std::optional<double> solve(const Vec& x0, const Vec& target, Guess guess);
  const Guess& last() const { return last_; }

 private:
  Vec endpoint(const Vec& x0, double theta, double tau);
  const Metric& metric_;
  const Model& model_;
  Guess last_;
};

}  // namespace finsler
