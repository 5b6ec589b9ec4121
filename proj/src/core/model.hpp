// Chart geometry the experiments run on: an unbounded chart, a rectangular
// torus quotient, or a warped-product surface ds^2 = dx1^2 + p(x1)^2 dx2^2
// with x2 periodic. The model supplies coordinate wrapping, the integration
// domain and the sampling box; it never evaluates the metric itself.
#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "core/rng.hpp"
#include "core/scalar_field.hpp"
#include "core/types.hpp"

namespace finsler {

enum class ModelKind { Plane, Torus, Warped };

class Model {
 public:
  static Model plane(int dim, double sample_bound = 2.0);
  static Model torus(const Vec& periods);
  static Model warped(ScalarField profile, double period, double x1_trunc = 6.0,
                      double x1_sample = 2.0);

  static Model from_json(const nlohmann::json& j);
  static Model load(const std::string& path);
  nlohmann::json to_json() const;

  ModelKind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool compact() const { return kind_ == ModelKind::Torus; }

  bool periodic(int axis) const;
  double period(int axis) const;

  // wrap periodic coordinates into [0, P); non-periodic axes untouched
  Vec wrap(const Vec& x) const;

  // minimum-image coordinate difference honoring periodicity
  Vec min_image_delta(const Vec& a, const Vec& b) const;

  // Sasaki-type proxy distance between phase points (x wrapped, y plain)
  double phase_distance(const Vec& xa, const Vec& ya, const Vec& xb, const Vec& yb) const;

  // uniform sample from the model's sampling box
  Vec sample_point(Rng& rng) const;

  // |x1| bound beyond which orbits on non-compact fixtures are truncated
  double escape_bound() const;
  bool escaped(const Vec& x) const;

  // warped profile p(x1); throws unless kind == Warped
  double profile(double x1) const;
  const ScalarField& profile_field() const;

  double sample_bound() const { return sample_bound_; }

 private:
  ModelKind kind_ = ModelKind::Plane;
  int dim_ = 2;
  Vec periods_;           // torus
  ScalarField profile_;   // warped
  double period2_ = 0.0;  // warped x2 period
  double x1_trunc_ = 6.0;
  double sample_bound_ = 2.0;
};

}  // namespace finsler
