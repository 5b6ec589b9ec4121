// Finsler metric families and their pointwise machinery: the fundamental
// function F(x,y), the fundamental tensor g_ij = 1/2 d^2(F^2)/dy_i dy_j, and
// numeric validation of the Finsler axioms.
//
// Families that are assembled from coefficient fields evaluate through
// second-order dual numbers, so tensors come out exact to rounding. Custom
// (callback) metrics fall back to central differences with h = eps^(1/3)*scale.
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "core/hyperdual.hpp"
#include "core/scalar_field.hpp"
#include "core/types.hpp"

namespace finsler {

class Model;

enum class MetricFamily { Euclidean, Riemannian, Randers, AlphaBeta, Minkowski, Custom };

// phi(s) profiles for (alpha,beta)-metrics. F = alpha * phi(beta/alpha).
enum class PhiKind {
  Randers,    // 1 + s
  Quadratic,  // 1 + s^2
  Matsumoto,  // 1/(1-s)  (slope metric: F = alpha^2/(alpha-beta))
};

struct Phi {
  PhiKind kind = PhiKind::Randers;

  template <class T>
  T eval(const T& s) const {
    switch (kind) {
      case PhiKind::Randers:
        return T(1.0) + s;
      case PhiKind::Quadratic:
        return T(1.0) + s * s;
      case PhiKind::Matsumoto:
        return inv_t(T(1.0) - s);
    }
    return T(1.0);
  }
  double d1(double s) const;  // phi'
  double d2(double s) const;  // phi''

  static Phi from_name(const std::string& name);
  std::string name() const;

 private:
  static HDual inv_t(const HDual& a) { return inv(a); }
  static double inv_t(double a) { return 1.0 / a; }
};

struct FundamentalTensor {
  Mat g;
  double det_g = 0.0;
  Mat g_inv;
};

struct ValidationCheck {
  std::string name;
  bool pass = true;
  double margin = 0.0;  // worst-case margin, sign convention per check
  std::string note;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_pass = true;
  bool absolutely_homogeneous = false;
  double min_eigenvalue = 0.0;
  nlohmann::json to_json() const;
};

class Metric {
 public:
  using CustomFn = std::function<double(const double* x, const double* y, int dim)>;

  static Metric euclidean(int dim);
  static Metric riemannian(FieldMatrix a);
  static Metric randers(FieldMatrix a, FieldVector b);
  static Metric alpha_beta(FieldMatrix a, FieldVector b, Phi phi);
  // x-independent p-norm, p a positive even integer: F = (sum w_i y_i^p)^(1/p)
  static Metric minkowski_pnorm(int dim, int p, Vec weights = Vec());
  static Metric custom(int dim, CustomFn fn);

  static Metric from_json(const nlohmann::json& j);
  static Metric load(const std::string& path);
  nlohmann::json to_json() const;

  int dim() const { return dim_; }
  MetricFamily family() const { return family_; }
  std::string family_name() const;
  bool x_independent() const { return x_independent_; }
  bool supports_autodiff() const { return family_ != MetricFamily::Custom; }
  bool absolutely_homogeneous() const { return abs_homogeneous_; }
  bool has_alpha() const;

  // fundamental function; throws DomainError on y = 0 or non-finite input
  double F(const Vec& x, const Vec& y) const;
  double F2(const Vec& x, const Vec& y) const { double f = F(x, y); return f * f; }

  // F^2 evaluated with dual seeds. Axis < dim seeds a coordinate of x when
  // on_x is true, of y otherwise. Autodiff families only.
  HDual F2_seeded(const Vec& x, const Vec& y, int axis1, bool on_x1, int axis2, bool on_x2) const;

  Vec grad_F_y(const Vec& x, const Vec& y) const;
  Vec grad_F2_x(const Vec& x, const Vec& y) const;

  FundamentalTensor fundamental_tensor(const Vec& x, const Vec& y) const;
  // g without the positive-definiteness gate (degenerate directions of weakly
  // convex norms integrate fine)
  Mat fundamental_raw(const Vec& x, const Vec& y) const;
  double det_fundamental(const Vec& x, const Vec& y) const;

  // Riemannian part, where the family has one
  Mat alpha_matrix(const Vec& x) const;
  double alpha_norm(const Vec& x, const Vec& y) const;
  Vec beta_covector(const Vec& x) const;
  // Randers/alpha-beta admissibility quantity b^2(x) = a^{ij} b_i b_j
  double b_squared(const Vec& x) const;
  std::optional<Phi> phi() const;

 private:
  Metric() = default;
  void finalize();  // detect x-independence and absolute homogeneity

  template <class T>
  T eval_impl(const std::vector<T>& x, const std::vector<T>& y) const;

  Mat hessian_f2_y(const Vec& x, const Vec& y) const;  // d^2 F^2 / dy dy (FD fallback aware)

  MetricFamily family_ = MetricFamily::Euclidean;
  int dim_ = 2;
  FieldMatrix a_;
  FieldVector b_;
  Phi phi_;
  int pnorm_p_ = 4;
  Vec pnorm_w_;
  CustomFn custom_;
  bool x_independent_ = true;
  bool abs_homogeneous_ = true;
};

// Numeric validation of the standing assumptions: positivity, the Euler
// identity y . dF/dy = F, 0-homogeneity of g, strong convexity margins, and
// the Randers condition b^2 < 1. Failures are reported, never thrown.
ValidationReport validate_metric(const Metric& metric, const Model& model, int n_samples,
                                 uint64_t seed);

}  // namespace finsler
