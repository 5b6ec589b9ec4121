// Busemann-Hausdorff and Holmes-Thompson densities and volumes.
//
// Ball integrals over the tangent unit ball B_x are reduced radially through
// the 0-homogeneity of det g: one sphere rule serves both densities,
//   Vol(B_x)           = (1/n) sum_k w_k r(u_k)^n,        r(u) = 1/F(x,u)
//   int_{B_x} det g dy = (1/n) sum_k w_k det g(x,u_k) r(u_k)^n.
// Volumes of unbounded models are reported as truncation sequences with a
// convergence verdict; nothing is extrapolated silently.
#pragma once

#include <functional>
#include <vector>

#include <json.hpp>

#include "core/metric.hpp"
#include "core/model.hpp"
#include "core/quadrature.hpp"
#include "core/types.hpp"

namespace finsler {

// Vol(B^n(1)) via the sphere-area recursion, cross-checked internally against
// the Gamma closed form to 1e-12. Throws DomainError for n < 2.
double euclidean_ball_volume(int n);

struct SigmaResult {
  double value = 0.0;
  double error = 0.0;  // resolution-halving estimate
};

double sigma_bh(const Metric& metric, const Vec& x, const SphereQuadrature& quad);
double sigma_ht(const Metric& metric, const Vec& x, const SphereQuadrature& quad);
SigmaResult sigma_bh_with_error(const Metric& metric, const Vec& x, int resolution);
SigmaResult sigma_ht_with_error(const Metric& metric, const Vec& x, int resolution);

enum class VolumeKind { BH, HT };
enum class VolumeVerdict { Finite, Infinite, Inconclusive };

struct VolumeResult {
  double value = 0.0;           // value on the largest domain computed
  double error = 0.0;           // grid-refinement estimate
  VolumeVerdict verdict = VolumeVerdict::Finite;
  double tail_estimate = 0.0;   // geometric tail bound when convergent
  std::vector<std::pair<double, double>> truncation;  // (domain size, value)
  nlohmann::json to_json() const;
};

VolumeResult manifold_volume(const Metric& metric, const Model& model, VolumeKind kind,
                             int grid = 48, int quad_resolution = 64);

// Riemannian volume of the alpha part, same integration scheme.
VolumeResult alpha_volume(const Metric& metric, const Model& model, int grid = 48);

// (alpha,beta) closed-form volume densities relative to dV_alpha.
struct AlphaBetaProfile {
  std::function<double(double)> phi, dphi, ddphi;
  double b = 0.0;
  int n = 2;
  static AlphaBetaProfile named(const Phi& phi, double b, int n);
};

struct FGResult {
  double f = 0.0;
  double g = 0.0;
};

FGResult alphabeta_fg(const AlphaBetaProfile& profile);

// Phase-space volume of SM via the fiberwise Hilbert-form density, computed
// under the radial convention (fiber integral := (2n-1) * ball integral of
// det g) and, for comparison, under the literal surface-measure convention
// (det g integrated over the indicatrix hypersurface).
struct SymplecticResult {
  double sm_volume_radial = 0.0;
  double sm_volume_surface = 0.0;
  double vol_ht_density = 0.0;  // path A: integral of sigma_HT
  double vol_ht_fiber = 0.0;    // path B: radial fiber integral / ((2n-1) Vol(B^n))
  double convention_ratio = 0.0;
  nlohmann::json to_json() const;
};

SymplecticResult sm_symplectic_volume(const Metric& metric, const Model& model,
                                      int quad_resolution = 64, int grid = 48);

struct ComparisonReport {
  double vol_bh = 0.0, vol_ht = 0.0, vol_alpha = 0.0;
  bool has_alpha = false;
  bool absolutely_homogeneous = false;
  double margin_ht_le_bh = 0.0;   // bh - ht (expected >= 0 when abs. homogeneous)
  double margin_bh_lt_ht = 0.0;   // ht - bh
  double margin_ht_lt_alpha = 0.0;
  nlohmann::json to_json() const;
};

ComparisonReport volume_comparison(const Metric& metric, const Model& model, int grid = 48,
                                   int quad_resolution = 64);

// Empirical exponent of (1-b^2) in sigma_BH for flat constant-b Randers
// metrics: fits log sigma against log(1-b^2) over b = 0.1..0.9.
struct BhExponentFit {
  int n = 2;
  double exponent = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // max absolute log-space fit residual
  std::vector<double> b, sigma;
  nlohmann::json to_json() const;
};

BhExponentFit fit_bh_exponent(int n, int quad_resolution = 256);

}  // namespace finsler
