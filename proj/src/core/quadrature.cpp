#include "core/quadrature.hpp"

#include <cmath>

#include "core/error.hpp"

namespace finsler {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Quad1D gauss_legendre(int m) {
  if (m < 1) throw ArgumentError("gauss_legendre: need at least one node");
  Quad1D q;
  q.x.resize(static_cast<size_t>(m));
  q.w.resize(static_cast<size_t>(m));
  // Newton on the Legendre polynomial, symmetric pairs
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (m + 0.5));
    double p0, p1, dp;
    for (int iter = 0; iter < 100; ++iter) {
      p0 = 1.0;
      p1 = t;
      for (int k = 2; k <= m; ++k) {
        double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (t * p1 - p0) / (t * t - 1.0);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    p0 = 1.0;
    p1 = t;
    for (int k = 2; k <= m; ++k) {
      double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = m * (t * p1 - p0) / (t * t - 1.0);
    double w = 2.0 / ((1.0 - t * t) * dp * dp);
    q.x[static_cast<size_t>(i)] = -t;
    q.x[static_cast<size_t>(m - 1 - i)] = t;
    q.w[static_cast<size_t>(i)] = w;
    q.w[static_cast<size_t>(m - 1 - i)] = w;
  }
  return q;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b, int m) {
  Quad1D q = gauss_legendre(m);
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (size_t i = 0; i < q.x.size(); ++i) acc += q.w[i] * f(mid + half * q.x[i]);
  return acc * half;
}

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double m, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, m, b, fa, fm, fb, whole, tol, max_depth);
}

double sin_power_integral(int k) {
  if (k < 0) throw ArgumentError("sin_power_integral: negative power");
  if (k == 0) return kPi;
  return integrate_gl([k](double t) { return ipow(std::sin(t), k); }, 0.0, kPi, 64 + 4 * k);
}

double sphere_surface(int n) {
  if (n < 1) throw ArgumentError("sphere_surface: dimension must be >= 1");
  // 2 pi^{n/2} / Gamma(n/2)
  return 2.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n);
}

SphereQuadrature SphereQuadrature::build(int dim, int resolution) {
  if (resolution < 4) throw ArgumentError("sphere quadrature: resolution too small");
  SphereQuadrature q;
  q.dim = dim;
  if (dim == 2) {
    const int K = resolution;
    const double w = 2.0 * kPi / K;
    q.nodes.reserve(static_cast<size_t>(K));
    for (int k = 0; k < K; ++k) {
      double th = 2.0 * kPi * (k + 0.5) / K;
      Vec u(2);
      u << std::cos(th), std::sin(th);
      q.nodes.push_back(u);
      q.weights.push_back(w);
    }
    return q;
  }
  if (dim == 3) {
    const int M = resolution;
    Quad1D gl = gauss_legendre(M);  // in cos(polar)
    const int A = 2 * M;
    const double wa = 2.0 * kPi / A;
    q.nodes.reserve(static_cast<size_t>(M * A));
    for (int i = 0; i < M; ++i) {
      double c = gl.x[static_cast<size_t>(i)];
      double s = std::sqrt(std::max(0.0, 1.0 - c * c));
      for (int j = 0; j < A; ++j) {
        double ph = 2.0 * kPi * (j + 0.5) / A;
        Vec u(3);
        u << s * std::cos(ph), s * std::sin(ph), c;
        q.nodes.push_back(u);
        q.weights.push_back(gl.w[static_cast<size_t>(i)] * wa);
      }
    }
    return q;
  }
  throw ArgumentError("sphere quadrature: only dimensions 2 and 3 are supported");
}

}  // namespace finsler
