// Quadrature building blocks: Gauss-Legendre rules, adaptive Simpson, the
// sin^k integrals, and quadrature on the Euclidean unit sphere S^{n-1}.
//
// Sphere rules: n=2 uses the trapezoid rule on the angle (spectrally accurate
// for smooth periodic integrands); n=3 a product Gauss-Legendre (polar cosine)
// x trapezoid (azimuth) rule.
#pragma once

#include <functional>
#include <vector>

#include "core/types.hpp"

namespace finsler {

struct Quad1D {
  std::vector<double> x, w;
};

// nodes/weights on [-1, 1]
Quad1D gauss_legendre(int m);

double integrate_gl(const std::function<double(double)>& f, double a, double b, int m);

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth = 40);

// int_0^pi sin^k(t) dt
double sin_power_integral(int k);

// surface area of the Euclidean unit sphere S^{n-1}
double sphere_surface(int n);

struct SphereQuadrature {
  int dim = 2;
  std::vector<Vec> nodes;      // unit vectors
  std::vector<double> weights; // sum to Vol(S^{n-1})

  // resolution: number of angular nodes for n=2; polar node count for n=3
  static SphereQuadrature build(int dim, int resolution);

  size_t size() const { return nodes.size(); }

  template <class F>
  double integrate(F&& f) const {
    double acc = 0.0;
    for (size_t k = 0; k < nodes.size(); ++k) acc += weights[k] * f(nodes[k]);
    return acc;
  }
};

}  // namespace finsler
