// Coefficient fields on the chart. A field is either a constant or one of the
// built-in analytic profiles (polynomial, sinusoid, Gaussian); all profiles
// are evaluable on plain doubles and on HDual, which is what lets the metric
// families run through forward-mode differentiation.
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "core/error.hpp"
#include "core/hyperdual.hpp"

namespace finsler {

class ScalarField {
 public:
  enum class Kind { Constant, Poly, Sinusoid, Gaussian };

  ScalarField() = default;

  static ScalarField constant(double c) {
    ScalarField f;
    f.kind_ = Kind::Constant;
    f.c_ = c;
    return f;
  }

  // Accepts a bare number or {"fn": "poly"|"sinusoid"|"gaussian", ...}.
  static ScalarField from_json(const nlohmann::json& j, int dim);

  nlohmann::json to_json() const;

  bool is_constant() const { return kind_ == Kind::Constant; }

  double operator()(const std::vector<double>& x) const { return eval(x); }

  template <class T>
  T eval(const std::vector<T>& x) const {
    switch (kind_) {
      case Kind::Constant:
        return T(c_);
      case Kind::Poly: {
        T acc(0.0);
        for (const auto& t : terms_) {
          T m(t.coef);
          for (size_t i = 0; i < t.powers.size(); ++i)
            if (t.powers[i] > 0) m = m * ipow(x[i], t.powers[i]);
          acc = acc + m;
        }
        return acc;
      }
      case Kind::Sinusoid:
        return T(c_) * sin(T(freq_) * x[static_cast<size_t>(axis_)] + T(phase_));
      case Kind::Gaussian: {
        T e(0.0);
        for (size_t i = 0; i < q_.size(); ++i)
          if (q_[i] != 0.0) e = e + T(q_[i]) * x[i] * x[i];
        return T(c_) * exp(-e);
      }
    }
    throw Error(ErrorCode::Internal, "scalar field: bad kind");
  }

 private:
  struct Term {
    double coef = 0.0;
    std::vector<int> powers;  // one exponent per coordinate
  };

  Kind kind_ = Kind::Constant;
  double c_ = 0.0;                // constant value / amplitude
  std::vector<Term> terms_;       // poly
  int axis_ = 0;                  // sinusoid
  double freq_ = 1.0, phase_ = 0.0;
  std::vector<double> q_;         // gaussian exponents per coordinate
};

using FieldMatrix = std::vector<std::vector<ScalarField>>;
using FieldVector = std::vector<ScalarField>;

}  // namespace finsler
