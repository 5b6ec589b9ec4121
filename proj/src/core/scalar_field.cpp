#include "core/scalar_field.hpp"

namespace finsler {

namespace {

double require_number(const nlohmann::json& j, const char* what) {
  if (!j.is_number()) throw ParseError(std::string("scalar field: ") + what + " must be a number");
  return j.get<double>();
}

}  // namespace

ScalarField ScalarField::from_json(const nlohmann::json& j, int dim) {
  if (j.is_number()) return constant(j.get<double>());
  if (!j.is_object() || !j.contains("fn"))
    throw ParseError("scalar field: expected a number or an object with \"fn\"");

  const std::string fn = j.at("fn").get<std::string>();
  ScalarField f;
  if (fn == "poly") {
    f.kind_ = Kind::Poly;
    if (!j.contains("terms") || !j.at("terms").is_array())
      throw ParseError("poly field: missing \"terms\" array");
    for (const auto& tj : j.at("terms")) {
      Term t;
      t.coef = require_number(tj.at("coef"), "poly coef");
      t.powers.assign(static_cast<size_t>(dim), 0);
      const auto& pw = tj.at("powers");
      if (!pw.is_array() || static_cast<int>(pw.size()) != dim)
        throw ParseError("poly field: \"powers\" must list one exponent per coordinate");
      for (int i = 0; i < dim; ++i) {
        int p = pw.at(static_cast<size_t>(i)).get<int>();
        if (p < 0) throw ParseError("poly field: negative exponent");
        t.powers[static_cast<size_t>(i)] = p;
      }
      f.terms_.push_back(std::move(t));
    }
  } else if (fn == "sinusoid") {
    f.kind_ = Kind::Sinusoid;
    f.c_ = require_number(j.at("coef"), "sinusoid coef");
    f.axis_ = j.at("axis").get<int>();
    if (f.axis_ < 0 || f.axis_ >= dim) throw ParseError("sinusoid field: axis out of range");
    f.freq_ = j.contains("freq") ? require_number(j.at("freq"), "freq") : 1.0;
    f.phase_ = j.contains("phase") ? require_number(j.at("phase"), "phase") : 0.0;
  } else if (fn == "gaussian") {
    f.kind_ = Kind::Gaussian;
    f.c_ = require_number(j.at("coef"), "gaussian coef");
    f.q_.assign(static_cast<size_t>(dim), 0.0);
    const auto& q = j.at("q");
    if (!q.is_array() || static_cast<int>(q.size()) > dim)
      throw ParseError("gaussian field: \"q\" must list at most one exponent per coordinate");
    for (size_t i = 0; i < q.size(); ++i) f.q_[i] = require_number(q.at(i), "gaussian q");
  } else {
    throw ParseError("scalar field: unknown fn \"" + fn + "\"");
  }
  return f;
}

nlohmann::json ScalarField::to_json() const {
  switch (kind_) {
    case Kind::Constant:
      return c_;
    case Kind::Poly: {
      nlohmann::json terms = nlohmann::json::array();
      for (const auto& t : terms_) terms.push_back({{"coef", t.coef}, {"powers", t.powers}});
      return {{"fn", "poly"}, {"terms", terms}};
    }
    case Kind::Sinusoid:
      return {{"fn", "sinusoid"}, {"coef", c_}, {"axis", axis_}, {"freq", freq_}, {"phase", phase_}};
    case Kind::Gaussian:
      return {{"fn", "gaussian"}, {"coef", c_}, {"q", q_}};
  }
  throw Error(ErrorCode::Internal, "scalar field: bad kind");
}

}  // namespace finsler
