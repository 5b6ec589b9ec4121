#include "core/model.hpp"

#include <cmath>
#include <fstream>

#include "core/error.hpp"

namespace finsler {

Model Model::plane(int dim, double sample_bound) {
  if (dim < 2) throw ArgumentError("model: dimension must be >= 2");
  Model m;
  m.kind_ = ModelKind::Plane;
  m.dim_ = dim;
  m.sample_bound_ = sample_bound;
  return m;
}

Model Model::torus(const Vec& periods) {
  if (periods.size() < 2) throw ArgumentError("torus: need at least 2 periods");
  for (int i = 0; i < periods.size(); ++i)
    if (!(periods[i] > 0.0)) throw ArgumentError("torus: periods must be positive");
  Model m;
  m.kind_ = ModelKind::Torus;
  m.dim_ = static_cast<int>(periods.size());
  m.periods_ = periods;
  return m;
}

Model Model::warped(ScalarField profile, double period, double x1_trunc, double x1_sample) {
  if (!(period > 0.0)) throw ArgumentError("warped: period must be positive");
  Model m;
  m.kind_ = ModelKind::Warped;
  m.dim_ = 2;
  m.profile_ = std::move(profile);
  m.period2_ = period;
  m.x1_trunc_ = x1_trunc;
  m.sample_bound_ = x1_sample;
  return m;
}

Model Model::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "plane") {
    int dim = j.contains("dim") ? j.at("dim").get<int>() : 2;
    double sb = j.contains("sample_bound") ? j.at("sample_bound").get<double>() : 2.0;
    return plane(dim, sb);
  }
  if (kind == "torus") {
    std::vector<double> p = j.at("periods").get<std::vector<double>>();
    return torus(to_vec(p));
  }
  if (kind == "warped") {
    ScalarField prof = ScalarField::from_json(j.at("profile"), 1);
    double period = j.at("period").get<double>();
    double trunc = j.contains("x1_trunc") ? j.at("x1_trunc").get<double>() : 6.0;
    double sample = j.contains("x1_sample") ? j.at("x1_sample").get<double>() : 2.0;
    return warped(std::move(prof), period, trunc, sample);
  }
  throw ParseError("model: unknown kind \"" + kind + "\"");
}

Model Model::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("model: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError("model: invalid JSON in " + path + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::json Model::to_json() const {
  switch (kind_) {
    case ModelKind::Plane:
      return {{"kind", "plane"}, {"dim", dim_}, {"sample_bound", sample_bound_}};
    case ModelKind::Torus: {
      return {{"kind", "torus"}, {"periods", to_std(periods_)}};
    }
    case ModelKind::Warped:
      return {{"kind", "warped"},
              {"profile", profile_.to_json()},
              {"period", period2_},
              {"x1_trunc", x1_trunc_},
              {"x1_sample", sample_bound_}};
  }
  throw Error(ErrorCode::Internal, "model: bad kind");
}

bool Model::periodic(int axis) const {
  if (kind_ == ModelKind::Torus) return true;
  return kind_ == ModelKind::Warped && axis == 1;
}

double Model::period(int axis) const {
  if (kind_ == ModelKind::Torus) return periods_[axis];
  if (kind_ == ModelKind::Warped && axis == 1) return period2_;
  throw ArgumentError("model: axis is not periodic");
}

Vec Model::wrap(const Vec& x) const {
  Vec w = x;
  for (int i = 0; i < dim_; ++i) {
    if (!periodic(i)) continue;
    double p = period(i);
    w[i] = std::fmod(w[i], p);
    if (w[i] < 0.0) w[i] += p;
  }
  return w;
}

Vec Model::min_image_delta(const Vec& a, const Vec& b) const {
  Vec d = a - b;
  for (int i = 0; i < dim_; ++i) {
    if (!periodic(i)) continue;
    double p = period(i);
    d[i] -= p * std::round(d[i] / p);
  }
  return d;
}

double Model::phase_distance(const Vec& xa, const Vec& ya, const Vec& xb, const Vec& yb) const {
  Vec dx = min_image_delta(xa, xb);
  double s = dx.squaredNorm() + (ya - yb).squaredNorm();
  return std::sqrt(s);
}

Vec Model::sample_point(Rng& rng) const {
  Vec x(dim_);
  switch (kind_) {
    case ModelKind::Plane:
      for (int i = 0; i < dim_; ++i) x[i] = rng.uniform(-sample_bound_, sample_bound_);
      break;
    case ModelKind::Torus:
      for (int i = 0; i < dim_; ++i) x[i] = rng.uniform(0.0, periods_[i]);
      break;
    case ModelKind::Warped:
      x[0] = rng.uniform(-sample_bound_, sample_bound_);
      x[1] = rng.uniform(0.0, period2_);
      break;
  }
  return x;
}

double Model::escape_bound() const {
  if (kind_ == ModelKind::Warped) return x1_trunc_;
  return std::numeric_limits<double>::infinity();
}

bool Model::escaped(const Vec& x) const {
  if (kind_ != ModelKind::Warped) return false;
  return std::abs(x[0]) > x1_trunc_;
}

double Model::profile(double x1) const {
  std::vector<double> x{x1};
  return profile_field().eval(x);
}

const ScalarField& Model::profile_field() const {
  if (kind_ != ModelKind::Warped) throw ArgumentError("model: profile only defined for warped surfaces");
  return profile_;
}

}  // namespace finsler
