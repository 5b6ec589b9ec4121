#include "core/metric.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "core/error.hpp"
#include "core/model.hpp"
#include "core/rng.hpp"

namespace finsler {

namespace {

constexpr double kFdStepBase = 6.0554544523933429e-06;  // eps^(1/3)

void check_tangent(const Vec& x, const Vec& y, int dim) {
  if (x.size() != dim || y.size() != dim)
    throw ArgumentError("metric: point/vector dimension mismatch");
  bool nonzero = false;
  for (int i = 0; i < dim; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw DomainError("metric: non-finite input");
    if (y[i] != 0.0) nonzero = true;
  }
  if (!nonzero) throw DomainError("metric: zero direction vector");
}

std::string point_str(const Vec& x, const Vec& y) {
  std::ostringstream os;
  os << "x=(";
  for (int i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
  os << "), y=(";
  for (int i = 0; i < y.size(); ++i) os << (i ? "," : "") << y[i];
  os << ")";
  return os.str();
}

}  // namespace

double Phi::d1(double s) const {
  switch (kind) {
    case PhiKind::Randers:
      return 1.0;
    case PhiKind::Quadratic:
      return 2.0 * s;
    case PhiKind::Matsumoto: {
      double u = 1.0 - s;
      return 1.0 / (u * u);
    }
  }
  return 0.0;
}

double Phi::d2(double s) const {
  switch (kind) {
    case PhiKind::Randers:
      return 0.0;
    case PhiKind::Quadratic:
      return 2.0;
    case PhiKind::Matsumoto: {
      double u = 1.0 - s;
      return 2.0 / (u * u * u);
    }
  }
  return 0.0;
}

Phi Phi::from_name(const std::string& name) {
  if (name == "randers") return {PhiKind::Randers};
  if (name == "quadratic") return {PhiKind::Quadratic};
  if (name == "matsumoto" || name == "slope") return {PhiKind::Matsumoto};
  throw ParseError("metric: unknown phi profile \"" + name + "\"");
}

std::string Phi::name() const {
  switch (kind) {
    case PhiKind::Randers:
      return "randers";
    case PhiKind::Quadratic:
      return "quadratic";
    case PhiKind::Matsumoto:
      return "matsumoto";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// construction

Metric Metric::euclidean(int dim) {
  if (dim < 2) throw ArgumentError("metric: dimension must be >= 2");
  Metric m;
  m.family_ = MetricFamily::Euclidean;
  m.dim_ = dim;
  m.finalize();
  return m;
}

Metric Metric::riemannian(FieldMatrix a) {
  Metric m;
  m.family_ = MetricFamily::Riemannian;
  m.dim_ = static_cast<int>(a.size());
  if (m.dim_ < 2) throw ArgumentError("metric: dimension must be >= 2");
  for (const auto& row : a)
    if (static_cast<int>(row.size()) != m.dim_) throw ArgumentError("metric: a must be square");
  m.a_ = std::move(a);
  m.finalize();
  return m;
}

Metric Metric::randers(FieldMatrix a, FieldVector b) {
  Metric m = riemannian(std::move(a));
  m.family_ = MetricFamily::Randers;
  if (static_cast<int>(b.size()) != m.dim_) throw ArgumentError("metric: b must have length dim");
  m.b_ = std::move(b);
  m.finalize();
  return m;
}

Metric Metric::alpha_beta(FieldMatrix a, FieldVector b, Phi phi) {
  Metric m = randers(std::move(a), std::move(b));
  m.family_ = MetricFamily::AlphaBeta;
  m.phi_ = phi;
  m.finalize();
  return m;
}

Metric Metric::minkowski_pnorm(int dim, int p, Vec weights) {
  if (dim < 2) throw ArgumentError("metric: dimension must be >= 2");
  if (p < 2 || p % 2 != 0) throw ArgumentError("metric: pnorm exponent must be a positive even integer");
  Metric m;
  m.family_ = MetricFamily::Minkowski;
  m.dim_ = dim;
  m.pnorm_p_ = p;
  if (weights.size() == 0) {
    m.pnorm_w_ = Vec::Ones(dim);
  } else {
    if (weights.size() != dim) throw ArgumentError("metric: pnorm weights must have length dim");
    for (int i = 0; i < dim; ++i)
      if (!(weights[i] > 0.0)) throw ArgumentError("metric: pnorm weights must be positive");
    m.pnorm_w_ = std::move(weights);
  }
  m.finalize();
  return m;
}

Metric Metric::custom(int dim, CustomFn fn) {
  if (dim < 2) throw ArgumentError("metric: dimension must be >= 2");
  if (!fn) throw ArgumentError("metric: null custom function");
  Metric m;
  m.family_ = MetricFamily::Custom;
  m.dim_ = dim;
  m.custom_ = std::move(fn);
  m.finalize();
  return m;
}

void Metric::finalize() {
  switch (family_) {
    case MetricFamily::Euclidean:
    case MetricFamily::Minkowski:
      x_independent_ = true;
      break;
    case MetricFamily::Riemannian:
    case MetricFamily::Randers:
    case MetricFamily::AlphaBeta: {
      x_independent_ = true;
      for (const auto& row : a_)
        for (const auto& f : row)
          if (!f.is_constant()) x_independent_ = false;
      for (const auto& f : b_)
        if (!f.is_constant()) x_independent_ = false;
      break;
    }
    case MetricFamily::Custom:
      x_independent_ = false;  // unknowable; assume not
      break;
  }

  // detect absolute homogeneity on a fixed sample
  Rng rng(0x5eedULL);
  abs_homogeneous_ = true;
  for (int k = 0; k < 8 && abs_homogeneous_; ++k) {
    Vec x(dim_), y(dim_);
    for (int i = 0; i < dim_; ++i) {
      x[i] = rng.uniform(-1.3, 1.3);
      y[i] = rng.uniform(-1.0, 1.0);
    }
    if (y.norm() < 1e-3) y[0] = 1.0;
    try {
      double fp = F(x, y);
      double fm = F(x, -y);
      if (std::abs(fp - fm) > 1e-12 * std::max(fp, fm)) abs_homogeneous_ = false;
    } catch (const Error&) {
      abs_homogeneous_ = false;
    }
  }
}

// ---------------------------------------------------------------------------
// evaluation

template <class T>
T Metric::eval_impl(const std::vector<T>& x, const std::vector<T>& y) const {
  const size_t n = static_cast<size_t>(dim_);
  switch (family_) {
    case MetricFamily::Euclidean: {
      T q(0.0);
      for (size_t i = 0; i < n; ++i) q = q + y[i] * y[i];
      return sqrt(q);
    }
    case MetricFamily::Riemannian:
    case MetricFamily::Randers:
    case MetricFamily::AlphaBeta: {
      T q(0.0);
      for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) q = q + a_[i][j].eval(x) * y[i] * y[j];
      T al = sqrt(q);
      if (family_ == MetricFamily::Riemannian) return al;
      T be(0.0);
      for (size_t i = 0; i < n; ++i) be = be + b_[i].eval(x) * y[i];
      if (family_ == MetricFamily::Randers) return al + be;
      T s = be / al;
      return al * phi_.eval(s);
    }
    case MetricFamily::Minkowski: {
      T q(0.0);
      for (size_t i = 0; i < n; ++i) q = q + T(pnorm_w_[i]) * ipow(y[i], pnorm_p_);
      return exp(log(q) * T(1.0 / pnorm_p_));
    }
    case MetricFamily::Custom:
      break;
  }
  throw Error(ErrorCode::Internal, "metric: eval_impl on custom family");
}

double Metric::F(const Vec& x, const Vec& y) const {
  check_tangent(x, y, dim_);
  double f;
  if (family_ == MetricFamily::Custom) {
    f = custom_(x.data(), y.data(), dim_);
  } else {
    f = eval_impl(to_std(x), to_std(y));
  }
  if (!std::isfinite(f) || f <= 0.0)
    throw NumericError("metric: F not positive at " + point_str(x, y) + " (F=" + std::to_string(f) + ")");
  return f;
}

HDual Metric::F2_seeded(const Vec& x, const Vec& y, int axis1, bool on_x1, int axis2,
                        bool on_x2) const {
  if (!supports_autodiff())
    throw Error(ErrorCode::Internal, "metric: dual evaluation requested for custom family");
  const size_t n = static_cast<size_t>(dim_);
  HVec hx(n), hy(n);
  for (size_t i = 0; i < n; ++i) {
    hx[i] = HDual(x[static_cast<int>(i)]);
    hy[i] = HDual(y[static_cast<int>(i)]);
  }
  if (axis1 >= 0) (on_x1 ? hx : hy)[static_cast<size_t>(axis1)].d1 = 1.0;
  if (axis2 >= 0) (on_x2 ? hx : hy)[static_cast<size_t>(axis2)].d2 = 1.0;
  HDual f = eval_impl(hx, hy);
  return f * f;
}

Vec Metric::grad_F_y(const Vec& x, const Vec& y) const {
  check_tangent(x, y, dim_);
  Vec g(dim_);
  if (supports_autodiff()) {
    double f = F(x, y);
    for (int i = 0; i < dim_; ++i) g[i] = F2_seeded(x, y, i, false, -1, false).d1 / (2.0 * f);
  } else {
    double h = kFdStepBase * std::max(1.0, y.cwiseAbs().maxCoeff());
    for (int i = 0; i < dim_; ++i) {
      Vec yp = y, ym = y;
      yp[i] += h;
      ym[i] -= h;
      g[i] = (F(x, yp) - F(x, ym)) / (2.0 * h);
    }
  }
  return g;
}

Vec Metric::grad_F2_x(const Vec& x, const Vec& y) const {
  check_tangent(x, y, dim_);
  Vec g = Vec::Zero(dim_);
  if (x_independent_) return g;
  if (supports_autodiff()) {
    for (int k = 0; k < dim_; ++k) g[k] = F2_seeded(x, y, k, true, -1, false).d1;
  } else {
    double h = kFdStepBase * std::max(1.0, x.cwiseAbs().maxCoeff());
    for (int k = 0; k < dim_; ++k) {
      Vec xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      g[k] = (F2(xp, y) - F2(xm, y)) / (2.0 * h);
    }
  }
  return g;
}

Mat Metric::hessian_f2_y(const Vec& x, const Vec& y) const {
  Mat h(dim_, dim_);
  if (supports_autodiff()) {
    for (int i = 0; i < dim_; ++i)
      for (int j = i; j < dim_; ++j) {
        double v = F2_seeded(x, y, i, false, j, false).d12;
        h(i, j) = v;
        h(j, i) = v;
      }
    return h;
  }
  double step = kFdStepBase * std::max(1.0, y.cwiseAbs().maxCoeff());
  double e0 = F2(x, y);
  for (int i = 0; i < dim_; ++i) {
    Vec yp = y, ym = y;
    yp[i] += step;
    ym[i] -= step;
    h(i, i) = (F2(x, yp) - 2.0 * e0 + F2(x, ym)) / (step * step);
  }
  for (int i = 0; i < dim_; ++i)
    for (int j = i + 1; j < dim_; ++j) {
      Vec ypp = y, ypm = y, ymp = y, ymm = y;
      ypp[i] += step; ypp[j] += step;
      ypm[i] += step; ypm[j] -= step;
      ymp[i] -= step; ymp[j] += step;
      ymm[i] -= step; ymm[j] -= step;
      double v = (F2(x, ypp) - F2(x, ypm) - F2(x, ymp) + F2(x, ymm)) / (4.0 * step * step);
      h(i, j) = v;
      h(j, i) = v;
    }
  return h;
}

Mat Metric::fundamental_raw(const Vec& x, const Vec& y) const {
  check_tangent(x, y, dim_);
  return 0.5 * hessian_f2_y(x, y);
}

FundamentalTensor Metric::fundamental_tensor(const Vec& x, const Vec& y) const {
  check_tangent(x, y, dim_);
  FundamentalTensor t;
  t.g = 0.5 * hessian_f2_y(x, y);
  Eigen::SelfAdjointEigenSolver<Mat> es(t.g);
  double min_eig = es.eigenvalues().minCoeff();
  if (!(min_eig > 0.0))
    throw ConvexityError("metric: fundamental tensor not positive definite at " + point_str(x, y) +
                             " (min eigenvalue " + std::to_string(min_eig) + ")",
                         to_std(x), to_std(y));
  t.det_g = es.eigenvalues().prod();
  t.g_inv = t.g.inverse();
  return t;
}

double Metric::det_fundamental(const Vec& x, const Vec& y) const {
  check_tangent(x, y, dim_);
  return (0.5 * hessian_f2_y(x, y)).determinant();
}

// ---------------------------------------------------------------------------
// Riemannian part accessors

bool Metric::has_alpha() const {
  return family_ == MetricFamily::Euclidean || family_ == MetricFamily::Riemannian ||
         family_ == MetricFamily::Randers || family_ == MetricFamily::AlphaBeta;
}

Mat Metric::alpha_matrix(const Vec& x) const {
  if (!has_alpha()) throw ArgumentError("metric: family has no Riemannian part");
  if (family_ == MetricFamily::Euclidean) return Mat::Identity(dim_, dim_);
  std::vector<double> xs = to_std(x);
  Mat a(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) {
      double v = 0.5 * (a_[static_cast<size_t>(i)][static_cast<size_t>(j)].eval(xs) +
                        a_[static_cast<size_t>(j)][static_cast<size_t>(i)].eval(xs));
      a(i, j) = v;
    }
  return a;
}

double Metric::alpha_norm(const Vec& x, const Vec& y) const {
  Mat a = alpha_matrix(x);
  return std::sqrt(y.dot(a * y));
}

Vec Metric::beta_covector(const Vec& x) const {
  Vec b = Vec::Zero(dim_);
  if (b_.empty()) return b;
  std::vector<double> xs = to_std(x);
  for (int i = 0; i < dim_; ++i) b[i] = b_[static_cast<size_t>(i)].eval(xs);
  return b;
}

double Metric::b_squared(const Vec& x) const {
  if (b_.empty()) return 0.0;
  Mat a = alpha_matrix(x);
  Vec b = beta_covector(x);
  return b.dot(a.ldlt().solve(b));
}

std::optional<Phi> Metric::phi() const {
  if (family_ != MetricFamily::AlphaBeta) return std::nullopt;
  return phi_;
}

// ---------------------------------------------------------------------------
// JSON

std::string Metric::family_name() const {
  switch (family_) {
    case MetricFamily::Euclidean: return "euclidean";
    case MetricFamily::Riemannian: return "riemannian";
    case MetricFamily::Randers: return "randers";
    case MetricFamily::AlphaBeta: return "alphabeta";
    case MetricFamily::Minkowski: return "minkowski";
    case MetricFamily::Custom: return "custom";
  }
  return "?";
}

namespace {

FieldMatrix parse_field_matrix(const nlohmann::json& j, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    throw ParseError("metric: \"a\" must be a dim x dim array");
  FieldMatrix a(static_cast<size_t>(dim));
  for (int i = 0; i < dim; ++i) {
    const auto& row = j.at(static_cast<size_t>(i));
    if (!row.is_array() || static_cast<int>(row.size()) != dim)
      throw ParseError("metric: \"a\" must be a dim x dim array");
    for (int k = 0; k < dim; ++k)
      a[static_cast<size_t>(i)].push_back(ScalarField::from_json(row.at(static_cast<size_t>(k)), dim));
  }
  return a;
}

FieldVector parse_field_vector(const nlohmann::json& j, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    throw ParseError("metric: \"b\" must be an array of length dim");
  FieldVector b;
  for (int i = 0; i < dim; ++i) b.push_back(ScalarField::from_json(j.at(static_cast<size_t>(i)), dim));
  return b;
}

}  // namespace

Metric Metric::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("metric: expected a JSON object");
  const std::string family = j.at("family").get<std::string>();
  const int dim = j.at("dim").get<int>();
  if (family == "euclidean") return euclidean(dim);
  if (family == "riemannian") return riemannian(parse_field_matrix(j.at("a"), dim));
  if (family == "randers")
    return randers(parse_field_matrix(j.at("a"), dim), parse_field_vector(j.at("b"), dim));
  if (family == "alphabeta") {
    Phi phi = Phi::from_name(j.at("phi").is_string() ? j.at("phi").get<std::string>()
                                                     : j.at("phi").at("name").get<std::string>());
    return alpha_beta(parse_field_matrix(j.at("a"), dim), parse_field_vector(j.at("b"), dim), phi);
  }
  if (family == "minkowski") {
    const auto& norm = j.at("norm");
    const std::string kind = norm.at("kind").get<std::string>();
    if (kind == "pnorm") {
      Vec w;
      if (norm.contains("weights")) w = to_vec(norm.at("weights").get<std::vector<double>>());
      return minkowski_pnorm(dim, norm.at("p").get<int>(), std::move(w));
    }
    if (kind == "randers")
      return randers(parse_field_matrix(norm.at("a"), dim), parse_field_vector(norm.at("b"), dim));
    throw ParseError("metric: unknown minkowski norm kind \"" + kind + "\"");
  }
  throw ParseError("metric: unknown family \"" + family + "\"");
}

Metric Metric::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("metric: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError("metric: invalid JSON in " + path + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::json Metric::to_json() const {
  nlohmann::json j{{"family", family_name()}, {"dim", dim_}};
  auto field_matrix = [&](const FieldMatrix& a) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : a) {
      nlohmann::json r = nlohmann::json::array();
      for (const auto& f : row) r.push_back(f.to_json());
      rows.push_back(r);
    }
    return rows;
  };
  auto field_vector = [&](const FieldVector& b) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& f : b) r.push_back(f.to_json());
    return r;
  };
  switch (family_) {
    case MetricFamily::Euclidean:
      break;
    case MetricFamily::Riemannian:
      j["a"] = field_matrix(a_);
      break;
    case MetricFamily::Randers:
      j["a"] = field_matrix(a_);
      j["b"] = field_vector(b_);
      break;
    case MetricFamily::AlphaBeta:
      j["a"] = field_matrix(a_);
      j["b"] = field_vector(b_);
      j["phi"] = phi_.name();
      break;
    case MetricFamily::Minkowski:
      j["norm"] = {{"kind", "pnorm"}, {"p", pnorm_p_}, {"weights", to_std(pnorm_w_)}};
      break;
    case MetricFamily::Custom:
      j["note"] = "custom callback metric; not serializable";
      break;
  }
  return j;
}

// ---------------------------------------------------------------------------
// validation

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json e{{"name", c.name}, {"pass", c.pass}, {"margin", c.margin}};
    if (!c.note.empty()) e["note"] = c.note;
    arr.push_back(e);
  }
  return {{"checks", arr},
          {"all_pass", all_pass},
          {"absolutely_homogeneous", absolutely_homogeneous},
          {"min_eigenvalue", min_eigenvalue}};
}

ValidationReport validate_metric(const Metric& metric, const Model& model, int n_samples,
                                 uint64_t seed) {
  if (n_samples < 1) throw ArgumentError("validate_metric: n_samples must be >= 1");
  const int n = metric.dim();
  const bool ad = metric.supports_autodiff();
  const double tol_euler = ad ? 1e-8 : 1e-4;
  const double tol_hom = ad ? 1e-8 : 1e-3;

  Rng rng(seed);
  double min_f = std::numeric_limits<double>::infinity();
  double worst_euler = 0.0, worst_g_hom = 0.0, worst_f2 = 0.0, worst_asym = 0.0;
  double min_eig = std::numeric_limits<double>::infinity();
  double max_b2 = 0.0;
  int eval_failures = 0;
  std::string failure_note;

  const bool has_b = metric.family() == MetricFamily::Randers ||
                     metric.family() == MetricFamily::AlphaBeta;

  for (int k = 0; k < n_samples; ++k) {
    Vec x = model.sample_point(rng);
    Vec y(n);
    for (int i = 0; i < n; ++i) y[i] = rng.normal();
    if (y.norm() < 1e-8) y[0] = 1.0;
    y *= rng.uniform(0.5, 2.0) / y.norm();

    try {
      double f = metric.F(x, y);
      min_f = std::min(min_f, f);

      Vec gf = metric.grad_F_y(x, y);
      worst_euler = std::max(worst_euler, std::abs(y.dot(gf) - f) / f);

      Mat g1 = metric.fundamental_raw(x, y);
      Eigen::SelfAdjointEigenSolver<Mat> es(g1);
      min_eig = std::min(min_eig, es.eigenvalues().minCoeff());

      worst_f2 = std::max(worst_f2, std::abs(y.dot(g1 * y) - f * f) / (f * f));

      Mat g2 = metric.fundamental_raw(x, 2.0 * y);
      worst_g_hom = std::max(worst_g_hom, (g1 - g2).cwiseAbs().maxCoeff());

      double fm = metric.F(x, -y);
      worst_asym = std::max(worst_asym, std::abs(fm - f) / f);

      if (has_b) max_b2 = std::max(max_b2, metric.b_squared(x));
    } catch (const Error& e) {
      ++eval_failures;
      if (failure_note.empty()) failure_note = e.what();
    }
  }

  ValidationReport rep;
  auto add = [&](const std::string& name, bool pass, double margin, const std::string& note = "") {
    rep.checks.push_back({name, pass, margin, note});
    rep.all_pass = rep.all_pass && pass;
  };

  add("evaluation", eval_failures == 0, -static_cast<double>(eval_failures), failure_note);
  add("positivity", eval_failures == 0 && min_f > 0.0, min_f);
  add("euler_identity", worst_euler <= tol_euler, tol_euler - worst_euler);
  add("g_zero_homogeneity", worst_g_hom <= tol_hom, tol_hom - worst_g_hom);
  add("f2_identity", worst_f2 <= tol_euler, tol_euler - worst_f2);
  add("strong_convexity", std::isfinite(min_eig) && min_eig > 0.0 && eval_failures == 0, min_eig);
  if (has_b) add("randers_b2", max_b2 < 1.0 - 1e-12, 1.0 - max_b2);

  rep.min_eigenvalue = std::isfinite(min_eig) ? min_eig : 0.0;
  rep.absolutely_homogeneous = worst_asym <= 1e-10;
  return rep;
}

}  // namespace finsler
