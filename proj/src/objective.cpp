#include "etlalm/objective.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "etlalm/linalg.hpp"

namespace etlalm {

namespace {

void check_dim(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got)
    throw std::invalid_argument(std::string(what) + ": dimension " + std::to_string(got) +
                                ", expected " + std::to_string(expected));
}

// λmax(AᵀA) through whichever Gram matrix is smaller.
double gram_max_eigenvalue(const Mat& a) {
  const std::size_t r = a.rows(), c = a.cols();
  const bool rows_side = r <= c;
  const std::size_t k = rows_side ? r : c;
  if (k == 0) return 0.0;
  Mat g(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < k; ++j) {
      double s = 0.0;
      if (rows_side)
        for (std::size_t t = 0; t < c; ++t) s += a(i, t) * a(j, t);
      else
        for (std::size_t t = 0; t < r; ++t) s += a(t, i) * a(t, j);
      g(i, j) = s;
      g(j, i) = s;
    }
  return std::max(0.0, symmetric_eigen(SymmetricMatrix(std::move(g))).values.back());
}

double softplus(double u) { return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u))); }

// 1 / (1 + exp(-u)) without overflow
double sigmoid(double u) {
  if (u >= 0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

}  // namespace

void ZeroSmooth::gradient(std::span<const double>, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
}

LeastSquares::LeastSquares(Mat a, Vec b)
    : SmoothPart(a.cols(), gram_max_eigenvalue(a), 0.0), a_(std::move(a)), b_(std::move(b)) {
  check_dim(a_.rows(), b_.size(), "LeastSquares b");
}

double LeastSquares::value(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t r = 0; r < a_.rows(); ++r) {
    const double res = b_[r] - vec::dot(a_.row(r), x);
    s += res * res;
  }
  return 0.5 * s;
}

void LeastSquares::gradient(std::span<const double> x, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t r = 0; r < a_.rows(); ++r) {
    const double res = vec::dot(a_.row(r), x) - b_[r];
    const auto row = a_.row(r);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += row[c] * res;
  }
}

Logistic::Logistic(Mat features, Vec labels, double ridge)
    : SmoothPart(features.cols(), 0.25 * gram_max_eigenvalue(features) + ridge, ridge),
      features_(std::move(features)),
      labels_(std::move(labels)),
      ridge_(ridge) {
  check_dim(features_.rows(), labels_.size(), "Logistic labels");
}

double Logistic::value(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t j = 0; j < features_.rows(); ++j)
    s += softplus(-labels_[j] * vec::dot(features_.row(j), x));
  if (ridge_ != 0.0) s += 0.5 * ridge_ * vec::dot(x, x);
  return s;
}

void Logistic::gradient(std::span<const double> x, std::span<double> out) const {
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = ridge_ * x[c];
  for (std::size_t j = 0; j < features_.rows(); ++j) {
    const double y = labels_[j];
    const double w = -y * sigmoid(-y * vec::dot(features_.row(j), x));
    const auto row = features_.row(j);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += w * row[c];
  }
}

DiagonalQuadratic::DiagonalQuadratic(Vec d, Vec c)
    : SmoothPart(d.size(), d.empty() ? 0.0 : *std::max_element(d.begin(), d.end()),
                 d.empty() ? 0.0 : *std::min_element(d.begin(), d.end())),
      d_(std::move(d)),
      c_(std::move(c)) {
  check_dim(d_.size(), c_.size(), "DiagonalQuadratic center");
}

double DiagonalQuadratic::value(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t k = 0; k < d_.size(); ++k) s += d_[k] * (x[k] - c_[k]) * (x[k] - c_[k]);
  return 0.5 * s;
}

void DiagonalQuadratic::gradient(std::span<const double> x, std::span<double> out) const {
  for (std::size_t k = 0; k < d_.size(); ++k) out[k] = d_[k] * (x[k] - c_[k]);
}

void ZeroNonsmooth::prox(double, std::span<const double> y, std::span<double> out) const {
  std::copy(y.begin(), y.end(), out.begin());
}

void ZeroNonsmooth::project_subdifferential(std::span<const double>, std::span<const double>,
                                            std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
}

WeightedL1::WeightedL1(std::size_t dim, double tau) : WeightedL1(tau, Vec(dim, 0.0)) {}

WeightedL1::WeightedL1(double tau, Vec center)
    : NonsmoothPart(center.size()), tau_(tau), center_(std::move(center)) {
  if (!(tau >= 0.0)) throw ConfigError("l1 weight must be nonnegative");
}

double WeightedL1::value(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t k = 0; k < center_.size(); ++k) s += std::abs(x[k] - center_[k]);
  return tau_ * s;
}

void WeightedL1::prox(double t, std::span<const double> y, std::span<double> out) const {
  const double thr = t * tau_;
  for (std::size_t k = 0; k < center_.size(); ++k) {
    const double u = y[k] - center_[k];
    out[k] = center_[k] + std::copysign(std::max(std::abs(u) - thr, 0.0), u);
  }
}

void WeightedL1::project_subdifferential(std::span<const double> x, std::span<const double> w,
                                         std::span<double> out) const {
  for (std::size_t k = 0; k < center_.size(); ++k) {
    const double u = x[k] - center_[k];
    out[k] = u != 0.0 ? std::copysign(tau_, u) : std::clamp(w[k], -tau_, tau_);
  }
}

Vec soft_threshold(std::span<const double> y, double t) {
  if (t < 0.0) throw std::invalid_argument("soft_threshold: negative threshold");
  Vec out(y.size());
  for (std::size_t k = 0; k < y.size(); ++k)
    out[k] = std::copysign(std::max(std::abs(y[k]) - t, 0.0), y[k]);
  return out;
}

CompositeObjective::CompositeObjective(std::vector<std::shared_ptr<const SmoothPart>> smooth,
                                       std::vector<std::shared_ptr<const NonsmoothPart>> nonsmooth)
    : smooth_(std::move(smooth)), nonsmooth_(std::move(nonsmooth)) {
  if (smooth_.size() != nonsmooth_.size())
    throw std::invalid_argument("CompositeObjective: agent count mismatch");
  if (smooth_.empty()) throw std::invalid_argument("CompositeObjective: no agents");
  dim_ = smooth_.front()->dim();
  for (std::size_t i = 0; i < smooth_.size(); ++i) {
    check_dim(dim_, smooth_[i]->dim(), "smooth part");
    check_dim(dim_, nonsmooth_[i]->dim(), "nonsmooth part");
  }
}

double CompositeObjective::value(std::size_t i, std::span<const double> x) const {
  return smooth_[i]->value(x) + nonsmooth_[i]->value(x);
}

double CompositeObjective::value(const Mat& x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < agents(); ++i) s += value(i, x.row(i));
  return s;
}

double CompositeObjective::value_common(std::span<const double> theta) const {
  double s = 0.0;
  for (std::size_t i = 0; i < agents(); ++i) s += value(i, theta);
  return s;
}

bool CompositeObjective::smooth_is_zero() const {
  return std::all_of(smooth_.begin(), smooth_.end(), [](const auto& f) { return f->is_zero(); });
}

bool CompositeObjective::nonsmooth_is_zero() const {
  return std::all_of(nonsmooth_.begin(), nonsmooth_.end(),
                     [](const auto& g) { return g->is_zero(); });
}

Vec CompositeObjective::lipschitz() const {
  Vec out;
  for (const auto& f : smooth_) out.push_back(f->lipschitz());
  return out;
}

Vec CompositeObjective::strong_convexity() const {
  Vec out;
  for (const auto& f : smooth_) out.push_back(f->strong_convexity());
  return out;
}

std::string to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::Lasso: return "lasso";
    case ProblemKind::Logistic: return "logistic";
    case ProblemKind::Quadratic: return "quadratic";
  }
  return "?";
}

ProblemKind parse_problem_kind(const std::string& in) {
  std::string s = in;
  for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (s == "lasso") return ProblemKind::Lasso;
  if (s == "logistic") return ProblemKind::Logistic;
  if (s == "quadratic") return ProblemKind::Quadratic;
  throw ConfigError("unknown problem kind '" + in + "'");
}

CompositeObjective build_objective(ProblemKind kind, const InstanceParams& params,
                                   const std::vector<Mat>& matrices,
                                   const std::vector<Vec>& vectors) {
  const std::size_t n = params.agents, m = params.dim;
  if (matrices.size() != n || vectors.size() != n)
    throw ConfigError("instance data does not match agent count");
  std::vector<std::shared_ptr<const SmoothPart>> f;
  std::vector<std::shared_ptr<const NonsmoothPart>> g;
  for (std::size_t i = 0; i < n; ++i) {
    switch (kind) {
      case ProblemKind::Lasso:
        f.push_back(std::make_shared<LeastSquares>(matrices[i], vectors[i]));
        g.push_back(std::make_shared<WeightedL1>(m, params.tau));
        break;
      case ProblemKind::Logistic:
        f.push_back(std::make_shared<Logistic>(matrices[i], vectors[i], params.ridge));
        g.push_back(std::make_shared<ZeroNonsmooth>(m));
        break;
      case ProblemKind::Quadratic: {
        const auto d = matrices[i].row(0);
        f.push_back(std::make_shared<DiagonalQuadratic>(Vec(d.begin(), d.end()), vectors[i]));
        g.push_back(std::make_shared<ZeroNonsmooth>(m));
        break;
      }
    }
  }
  return CompositeObjective(std::move(f), std::move(g));
}

ProblemInstance make_lasso_instance(std::size_t n, std::size_t p, std::size_t m, double tau,
                                    std::uint64_t seed) {
  if (n == 0 || p == 0 || m == 0) throw ConfigError("lasso instance: counts must be positive");
  ProblemInstance inst;
  inst.kind = ProblemKind::Lasso;
  inst.params = {n, m, p, tau, 0.0, seed};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (std::size_t i = 0; i < n; ++i) {
    Mat a(p, m);
    for (std::size_t r = 0; r < p; ++r) {
      auto row = a.row(r);
      for (double& v : row) v = normal(rng);
      const double nr = vec::norm(row);
      for (double& v : row) v /= nr;
    }
    Vec b(p);
    for (double& v : b) v = normal(rng);
    const double nb = vec::norm(b);
    for (double& v : b) v /= nb;
    inst.matrices.push_back(std::move(a));
    inst.vectors.push_back(std::move(b));
  }
  inst.objective = build_objective(inst.kind, inst.params, inst.matrices, inst.vectors);
  return inst;
}

ProblemInstance make_logistic_instance(std::size_t n, std::size_t samples, std::size_t m,
                                       std::uint64_t seed, double ridge) {
  if (n == 0 || samples == 0 || m == 0)
    throw ConfigError("logistic instance: counts must be positive");
  if (ridge < 0.0) throw ConfigError("ridge must be nonnegative");
  ProblemInstance inst;
  inst.kind = ProblemKind::Logistic;
  inst.params = {n, m, samples, 0.0, ridge, seed};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution flip(0.05);
  Vec w_true(m);
  for (double& v : w_true) v = normal(rng);
  for (std::size_t i = 0; i < n; ++i) {
    Mat feat(samples, m);
    Vec labels(samples);
    for (std::size_t j = 0; j < samples; ++j) {
      auto row = feat.row(j);
      for (double& v : row) v = normal(rng);
      row[m - 1] = 1.0;  // bias coordinate
      double y = vec::dot(w_true, row) >= 0.0 ? 1.0 : -1.0;
      if (flip(rng)) y = -y;
      labels[j] = y;
    }
    inst.matrices.push_back(std::move(feat));
    inst.vectors.push_back(std::move(labels));
  }
  inst.objective = build_objective(inst.kind, inst.params, inst.matrices, inst.vectors);
  return inst;
}

ProblemInstance make_quadratic_instance(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (n == 0 || m == 0) throw ConfigError("quadratic instance: counts must be positive");
  ProblemInstance inst;
  inst.kind = ProblemKind::Quadratic;
  inst.params = {n, m, 0, 0.0, 0.0, seed};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(1.0, 2.0);
  std::normal_distribution<double> normal;
  for (std::size_t i = 0; i < n; ++i) {
    Mat d(1, m);
    for (double& v : d.data()) v = unif(rng);
    Vec c(m);
    for (double& v : c) v = normal(rng);
    inst.matrices.push_back(std::move(d));
    inst.vectors.push_back(std::move(c));
  }
  inst.objective = build_objective(inst.kind, inst.params, inst.matrices, inst.vectors);
  return inst;
}

Vec quadratic_minimizer(const ProblemInstance& inst) {
  if (inst.kind != ProblemKind::Quadratic)
    throw std::invalid_argument("quadratic_minimizer: not a quadratic instance");
  const std::size_t m = inst.params.dim;
  Vec num(m, 0.0), den(m, 0.0);
  for (std::size_t i = 0; i < inst.params.agents; ++i)
    for (std::size_t k = 0; k < m; ++k) {
      num[k] += inst.matrices[i](0, k) * inst.vectors[i][k];
      den[k] += inst.matrices[i](0, k);
    }
  for (std::size_t k = 0; k < m; ++k) num[k] /= den[k];
  return num;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_instance(std::ostream& os, const ProblemInstance& inst) {
  const auto& p = inst.params;
  os << "etlalm-instance 1\n"
     << "kind " << to_string(inst.kind) << '\n'
     << "agents " << p.agents << '\n'
     << "dim " << p.dim << '\n'
     << "rows " << p.rows << '\n'
     << "tau " << format_number(p.tau) << '\n'
     << "ridge " << format_number(p.ridge) << '\n'
     << "seed " << p.seed << '\n';
  for (std::size_t i = 0; i < inst.matrices.size(); ++i) {
    const Mat& a = inst.matrices[i];
    os << "agent " << i << '\n' << "matrix " << a.rows() << ' ' << a.cols() << '\n';
    for (std::size_t r = 0; r < a.rows(); ++r) {
      for (std::size_t c = 0; c < a.cols(); ++c) os << (c ? " " : "") << format_number(a(r, c));
      os << '\n';
    }
    const Vec& b = inst.vectors[i];
    os << "vector " << b.size() << '\n';
    for (std::size_t k = 0; k < b.size(); ++k) os << (k ? " " : "") << format_number(b[k]);
    os << '\n';
  }
}

namespace {

template <typename T>
T expect_field(std::istream& is, const std::string& key) {
  std::string got;
  T value{};
  if (!(is >> got) || got != key || !(is >> value))
    throw ConfigError("instance file: expected field '" + key + "'");
  return value;
}

}  // namespace

ProblemInstance read_instance(std::istream& is) {
  if (expect_field<int>(is, "etlalm-instance") != 1)
    throw ConfigError("instance file: unsupported version");
  ProblemInstance inst;
  inst.kind = parse_problem_kind(expect_field<std::string>(is, "kind"));
  auto& p = inst.params;
  p.agents = expect_field<std::size_t>(is, "agents");
  p.dim = expect_field<std::size_t>(is, "dim");
  p.rows = expect_field<std::size_t>(is, "rows");
  p.tau = expect_field<double>(is, "tau");
  p.ridge = expect_field<double>(is, "ridge");
  p.seed = expect_field<std::uint64_t>(is, "seed");
  for (std::size_t i = 0; i < p.agents; ++i) {
    if (expect_field<std::size_t>(is, "agent") != i)
      throw ConfigError("instance file: agents out of order");
    const auto rows = expect_field<std::size_t>(is, "matrix");
    std::size_t cols = 0;
    if (!(is >> cols)) throw ConfigError("instance file: bad matrix header");
    Mat a(rows, cols);
    for (double& v : a.data())
      if (!(is >> v)) throw ConfigError("instance file: truncated matrix of agent " + std::to_string(i));
    Vec b(expect_field<std::size_t>(is, "vector"));
    for (double& v : b)
      if (!(is >> v)) throw ConfigError("instance file: truncated vector of agent " + std::to_string(i));
    inst.matrices.push_back(std::move(a));
    inst.vectors.push_back(std::move(b));
  }
  inst.objective = build_objective(inst.kind, inst.params, inst.matrices, inst.vectors);
  return inst;
}

std::string to_text(const ProblemInstance& inst) {
  std::ostringstream os;
  write_instance(os, inst);
  return os.str();
}

std::uint64_t instance_hash(const ProblemInstance& inst) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_text(inst)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace etlalm
