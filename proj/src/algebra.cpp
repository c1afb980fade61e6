#include "carnot/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace carnot {

namespace {

// Dense canonical tensor c[i][j][k] (all i, j) built from the records.
class DenseConstants
{
 public:
  explicit DenseConstants(int n) : n_(n), c_(static_cast<std::size_t>(n * n * n), 0.0) {}
  double& at(int i, int j, int k) { return c_[static_cast<std::size_t>((i * n_ + j) * n_ + k)]; }
  double at(int i, int j, int k) const { return c_[static_cast<std::size_t>((i * n_ + j) * n_ + k)]; }

  std::vector<double> bracket_basis(int a, int b) const
  {
    std::vector<double> out(static_cast<std::size_t>(n_));
    for (int k = 0; k < n_; ++k) out[static_cast<std::size_t>(k)] = at(a, b, k);
    return out;
  }

  std::vector<double> bracket(const std::vector<double>& x, const std::vector<double>& y) const
  {
    std::vector<double> out(static_cast<std::size_t>(n_), 0.0);
    for (int i = 0; i < n_; ++i) {
      if (x[static_cast<std::size_t>(i)] == 0.0) continue;
      for (int j = 0; j < n_; ++j) {
        const double xy = x[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)];
        if (xy == 0.0) continue;
        for (int k = 0; k < n_; ++k) out[static_cast<std::size_t>(k)] += at(i, j, k) * xy;
      }
    }
    return out;
  }

 private:
  int n_;
  std::vector<double> c_;
};

void check_layer_dims(std::span<const int> layer_dims)
{
  if (layer_dims.empty()) throw std::invalid_argument("layer_dims must not be empty");
  int total = 0;
  for (std::size_t k = 0; k < layer_dims.size(); ++k) {
    if (layer_dims[k] <= 0) {
      std::ostringstream os;
      os << "layer " << (k + 1) << " has non-positive dimension " << layer_dims[k];
      throw std::invalid_argument(os.str());
    }
    total += layer_dims[k];
  }
  if (total > kMaxDim) {
    std::ostringstream os;
    os << "topological dimension " << total << " exceeds supported maximum " << kMaxDim;
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

std::string to_string(ViolationKind kind)
{
  switch (kind) {
    case ViolationKind::IndexRange: return "index-range";
    case ViolationKind::Duplicate: return "duplicate";
    case ViolationKind::Antisymmetry: return "antisymmetry";
    case ViolationKind::Grading: return "grading";
    case ViolationKind::Jacobi: return "jacobi";
    case ViolationKind::Generation: return "generation";
  }
  return "unknown";
}

bool ValidationReport::has(ViolationKind kind) const
{
  return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.kind == kind; });
}

std::string ValidationReport::summary() const
{
  if (violations.empty()) return "valid";
  std::ostringstream os;
  for (std::size_t n = 0; n < violations.size(); ++n) {
    if (n) os << "; ";
    os << violations[n].message;
  }
  return os.str();
}

AlgebraError::AlgebraError(ValidationReport report)
    : std::runtime_error("invalid algebra: " + report.summary()), report_(std::move(report))
{
}

std::vector<int> degrees_from_layers(std::span<const int> layer_dims)
{
  check_layer_dims(layer_dims);
  std::vector<int> degrees;
  for (std::size_t k = 0; k < layer_dims.size(); ++k)
    degrees.insert(degrees.end(), static_cast<std::size_t>(layer_dims[k]), static_cast<int>(k + 1));
  return degrees;
}

std::vector<int> layers_from_degrees(std::span<const int> degrees)
{
  if (degrees.empty()) throw std::invalid_argument("degree sequence must not be empty");
  if (degrees.front() != 1) throw std::invalid_argument("degree sequence must start at 1");
  std::vector<int> layers;
  int current = 0;
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    const int d = degrees[i];
    if (d == current) {
      ++layers.back();
    } else if (d == current + 1) {
      layers.push_back(1);
      current = d;
    } else {
      std::ostringstream os;
      os << "degree sequence must be nondecreasing without gaps; entry " << (i + 1) << " is " << d;
      throw std::invalid_argument(os.str());
    }
  }
  return layers;
}

ValidationReport validate(const AlgebraDefinition& def)
{
  const std::vector<int> degrees = degrees_from_layers(def.layer_dims);
  const int n = static_cast<int>(degrees.size());
  const int depth = static_cast<int>(def.layer_dims.size());
  ValidationReport report;
  auto add = [&](ViolationKind kind, std::array<int, 3> idx, double residual, const std::string& what) {
    std::ostringstream os;
    os << to_string(kind) << " violation at (" << idx[0] + 1 << "," << idx[1] + 1 << "," << idx[2] + 1
       << "): " << what << " (residual " << residual << ")";
    report.violations.push_back({kind, idx, residual, os.str()});
  };

  std::map<std::array<int, 3>, double> given;
  for (const auto& rec : def.brackets) {
    const std::array<int, 3> idx{rec.i, rec.j, rec.k};
    if (rec.i < 0 || rec.i >= n || rec.j < 0 || rec.j >= n || rec.k < 0 || rec.k >= n) {
      add(ViolationKind::IndexRange, idx, std::abs(rec.c), "index outside 1.." + std::to_string(n));
      continue;
    }
    if (!std::isfinite(rec.c)) {
      add(ViolationKind::IndexRange, idx, 0.0, "non-finite coefficient");
      continue;
    }
    auto [it, inserted] = given.try_emplace(idx, rec.c);
    if (!inserted && std::abs(it->second - rec.c) > kAlgebraTolerance)
      add(ViolationKind::Duplicate, idx, std::abs(it->second - rec.c), "conflicting duplicate records");
  }

  DenseConstants c(n);
  for (const auto& [idx, value] : given) {
    const auto [i, j, k] = idx;
    if (i == j) {
      if (std::abs(value) > kAlgebraTolerance) add(ViolationKind::Antisymmetry, idx, std::abs(value), "[X_i, X_i] must vanish");
      continue;
    }
    auto mirror = given.find({j, i, k});
    if (mirror != given.end()) {
      const double residual = std::abs(value + mirror->second);
      if (i < j && residual > kAlgebraTolerance)
        add(ViolationKind::Antisymmetry, idx, residual, "c_ijk != -c_jik");
    }
    if (i < j) {
      c.at(i, j, k) = value;
      c.at(j, i, k) = -value;
    } else if (mirror == given.end()) {
      c.at(i, j, k) = value;
      c.at(j, i, k) = -value;
    }
  }

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double v = c.at(i, j, k);
        if (std::abs(v) > kAlgebraTolerance && degrees[static_cast<std::size_t>(k)] != degrees[static_cast<std::size_t>(i)] + degrees[static_cast<std::size_t>(j)])
          add(ViolationKind::Grading, {i, j, k}, std::abs(v), "deg_k != deg_i + deg_j");
      }

  // Jacobi is alternating and trilinear, so basis triples a < b < c suffice.
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int d = b + 1; d < n; ++d) {
        std::vector<double> ea(static_cast<std::size_t>(n), 0.0), eb = ea, ed = ea;
        ea[static_cast<std::size_t>(a)] = eb[static_cast<std::size_t>(b)] = ed[static_cast<std::size_t>(d)] = 1.0;
        const auto t1 = c.bracket(ea, c.bracket_basis(b, d));
        const auto t2 = c.bracket(eb, c.bracket_basis(d, a));
        const auto t3 = c.bracket(ed, c.bracket_basis(a, b));
        double residual = 0.0;
        for (std::size_t k = 0; k < t1.size(); ++k) residual = std::max(residual, std::abs(t1[k] + t2[k] + t3[k]));
        if (residual > kAlgebraTolerance) add(ViolationKind::Jacobi, {a, b, d}, residual, "Jacobi identity fails");
      }

  // Layer-1 brackets must generate each next layer.
  std::vector<int> offsets(static_cast<std::size_t>(depth) + 1, 0);
  for (int k = 0; k < depth; ++k) offsets[static_cast<std::size_t>(k) + 1] = offsets[static_cast<std::size_t>(k)] + def.layer_dims[static_cast<std::size_t>(k)];
  for (int j = 1; j < depth; ++j) {
    const int n1 = def.layer_dims[0];
    const int nj = def.layer_dims[static_cast<std::size_t>(j) - 1];
    const int next = def.layer_dims[static_cast<std::size_t>(j)];
    Eigen::MatrixXd span(next, n1 * nj);
    for (int a = 0; a < n1; ++a)
      for (int b = 0; b < nj; ++b)
        for (int r = 0; r < next; ++r)
          span(r, a * nj + b) = c.at(a, offsets[static_cast<std::size_t>(j) - 1] + b, offsets[static_cast<std::size_t>(j)] + r);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(span);
    const auto& sv = svd.singularValues();
    const double scale = sv.size() ? std::max(1.0, sv(0)) : 1.0;
    int rank = 0;
    for (int s = 0; s < sv.size(); ++s) rank += sv(s) > 1e-9 * scale;
    if (rank < next) {
      std::ostringstream os;
      os << "[layer 1, layer " << j << "] spans " << rank << " of " << next << " directions in layer " << j + 1;
      report.violations.push_back({ViolationKind::Generation, {0, j - 1, j}, double(next - rank),
                                   "generation violation: " + os.str()});
    }
  }
  return report;
}

GradedNilpotentAlgebra GradedNilpotentAlgebra::build(const AlgebraDefinition& def)
{
  ValidationReport report = validate(def);
  if (!report.ok()) throw AlgebraError(std::move(report));

  GradedNilpotentAlgebra alg;
  alg.def_ = def;
  alg.layer_dims_ = def.layer_dims;
  alg.degrees_ = degrees_from_layers(def.layer_dims);
  std::map<std::array<int, 3>, double> canonical;
  for (const auto& rec : def.brackets) {
    if (rec.i == rec.j) continue;
    if (rec.i < rec.j)
      canonical[{rec.i, rec.j, rec.k}] = rec.c;
    else
      canonical.try_emplace({rec.j, rec.i, rec.k}, -rec.c);
  }
  for (const auto& [idx, v] : canonical)
    if (v != 0.0) alg.entries_.push_back({idx[0], idx[1], idx[2], v});
  for (std::size_t k = 0; k < alg.layer_dims_.size(); ++k) alg.hausdorff_dim_ += static_cast<int>(k + 1) * alg.layer_dims_[k];
  return alg;
}

GradedNilpotentAlgebra GradedNilpotentAlgebra::abelian(int dim, std::string name)
{
  AlgebraDefinition def;
  def.name = name.empty() ? "R" + std::to_string(dim) : std::move(name);
  def.layer_dims = {dim};
  return build(def);
}

int GradedNilpotentAlgebra::layer_offset(int k) const
{
  if (k < 1) throw std::out_of_range("layers are numbered from 1");
  int off = 0;
  for (int l = 1; l < k && l <= depth(); ++l) off += layer_dims_[static_cast<std::size_t>(l) - 1];
  return off;
}

int GradedNilpotentAlgebra::layer_dim(int k) const
{
  if (k < 1 || k > depth()) return 0;
  return layer_dims_[static_cast<std::size_t>(k) - 1];
}

double GradedNilpotentAlgebra::constant(int i, int j, int k) const
{
  const double sign = i < j ? 1.0 : -1.0;
  const int a = std::min(i, j), b = std::max(i, j);
  for (const auto& e : entries_)
    if (e.i == a && e.j == b && e.k == k) return sign * e.c;
  return 0.0;
}

Vec GradedNilpotentAlgebra::bracket(const Vec& x, const Vec& y) const
{
  if (x.size() != dimension() || y.size() != dimension()) throw std::invalid_argument("bracket: dimension mismatch");
  Vec out = Vec::Zero(dimension());
  for (const auto& e : entries_) out(e.k) += e.c * (x(e.i) * y(e.j) - x(e.j) * y(e.i));
  return out;
}

int GradedNilpotentAlgebra::homogeneous_norm(std::span<const int> mu) const
{
  if (static_cast<int>(mu.size()) != dimension()) throw std::invalid_argument("multi-index length mismatch");
  int sum = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) sum += mu[i] * degrees_[i];
  return sum;
}

GradedNilpotentAlgebra nilpotentize(const RawConstants& raw, std::span<const int> degrees, std::string name)
{
  AlgebraDefinition def;
  def.name = std::move(name);
  def.layer_dims = layers_from_degrees(degrees);
  const int n = static_cast<int>(degrees.size());
  for (const auto& [idx, v] : raw) {
    const auto [i, j, k] = idx;
    if (i < 0 || j < 0 || k < 0 || i >= n || j >= n || k >= n) throw std::invalid_argument("raw constant index out of range");
    if (i == j && std::abs(v) > kAlgebraTolerance) throw std::invalid_argument("raw constants are not antisymmetric");
    auto mirror = raw.find({j, i, k});
    if (mirror != raw.end() && std::abs(v + mirror->second) > kAlgebraTolerance)
      throw std::invalid_argument("raw constants are not antisymmetric");
    const int di = degrees[static_cast<std::size_t>(i)], dj = degrees[static_cast<std::size_t>(j)], dk = degrees[static_cast<std::size_t>(k)];
    if (std::abs(v) > kAlgebraTolerance && dk > di + dj)
      throw std::invalid_argument("raw constant c_" + std::to_string(i + 1) + std::to_string(j + 1) + std::to_string(k + 1) +
                                  " violates deg_k <= deg_i + deg_j");
    if (i < j && dk == di + dj) def.brackets.push_back({i, j, k, v});
    if (i > j && dk == di + dj && mirror == raw.end()) def.brackets.push_back({j, i, k, -v});
  }
  return GradedNilpotentAlgebra::build(def);
}

}  // namespace carnot
