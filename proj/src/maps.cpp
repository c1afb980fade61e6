#include "carnot/maps.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace carnot {

ParseError::ParseError(const std::string& what, std::size_t position)
    : std::invalid_argument(what + " at position " + std::to_string(position)), position_(position)
{
}

namespace {

class Parser
{
 public:
  Parser(const std::string& text, std::size_t n) : s_(text), n_(n) {}

  Polynomial<double> run()
  {
    skip();
    if (pos_ >= s_.size()) throw ParseError("empty polynomial", pos_);
    auto p = expr();
    skip();
    if (pos_ != s_.size()) throw ParseError(std::string("unexpected '") + s_[pos_] + "'", pos_);
    return p;
  }

 private:
  void skip()
  {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c)
  {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Polynomial<double> expr()
  {
    auto acc = term();
    for (;;) {
      if (eat('+'))
        acc += term();
      else if (eat('-'))
        acc -= term();
      else
        return acc;
    }
  }

  Polynomial<double> term()
  {
    auto acc = unary();
    for (;;) {
      if (eat('*')) {
        acc = acc * unary();
      } else if (eat('/')) {
        const std::size_t at = pos_;
        auto d = unary();
        if (!d.is_constant()) throw ParseError("division by a non-constant expression", at);
        const double c = d.constant_term();
        if (c == 0.0) throw ParseError("division by zero", at);
        acc *= 1.0 / c;
      } else {
        return acc;
      }
    }
  }

  Polynomial<double> unary()
  {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return power();
  }

  Polynomial<double> power()
  {
    auto base = primary();
    if (eat('^')) {
      skip();
      const std::size_t at = pos_;
      if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_])))
        throw ParseError("exponent must be a nonnegative integer", at);
      unsigned e = 0;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        e = e * 10 + static_cast<unsigned>(s_[pos_] - '0');
        if (e > 64) throw ParseError("exponent too large", at);
        ++pos_;
      }
      if (pos_ < s_.size() && (s_[pos_] == '.' || s_[pos_] == 'e' || s_[pos_] == 'E'))
        throw ParseError("exponent must be a nonnegative integer", at);
      return base.pow(e);
    }
    return base;
  }

  Polynomial<double> primary()
  {
    skip();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
    const std::size_t at = pos_;
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      auto inner = expr();
      if (!eat(')')) throw ParseError("missing ')'", pos_);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin || !std::isfinite(v)) throw ParseError("malformed number", at);
      pos_ += static_cast<std::size_t>(end - begin);
      return Polynomial<double>::constant(n_, v);
    }
    if (c == 'u') {
      ++pos_;
      std::size_t idx = 0, digits = 0;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        idx = idx * 10 + static_cast<std::size_t>(s_[pos_] - '0');
        ++pos_;
        ++digits;
      }
      if (digits == 0) throw ParseError("variable needs an index (u1..u" + std::to_string(n_) + ")", at);
      if (idx < 1 || idx > n_) throw ParseError("variable u" + std::to_string(idx) + " outside u1..u" + std::to_string(n_), at);
      if (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        throw ParseError("unknown identifier", at);
      return Polynomial<double>::variable(n_, idx - 1);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t end = pos_;
      while (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '_')) ++end;
      throw ParseError("unknown identifier '" + s_.substr(pos_, end - pos_) + "' (not a polynomial)", at);
    }
    throw ParseError(std::string("unexpected '") + c + "'", at);
  }

  const std::string& s_;
  std::size_t n_;
  std::size_t pos_ = 0;
};

std::vector<double> singular_values(const Mat& a)
{
  if (a.rows() == 0 || a.cols() == 0) return {};
  if (a.rows() == 1) return {a.norm()};
  if (a.cols() == 1) return {a.norm()};
  Eigen::JacobiSVD<Mat> svd(a);
  const auto& sv = svd.singularValues();
  return {sv.data(), sv.data() + sv.size()};
}

}  // namespace

Polynomial<double> parse_polynomial(const std::string& text, std::size_t num_vars)
{
  return Parser(text, num_vars).run();
}

PolynomialContactMap::PolynomialContactMap(std::string name, GroupPtr source, GroupPtr target,
                                           std::vector<Polynomial<double>> components)
    : name_(std::move(name)), source_(std::move(source)), target_(std::move(target)), components_(std::move(components))
{
  if (!source_ || !target_) throw std::invalid_argument("map needs source and target groups");
  const auto n = static_cast<std::size_t>(source_->dimension());
  if (components_.size() != static_cast<std::size_t>(target_->dimension()))
    throw std::invalid_argument("map '" + name_ + "' has " + std::to_string(components_.size()) + " components, target dimension is " +
                                std::to_string(target_->dimension()));
  if (source_->dimension() < target_->dimension())
    throw std::invalid_argument("map '" + name_ + "': source dimension must be at least the target dimension");
  std::vector<Polynomial<double>> jac;
  for (const auto& c : components_) {
    if (c.num_vars() != n) throw std::invalid_argument("component arity differs from source dimension");
    for (std::size_t i = 0; i < n; ++i) jac.push_back(c.derivative(i));
  }
  if (strings_.empty())
    for (const auto& c : components_) strings_.push_back(c.to_string());
  value_eval_ = CompiledPolynomials(components_);
  jacobian_eval_ = CompiledPolynomials(jac);
}

PolynomialContactMap PolynomialContactMap::parse(std::string name, GroupPtr source, GroupPtr target,
                                                 const std::vector<std::string>& components)
{
  if (!source) throw std::invalid_argument("map needs a source group");
  std::vector<Polynomial<double>> polys;
  for (std::size_t c = 0; c < components.size(); ++c) {
    try {
      polys.push_back(parse_polynomial(components[c], static_cast<std::size_t>(source->dimension())));
    } catch (const ParseError& e) {
      throw ParseError("map '" + name + "' component " + std::to_string(c + 1) + ": " + e.what(), e.position());
    }
  }
  PolynomialContactMap out(std::move(name), std::move(source), std::move(target), std::move(polys));
  out.strings_ = components;
  return out;
}

Vec PolynomialContactMap::evaluate(const Vec& x) const
{
  Vec out(target_dim());
  value_eval_.evaluate(x.data(), out.data());
  return out;
}

Mat PolynomialContactMap::jacobian(const Vec& x) const
{
  const int m = target_dim(), n = source_dim();
  double values[kMaxDim * kMaxDim];
  jacobian_eval_.evaluate(x.data(), values);
  Mat j(m, n);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < n; ++c) j(r, c) = values[r * n + c];
  return j;
}

Mat DifferentialPair::hc() const
{
  Eigen::Index rows = 0, cols = 0;
  for (const auto& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  Mat out = Mat::Zero(rows, cols);
  Eigen::Index r = 0, c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

Mat riemannian_differential(const PolynomialContactMap& map, const Vec& x)
{
  if (x.size() != map.source_dim()) throw std::invalid_argument("point dimension differs from map source");
  const Mat target_frame = map.target()->frame(map.evaluate(x));
  const Mat pushed = map.jacobian(x) * map.source()->frame(x);
  // The target frame is unit lower triangular.
  return target_frame.triangularView<Eigen::UnitLower>().solve(pushed);
}

double contact_residual(const PolynomialContactMap& map, const Mat& full)
{
  const auto& src = map.source()->algebra();
  const auto& tgt = map.target()->algebra();
  double worst = 0.0;
  for (int r = 0; r < full.rows(); ++r)
    for (int c = 0; c < full.cols(); ++c)
      if (tgt.degree(r) > src.degree(c)) worst = std::max(worst, std::abs(full(r, c)));
  return worst;
}

DifferentialPair differential_pair(const PolynomialContactMap& map, const Vec& x)
{
  DifferentialPair pair;
  pair.point = x;
  pair.full = riemannian_differential(map, x);
  const double residual = contact_residual(map, pair.full);
  const double scale = std::max(1.0, pair.full.cwiseAbs().maxCoeff());
  if (residual > 1e-8 * scale) {
    std::ostringstream os;
    os << "map '" << map.name() << "' is not contact: differential has a below-diagonal entry of size " << residual;
    throw ContactError(os.str(), residual);
  }
  const auto& src = map.source()->algebra();
  const auto& tgt = map.target()->algebra();
  const int depth = std::max(src.depth(), tgt.depth());
  for (int k = 1; k <= depth; ++k) {
    const int rows = tgt.layer_dim(k), cols = src.layer_dim(k);
    const int r0 = k <= tgt.depth() ? tgt.layer_offset(k) : tgt.dimension();
    const int c0 = k <= src.depth() ? src.layer_offset(k) : src.dimension();
    pair.blocks.push_back(pair.full.block(r0, c0, rows, cols));
  }
  return pair;
}

ContactCheck contactness_check(const PolynomialContactMap& map, const std::vector<Vec>& points, double tol)
{
  ContactCheck out;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const double r = contact_residual(map, riemannian_differential(map, points[p]));
    if (r > out.max_residual) {
      out.max_residual = r;
      out.worst_point = p;
    }
  }
  out.ok = out.max_residual <= tol;
  return out;
}

double gram_row(const Mat& a)
{
  if (a.rows() > a.cols()) throw std::invalid_argument("gram_row needs rows <= cols");
  double g = 1.0;
  for (double s : singular_values(a)) g *= s;
  return g;
}

double gram_col(const Mat& b)
{
  if (b.cols() > b.rows()) throw std::invalid_argument("gram_col needs cols <= rows");
  double g = 1.0;
  for (double s : singular_values(b)) g *= s;
  return g;
}

}  // namespace carnot
