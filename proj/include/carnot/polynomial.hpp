#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace carnot {

using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& q) { return q.convert_to<double>(); }
inline double to_double(double v) { return v; }

/// Exponent vector of a monomial; entry i is the power of variable i.
using Monomial = std::vector<std::uint8_t>;

/**
 * @brief Sparse multivariate polynomial with exact or floating coefficients.
 *
 * Terms are kept in a std::map keyed by exponent vectors, so iteration order is
 * deterministic and zero coefficients are never stored.
 */
template <class Coeff>
class Polynomial
{
 public:
  Polynomial() = default;
  explicit Polynomial(std::size_t num_vars) : num_vars_(num_vars) {}

  static Polynomial constant(std::size_t num_vars, const Coeff& c)
  {
    Polynomial p(num_vars);
    p.add_term(Monomial(num_vars, 0), c);
    return p;
  }

  static Polynomial variable(std::size_t num_vars, std::size_t var, const Coeff& c = Coeff(1))
  {
    if (var >= num_vars) throw std::out_of_range("polynomial variable index out of range");
    Polynomial p(num_vars);
    Monomial m(num_vars, 0);
    m[var] = 1;
    p.add_term(m, c);
    return p;
  }

  std::size_t num_vars() const { return num_vars_; }
  const std::map<Monomial, Coeff>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  /// Coefficient of the constant monomial (zero if absent).
  Coeff constant_term() const
  {
    auto it = terms_.find(Monomial(num_vars_, 0));
    return it == terms_.end() ? Coeff(0) : it->second;
  }

  bool is_constant() const
  {
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first == Monomial(num_vars_, 0));
  }

  int total_degree() const
  {
    int best = 0;
    for (const auto& [m, c] : terms_) {
      int d = 0;
      for (auto e : m) d += e;
      best = std::max(best, d);
    }
    return best;
  }

  void add_term(const Monomial& m, const Coeff& c)
  {
    if (m.size() != num_vars_) throw std::invalid_argument("monomial arity mismatch");
    if (c == Coeff(0)) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == Coeff(0)) terms_.erase(it);
    }
  }

  Polynomial& operator+=(const Polynomial& o)
  {
    check_arity(o);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }

  Polynomial& operator-=(const Polynomial& o)
  {
    check_arity(o);
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }

  Polynomial& operator*=(const Coeff& s)
  {
    if (s == Coeff(0)) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, const Coeff& s) { return a *= s; }
  friend Polynomial operator*(const Coeff& s, Polynomial a) { return a *= s; }
  friend Polynomial operator-(Polynomial a) { return a *= Coeff(-1); }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b)
  {
    a.check_arity(b);
    Polynomial out(a.num_vars_);
    Monomial m(a.num_vars_);
    for (const auto& [ma, ca] : a.terms_) {
      for (const auto& [mb, cb] : b.terms_) {
        for (std::size_t i = 0; i < m.size(); ++i) {
          const int e = int(ma[i]) + int(mb[i]);
          if (e > 255) throw std::overflow_error("polynomial exponent overflow");
          m[i] = static_cast<std::uint8_t>(e);
        }
        out.add_term(m, ca * cb);
      }
    }
    return out;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b)
  {
    return a.num_vars_ == b.num_vars_ && a.terms_ == b.terms_;
  }

  Polynomial pow(unsigned e) const
  {
    Polynomial out = constant(num_vars_, Coeff(1));
    for (unsigned i = 0; i < e; ++i) out = out * (*this);
    return out;
  }

  Polynomial derivative(std::size_t var) const
  {
    if (var >= num_vars_) throw std::out_of_range("derivative variable out of range");
    Polynomial out(num_vars_);
    for (const auto& [m, c] : terms_) {
      if (m[var] == 0) continue;
      Monomial d = m;
      d[var] -= 1;
      out.add_term(d, c * Coeff(int(m[var])));
    }
    return out;
  }

  /// Sets variables [first, first + count) to zero and drops them from the arity.
  Polynomial zero_and_drop(std::size_t first, std::size_t count) const
  {
    Polynomial out(num_vars_ - count);
    for (const auto& [m, c] : terms_) {
      bool vanishes = false;
      for (std::size_t i = first; i < first + count; ++i) vanishes |= m[i] != 0;
      if (vanishes) continue;
      Monomial r;
      r.reserve(num_vars_ - count);
      for (std::size_t i = 0; i < num_vars_; ++i)
        if (i < first || i >= first + count) r.push_back(m[i]);
      out.add_term(r, c);
    }
    return out;
  }

  /// Re-embeds the polynomial into a larger variable set; variable i maps to offset + i.
  Polynomial embed(std::size_t new_num_vars, std::size_t offset) const
  {
    if (offset + num_vars_ > new_num_vars) throw std::invalid_argument("embedding does not fit");
    Polynomial out(new_num_vars);
    for (const auto& [m, c] : terms_) {
      Monomial r(new_num_vars, 0);
      for (std::size_t i = 0; i < num_vars_; ++i) r[offset + i] = m[i];
      out.add_term(r, c);
    }
    return out;
  }

  template <class Other, class Fn>
  Polynomial<Other> convert(Fn&& fn) const
  {
    Polynomial<Other> out(num_vars_);
    for (const auto& [m, c] : terms_) out.add_term(m, fn(c));
    return out;
  }

  double evaluate(std::span<const double> x) const
  {
    if (x.size() != num_vars_) throw std::invalid_argument("evaluation point arity mismatch");
    double sum = 0.0;
    for (const auto& [m, c] : terms_) {
      double t = to_double(c);
      for (std::size_t i = 0; i < num_vars_; ++i)
        for (int e = 0; e < m[i]; ++e) t *= x[i];
      sum += t;
    }
    return sum;
  }

  /// Human-readable form using `prefix` + 1-based index as variable names.
  std::string to_string(const std::string& prefix = "u") const
  {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : terms_) {
      if (!first) os << " + ";
      first = false;
      os << c;
      for (std::size_t i = 0; i < num_vars_; ++i) {
        if (m[i] == 0) continue;
        os << "*" << prefix << (i + 1);
        if (m[i] > 1) os << "^" << int(m[i]);
      }
    }
    return os.str();
  }

 private:
  void check_arity(const Polynomial& o) const
  {
    if (o.num_vars_ != num_vars_) throw std::invalid_argument("polynomial arity mismatch");
  }

  std::size_t num_vars_ = 0;
  std::map<Monomial, Coeff> terms_;
};

/**
 * @brief Flattened double-precision evaluator for a list of polynomials.
 *
 * Built once from symbolic polynomials; evaluation does no allocation.
 */
class CompiledPolynomials
{
 public:
  CompiledPolynomials() = default;

  template <class Coeff>
  explicit CompiledPolynomials(const std::vector<Polynomial<Coeff>>& polys)
  {
    num_vars_ = polys.empty() ? 0 : polys.front().num_vars();
    offsets_.push_back(0);
    for (const auto& p : polys) {
      if (p.num_vars() != num_vars_) throw std::invalid_argument("mixed arity in compiled polynomials");
      for (const auto& [m, c] : p.terms()) {
        Term t{to_double(c), static_cast<std::uint32_t>(factors_.size()), 0};
        for (std::size_t i = 0; i < m.size(); ++i) {
          if (m[i] == 0) continue;
          factors_.push_back({static_cast<std::uint16_t>(i), m[i]});
          ++t.num_factors;
        }
        terms_.push_back(t);
      }
      offsets_.push_back(static_cast<std::uint32_t>(terms_.size()));
    }
  }

  std::size_t size() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t num_vars() const { return num_vars_; }

  void evaluate(const double* x, double* out) const
  {
    for (std::size_t p = 0; p + 1 < offsets_.size(); ++p) {
      double sum = 0.0;
      for (std::uint32_t ti = offsets_[p]; ti < offsets_[p + 1]; ++ti) {
        const Term& t = terms_[ti];
        double v = t.coeff;
        for (std::uint32_t f = t.first_factor; f < t.first_factor + t.num_factors; ++f) {
          const double b = x[factors_[f].var];
          for (int e = 0; e < factors_[f].power; ++e) v *= b;
        }
        sum += v;
      }
      out[p] = sum;
    }
  }

 private:
  struct Factor
  {
    std::uint16_t var;
    std::uint8_t power;
  };
  struct Term
  {
    double coeff;
    std::uint32_t first_factor;
    std::uint32_t num_factors;
  };

  std::size_t num_vars_ = 0;
  std::vector<Factor> factors_;
  std::vector<Term> terms_;
  std::vector<std::uint32_t> offsets_;
};

}  // namespace carnot
