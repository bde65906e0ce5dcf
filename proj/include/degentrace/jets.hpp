#pragma once

// Truncated multivariate Taylor polynomials ("jets") with double
// coefficients, stored densely by total degree.
//
// Monomials of a (dim, order) jet are laid out degree by degree; inside a
// degree they follow descending lexicographic order of the exponent tuple,
// so for dim 2 the layout is 1, x, y, x^2, xy, y^2, x^3, ... This order is
// also the term order of the JSON serialization.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "degentrace/errors.hpp"

namespace degentrace {

inline constexpr int kMaxJetDim = 4;

using MultiIndex = std::array<int, kMaxJetDim>;

inline int total_degree(const MultiIndex& a, int dim) {
  int s = 0;
  for (int i = 0; i < dim; ++i) s += a[i];
  return s;
}

class JetLayout {
 public:
  static std::shared_ptr<const JetLayout> get(int dim, int order) {
    if (dim < 1 || dim > kMaxJetDim)
      throw StructuralError("jet dimension must be in [1, 4], got " + std::to_string(dim));
    if (order < 0) throw StructuralError("jet order must be non-negative");
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::shared_ptr<const JetLayout>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{dim, order}];
    if (!slot) slot = std::shared_ptr<const JetLayout>(new JetLayout(dim, order));
    return slot;
  }

  int dim() const { return dim_; }
  int order() const { return order_; }
  std::size_t size() const { return monomials_.size(); }
  const MultiIndex& monomial(std::size_t pos) const { return monomials_[pos]; }
  int degree_of(std::size_t pos) const { return degrees_[pos]; }
  std::size_t degree_begin(int j) const { return offsets_[j]; }
  std::size_t degree_end(int j) const { return offsets_[j + 1]; }

  // Position of alpha, or npos when |alpha| > order.
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t position(const MultiIndex& alpha) const {
    std::size_t code = 0;
    std::size_t stride = 1;
    int deg = 0;
    for (int i = 0; i < dim_; ++i) {
      if (alpha[i] < 0) return npos;
      deg += alpha[i];
      if (deg > order_) return npos;
      code += static_cast<std::size_t>(alpha[i]) * stride;
      stride *= static_cast<std::size_t>(order_ + 1);
    }
    return table_[code];
  }

 private:
  JetLayout(int dim, int order) : dim_(dim), order_(order) {
    offsets_.push_back(0);
    for (int deg = 0; deg <= order; ++deg) {
      MultiIndex a{};
      emit(a, 0, deg);
      offsets_.push_back(monomials_.size());
    }
    std::size_t cells = 1;
    for (int i = 0; i < dim; ++i) cells *= static_cast<std::size_t>(order + 1);
    table_.assign(cells, npos);
    for (std::size_t p = 0; p < monomials_.size(); ++p) {
      std::size_t code = 0, stride = 1;
      for (int i = 0; i < dim; ++i) {
        code += static_cast<std::size_t>(monomials_[p][i]) * stride;
        stride *= static_cast<std::size_t>(order + 1);
      }
      table_[code] = p;
      degrees_.push_back(total_degree(monomials_[p], dim));
    }
  }

  // Descending lex: the first variable takes the largest exponent first.
  void emit(MultiIndex& a, int var, int remaining) {
    if (var == dim_ - 1) {
      a[var] = remaining;
      monomials_.push_back(a);
      a[var] = 0;
      return;
    }
    for (int e = remaining; e >= 0; --e) {
      a[var] = e;
      emit(a, var + 1, remaining - e);
    }
    a[var] = 0;
  }

  int dim_;
  int order_;
  std::vector<MultiIndex> monomials_;
  std::vector<int> degrees_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> table_;
};

class Jet {
 public:
  Jet() : Jet(1, 0) {}
  Jet(int dim, int order)
      : layout_(JetLayout::get(dim, order)), c_(layout_->size(), 0.0) {}

  static Jet constant(int dim, int order, double value) {
    Jet j(dim, order);
    j.c_[0] = value;
    return j;
  }
  // Coordinate function z_i (0-based).
  static Jet variable(int dim, int order, int i) {
    Jet j(dim, order);
    if (i < 0 || i >= dim) throw StructuralError("variable index out of range");
    if (order >= 1) {
      MultiIndex a{};
      a[i] = 1;
      j.set(a, 1.0);
    }
    return j;
  }
  static Jet monomial(int dim, int order, const MultiIndex& alpha, double value) {
    Jet j(dim, order);
    j.set(alpha, value);
    return j;
  }

  int dim() const { return layout_->dim(); }
  int order() const { return layout_->order(); }
  const JetLayout& layout() const { return *layout_; }
  std::size_t size() const { return c_.size(); }

  // Coefficient of z^alpha; exactly 0 for absent or out-of-range indices.
  double coeff(const MultiIndex& alpha) const {
    auto p = layout_->position(alpha);
    return p == JetLayout::npos ? 0.0 : c_[p];
  }
  double operator[](const MultiIndex& alpha) const { return coeff(alpha); }

  // Dropped silently when |alpha| exceeds the order (truncation).
  void set(const MultiIndex& alpha, double value) {
    for (int i = dim(); i < kMaxJetDim; ++i)
      if (alpha[i] != 0) throw StructuralError("multi-index longer than jet dimension");
    auto p = layout_->position(alpha);
    if (p != JetLayout::npos) c_[p] = value;
  }
  void add_to(const MultiIndex& alpha, double value) {
    auto p = layout_->position(alpha);
    if (p != JetLayout::npos) c_[p] += value;
  }

  std::span<const double> coefficients() const { return c_; }
  std::span<double> coefficients() { return c_; }
  std::span<const double> degree_coefficients(int j) const {
    if (j < 0 || j > order()) return {};
    return std::span<const double>(c_).subspan(layout_->degree_begin(j),
                                               layout_->degree_end(j) - layout_->degree_begin(j));
  }

  double constant_term() const { return c_[0]; }

  bool is_zero() const {
    return std::all_of(c_.begin(), c_.end(), [](double v) { return v == 0.0; });
  }
  double max_abs() const {
    double m = 0.0;
    for (double v : c_) m = std::max(m, std::abs(v));
    return m;
  }
  // Lowest degree carrying a non-zero coefficient, or -1 for the zero jet.
  int lowest_degree() const {
    for (std::size_t p = 0; p < c_.size(); ++p)
      if (c_[p] != 0.0) return layout_->degree_of(p);
    return -1;
  }
  int highest_degree() const {
    for (std::size_t p = c_.size(); p-- > 0;)
      if (c_[p] != 0.0) return layout_->degree_of(p);
    return -1;
  }

  double eval(std::span<const double> z) const {
    if (static_cast<int>(z.size()) != dim()) throw StructuralError("evaluation point has wrong dimension");
    constexpr int kStack = 32;
    const int ord = order();
    std::array<std::array<double, kStack>, kMaxJetDim> stack_pw;
    std::vector<double> heap_pw;
    double* pw[kMaxJetDim];
    if (ord < kStack) {
      for (int i = 0; i < dim(); ++i) pw[i] = stack_pw[i].data();
    } else {
      heap_pw.resize(static_cast<std::size_t>(dim()) * (ord + 1));
      for (int i = 0; i < dim(); ++i) pw[i] = heap_pw.data() + i * (ord + 1);
    }
    for (int i = 0; i < dim(); ++i) {
      pw[i][0] = 1.0;
      for (int e = 1; e <= ord; ++e) pw[i][e] = pw[i][e - 1] * z[i];
    }
    double s = 0.0;
    for (std::size_t p = 0; p < c_.size(); ++p) {
      if (c_[p] == 0.0) continue;
      double m = c_[p];
      const auto& a = layout_->monomial(p);
      for (int i = 0; i < dim(); ++i) m *= pw[i][a[i]];
      s += m;
    }
    return s;
  }

  // Same coefficients, different truncation order.
  Jet with_order(int order) const {
    Jet r(dim(), order);
    for (std::size_t p = 0; p < c_.size(); ++p)
      if (c_[p] != 0.0) r.add_to(layout_->monomial(p), c_[p]);
    return r;
  }

  Jet& operator+=(const Jet& b) {
    require_same_shape(b);
    for (std::size_t p = 0; p < c_.size(); ++p) c_[p] += b.c_[p];
    return *this;
  }
  Jet& operator-=(const Jet& b) {
    require_same_shape(b);
    for (std::size_t p = 0; p < c_.size(); ++p) c_[p] -= b.c_[p];
    return *this;
  }
  Jet& operator*=(double s) {
    for (double& v : c_) v *= s;
    return *this;
  }
  Jet operator-() const {
    Jet r = *this;
    r *= -1.0;
    return r;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator*(const Jet& a, const Jet& b);

  friend bool operator==(const Jet& a, const Jet& b) {
    return a.dim() == b.dim() && a.order() == b.order() && a.c_ == b.c_;
  }

  void require_same_shape(const Jet& b) const {
    if (dim() != b.dim() || order() != b.order())
      throw StructuralError("jet shape mismatch: (" + std::to_string(dim()) + "," +
                            std::to_string(order()) + ") vs (" + std::to_string(b.dim()) + "," +
                            std::to_string(b.order()) + ")");
  }

 private:
  std::shared_ptr<const JetLayout> layout_;
  std::vector<double> c_;
};

inline Jet operator*(const Jet& a, const Jet& b) {
  a.require_same_shape(b);
  const auto& L = a.layout();
  const int dim = a.dim();
  const int order = a.order();
  Jet r(dim, order);
  auto rc = r.coefficients();
  for (std::size_t i = 0; i < a.c_.size(); ++i) {
    const double ai = a.c_[i];
    if (ai == 0.0) continue;
    const int di = L.degree_of(i);
    const auto& ma = L.monomial(i);
    const std::size_t jend = L.degree_end(order - di);
    for (std::size_t j = 0; j < jend; ++j) {
      const double bj = b.c_[j];
      if (bj == 0.0) continue;
      const auto& mb = L.monomial(j);
      MultiIndex s{};
      for (int v = 0; v < dim; ++v) s[v] = ma[v] + mb[v];
      rc[L.position(s)] += ai * bj;
    }
  }
  return r;
}

inline Jet jet_add(const Jet& a, const Jet& b) { return a + b; }
inline Jet jet_mul(const Jet& a, const Jet& b) { return a * b; }

// Formal partial derivative in variable i (0-based); the order is kept.
inline Jet jet_diff(const Jet& a, int i) {
  if (i < 0 || i >= a.dim())
    throw StructuralError("jet_diff: variable index " + std::to_string(i) + " out of range");
  Jet r(a.dim(), a.order());
  const auto& L = a.layout();
  auto ac = a.coefficients();
  for (std::size_t p = 0; p < ac.size(); ++p) {
    if (ac[p] == 0.0) continue;
    MultiIndex m = L.monomial(p);
    if (m[i] == 0) continue;
    const double f = ac[p] * m[i];
    --m[i];
    r.add_to(m, f);
  }
  return r;
}

inline Jet homogeneous_part(const Jet& a, int j) {
  Jet r(a.dim(), a.order());
  if (j < 0 || j > a.order()) return r;
  const auto& L = a.layout();
  auto ac = a.coefficients();
  auto rc = r.coefficients();
  for (std::size_t p = L.degree_begin(j); p < L.degree_end(j); ++p) rc[p] = ac[p];
  return r;
}

// Taylor expansion of f o g at the base point, truncated at the common order
// of the g_i. Every g_i must vanish at the base point.
inline Jet jet_compose(const Jet& f, std::span<const Jet> g) {
  if (static_cast<int>(g.size()) != f.dim())
    throw StructuralError("jet_compose: need " + std::to_string(f.dim()) + " inner jets, got " +
                          std::to_string(g.size()));
  const int dim = g.front().dim();
  const int order = g.front().order();
  for (const auto& gi : g) {
    if (gi.dim() != dim || gi.order() != order)
      throw StructuralError("jet_compose: inner jets must share dim and order");
    if (gi.constant_term() != 0.0)
      throw DomainError("jet_compose: inner jet has a non-zero constant term (base-point mismatch)");
  }
  const auto& Lf = f.layout();
  auto fc = f.coefficients();
  const int top = std::min(f.order(), order);
  // Monomial values g^alpha, built from g^(alpha - e_i) in layout order.
  std::vector<Jet> powers;
  powers.reserve(Lf.degree_end(top));
  Jet result(dim, order);
  for (std::size_t p = 0; p < Lf.degree_end(top); ++p) {
    const auto& alpha = Lf.monomial(p);
    if (p == 0) {
      powers.push_back(Jet::constant(dim, order, 1.0));
    } else {
      int i = 0;
      while (alpha[i] == 0) ++i;
      MultiIndex prev = alpha;
      --prev[i];
      powers.push_back(powers[Lf.position(prev)] * g[i]);
    }
    if (fc[p] != 0.0) result += fc[p] * powers.back();
  }
  return result;
}

inline Jet jet_compose(const Jet& f, const std::vector<Jet>& g) {
  return jet_compose(f, std::span<const Jet>(g));
}

// Ordered list of jets sharing dim and order, e.g. a vector field or a map.
class VectorJet {
 public:
  VectorJet() = default;
  explicit VectorJet(std::vector<Jet> components) : c_(std::move(components)) {
    for (const auto& j : c_)
      if (j.dim() != c_.front().dim() || j.order() != c_.front().order())
        throw StructuralError("VectorJet components must share dim and order");
  }
  VectorJet(std::size_t n, int dim, int order) : c_(n, Jet(dim, order)) {}

  static VectorJet identity(int dim, int order) {
    std::vector<Jet> c;
    for (int i = 0; i < dim; ++i) c.push_back(Jet::variable(dim, order, i));
    return VectorJet(std::move(c));
  }

  std::size_t size() const { return c_.size(); }
  int dim() const { return c_.front().dim(); }
  int order() const { return c_.front().order(); }
  const Jet& operator[](std::size_t i) const { return c_[i]; }
  Jet& operator[](std::size_t i) { return c_[i]; }
  const std::vector<Jet>& components() const { return c_; }
  auto begin() const { return c_.begin(); }
  auto end() const { return c_.end(); }

  std::vector<double> eval(std::span<const double> z) const {
    std::vector<double> r;
    for (const auto& j : c_) r.push_back(j.eval(z));
    return r;
  }
  VectorJet homogeneous(int deg) const {
    std::vector<Jet> c;
    for (const auto& j : c_) c.push_back(homogeneous_part(j, deg));
    return VectorJet(std::move(c));
  }
  double max_abs() const {
    double m = 0.0;
    for (const auto& j : c_) m = std::max(m, j.max_abs());
    return m;
  }

  VectorJet& operator+=(const VectorJet& b) {
    if (b.size() != size()) throw StructuralError("VectorJet length mismatch");
    for (std::size_t i = 0; i < size(); ++i) c_[i] += b.c_[i];
    return *this;
  }
  VectorJet& operator-=(const VectorJet& b) {
    if (b.size() != size()) throw StructuralError("VectorJet length mismatch");
    for (std::size_t i = 0; i < size(); ++i) c_[i] -= b.c_[i];
    return *this;
  }
  friend VectorJet operator+(VectorJet a, const VectorJet& b) { return a += b; }
  friend VectorJet operator-(VectorJet a, const VectorJet& b) { return a -= b; }
  friend bool operator==(const VectorJet& a, const VectorJet& b) { return a.c_ == b.c_; }

 private:
  std::vector<Jet> c_;
};

// Componentwise f o g for maps: (f_1 o g, ..., f_m o g).
inline VectorJet jet_compose(const VectorJet& f, const VectorJet& g) {
  std::vector<Jet> c;
  for (const auto& fi : f) c.push_back(jet_compose(fi, g.components()));
  return VectorJet(std::move(c));
}

}  // namespace degentrace
