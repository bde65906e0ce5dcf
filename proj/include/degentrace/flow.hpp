#pragma once

// Hamiltonian flow near a totally degenerate critical point: Taylor jets of
// the flow through the Faa di Bruno recurrence, an adaptive Runge-Kutta
// integrator used as an oracle, and the generating function solved order by
// order from the Hamilton-Jacobi equation.
//
// Since the linearized flow is the identity at all times, every Taylor
// coefficient of the flow and of the generating function is a polynomial in
// time. Both are carried as TimeJet values (jets with polynomial-in-t
// coefficients) and time integrals are taken term by term.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "degentrace/errors.hpp"
#include "degentrace/jets.hpp"
#include "degentrace/symbols.hpp"

namespace degentrace {

// sum_p t^p * terms[p], each term a jet in phase-space variables.
class TimeJet {
 public:
  TimeJet(int dim, int order) : dim_(dim), order_(order) {}
  explicit TimeJet(Jet constant_in_time) : dim_(constant_in_time.dim()), order_(constant_in_time.order()) {
    terms_.push_back(std::move(constant_in_time));
    trim();
  }

  int dim() const { return dim_; }
  int order() const { return order_; }
  // Highest power of t present, -1 for the zero polynomial.
  int time_degree() const { return static_cast<int>(terms_.size()) - 1; }
  bool is_zero() const { return terms_.empty(); }

  Jet coefficient(int p) const {
    return (p >= 0 && p < static_cast<int>(terms_.size())) ? terms_[p] : Jet(dim_, order_);
  }

  Jet at(double t) const {
    Jet r(dim_, order_);
    for (std::size_t p = terms_.size(); p-- > 0;) {
      r *= t;
      r += terms_[p];
    }
    return r;
  }

  // int_0^t of this polynomial in time.
  TimeJet integrate() const {
    TimeJet r(dim_, order_);
    if (terms_.empty()) return r;
    r.terms_.push_back(Jet(dim_, order_));
    for (std::size_t p = 0; p < terms_.size(); ++p) r.terms_.push_back(terms_[p] * (1.0 / (p + 1.0)));
    r.trim();
    return r;
  }
  TimeJet derivative() const {
    TimeJet r(dim_, order_);
    for (std::size_t p = 1; p < terms_.size(); ++p) r.terms_.push_back(terms_[p] * static_cast<double>(p));
    r.trim();
    return r;
  }
  TimeJet homogeneous(int deg) const {
    TimeJet r(dim_, order_);
    for (const auto& j : terms_) r.terms_.push_back(homogeneous_part(j, deg));
    r.trim();
    return r;
  }
  TimeJet diff(int var) const {
    TimeJet r(dim_, order_);
    for (const auto& j : terms_) r.terms_.push_back(jet_diff(j, var));
    r.trim();
    return r;
  }
  double max_abs() const {
    double m = 0.0;
    for (const auto& j : terms_) m = std::max(m, j.max_abs());
    return m;
  }

  TimeJet& operator+=(const TimeJet& b) {
    check(b);
    if (b.terms_.size() > terms_.size()) terms_.resize(b.terms_.size(), Jet(dim_, order_));
    for (std::size_t p = 0; p < b.terms_.size(); ++p) terms_[p] += b.terms_[p];
    trim();
    return *this;
  }
  TimeJet& operator-=(const TimeJet& b) {
    check(b);
    if (b.terms_.size() > terms_.size()) terms_.resize(b.terms_.size(), Jet(dim_, order_));
    for (std::size_t p = 0; p < b.terms_.size(); ++p) terms_[p] -= b.terms_[p];
    trim();
    return *this;
  }
  TimeJet& operator*=(double s) {
    for (auto& j : terms_) j *= s;
    trim();
    return *this;
  }
  friend TimeJet operator+(TimeJet a, const TimeJet& b) { return a += b; }
  friend TimeJet operator-(TimeJet a, const TimeJet& b) { return a -= b; }
  friend TimeJet operator*(TimeJet a, double s) { return a *= s; }
  friend TimeJet operator*(double s, TimeJet a) { return a *= s; }
  friend TimeJet operator*(const TimeJet& a, const TimeJet& b) {
    a.check(b);
    TimeJet r(a.dim_, a.order_);
    if (a.terms_.empty() || b.terms_.empty()) return r;
    r.terms_.assign(a.terms_.size() + b.terms_.size() - 1, Jet(a.dim_, a.order_));
    for (std::size_t p = 0; p < a.terms_.size(); ++p)
      for (std::size_t q = 0; q < b.terms_.size(); ++q) r.terms_[p + q] += a.terms_[p] * b.terms_[q];
    r.trim();
    return r;
  }

 private:
  void check(const TimeJet& b) const {
    if (b.dim_ != dim_ || b.order_ != order_) throw StructuralError("TimeJet shape mismatch");
  }
  void trim() {
    while (!terms_.empty() && terms_.back().is_zero()) terms_.pop_back();
  }

  int dim_;
  int order_;
  std::vector<Jet> terms_;
};

using TimeVectorJet = std::vector<TimeJet>;

// f o g where f has constant coefficients and the inner maps depend on time.
inline TimeJet compose(const Jet& f, const TimeVectorJet& g) {
  if (static_cast<int>(g.size()) != f.dim()) throw StructuralError("compose: inner map has wrong length");
  const int dim = g.front().dim();
  const int order = g.front().order();
  for (const auto& gi : g)
    for (int p = 0; p <= gi.time_degree(); ++p)
      if (gi.coefficient(p).constant_term() != 0.0)
        throw DomainError("compose: inner map does not fix the base point");
  const auto& L = f.layout();
  auto fc = f.coefficients();
  const int top = std::min(f.order(), order);
  std::vector<TimeJet> powers;
  TimeJet result(dim, order);
  for (std::size_t p = 0; p < L.degree_end(top); ++p) {
    const auto& alpha = L.monomial(p);
    if (p == 0) {
      powers.emplace_back(Jet::constant(dim, order, 1.0));
    } else {
      int i = 0;
      while (alpha[i] == 0) ++i;
      MultiIndex prev = alpha;
      --prev[i];
      powers.push_back(powers[L.position(prev)] * g[i]);
    }
    if (fc[p] != 0.0) result += fc[p] * powers.back();
  }
  return result;
}

// ---------------------------------------------------------------------------
// Faa di Bruno weights.

struct FaaDiBrunoTerm {
  std::vector<int> block_sizes;  // ascending
  long long count = 0;           // number of set partitions with these block sizes
};

// Groups all set partitions of {1..m} by their multiset of block sizes. The
// enumeration walks restricted growth strings, so the weights are counted
// rather than taken from a closed form.
inline const std::vector<FaaDiBrunoTerm>& faa_di_bruno_terms(int m) {
  if (m < 1 || m > 14) throw DomainError("faa_di_bruno_terms: m must lie in [1, 14]");
  static std::mutex mutex;
  static std::map<int, std::vector<FaaDiBrunoTerm>> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;

  std::map<std::vector<int>, long long> counts;
  std::vector<int> a(m, 0), block_max(m, 0);
  while (true) {
    std::vector<int> sizes(*std::max_element(a.begin(), a.end()) + 1, 0);
    for (int v : a) ++sizes[v];
    std::sort(sizes.begin(), sizes.end());
    ++counts[sizes];
    // Next restricted growth string: a[i] <= 1 + max(a[0..i-1]).
    int i = m - 1;
    while (i > 0 && a[i] == block_max[i - 1] + 1) --i;
    if (i == 0) break;
    ++a[i];
    block_max[i] = std::max(block_max[i - 1], a[i]);
    for (int j = i + 1; j < m; ++j) {
      a[j] = 0;
      block_max[j] = block_max[i];
    }
  }
  std::vector<FaaDiBrunoTerm> terms;
  for (auto& [sizes, c] : counts) terms.push_back({sizes, c});
  return cache.emplace(m, std::move(terms)).first->second;
}

// d^r F(0)(v_1, ..., v_r) for the degree-r part of a scalar jet F and
// time-dependent vector arguments.
inline TimeJet multilinear_derivative(const Jet& f, int r, const std::vector<const TimeVectorJet*>& args) {
  const int dim = args.front()->front().dim();
  const int order = args.front()->front().order();
  TimeJet total(dim, order);
  const auto& L = f.layout();
  if (r > f.order()) return total;
  auto fc = f.coefficients();
  for (std::size_t p = L.degree_begin(r); p < L.degree_end(r); ++p) {
    if (fc[p] == 0.0) continue;
    const auto& alpha = L.monomial(p);
    double fact = fc[p];
    std::vector<int> idx;
    for (int v = 0; v < f.dim(); ++v) {
      for (int e = 1; e <= alpha[v]; ++e) fact *= e;
      for (int e = 0; e < alpha[v]; ++e) idx.push_back(v);
    }
    // Distinct arrangements of the multiset idx over the r slots.
    do {
      TimeJet prod = (*args[0])[idx[0]];
      for (int q = 1; q < r && !prod.is_zero(); ++q) prod = prod * (*args[q])[idx[q]];
      total += fact * prod;
    } while (std::next_permutation(idx.begin(), idx.end()));
  }
  return total;
}

// ---------------------------------------------------------------------------
// Flow jets.

struct FlowJet {
  double t = 0.0;
  VectorJet jet;  // Taylor map of Phi_t at the critical point, constant term removed
};

// Time-polynomial Taylor data of the flow: derivs[j] holds
// d^j Phi_t(z0)(z^j) as a homogeneous polynomial map of degree j.
class FlowSeries {
 public:
  int max_degree() const { return static_cast<int>(derivs_.size()) - 1; }
  const TimeVectorJet& derivative(int j) const { return derivs_.at(j); }

  VectorJet at(double t) const {
    const int dim = derivs_[1].front().dim();
    const int order = derivs_[1].front().order();
    VectorJet r(dim, dim, order);
    double fact = 1.0;
    for (int j = 1; j <= max_degree(); ++j) {
      fact *= j;
      for (int c = 0; c < dim; ++c) r[c] += derivs_[j][c].at(t) * (1.0 / fact);
    }
    return r;
  }
  // Largest power of t in the degree-j coefficients.
  int time_degree(int j) const {
    int d = -1;
    for (const auto& c : derivs_.at(j)) d = std::max(d, c.time_degree());
    return d;
  }

 private:
  friend FlowSeries flow_series(const SymbolModel&, int);
  std::vector<TimeVectorJet> derivs_;
};

// Recurrence d^m Phi_t(z0)(z^m) = int_0^t P_m(dPhi_s z, ..., d^{m-1}Phi_s z^{m-1}) ds
// with P_m = sum over partitions of m into r >= 2 blocks of
// C(p) d^r X(z0)(Y_{n_1}, ..., Y_{n_r}). The r = 1 term is dX(z0) Y_m, which
// vanishes together with the Hessian of p0.
inline FlowSeries flow_series(const SymbolModel& s, int m) {
  if (m < 1) throw DomainError("flow jet degree must be at least 1");
  if (m > s.order() - 1)
    throw DomainError("flow jet degree " + std::to_string(m) + " exceeds symbol data (needs order " +
                      std::to_string(m + 1) + ", have " + std::to_string(s.order()) + ")");
  const int dim = s.phase_dim();
  const VectorJet field = hamiltonian_field(s, m + 1);
  for (const auto& xc : field)
    if (xc.constant_term() != 0.0 || !homogeneous_part(xc, 1).is_zero())
      throw InternalError("flow_series: the linearized flow at the critical point is not the identity");

  FlowSeries fs;
  fs.derivs_.assign(m + 1, TimeVectorJet(dim, TimeJet(dim, m)));
  for (int c = 0; c < dim; ++c) fs.derivs_[1][c] = TimeJet(Jet::variable(dim, m, c));

  for (int j = 2; j <= m; ++j) {
    TimeVectorJet rhs(dim, TimeJet(dim, m));
    for (const auto& term : faa_di_bruno_terms(j)) {
      const int r = static_cast<int>(term.block_sizes.size());
      if (r < 2) continue;
      std::vector<const TimeVectorJet*> args;
      bool zero = false;
      for (int size : term.block_sizes) {
        const auto& y = fs.derivs_[size];
        zero = zero || std::all_of(y.begin(), y.end(), [](const TimeJet& v) { return v.is_zero(); });
        args.push_back(&y);
      }
      if (zero) continue;
      for (int c = 0; c < dim; ++c) {
        if (homogeneous_part(field[c], r).is_zero()) continue;
        rhs[c] += static_cast<double>(term.count) * multilinear_derivative(field[c].with_order(m), r, args);
      }
    }
    for (int c = 0; c < dim; ++c) fs.derivs_[j][c] = rhs[c].integrate();
  }
  return fs;
}

inline FlowJet flow_jet(const SymbolModel& s, int m, double t) {
  return FlowJet{t, flow_series(s, m).at(t)};
}

// Adaptive Dormand-Prince 5(4) integration of z' = H_{p0}(z) over [0, t].
inline std::vector<double> flow_numeric(const SymbolModel& s, std::vector<double> z, double t, double tol) {
  if (!(tol > 0)) throw DomainError("flow_numeric: tol must be positive");
  if (static_cast<int>(z.size()) != s.phase_dim()) throw StructuralError("flow_numeric: wrong point dimension");
  if (t == 0.0) return z;
  const VectorJet field = hamiltonian_field(s, s.order());
  const std::size_t d = z.size();
  auto rhs = [&](const std::vector<double>& y) { return field.eval(y); };

  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  (void)c2, (void)c3, (void)c4, (void)c5;

  const double dir = t > 0 ? 1.0 : -1.0;
  double h = dir * std::min(std::abs(t), 0.01);
  double elapsed = 0.0;
  std::vector<double> y(d), k1 = rhs(z), k2, k3, k4, k5, k6, k7, ynew(d);
  auto combo = [&](std::initializer_list<std::pair<double, const std::vector<double>*>> parts) {
    for (std::size_t i = 0; i < d; ++i) {
      double acc = z[i];
      for (const auto& [w, k] : parts) acc += h * w * (*k)[i];
      y[i] = acc;
    }
    return y;
  };
  int steps = 0;
  while (dir * (t - elapsed) > 0) {
    if (dir * (elapsed + h - t) > 0) h = t - elapsed;
    if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t)) || ++steps > 10'000'000)
      throw ConvergenceError("flow_numeric: step size underflow");
    k2 = rhs(combo({{a21, &k1}}));
    k3 = rhs(combo({{a31, &k1}, {a32, &k2}}));
    k4 = rhs(combo({{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    k5 = rhs(combo({{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    k6 = rhs(combo({{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    ynew = combo({{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    k7 = rhs(ynew);
    double err = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = tol + tol * std::max(std::abs(z[i]), std::abs(ynew[i]));
      err = std::max(err, std::abs(e) / sc);
    }
    if (err <= 1.0) {
      elapsed += h;
      z = ynew;
      k1 = k7;
    }
    const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    h *= factor;
  }
  return z;
}

// ---------------------------------------------------------------------------
// Generating function.

// S(t,x,eta) = <x,eta> - t E_c + W(t,x,eta), W a polynomial in t whose
// spatial degrees run from k to N.
class GeneratingSeries {
 public:
  int n() const { return n_; }
  int max_degree() const { return order_; }
  double critical_energy() const { return ec_; }
  const TimeJet& phase() const { return w_; }  // Psi = S - <x,eta> + t E_c

  Jet pairing_term() const {
    Jet r(2 * n_, order_);
    for (int i = 0; i < n_; ++i) {
      MultiIndex a{};
      a[i] = 1;
      a[n_ + i] = 1;
      r.set(a, 1.0);
    }
    return r;
  }
  Jet generating_function(double t) const {
    return pairing_term() + Jet::constant(2 * n_, order_, -t * ec_) + w_.at(t);
  }

 private:
  friend GeneratingSeries generating_series(const SymbolModel&, int);
  int n_ = 1;
  int order_ = 0;
  double ec_ = 0.0;
  TimeJet w_{2, 0};
};

struct GeneratingJet {
  double t = 0.0;
  Jet S;          // full generating function in (x, eta)
  Jet leading;    // -t p_k
  Jet remainder;  // -t R_{k+1}, R_{k+1} = p0 - E_c - p_k
  Jet g_part;     // -t^2 G_{k+1}
};

// Hamilton-Jacobi right-hand side Q(x, eta + d_x W) with Q = p0 - E_c.
inline TimeJet hj_hamiltonian(const Jet& q, const TimeJet& w, int n) {
  const int dim = 2 * n;
  TimeVectorJet inner;
  for (int i = 0; i < n; ++i) inner.emplace_back(Jet::variable(dim, w.order(), i));
  for (int i = 0; i < n; ++i) inner.push_back(TimeJet(Jet::variable(dim, w.order(), n + i)) + w.diff(i));
  return compose(q, inner);
}

// Solves d_t W = -Q(x, eta + d_x W), W(0) = 0, one spatial degree at a time.
// The degree-j part of the right-hand side only involves W below degree j
// (the linearized flow is the identity), so each step is an explicit time
// integral.
inline GeneratingSeries generating_series(const SymbolModel& s, int order) {
  if (order > s.order())
    throw DomainError("generating function degree " + std::to_string(order) + " exceeds symbol data (order " +
                      std::to_string(s.order()) + ")");
  if (order < 1) throw DomainError("generating function degree must be at least 1");
  const int n = s.n();
  const int dim = 2 * n;
  Jet q = s.principal(order) - Jet::constant(dim, order, s.critical_energy());
  for (int j = 0; j <= std::min(2, order); ++j)
    if (!homogeneous_part(q, j).is_zero())
      throw InternalError("Hamilton-Jacobi solve: p0 - E_c has terms of degree <= 2; the order-by-order "
                          "system is not unipotent");

  TimeJet w(dim, order);
  for (int j = s.k(); j <= order; ++j) {
    const TimeJet rhs = hj_hamiltonian(q, w, n).homogeneous(j);
    // The unknown degree must not feed back into its own equation.
    if (!homogeneous_part(w.coefficient(0), j).is_zero() || w.homogeneous(j).time_degree() >= 0)
      throw InternalError("Hamilton-Jacobi solve: degree " + std::to_string(j) + " already populated");
    w -= rhs.integrate();
  }
  GeneratingSeries g;
  g.n_ = n;
  g.order_ = order;
  g.ec_ = s.critical_energy();
  g.w_ = w;
  return g;
}

inline GeneratingJet generating_jet(const SymbolModel& s, int order, double t) {
  const auto series = generating_series(s, order);
  GeneratingJet g;
  g.t = t;
  g.S = series.generating_function(t);
  g.leading = s.leading().with_order(order) * (-t);
  g.remainder = s.remainder_above_leading(order) * (-t);
  g.g_part = series.phase().at(t) - g.leading - g.remainder;
  return g;
}

// ---------------------------------------------------------------------------
// Checks on the phase structure.

struct PhaseStructureReport {
  double r_part_residual = 0.0;      // |t^1 coefficient of Psi + (p0 - E_c)|
  double t0_residual = 0.0;          // |t^0 coefficient of Psi|
  double g_low_degree_residual = 0.0;  // |degree <= k part of the t^{>=2} terms|
  double leading_residual = 0.0;     // |degree-k part of Psi + t p_k| over the grid
  double hj_residual = 0.0;          // |d_t S + p0(x, d_x S)| coefficients over the grid
  double generating_residual = 0.0;  // |Phi_t(d_eta S, eta) - (x, d_x S)| through degree N-1
  double max_residual = 0.0;
  // Largest power of t in Psi at each spatial degree (index = degree).
  std::vector<int> max_time_degree;
};

// Residual of the implicit relation Phi_t(d_eta S, eta) = (x, d_x S) through
// degree order - 1.
inline double generating_relation_residual(const SymbolModel& s, const GeneratingSeries& g,
                                           const FlowSeries& flow, double t) {
  const int n = s.n();
  const int dim = 2 * n;
  const int m = g.max_degree() - 1;
  const Jet w = g.phase().at(t);
  auto dw = [&](int var) { return jet_diff(w, var).with_order(m); };
  std::vector<Jet> inner;
  for (int i = 0; i < n; ++i) inner.push_back(Jet::variable(dim, m, i) + dw(n + i));
  for (int i = 0; i < n; ++i) inner.push_back(Jet::variable(dim, m, n + i));
  const VectorJet phi = flow.at(t);
  double res = 0.0;
  for (int c = 0; c < dim; ++c) {
    Jet lhs = jet_compose(phi[c].with_order(m), inner);
    Jet rhs = c < n ? Jet::variable(dim, m, c) : Jet::variable(dim, m, c) + dw(c - n);
    res = std::max(res, (lhs - rhs).max_abs());
  }
  return res;
}

inline PhaseStructureReport phase_structure_check(const SymbolModel& s, int order, std::span<const double> t_grid) {
  const auto g = generating_series(s, order);
  const TimeJet& psi = g.phase();
  const int dim = s.phase_dim();
  const int k = s.k();
  PhaseStructureReport rep;

  rep.t0_residual = psi.coefficient(0).max_abs();
  const Jet q = s.principal(order) - Jet::constant(dim, order, s.critical_energy());
  rep.r_part_residual = (psi.coefficient(1) + q).max_abs();
  for (int p = 2; p <= psi.time_degree(); ++p)
    for (int j = 0; j <= k; ++j)
      rep.g_low_degree_residual = std::max(rep.g_low_degree_residual, homogeneous_part(psi.coefficient(p), j).max_abs());

  rep.max_time_degree.assign(order + 1, -1);
  for (int j = 0; j <= order; ++j) rep.max_time_degree[j] = psi.homogeneous(j).time_degree();

  const TimeJet hj = psi.derivative() + hj_hamiltonian(q, psi, s.n());
  const Jet pk = s.leading().with_order(order);
  std::optional<FlowSeries> flow;
  if (order >= 2) flow = flow_series(s, order - 1);
  for (double t : t_grid) {
    rep.hj_residual = std::max(rep.hj_residual, hj.at(t).max_abs());
    rep.leading_residual = std::max(rep.leading_residual, (homogeneous_part(psi.at(t), k) + t * pk).max_abs());
    if (flow) rep.generating_residual = std::max(rep.generating_residual, generating_relation_residual(s, g, *flow, t));
  }
  rep.max_residual = std::max({rep.r_part_residual, rep.t0_residual, rep.g_low_degree_residual, rep.leading_residual,
                               rep.hj_residual, rep.generating_residual});
  return rep;
}

// d chi_1 / d r at r = 0 for the normal-form coordinate
// chi_1 = r |p_k(theta) + r R_{k+1} + t G_{k+1}|^{1/k}, read off the degree-k
// part of the phase: Psi_k(t, theta) / (-t). The time polynomial is divided
// exactly, so the value does not depend on t.
inline double normal_form_jacobian(const SymbolModel& s, double t, std::span<const double> theta) {
  const auto g = generating_series(s, s.k());
  const TimeJet psi_k = g.phase().homogeneous(s.k());
  if (!psi_k.coefficient(0).is_zero())
    throw InternalError("normal_form_jacobian: phase does not vanish at t = 0");
  double value = 0.0;
  double tp = 1.0;
  for (int p = 1; p <= psi_k.time_degree(); ++p) {
    value += tp * psi_k.coefficient(p).eval(theta);
    tp *= t;
  }
  return std::pow(std::abs(value), 1.0 / s.k());
}

}  // namespace degentrace
