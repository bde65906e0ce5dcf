#pragma once

// Spectra of quantized model operators near the critical level.
//
// OscPower models +-(x^2 + xi^2)^m (sum over n degrees of freedom) are
// functions of the harmonic oscillator and have closed-form spectra.
// Polynomial symbols in one degree of freedom are Weyl-quantized in the
// Hermite basis, where x and xi act through ladder matrices, and the
// resulting self-adjoint matrix is diagonalized densely.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "degentrace/errors.hpp"
#include "degentrace/jets.hpp"
#include "degentrace/symbols.hpp"

namespace degentrace {

// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, 0.0) {}
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
  double* row(int i) { return a_.data() + static_cast<std::size_t>(i) * cols_; }
  const double* row(int i) const { return a_.data() + static_cast<std::size_t>(i) * cols_; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw StructuralError("matrix product shape mismatch");
    Matrix r(a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i)
      for (int k = 0; k < a.cols_; ++k) {
        const double v = a(i, k);
        if (v == 0.0) continue;
        for (int j = 0; j < b.cols_; ++j) r(i, j) += v * b(k, j);
      }
    return r;
  }
  friend Matrix operator+(Matrix a, const Matrix& b) {
    for (std::size_t i = 0; i < a.a_.size(); ++i) a.a_[i] += b.a_[i];
    return a;
  }
  friend Matrix operator-(Matrix a, const Matrix& b) {
    for (std::size_t i = 0; i < a.a_.size(); ++i) a.a_[i] -= b.a_[i];
    return a;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> a_;
};

// Square band matrix with half-bandwidth w.
class BandMatrix {
 public:
  BandMatrix(int n, int w) : n_(n), w_(w), d_(static_cast<std::size_t>(n) * (2 * w + 1), 0.0) {}
  static BandMatrix identity(int n) {
    BandMatrix b(n, 0);
    for (int i = 0; i < n; ++i) b.set(i, i, 1.0);
    return b;
  }
  int size() const { return n_; }
  int half_bandwidth() const { return w_; }
  double get(int i, int j) const {
    if (std::abs(i - j) > w_) return 0.0;
    return d_[static_cast<std::size_t>(i) * (2 * w_ + 1) + (j - i + w_)];
  }
  void set(int i, int j, double v) { d_.at(static_cast<std::size_t>(i) * (2 * w_ + 1) + (j - i + w_)) = v; }
  void add(int i, int j, double v) { d_.at(static_cast<std::size_t>(i) * (2 * w_ + 1) + (j - i + w_)) += v; }

  friend BandMatrix operator*(const BandMatrix& a, const BandMatrix& b) {
    if (a.n_ != b.n_) throw StructuralError("band product size mismatch");
    BandMatrix r(a.n_, a.w_ + b.w_);
    for (int i = 0; i < a.n_; ++i)
      for (int k = std::max(0, i - a.w_); k <= std::min(a.n_ - 1, i + a.w_); ++k) {
        const double v = a.get(i, k);
        if (v == 0.0) continue;
        for (int j = std::max(0, k - b.w_); j <= std::min(b.n_ - 1, k + b.w_); ++j) r.add(i, j, v * b.get(k, j));
      }
    return r;
  }
  BandMatrix& axpy(double s, const BandMatrix& b) {
    if (b.n_ != n_) throw StructuralError("band sum size mismatch");
    if (b.w_ > w_) *this = widened(b.w_);
    for (int i = 0; i < n_; ++i)
      for (int j = std::max(0, i - b.w_); j <= std::min(n_ - 1, i + b.w_); ++j) add(i, j, s * b.get(i, j));
    return *this;
  }
  BandMatrix widened(int w) const {
    BandMatrix r(n_, std::max(w, w_));
    for (int i = 0; i < n_; ++i)
      for (int j = std::max(0, i - w_); j <= std::min(n_ - 1, i + w_); ++j) r.set(i, j, get(i, j));
    return r;
  }
  // Leading m x m block as a dense matrix, optionally restricted to the
  // indices congruent to `parity` mod 2 (parity < 0 keeps all).
  Matrix dense_block(int m, int parity = -1) const {
    std::vector<int> idx;
    for (int i = 0; i < m; ++i)
      if (parity < 0 || i % 2 == parity) idx.push_back(i);
    Matrix r(static_cast<int>(idx.size()), static_cast<int>(idx.size()));
    for (std::size_t p = 0; p < idx.size(); ++p)
      for (std::size_t q = 0; q < idx.size(); ++q) r(p, q) = get(idx[p], idx[q]);
    return r;
  }
  double max_abs_coupling(int m, int parity_mismatch) const {
    double v = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = std::max(0, i - w_); j <= std::min(m - 1, i + w_); ++j)
        if ((i + j) % 2 == parity_mismatch) v = std::max(v, std::abs(get(i, j)));
    return v;
  }

 private:
  int n_;
  int w_;
  std::vector<double> d_;
};

// X and P = i * P_imag in the Hermite basis of size N.
struct LadderPair {
  Matrix X;
  Matrix P_imag;
};

namespace detail {

inline BandMatrix x_band(int n, double h) {
  BandMatrix x(n, 1);
  for (int j = 0; j + 1 < n; ++j) {
    const double s = std::sqrt(h * (j + 1) / 2.0);
    x.set(j, j + 1, s);
    x.set(j + 1, j, s);
  }
  return x;
}

// P = i A with A real antisymmetric.
inline BandMatrix p_imag_band(int n, double h) {
  BandMatrix a(n, 1);
  for (int j = 0; j + 1 < n; ++j) {
    const double s = std::sqrt(h * (j + 1) / 2.0);
    a.set(j, j + 1, -s);
    a.set(j + 1, j, s);
  }
  return a;
}

}  // namespace detail

inline LadderPair ladder_matrices(int N, double h) {
  if (N < 2) throw DomainError("ladder_matrices needs basis size >= 2");
  if (!(h > 0)) throw DomainError("h must be positive");
  return {detail::x_band(N, h).dense_block(N), detail::p_imag_band(N, h).dense_block(N)};
}

// Op_h^w of a polynomial symbol in one degree of freedom, as real and
// imaginary band parts on the leading N basis functions (exact Galerkin
// matrix: products are formed in a padded basis and then truncated).
struct WeylBands {
  int N = 0;
  BandMatrix re{1, 0};
  BandMatrix im{1, 0};
  bool has_imaginary = false;
  bool even = true;  // every monomial has even total degree
};

inline WeylBands weyl_bands(const Jet& symbol, int N, double h) {
  if (symbol.dim() != 2) throw DomainError("Weyl quantization is implemented for n = 1 symbols only");
  if (N < 2) throw DomainError("basis size must be at least 2");
  if (!(h > 0)) throw DomainError("h must be positive");
  const int deg = std::max(0, symbol.highest_degree());
  const int M = N + deg + 1;
  const BandMatrix X = detail::x_band(M, h);
  const BandMatrix A = detail::p_imag_band(M, h);
  std::vector<BandMatrix> xpow{BandMatrix::identity(M)}, apow{BandMatrix::identity(M)};
  for (int i = 1; i <= deg; ++i) {
    xpow.push_back(xpow.back() * X);
    apow.push_back(apow.back() * A);
  }
  WeylBands out;
  out.N = N;
  out.re = BandMatrix(M, deg);
  out.im = BandMatrix(M, deg);
  const auto& L = symbol.layout();
  auto c = symbol.coefficients();
  for (std::size_t p = 0; p < c.size(); ++p) {
    if (c[p] == 0.0) continue;
    const int a = L.monomial(p)[0];
    const int b = L.monomial(p)[1];
    if ((a + b) % 2 != 0) out.even = false;
    // McCoy: x^a xi^b -> 2^{-a} sum_s C(a,s) X^s P^b X^{a-s}, P^b = i^b A^b.
    BandMatrix term(M, a + b);
    double binom = 1.0;
    for (int s = 0; s <= a; ++s) {
      term.axpy(binom, xpow[s] * apow[b] * xpow[a - s]);
      binom = binom * (a - s) / (s + 1);
    }
    const double scale = c[p] * std::ldexp(1.0, -a) * ((b / 2) % 2 == 0 ? 1.0 : -1.0);
    if (b % 2 == 0) {
      out.re.axpy(scale, term);
    } else {
      out.im.axpy(scale, term);
      out.has_imaginary = true;
    }
  }
  return out;
}

// Dense Hermitian matrix re + i im on the leading N basis functions,
// symmetrized exactly.
struct WeylMatrix {
  Matrix re;
  Matrix im;
  double asymmetry = 0.0;  // largest |M - M^*| entry before symmetrization
};

inline WeylMatrix weyl_quantize(const Jet& symbol, int N, double h) {
  const auto bands = weyl_bands(symbol, N, h);
  WeylMatrix w{bands.re.dense_block(N), bands.im.dense_block(N), 0.0};
  for (int i = 0; i < N; ++i)
    for (int j = 0; j <= i; ++j) {
      const double rs = 0.5 * (w.re(i, j) + w.re(j, i));
      const double ia = 0.5 * (w.im(i, j) - w.im(j, i));
      w.asymmetry = std::max({w.asymmetry, std::abs(w.re(i, j) - w.re(j, i)), std::abs(w.im(i, j) + w.im(j, i))});
      w.re(i, j) = w.re(j, i) = rs;
      w.im(i, j) = ia;
      w.im(j, i) = -ia;
    }
  return w;
}

// Eigenvalues of a real symmetric matrix: Householder reduction to
// tridiagonal form, then implicit QL with Wilkinson-type shifts.
inline std::vector<double> eigenvalues_sym(Matrix a) {
  const int n = a.rows();
  if (a.cols() != n) throw StructuralError("eigenvalues_sym needs a square matrix");
  if (n == 0) return {};
  std::vector<double> d(n), e(n, 0.0), v(n), p(n);
  for (int k = 0; k + 2 < n; ++k) {
    const int m = n - k - 1;
    double norm2 = 0.0;
    for (int i = 0; i < m; ++i) {
      v[i] = a(k + 1 + i, k);
      norm2 += v[i] * v[i];
    }
    d[k] = a(k, k);
    if (norm2 == 0.0) {
      e[k] = 0.0;
      continue;
    }
    const double alpha = -std::copysign(std::sqrt(norm2), v[0]);
    e[k] = alpha;
    v[0] -= alpha;
    const double vnorm2 = norm2 - a(k + 1, k) * a(k + 1, k) + v[0] * v[0];
    const double beta = 2.0 / vnorm2;
    double pv = 0.0;
    for (int i = 0; i < m; ++i) {
      const double* ri = a.row(k + 1 + i) + k + 1;
      double s = 0.0;
      for (int j = 0; j < m; ++j) s += ri[j] * v[j];
      p[i] = beta * s;
      pv += p[i] * v[i];
    }
    const double K = 0.5 * beta * pv;
    for (int i = 0; i < m; ++i) p[i] -= K * v[i];
    for (int i = 0; i < m; ++i) {
      double* ri = a.row(k + 1 + i) + k + 1;
      const double vi = v[i], wi = p[i];
      for (int j = 0; j < m; ++j) ri[j] -= vi * p[j] + wi * v[j];
    }
  }
  if (n >= 2) {
    d[n - 2] = a(n - 2, n - 2);
    e[n - 2] = a(n - 1, n - 2);
  }
  d[n - 1] = a(n - 1, n - 1);
  e[n - 1] = 0.0;

  // Implicit QL on (d, e) with e[i] = T(i+1, i).
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
      }
      if (m != l) {
        if (iter++ == 60) throw ConvergenceError("eigenvalues_sym: QL iteration did not converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, pp = 0.0;
        int i;
        bool deflated = false;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= pp;
            e[m] = 0.0;
            deflated = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - pp;
          r = (d[i] - g) * s + 2.0 * c * b;
          pp = s * r;
          d[i + 1] = g + pp;
          g = c * r - b;
        }
        if (deflated) continue;
        d[l] -= pp;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  std::sort(d.begin(), d.end());
  return d;
}

// Eigenvalues of the Hermitian matrix re + i im through the real embedding
// [[re, -im], [im, re]], whose spectrum is that of re + i im doubled.
inline std::vector<double> eigenvalues_hermitian(const Matrix& re, const Matrix& im) {
  const int n = re.rows();
  Matrix big(2 * n, 2 * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      big(i, j) = big(n + i, n + j) = re(i, j);
      big(n + i, j) = im(i, j);
      big(i, n + j) = -im(i, j);
    }
  auto all = eigenvalues_sym(std::move(big));
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(0.5 * (all[2 * i] + all[2 * i + 1]));
  return out;
}

// ---------------------------------------------------------------------------
// Operator models and spectra.

struct OscPower {
  int m = 2;
  double sign = 1.0;  // -1 for the maximum model -(|z|^2)^m
};

struct OperatorModel {
  std::variant<OscPower, SymbolModel> kind;
  int n = 1;
  double p1_shift = 0.0;

  bool is_osc_power() const { return std::holds_alternative<OscPower>(kind); }
  double critical_energy() const { return is_osc_power() ? 0.0 : std::get<SymbolModel>(kind).critical_energy(); }
  int k() const { return is_osc_power() ? 2 * std::get<OscPower>(kind).m : std::get<SymbolModel>(kind).k(); }
  Extremum extremum() const {
    if (is_osc_power()) return std::get<OscPower>(kind).sign > 0 ? Extremum::Minimum : Extremum::Maximum;
    return std::get<SymbolModel>(kind).extremum();
  }
  // Principal symbol as a validated SymbolModel (built for OscPower models).
  SymbolModel symbol() const {
    if (!is_osc_power()) {
      const auto& s = std::get<SymbolModel>(kind);
      return make_symbol(s.n(), s.critical_energy(), [&] {
        std::vector<Jet> c;
        for (const auto& [deg, j] : s.components()) c.push_back(j);
        return c;
      }(), p1_shift, s.order());
    }
    const auto& o = std::get<OscPower>(kind);
    return make_symbol(n, 0.0, {oscillator_power(n, o.m, o.sign)}, p1_shift);
  }
};

inline OperatorModel osc_power_model(int n, int m, double sign = 1.0, double p1_shift = 0.0) {
  if (n < 1 || n > 2) throw DomainError("OscPower models support n = 1 or 2");
  if (m < 2) throw HypothesisError("H2", "OscPower needs m >= 2 so that k = 2m > 2");
  if (sign != 1.0 && sign != -1.0) throw DomainError("OscPower sign must be +1 or -1");
  return {OscPower{m, sign}, n, p1_shift};
}

inline OperatorModel poly_symbol_model(SymbolModel s, double p1_shift = 0.0) {
  if (s.n() != 1) throw DomainError("quantized polynomial symbols are supported for n = 1 only");
  return {std::move(s), 1, p1_shift};
}

struct Window {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
};

struct SpectrumResult {
  double h = 0.0;
  std::vector<double> eigenvalues;          // distinct levels, ascending
  std::vector<long long> multiplicities;    // same length as eigenvalues
  int basis_N = 0;                          // 0 for closed-form spectra
  bool converged = false;
  Window window;

  long long count() const { return std::accumulate(multiplicities.begin(), multiplicities.end(), 0LL); }
  std::vector<double> expanded(long long cap = 10'000'000) const {
    if (count() > cap) throw DomainError("spectrum too large to expand");
    std::vector<double> v;
    for (std::size_t i = 0; i < eigenvalues.size(); ++i) v.insert(v.end(), multiplicities[i], eigenvalues[i]);
    return v;
  }
};

// +-(h s)^m + c h with s = sum_i (2 j_i + 1) = 2J + n and multiplicity
// C(J + n - 1, n - 1).
inline SpectrumResult closed_form_spectrum(const OperatorModel& model, double h, Window window) {
  if (!model.is_osc_power()) throw DomainError("closed_form_spectrum needs an OscPower model");
  if (!(h > 0)) throw DomainError("h must be positive");
  const auto& o = std::get<OscPower>(model.kind);
  SpectrumResult r;
  r.h = h;
  r.window = window;
  r.converged = true;
  const double shift = model.p1_shift * h;
  std::vector<std::pair<double, long long>> levels;
  for (long long J = 0;; ++J) {
    const double e = std::pow(h * (2.0 * J + model.n), o.m);
    const double v = o.sign * e + shift;
    if (o.sign > 0 ? v > window.hi : v < window.lo) break;
    if (window.contains(v)) levels.emplace_back(v, model.n == 1 ? 1 : J + 1);
  }
  std::sort(levels.begin(), levels.end());
  for (const auto& [v, mult] : levels) {
    r.eigenvalues.push_back(v);
    r.multiplicities.push_back(mult);
  }
  return r;
}

// Symbol-level Moyal correction: Op^w((x^2+xi^2)^m) - H^m as a function of
// the oscillator level e = h(2j+1), n = 1.
inline double moyal_correction(int m, double h, double e) {
  switch (m) {
    case 2:
      return h * h;
    case 3:
      return 5.0 * h * h * e;
    default:
      throw DomainError("Moyal correction is tabulated for m = 2 and m = 3 only");
  }
}

struct SpectrumOptions {
  bool auto_N = true;
  int fixed_N = 0;
  int N_max = 8192;
  double trusted_fraction = 0.8;
  double rel_tol = 1e-9;  // doubling test threshold, relative to eps
};

namespace detail {

// Trusted eigenvalues of the quantized symbol at basis size N (without the
// p1 shift). Parity blocks are diagonalized separately for even symbols.
inline std::vector<double> quantized_levels(const Jet& symbol, Extremum ext, int N, double h, double trusted) {
  const auto bands = weyl_bands(symbol, N, h);
  std::vector<double> ev;
  if (bands.has_imaginary) {
    Matrix re = bands.re.dense_block(N), im = bands.im.dense_block(N);
    ev = eigenvalues_hermitian(re, im);
  } else if (bands.even) {
    for (int parity = 0; parity < 2; ++parity) {
      auto part = eigenvalues_sym(bands.re.dense_block(N, parity));
      ev.insert(ev.end(), part.begin(), part.end());
    }
    std::sort(ev.begin(), ev.end());
  } else {
    ev = eigenvalues_sym(bands.re.dense_block(N));
  }
  const auto keep = static_cast<std::size_t>(std::floor(trusted * N));
  if (ext == Extremum::Minimum) {
    ev.resize(std::min(ev.size(), keep));
  } else {
    ev.erase(ev.begin(), ev.end() - std::min(ev.size(), keep));
  }
  return ev;
}

inline double max_nearest_distance(const std::vector<double>& from, const std::vector<double>& to) {
  double worst = 0.0;
  for (double v : from) {
    auto it = std::lower_bound(to.begin(), to.end(), v);
    double best = std::numeric_limits<double>::infinity();
    if (it != to.end()) best = std::min(best, std::abs(*it - v));
    if (it != to.begin()) best = std::min(best, std::abs(*std::prev(it) - v));
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace detail

inline SpectrumResult spectrum(const OperatorModel& model, double h, Window window, const SpectrumOptions& opt = {}) {
  if (!(h > 0)) throw DomainError("h must be positive");
  if (!(window.hi > window.lo)) throw DomainError("spectral window must have positive width");
  if (model.is_osc_power()) return closed_form_spectrum(model, h, window);

  const auto& s = std::get<SymbolModel>(model.kind);
  const Jet symbol = s.principal(s.order());
  const double ec = s.critical_energy();
  const double eps = std::max(std::abs(window.lo - ec), std::abs(window.hi - ec));
  const double shift = model.p1_shift * h;
  auto windowed = [&](const std::vector<double>& ev) {
    std::vector<double> w;
    for (double v : ev)
      if (window.contains(v + shift)) w.push_back(v + shift);
    return w;
  };
  SpectrumResult r;
  r.h = h;
  r.window = window;
  if (!opt.auto_N) {
    if (opt.fixed_N < 2) throw DomainError("fixed basis size must be at least 2");
    r.basis_N = opt.fixed_N;
    r.eigenvalues = windowed(detail::quantized_levels(symbol, s.extremum(), opt.fixed_N, h, opt.trusted_fraction));
    r.multiplicities.assign(r.eigenvalues.size(), 1);
    r.converged = false;
    return r;
  }
  int N = std::max(16, static_cast<int>(std::ceil(8.0 * std::pow(eps, 2.0 / s.k()) / h)));
  if (N > opt.N_max) throw ConvergenceError("initial basis size " + std::to_string(N) + " exceeds N_max");
  auto prev = detail::quantized_levels(symbol, s.extremum(), N, h, opt.trusted_fraction);
  while (true) {
    const int next = 2 * N;
    if (next > opt.N_max)
      throw ConvergenceError("spectrum at h=" + std::to_string(h) + " not converged at N_max=" +
                             std::to_string(opt.N_max));
    auto cur = detail::quantized_levels(symbol, s.extremum(), next, h, opt.trusted_fraction);
    const auto wc = windowed(cur);
    const auto wp = windowed(prev);
    const double tol = opt.rel_tol * eps;
    // Coverage: the coarse basis must reach past the window.
    const bool covered = !prev.empty() && (s.extremum() == Extremum::Minimum ? prev.back() + shift > window.hi
                                                                              : prev.front() + shift < window.lo);
    std::vector<double> prev_shifted(prev);
    for (double& v : prev_shifted) v += shift;
    if (covered && wc.size() == wp.size() && detail::max_nearest_distance(wc, prev_shifted) <= tol) {
      r.basis_N = next;
      r.eigenvalues = wc;
      r.multiplicities.assign(wc.size(), 1);
      r.converged = true;
      return r;
    }
    N = next;
    prev = std::move(cur);
  }
}

}  // namespace degentrace
