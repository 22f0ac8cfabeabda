#pragma once

/**
 * @file jet.hpp
 * @brief Truncated multivariate Taylor series ("jets").
 *
 * A Jet<NV> holds the normalized Taylor coefficients
 *
 *     c[m] = (d^|m| f / dv_0^m_0 ... dv_{NV-1}^m_{NV-1}) / (m_0! ... m_{NV-1}!)
 *
 * of a function of NV variables for every multi-index m with |m| <= order.
 * Coefficients are stored in graded order, so the index of a multi-index does
 * not depend on the jet order and a lower-order jet is a prefix of a
 * higher-order one.
 *
 * Jet<4> is used for fields over (t, x, y, z); Jet<1> for one-variable
 * parameter functions and integrands.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <stdexcept>
#include <vector>

namespace seaconv {

template <int NV>
using MultiIndex = std::array<int, NV>;

namespace detail {

template <int NV>
struct MonomialTable {
  static constexpr int kMaxOrder = NV == 1 ? 40 : 12;

  struct Pair {
    std::int32_t lhs;
    std::int32_t rhs;
    std::int32_t out;
  };

  std::vector<MultiIndex<NV>> exponents;
  std::vector<int> degree;
  std::vector<double> factorial_weight;  // prod m_i!
  std::vector<int> count_upto;           // monomials with degree <= d
  std::vector<Pair> pairs;               // sorted by output degree, lhs, rhs
  std::vector<int> pairs_upto;           // pairs with output degree <= d
  std::vector<int> lookup;               // dense (kMaxOrder+1)^NV table

  [[nodiscard]] int dense_key(const MultiIndex<NV>& m) const {
    int key = 0;
    for (int i = 0; i < NV; ++i) key = key * (kMaxOrder + 1) + m[i];
    return key;
  }

  [[nodiscard]] int index(const MultiIndex<NV>& m) const {
    int total = 0;
    for (int v : m) {
      if (v < 0) return -1;
      total += v;
    }
    if (total > kMaxOrder) return -1;
    return lookup[dense_key(m)];
  }

  static const MonomialTable& get() {
    static const MonomialTable table = build();
    return table;
  }

 private:
  static void enumerate(int var, int remaining, MultiIndex<NV>& cur,
                        std::vector<MultiIndex<NV>>& out) {
    if (var == NV - 1) {
      cur[var] = remaining;
      out.push_back(cur);
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      cur[var] = k;
      enumerate(var + 1, remaining - k, cur, out);
    }
  }

  static MonomialTable build() {
    MonomialTable t;
    int dense = 1;
    for (int i = 0; i < NV; ++i) dense *= kMaxOrder + 1;
    t.lookup.assign(dense, -1);
    for (int d = 0; d <= kMaxOrder; ++d) {
      MultiIndex<NV> cur{};
      enumerate(0, d, cur, t.exponents);
      t.count_upto.push_back(static_cast<int>(t.exponents.size()));
    }
    for (std::size_t i = 0; i < t.exponents.size(); ++i) {
      const auto& m = t.exponents[i];
      int deg = 0;
      double w = 1.0;
      for (int v : m) {
        deg += v;
        for (int k = 2; k <= v; ++k) w *= k;
      }
      t.degree.push_back(deg);
      t.factorial_weight.push_back(w);
      t.lookup[t.dense_key(m)] = static_cast<int>(i);
    }
    for (int d = 0; d <= kMaxOrder; ++d) {
      for (int i = 0; i < t.count_upto[d]; ++i) {
        const int di = t.degree[i];
        // rhs runs over monomials of degree exactly d - di
        const int lo = d - di == 0 ? 0 : t.count_upto[d - di - 1];
        const int hi = t.count_upto[d - di];
        for (int j = lo; j < hi; ++j) {
          MultiIndex<NV> sum{};
          for (int v = 0; v < NV; ++v) sum[v] = t.exponents[i][v] + t.exponents[j][v];
          t.pairs.push_back({i, j, t.lookup[t.dense_key(sum)]});
        }
      }
      t.pairs_upto.push_back(static_cast<int>(t.pairs.size()));
    }
    return t;
  }
};

}  // namespace detail

/// Truncated Taylor expansion in NV variables around a fixed point.
/// Coefficient storage with an inline buffer for low orders, so that the
/// many small jets built during evaluation do not touch the heap.
class CoeffStore {
 public:
  static constexpr std::size_t kInline = 35;

  CoeffStore() = default;
  CoeffStore(std::size_t n, double v) { assign(n, v); }
  CoeffStore(const CoeffStore& o) { copy_from(o); }
  CoeffStore(CoeffStore&& o) noexcept { take(o); }
  CoeffStore& operator=(const CoeffStore& o) {
    if (this != &o) copy_from(o);
    return *this;
  }
  CoeffStore& operator=(CoeffStore&& o) noexcept {
    if (this != &o) take(o);
    return *this;
  }

  void assign(std::size_t n, double v) {
    resize(n);
    std::fill(begin(), end(), v);
  }

  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  [[nodiscard]] double* data() noexcept { return n_ > kInline ? heap_.get() : inline_; }
  [[nodiscard]] const double* data() const noexcept { return n_ > kInline ? heap_.get() : inline_; }
  double& operator[](std::size_t i) noexcept { return data()[i]; }
  const double& operator[](std::size_t i) const noexcept { return data()[i]; }
  double* begin() noexcept { return data(); }
  double* end() noexcept { return data() + n_; }
  const double* begin() const noexcept { return data(); }
  const double* end() const noexcept { return data() + n_; }

  operator std::span<double>() noexcept { return {data(), n_}; }
  operator std::span<const double>() const noexcept { return {data(), n_}; }

  friend void swap(CoeffStore& a, CoeffStore& b) noexcept {
    CoeffStore t(std::move(a));
    a = std::move(b);
    b = std::move(t);
  }

 private:
  void resize(std::size_t n) {
    if (n > kInline && n > cap_) {
      heap_.reset(new double[n]);
      cap_ = n;
    }
    n_ = n;
  }
  void copy_from(const CoeffStore& o) {
    resize(o.n_);
    std::copy(o.begin(), o.end(), begin());
  }
  void take(CoeffStore& o) noexcept {
    if (o.n_ > kInline) {
      heap_ = std::move(o.heap_);
      cap_ = o.cap_;
      n_ = o.n_;
      o.cap_ = 0;
      o.n_ = 0;
    } else {
      n_ = o.n_;
      std::copy(o.inline_, o.inline_ + o.n_, inline_);
    }
  }

  double inline_[kInline];
  std::unique_ptr<double[]> heap_;
  std::size_t cap_ = 0;
  std::size_t n_ = 0;
};

template <int NV>
class Jet {
 public:
  using Table = detail::MonomialTable<NV>;
  static constexpr int kMaxOrder = Table::kMaxOrder;

  Jet() : order_(0), c_(1, 0.0) {}

  explicit Jet(int order) : order_(order) {
    if (order < 0 || order > kMaxOrder) {
      throw std::out_of_range("jet order " + std::to_string(order) + " outside [0, " +
                              std::to_string(kMaxOrder) + "]");
    }
    c_.assign(static_cast<std::size_t>(table().count_upto[order]), 0.0);
  }

  static Jet constant(int order, double value) {
    Jet j(order);
    j.c_[0] = value;
    return j;
  }

  /// The coordinate function v_index, expanded around `value`.
  static Jet variable(int order, int index, double value) {
    Jet j(order);
    j.c_[0] = value;
    if (order >= 1) {
      MultiIndex<NV> m{};
      m[index] = 1;
      j.c_[table().index(m)] = 1.0;
    }
    return j;
  }

  [[nodiscard]] int order() const noexcept { return order_; }
  [[nodiscard]] std::size_t size() const noexcept { return c_.size(); }
  [[nodiscard]] double value() const noexcept { return c_[0]; }

  [[nodiscard]] std::span<const double> coefficients() const noexcept { return c_; }
  [[nodiscard]] std::span<double> coefficients() noexcept { return c_; }

  /// Normalized Taylor coefficient for multi-index m (0 beyond the order).
  [[nodiscard]] double coeff(const MultiIndex<NV>& m) const {
    const int idx = table().index(m);
    if (idx < 0 || idx >= static_cast<int>(c_.size())) return 0.0;
    return c_[idx];
  }

  /// Mixed partial derivative d^m f at the expansion point.
  [[nodiscard]] double partial(const MultiIndex<NV>& m) const {
    const int idx = table().index(m);
    if (idx < 0 || idx >= static_cast<int>(c_.size())) {
      throw std::out_of_range("partial derivative beyond jet order");
    }
    return c_[idx] * table().factorial_weight[idx];
  }

  /// First partial along variable i.
  [[nodiscard]] double d(int i) const {
    MultiIndex<NV> m{};
    m[i] = 1;
    return partial(m);
  }

  /// Second partial along variables i and j.
  [[nodiscard]] double d(int i, int j) const {
    MultiIndex<NV> m{};
    m[i] += 1;
    m[j] += 1;
    return partial(m);
  }

  [[nodiscard]] bool all_finite() const {
    return std::all_of(c_.begin(), c_.end(), [](double v) { return std::isfinite(v); });
  }

  /// Same expansion truncated to a lower order.
  [[nodiscard]] Jet truncated(int order) const {
    Jet out(order);
    std::copy_n(c_.begin(), out.c_.size(), out.c_.begin());
    return out;
  }

  /// Jet of d^m f, one order per unit of |m| lower than this jet.
  [[nodiscard]] Jet shifted(const MultiIndex<NV>& m) const {
    int dm = 0;
    for (int v : m) dm += v;
    Jet out(order_ - dm);
    const auto& t = table();
    for (std::size_t k = 0; k < out.c_.size(); ++k) {
      MultiIndex<NV> src{};
      double ratio = 1.0;
      for (int v = 0; v < NV; ++v) {
        src[v] = t.exponents[k][v] + m[v];
        for (int q = t.exponents[k][v] + 1; q <= src[v]; ++q) ratio *= q;
      }
      out.c_[k] = c_[t.index(src)] * ratio;
    }
    return out;
  }

  Jet& operator+=(const Jet& o) {
    check_order(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    check_order(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Jet& operator*=(double s) {
    for (double& v : c_) v *= s;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator-(Jet a) {
    for (double& v : a.c_) v = -v;
    return a;
  }

  /// Truncated Cauchy product.
  friend Jet operator*(const Jet& a, const Jet& b) {
    a.check_order(b);
    Jet out(a.order_);
    multiply_into(a, b, out);
    return out;
  }

  /// sum_k series[k] * (this - value())^k, i.e. f(this) where series holds
  /// the Taylor coefficients f^(k)(value()) / k! of a one-variable f.
  [[nodiscard]] Jet compose(std::span<const double> series) const {
    Jet h = *this;
    h.c_[0] = 0.0;
    const int top = std::min<int>(order_, static_cast<int>(series.size()) - 1);
    Jet r = constant(order_, top >= 0 ? series[top] : 0.0);
    if (top <= 0) return r;
    Jet tmp(order_);
    for (int k = top - 1; k >= 0; --k) {
      std::fill(tmp.c_.begin(), tmp.c_.end(), 0.0);
      multiply_into(r, h, tmp);
      swap(r.c_, tmp.c_);
      r.c_[0] += series[k];
    }
    return r;
  }

  static const Table& table() { return Table::get(); }

 private:
  // out += a * b, truncated; out must have the same order.
  static void multiply_into(const Jet& a, const Jet& b, Jet& out) {
    const auto& t = table();
    const int n = t.pairs_upto[a.order_];
    const double* pa = a.c_.data();
    const double* pb = b.c_.data();
    double* po = out.c_.data();
    for (int k = 0; k < n; ++k) {
      const auto& p = t.pairs[k];
      po[p.out] += pa[p.lhs] * pb[p.rhs];
    }
  }

  void check_order(const Jet& o) const {
    if (o.order_ != order_) throw std::logic_error("jet order mismatch");
  }

  int order_;
  CoeffStore c_;
};

using Jet1 = Jet<1>;
using Jet4 = Jet<4>;

/// Compose an outer jet (expanded in its own NV arguments at the values of
/// `inner`) with the inner argument jets: F(G_0, ..., G_{NV-1}).
template <int NV>
Jet<NV> compose(const Jet<NV>& outer, std::span<const Jet<NV>> inner) {
  const int order = outer.order();
  const auto& t = Jet<NV>::table();
  // powers[v][k] = (G_v - g_v)^k
  std::vector<std::vector<Jet<NV>>> powers(NV);
  for (int v = 0; v < NV; ++v) {
    Jet<NV> h = inner[v];
    h.coefficients()[0] = 0.0;
    powers[v].reserve(order + 1);
    powers[v].push_back(Jet<NV>::constant(order, 1.0));
    for (int k = 1; k <= order; ++k) powers[v].push_back(powers[v].back() * h);
  }
  Jet<NV> out(order);
  const auto oc = outer.coefficients();
  for (std::size_t idx = 0; idx < oc.size(); ++idx) {
    if (oc[idx] == 0.0) continue;
    const auto& m = t.exponents[idx];
    Jet<NV> term = Jet<NV>::constant(order, oc[idx]);
    for (int v = 0; v < NV; ++v) {
      if (m[v] > 0) term = term * powers[v][m[v]];
    }
    out += term;
  }
  return out;
}

namespace series {

// Taylor coefficients a_k = f^(k)(x0) / k! for k = 0..order.

inline std::vector<double> exp(double x0, int order) {
  std::vector<double> a(order + 1);
  a[0] = std::exp(x0);
  for (int k = 1; k <= order; ++k) a[k] = a[k - 1] / k;
  return a;
}

inline std::vector<double> log(double x0, int order) {
  std::vector<double> a(order + 1);
  a[0] = std::log(x0);
  double p = 1.0;
  for (int k = 1; k <= order; ++k) {
    p /= x0;
    a[k] = (k % 2 == 1 ? 1.0 : -1.0) * p / k;
  }
  return a;
}

inline std::vector<double> sin(double x0, int order) {
  const double s = std::sin(x0), c = std::cos(x0);
  const double cycle[4] = {s, c, -s, -c};
  std::vector<double> a(order + 1);
  double fact = 1.0;
  for (int k = 0; k <= order; ++k) {
    if (k > 0) fact *= k;
    a[k] = cycle[k % 4] / fact;
  }
  return a;
}

inline std::vector<double> cos(double x0, int order) {
  const double s = std::sin(x0), c = std::cos(x0);
  const double cycle[4] = {c, -s, -c, s};
  std::vector<double> a(order + 1);
  double fact = 1.0;
  for (int k = 0; k <= order; ++k) {
    if (k > 0) fact *= k;
    a[k] = cycle[k % 4] / fact;
  }
  return a;
}

/// tanh via the Riccati recurrence T' = 1 - T^2.
inline std::vector<double> tanh(double x0, int order) {
  std::vector<double> a(order + 1, 0.0);
  a[0] = std::tanh(x0);
  for (int k = 0; k < order; ++k) {
    double conv = 0.0;
    for (int i = 0; i <= k; ++i) conv += a[i] * a[k - i];
    a[k + 1] = ((k == 0 ? 1.0 : 0.0) - conv) / (k + 1);
  }
  return a;
}

/// x^r for real r, x0 > 0.
inline std::vector<double> real_power(double x0, double r, int order) {
  std::vector<double> a(order + 1);
  a[0] = std::pow(x0, r);
  for (int k = 1; k <= order; ++k) a[k] = a[k - 1] * (r - k + 1) / (k * x0);
  return a;
}

/// x^n for integer n; valid at x0 = 0 when n >= 0.
inline std::vector<double> int_power(double x0, int n, int order) {
  std::vector<double> a(order + 1, 0.0);
  double binom = 1.0;  // generalized C(n, k)
  for (int k = 0; k <= order; ++k) {
    if (k > 0) binom *= static_cast<double>(n - k + 1) / k;
    if (binom == 0.0) break;
    a[k] = binom * std::pow(x0, n - k);
  }
  return a;
}

inline std::vector<double> reciprocal(double x0, int order) {
  std::vector<double> a(order + 1);
  const double inv = 1.0 / x0;
  a[0] = inv;
  for (int k = 1; k <= order; ++k) a[k] = -a[k - 1] * inv;
  return a;
}

/// atan expanded around 0.
inline std::vector<double> atan_at_zero(int order) {
  std::vector<double> a(order + 1, 0.0);
  for (int k = 1; k <= order; k += 2) a[k] = ((k / 2) % 2 == 0 ? 1.0 : -1.0) / k;
  return a;
}

}  // namespace series

}  // namespace seaconv
