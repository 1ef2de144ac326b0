#pragma once

// Foundational q-calculus: q-shifted factorials, basic hypergeometric series,
// q-Gamma, the Jackson q-integral, the q-difference operator and the L^2_q
// inner product on (0,1].

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "qhankel/error.hpp"

namespace qhankel {

/// Global numeric configuration shared by every kernel.
class QContext {
 public:
  explicit QContext(double q, double series_tol = 1e-16, int max_terms = 4000,
                    double root_tol = 1e-12)
      : q_(q), series_tol_(series_tol), max_terms_(max_terms), root_tol_(root_tol) {
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("QContext: q must lie in (0,1)");
    if (!(series_tol > 0.0)) throw std::invalid_argument("QContext: series_tol must be > 0");
    if (!(root_tol > 0.0)) throw std::invalid_argument("QContext: root_tol must be > 0");
    if (max_terms < 1) throw std::invalid_argument("QContext: max_terms must be >= 1");
  }

  double q() const noexcept { return q_; }
  double series_tol() const noexcept { return series_tol_; }
  int max_terms() const noexcept { return max_terms_; }
  double root_tol() const noexcept { return root_tol_; }

  QContext with_q(double q) const { return QContext(q, series_tol_, max_terms_, root_tol_); }
  QContext with_max_terms(int n) const { return QContext(q_, series_tol_, n, root_tol_); }
  QContext with_root_tol(double t) const { return QContext(q_, series_tol_, max_terms_, t); }
  QContext with_series_tol(double t) const { return QContext(q_, t, max_terms_, root_tol_); }

 private:
  double q_;
  double series_tol_;
  int max_terms_;
  double root_tol_;
};

/// A value together with an a-posteriori truncation error bound.
template <class V>
struct Estimate {
  V value{};
  double abs_error = 0.0;
  int terms = 0;
};

/// A real function on (0,1] sampled at Jackson nodes.
template <std::floating_point Real = double>
class GridFunction {
 public:
  using evaluator_type = std::function<Real(Real)>;

  GridFunction() : GridFunction(zero()) {}
  GridFunction(evaluator_type f, std::string label = {})
      : f_(std::move(f)), label_(std::move(label)) {}

  Real operator()(Real t) const { return f_(t); }
  const std::string& label() const noexcept { return label_; }

  static GridFunction zero() {
    return GridFunction([](Real) { return Real(0); }, "0");
  }
  static GridFunction constant(Real c) {
    return GridFunction([c](Real) { return c; }, "const");
  }
  /// t -> t^alpha
  static GridFunction monomial(Real alpha) {
    return GridFunction([alpha](Real t) { return std::pow(t, alpha); },
                        "t^" + std::to_string(static_cast<double>(alpha)));
  }

 private:
  evaluator_type f_;
  std::string label_;
};

/// Squared L^2_q(0,1) norm with the number of Jackson nodes used.
struct L2qWitness {
  double norm_sq = 0.0;
  int terms_used = 0;
};

/// Tag selecting the infinite product (a;q)_inf.
struct infinite_t {
  explicit constexpr infinite_t() = default;
};
inline constexpr infinite_t infinity{};

namespace detail {

template <class V>
auto abs_of(const V& v) {
  using std::abs;
  return abs(v);
}

}  // namespace detail

/// (a;base)_k for finite k. k = 0 gives exactly 1.
template <class V, std::floating_point B>
V q_pochhammer(const V& a, B base, std::size_t k) {
  V p(1);
  B qi(1);
  for (std::size_t i = 0; i < k; ++i) {
    p *= V(1) - a * qi;
    qi *= base;
  }
  return p;
}

/// (a;base)_inf with its truncation error bound. Truncates once
/// |a base^i|/(1-base) drops below series_tol.
template <class V, std::floating_point B>
Estimate<V> q_pochhammer_estimate(const V& a, B base, infinite_t, const QContext& ctx) {
  using std::abs;
  V p(1);
  B qi(1);
  const B tol = static_cast<B>(ctx.series_tol());
  for (int i = 0; i < ctx.max_terms(); ++i) {
    const V t = a * qi;
    const auto mag = static_cast<B>(detail::abs_of(t));
    if (mag / (B(1) - base) < tol) {
      // |log tail| <= sum_{j>=i} |a base^j| / (1 - |a base^j|)
      const B log_tail = mag / ((B(1) - base) * (B(1) - mag));
      const double err = static_cast<double>(detail::abs_of(p)) * std::expm1(static_cast<double>(log_tail));
      return {p, err, i};
    }
    p *= V(1) - t;
    qi *= base;
  }
  throw numeric_error(errc::budget_exhausted, "q_pochhammer: infinite product tail above tolerance");
}

template <class V, std::floating_point B>
V q_pochhammer(const V& a, B base, infinite_t inf, const QContext& ctx) {
  return q_pochhammer_estimate(a, base, inf, ctx).value;
}

/// (a;q)_k in the context base q.
template <class V>
V q_pochhammer(const V& a, std::size_t k, const QContext& ctx) {
  return q_pochhammer(a, ctx.q(), k);
}
template <class V>
V q_pochhammer(const V& a, infinite_t inf, const QContext& ctx) {
  return q_pochhammer(a, ctx.q(), inf, ctx);
}

/// (a_1,...,a_n;q)_k: product of the individual shifted factorials.
template <class V, class K>
V multi_q_pochhammer(std::span<const V> as, K k, const QContext& ctx) {
  if (as.empty()) throw std::invalid_argument("multi_q_pochhammer: empty parameter list");
  V p(1);
  for (const auto& a : as) p *= q_pochhammer(a, k, ctx);
  return p;
}

/// r phi s (a; b; base; z) summed until two consecutive terms fall below
/// series_tol * |partial sum| past the largest term.
template <std::floating_point Real>
Estimate<Real> basic_hypergeometric_estimate(std::span<const Real> a, std::span<const Real> b, Real base,
                                             Real z, const QContext& ctx) {
  if (!(base > 0 && base < 1)) throw std::invalid_argument("basic_hypergeometric: base must lie in (0,1)");
  const int expo = 1 + static_cast<int>(b.size()) - static_cast<int>(a.size());
  const Real tol = static_cast<Real>(ctx.series_tol());
  Real term(1);
  Real sum(1);
  Real qk(1);  // base^k
  int small_run = 0;
  int growth_run = 0;
  for (int k = 0; k < ctx.max_terms(); ++k) {
    // term_{k+1} / term_k
    Real ratio = z / (Real(1) - qk * base);
    for (const Real& ai : a) ratio *= Real(1) - ai * qk;
    for (const Real& bj : b) {
      const Real den = Real(1) - bj * qk;
      if (std::abs(den) <= std::numeric_limits<Real>::epsilon())
        throw numeric_error(errc::singular_parameter, "basic_hypergeometric: (b;q)_k vanished");
      ratio /= den;
    }
    if (expo != 0) ratio *= std::pow(-qk, static_cast<Real>(expo));
    const Real next = term * ratio;
    sum += next;
    if (!std::isfinite(sum)) throw numeric_error(errc::divergence_suspected, "basic_hypergeometric: overflow");
    if (next == Real(0)) return {sum, 0.0, k + 2};  // terminating series
    if (std::abs(ratio) > Real(1) && expo < 0) {
      if (++growth_run >= 8) throw numeric_error(errc::divergence_suspected, "basic_hypergeometric: terms grow");
    } else {
      growth_run = 0;
    }
    if (std::abs(next) <= tol * std::abs(sum) && std::abs(ratio) < Real(1)) {
      if (++small_run >= 2) return {sum, static_cast<double>(std::abs(next)), k + 2};
    } else {
      small_run = 0;
    }
    term = next;
    qk *= base;
  }
  throw numeric_error(errc::budget_exhausted, "basic_hypergeometric: max_terms reached");
}

template <std::floating_point Real>
Real basic_hypergeometric(std::span<const Real> a, std::span<const Real> b, Real base, Real z,
                          const QContext& ctx) {
  return basic_hypergeometric_estimate(a, b, base, z, ctx).value;
}

template <std::floating_point Real>
Real basic_hypergeometric(const std::vector<Real>& a, const std::vector<Real>& b, Real base, Real z,
                          const QContext& ctx) {
  return basic_hypergeometric(std::span<const Real>(a), std::span<const Real>(b), base, z, ctx);
}

/// Jackson q-Gamma: (b;b)_inf / (b^x;b)_inf * (1-b)^(1-x) for base b.
template <std::floating_point Real>
Real q_gamma(Real x, Real base, const QContext& ctx) {
  if (!(base > 0 && base < 1)) throw std::invalid_argument("q_gamma: base must lie in (0,1)");
  const Real den = q_pochhammer(std::pow(base, x), base, infinity, ctx);
  const Real rounded = std::round(x);
  if (std::abs(den) <= Real(16) * std::numeric_limits<Real>::epsilon() ||
      (x <= 0 && std::abs(x - rounded) <= Real(16) * std::numeric_limits<Real>::epsilon()))
    throw numeric_error(errc::pole, "q_gamma: pole at nonpositive integer");
  return q_pochhammer(base, base, infinity, ctx) / den * std::pow(Real(1) - base, Real(1) - x);
}

/// x(1-q) sum_k q^k f(x q^k), truncated by a geometric tail bound. f may
/// also take (k, node) when it needs the node index.
///
/// The tail after node k is bounded with the largest |f| over the last few
/// nodes and their per-node growth rate, so slowly blowing-up integrands
/// such as t^alpha, alpha > -1, are handled.
template <std::floating_point Real, class F>
Estimate<Real> jackson_integral_estimate(F&& f, Real upper, const QContext& ctx) {
  if (upper < 0) throw std::invalid_argument("jackson_integral: upper limit must be >= 0");
  if (upper == 0) return {Real(0), 0.0, 0};
  constexpr int window = 4;
  const Real q = static_cast<Real>(ctx.q());
  const Real tol = static_cast<Real>(ctx.series_tol());
  Real node = upper;
  Real weight(1);
  Real sum(0);
  Real recent[window] = {};
  for (int k = 0; k < ctx.max_terms(); ++k) {
    Real fv;
    if constexpr (std::is_invocable_v<F&, int, Real>)
      fv = static_cast<Real>(f(k, node));
    else
      fv = static_cast<Real>(f(node));
    if (!std::isfinite(fv)) throw numeric_error(errc::non_finite_sample, "jackson_integral: non-finite sample");
    sum += weight * fv;
    recent[k % window] = std::abs(fv);
    weight *= q;
    node *= q;
    if (k + 1 >= window) {
      const Real newest = recent[k % window];
      const Real oldest = recent[(k + 1) % window];
      Real late_max(0);
      for (const Real& r : recent) late_max = std::max(late_max, r);
      Real growth(1);
      if (oldest > 0 && newest > oldest) growth = std::pow(newest / oldest, Real(1) / Real(window - 1));
      const Real rho = q * growth;
      if (rho < Real(1)) {
        const Real tail = upper * (Real(1) - q) * late_max * weight / (Real(1) - rho);
        const Real total = upper * (Real(1) - q) * sum;
        if (tail <= tol * std::abs(total) || (late_max == 0 && sum == 0))
          return {total, static_cast<double>(tail), k + 1};
      }
    }
  }
  throw numeric_error(errc::budget_exhausted, "jackson_integral: max_terms reached");
}

template <std::floating_point Real, class F>
Real jackson_integral(F&& f, Real upper, const QContext& ctx) {
  return jackson_integral_estimate<Real>(std::forward<F>(f), upper, ctx).value;
}

template <std::floating_point Real>
Real jackson_integral(const GridFunction<Real>& f, Real upper, const QContext& ctx) {
  return jackson_integral_estimate<Real>(f, upper, ctx).value;
}

/// int_a^b f d_q t = I(f, b) - I(f, a), 0 <= a <= b.
template <std::floating_point Real, class F>
Real jackson_integral_ab(F&& f, Real a, Real b, const QContext& ctx) {
  if (!(a >= 0 && a <= b)) throw std::invalid_argument("jackson_integral_ab: need 0 <= a <= b");
  if (a == b) return Real(0);
  return jackson_integral<Real>(f, b, ctx) - jackson_integral<Real>(f, a, ctx);
}

/// Jackson q-difference operator. At t = 0 the limit of the difference
/// quotients along q^n is taken once three successive quotients agree to
/// root_tol.
template <std::floating_point Real, class F>
Real q_derivative(F&& f, Real t, const QContext& ctx) {
  const Real q = static_cast<Real>(ctx.q());
  if (t < 0) throw std::invalid_argument("q_derivative: t must be >= 0");
  if (t != 0) return (f(t) - f(q * t)) / ((Real(1) - q) * t);

  const Real f0 = f(Real(0));
  const Real tol = static_cast<Real>(ctx.root_tol());
  Real h(1);
  Real prev = std::numeric_limits<Real>::quiet_NaN();
  int agree = 0;
  for (int n = 0; n < ctx.max_terms() && h > std::numeric_limits<Real>::min(); ++n) {
    h *= q;
    const Real d = (f(h) - f0) / h;
    if (!std::isfinite(d)) break;
    if (std::isfinite(prev) && std::abs(d - prev) <= tol) {
      if (++agree >= 2) return d;
    } else {
      agree = 0;
    }
    prev = d;
  }
  throw numeric_error(errc::no_limit, "q_derivative: difference quotients at 0 did not stabilize");
}

/// <f, g> = int_0^1 f(t) g(t) d_q t for real f, g.
template <std::floating_point Real>
Real l2q_inner(const GridFunction<Real>& f, const GridFunction<Real>& g, const QContext& ctx) {
  return jackson_integral<Real>([&](Real t) { return f(t) * g(t); }, Real(1), ctx);
}

template <std::floating_point Real>
L2qWitness l2q_norm_sq(const GridFunction<Real>& f, const QContext& ctx) {
  const auto e = jackson_integral_estimate<Real>([&](Real t) { const Real v = f(t); return v * v; }, Real(1), ctx);
  return {static_cast<double>(e.value), e.terms};
}

}  // namespace qhankel
