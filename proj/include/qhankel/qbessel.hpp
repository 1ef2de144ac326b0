#pragma once

// Hahn-Exton (third Jackson) q-Bessel functions J_nu(z; q^2), the second-kind
// combination Y_nu, the cross kernel whose zeros drive the F-transform
// sampling series, and certified tables of positive zeros.

#include <cmath>
#include <concepts>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qhankel/error.hpp"
#include "qhankel/qcore.hpp"

namespace qhankel {

/// Bessel order nu > -1.
class BesselOrder {
 public:
  explicit BesselOrder(double nu) : nu_(nu) {
    if (!std::isfinite(nu) || !(nu > -1.0)) throw std::invalid_argument("BesselOrder: need nu > -1");
  }
  double value() const noexcept { return nu_; }
  bool is_integer() const noexcept { return nu_ == std::round(nu_); }

 private:
  double nu_;
};

template <std::floating_point Real>
struct ValueDeriv {
  Real value;
  Real deriv;
};

/// A positive argument z written against the nodes of the base Q:
/// Q z^2 = Q^(-n) (1 - eps). J_nu(.; Q) has its large zeros extremely close
/// to such nodes, and multiplying z by Q^(j/2) only shifts n, so zeros and
/// their q-multiples keep full relative precision in eps.
template <std::floating_point Real = double>
struct NodePoint {
  long n = 0;
  Real eps = 0;

  /// Nearest node in the sense of the smallest |eps|.
  static NodePoint from_real(Real z, Real base) {
    if (!(z > 0) || !std::isfinite(z)) throw numeric_error(errc::domain_error, "NodePoint: need finite z > 0");
    const Real c = base * z * z;
    const long n = std::lround(std::log(c) / -std::log(base));
    const Real w = z * std::pow(base, Real(n + 1) / 2);
    return {n, (Real(1) - w) * (Real(1) + w)};
  }

  Real to_real(Real base) const { return std::pow(base, -Real(n + 1) / 2) * std::sqrt(Real(1) - eps); }

  /// The point z * base^(j/2).
  NodePoint scaled(long j) const { return {n - j, eps}; }
};

namespace detail {

template <std::floating_point Real>
struct SymmetricSum {
  Real s;      ///< sum_k (-1)^k Q^(k(k-1)/2) b^k (cQ^k;Q)_inf / (Q;Q)_k
  Real ds_dc;  ///< derivative in c = Q z^2
};

/// The generating sum of (b;Q)_inf 1phi1(0;b;Q;c), written with the roles
/// of b and c exchanged. Every term is a product of well-conditioned
/// factors; the one factor 1 - cQ^n that may be tiny is eps itself.
template <std::floating_point Real>
SymmetricSum<Real> symmetric_sum(const NodePoint<Real>& p, Real b, Real base, Real tol, int max_terms) {
  const Real ln_base = std::log(base);
  const long n = p.n;
  const Real eps = p.eps;
  const long extra = static_cast<long>(std::ceil(std::log(tol / 16) / ln_base)) + 2;
  const long size = std::max(n, -1L) + 1 + extra + 8;
  if (size > max_terms) throw numeric_error(errc::budget_exhausted, "HahnExton: argument beyond max_terms nodes");
  thread_local std::vector<Real> f, qi, D;
  f.resize(static_cast<std::size_t>(size));
  qi.resize(static_cast<std::size_t>(size));
  D.assign(static_cast<std::size_t>(size) + 1, Real(0));
  Real qd = std::exp(-Real(n) * ln_base);  // Q^(i-n)
  Real qp(1);                               // Q^i
  for (long i = 0; i < size; ++i) {
    qi[i] = qp;
    f[i] = i == n ? eps : (Real(1) - qd) + qd * eps;
    qd *= base;
    qp *= base;
  }
  // D[k] = -sum_{i >= k, i != n} Q^i / f_i
  for (long i = size - 1; i >= 0; --i) D[i] = D[i + 1] - (i == n ? Real(0) : qi[i] / f[i]);
  Real term(1);
  for (long i = 0; i < size; ++i)
    if (i != n) term *= f[i];

  const Real qn = n >= 0 ? qi[n] : Real(0);
  Real a(0), a_abs(0), da(0), bsum(0), b_abs(0), db(0);
  int small_run = 0;
  for (long k = 0; k + 1 < size; ++k) {
    if (k <= n) {
      a += term;
      a_abs += std::abs(term);
      da += term * (eps * D[k] - qn);
    } else {
      bsum += term;
      b_abs += std::abs(term);
      db += term * D[k];
      const Real scale = std::abs(eps) * a_abs + b_abs;
      if (term == Real(0) || (k > n + 1 && std::abs(term) <= tol * scale)) {
        if (term == Real(0) || ++small_run >= 2) return {eps * a + bsum, da + db};
      } else {
        small_run = 0;
      }
    }
    const Real ratio = -qi[k] * b / (Real(1) - qi[k] * base);
    term *= k == n ? ratio : ratio / f[k];
  }
  throw numeric_error(errc::budget_exhausted, "HahnExton: symmetric series did not settle");
}

}  // namespace detail

/// J_nu(z; base) = z^nu R(z), with R(z) = (b;base)_inf/(base;base)_inf
/// 1phi1(0; b; base; base z^2) and b = base^(nu+1). R is even and entire.
template <std::floating_point Real = double>
class HahnExton {
 public:
  HahnExton(Real nu, Real base, const QContext& ctx)
      : nu_(nu), base_(base), b_(std::pow(base, nu + 1)), tol_(static_cast<Real>(ctx.series_tol())),
        max_terms_(ctx.max_terms()) {
    if (!(nu > -1)) throw std::invalid_argument("HahnExton: need nu > -1");
    if (!(base > 0 && base < 1)) throw std::invalid_argument("HahnExton: base must lie in (0,1)");
    inv_euler_ = Real(1) / q_pochhammer(base_, base_, infinity, ctx);
    prefactor_ = q_pochhammer(b_, base_, infinity, ctx) * inv_euler_;
  }

  Real order() const noexcept { return nu_; }
  Real base() const noexcept { return base_; }
  /// (b;base)_inf / (base;base)_inf, the value R(0).
  Real prefactor() const noexcept { return prefactor_; }

  /// R and R' = dR/dz.
  ValueDeriv<Real> reduced(const NodePoint<Real>& p) const {
    const auto s = detail::symmetric_sum(p, b_, base_, tol_, max_terms_);
    const Real z = p.to_real(base_);
    return {s.s * inv_euler_, s.ds_dc * Real(2) * base_ * z * inv_euler_};
  }

  ValueDeriv<Real> reduced(Real z) const {
    if (z == Real(0)) return {prefactor_, Real(0)};
    return reduced(NodePoint<Real>::from_real(std::abs(z), base_));
  }

  /// R and R' straight from the power series in base z^2; accurate only
  /// while the terms do not dwarf the sum.
  ValueDeriv<Real> series_reduced(Real z) const {
    const Real w = base_ * z * z;
    Real coeff(1);
    Real sum(1);
    Real weighted(0);  // sum k c_k w^k
    Real qk(1);
    int small_run = 0;
    for (int k = 0; k < max_terms_; ++k) {
      const Real ratio = -qk * w / ((Real(1) - b_ * qk) * (Real(1) - qk * base_));
      coeff *= ratio;
      sum += coeff;
      weighted += Real(k + 1) * coeff;
      const bool past_peak = std::abs(ratio) < Real(1);
      if (coeff == Real(0) ||
          (past_peak && std::abs(coeff) <= tol_ * std::abs(sum) &&
           Real(k + 1) * std::abs(coeff) <= tol_ * std::abs(weighted))) {
        if (coeff == Real(0) || ++small_run >= 2) {
          const Real d = z == Real(0) ? Real(0) : Real(2) * weighted / z;
          return {prefactor_ * sum, prefactor_ * d};
        }
      } else {
        small_run = 0;
      }
      qk *= base_;
    }
    throw numeric_error(errc::budget_exhausted, "HahnExton: series did not converge within max_terms");
  }

  /// R and dR/dx as functions of x = z^2, for x <= 0 (z on the imaginary
  /// axis). There every term of the power series is positive.
  ValueDeriv<Real> reduced_at_square(Real x) const {
    if (x > 0) throw numeric_error(errc::domain_error, "HahnExton: reduced_at_square needs x <= 0");
    if (x == Real(0)) return {prefactor_, -prefactor_ * base_ / ((Real(1) - b_) * (Real(1) - base_))};
    const Real w = base_ * x;
    Real coeff(1), sum(1), weighted(0), qk(1);
    for (int k = 0; k < max_terms_; ++k) {
      const Real ratio = -qk * w / ((Real(1) - b_ * qk) * (Real(1) - qk * base_));
      coeff *= ratio;
      sum += coeff;
      weighted += Real(k + 1) * coeff;
      if (!std::isfinite(sum)) throw numeric_error(errc::non_finite_sample, "HahnExton: overflow on the imaginary axis");
      if (ratio < Real(1) && Real(k + 1) * coeff <= tol_ * weighted) return {prefactor_ * sum, prefactor_ * weighted / x};
      qk *= base_;
    }
    throw numeric_error(errc::budget_exhausted, "HahnExton: series did not converge within max_terms");
  }

  Real value(Real z) const { return value_deriv(z).value; }
  Real value(const NodePoint<Real>& p) const { return value_deriv(p).value; }

  /// J and dJ/dz for z >= 0.
  ValueDeriv<Real> value_deriv(Real z) const {
    if (z < 0) throw numeric_error(errc::domain_error, "HahnExton: negative argument");
    if (z == Real(0)) {
      const Real r0 = prefactor_;
      if (nu_ == Real(0)) return {r0, Real(0)};
      if (nu_ > 0) return {Real(0), nu_ == Real(1) ? r0 : (nu_ > 1 ? Real(0) : std::numeric_limits<Real>::infinity())};
      return {std::numeric_limits<Real>::infinity(), -std::numeric_limits<Real>::infinity()};
    }
    return value_deriv(NodePoint<Real>::from_real(z, base_));
  }

  ValueDeriv<Real> value_deriv(const NodePoint<Real>& p) const {
    const auto r = reduced(p);
    const Real z = p.to_real(base_);
    const Real zn = std::pow(z, nu_);
    return {zn * r.value, nu_ * zn / z * r.value + zn * r.deriv};
  }

 private:
  Real nu_;
  Real base_;
  Real b_;
  Real tol_;
  int max_terms_;
  Real inv_euler_{};
  Real prefactor_{};
};

/// J_nu(z; q_base) for z >= 0.
template <std::floating_point Real>
Real bessel_J(const BesselOrder& nu, Real z, Real q_base, const QContext& ctx) {
  return HahnExton<Real>(static_cast<Real>(nu.value()), q_base, ctx).value(z);
}

/// d/dz J_nu(z; q_base), termwise.
template <std::floating_point Real>
Real bessel_J_deriv(const BesselOrder& nu, Real z, Real q_base, const QContext& ctx) {
  if (!(z > 0)) throw numeric_error(errc::domain_error, "bessel_J_deriv: need z > 0");
  return HahnExton<Real>(static_cast<Real>(nu.value()), q_base, ctx).value_deriv(z).deriv;
}

namespace detail {

inline void require_Y_order(double nu) {
  if (nu == std::round(nu)) throw numeric_error(errc::integer_order_unsupported, "bessel_Y: integer order");
  if (!(std::abs(nu) < 1.0)) throw numeric_error(errc::domain_error, "bessel_Y: need |nu| < 1 so that -nu > -1");
}

}  // namespace detail

/// Second-kind combination
/// Y_nu(z;b) = Gamma_b(nu)Gamma_b(1-nu)/pi (b^(nu/2) cos(pi nu) J_nu(z;b) - J_{-nu}(z b^(-nu/2); b)).
template <std::floating_point Real = double>
class SecondKind {
 public:
  SecondKind(Real nu, Real base, const QContext& ctx)
      : plus_(nu, base, ctx), minus_((detail::require_Y_order(static_cast<double>(nu)), -nu), base, ctx) {
    gamma_product_ = q_gamma(nu, base, ctx) * q_gamma(Real(1) - nu, base, ctx);
    cos_term_ = std::pow(base, nu / 2) * std::cos(std::numbers::pi_v<Real> * nu);
    shift_ = std::pow(base, -nu / 2);
  }

  /// Gamma_b(nu) Gamma_b(1-nu)
  Real gamma_product() const noexcept { return gamma_product_; }

  ValueDeriv<Real> value_deriv(Real z) const {
    if (!(z > 0)) throw numeric_error(errc::domain_error, "bessel_Y: need z > 0");
    const auto j = plus_.value_deriv(z);
    const auto m = minus_.value_deriv(z * shift_);
    const Real scale = gamma_product_ / std::numbers::pi_v<Real>;
    return {scale * (cos_term_ * j.value - m.value), scale * (cos_term_ * j.deriv - shift_ * m.deriv)};
  }
  Real value(Real z) const { return value_deriv(z).value; }

 private:
  HahnExton<Real> plus_;
  HahnExton<Real> minus_;
  Real gamma_product_{};
  Real cos_term_{};
  Real shift_{};
};

template <std::floating_point Real>
Real bessel_Y(double nu, Real z, Real q_base, const QContext& ctx) {
  return SecondKind<Real>(static_cast<Real>(nu), q_base, ctx).value(z);
}

template <std::floating_point Real>
Real bessel_Y_deriv(double nu, Real z, Real q_base, const QContext& ctx) {
  return SecondKind<Real>(static_cast<Real>(nu), q_base, ctx).value_deriv(z).deriv;
}

enum class KernelKind { j_kernel, cross_kernel };

/// Which kernel's zeros to tabulate: J_nu(z; q^2) or the cross kernel
/// q^(nu^2) z^-nu J_nu(z;q^2) - c z^nu J_{-nu}(q^-nu z; q^2).
struct KernelSpec {
  KernelSpec(KernelKind kind, BesselOrder nu, double c, QContext ctx)
      : kind(kind), nu(nu), c(c), ctx(ctx) {
    if (kind == KernelKind::cross_kernel) {
      const double v = nu.value();
      if (!(v > 0.0 && v < 1.0) || v == 0.5)
        throw std::invalid_argument("KernelSpec: cross kernel needs nu in (0,1) \\ {1/2}");
    }
  }

  static KernelSpec j_kernel(double nu, QContext ctx) {
    return {KernelKind::j_kernel, BesselOrder(nu), 0.0, ctx};
  }
  static KernelSpec cross(double nu, QContext ctx, double c = 1.0) {
    return {KernelKind::cross_kernel, BesselOrder(nu), c, ctx};
  }

  KernelKind kind;
  BesselOrder nu;
  double c;
  QContext ctx;
};

/// Cross kernel evaluated through the reduced (even, entire) parts:
/// q^(nu^2) [R_nu(z) - c R_{-nu}(q^-nu z)].
template <std::floating_point Real = double>
class CrossKernel {
 public:
  explicit CrossKernel(const KernelSpec& spec)
      : q_(static_cast<Real>(spec.ctx.q())),
        nu_(static_cast<Real>(spec.nu.value())),
        c_(static_cast<Real>(spec.c)),
        plus_(nu_, q_ * q_, spec.ctx),
        minus_(-nu_, q_ * q_, spec.ctx),
        front_(std::pow(q_, nu_ * nu_)),
        shift_(std::pow(q_, -nu_)) {
    if (spec.kind != KernelKind::cross_kernel) throw std::invalid_argument("CrossKernel: wrong kernel kind");
  }

  ValueDeriv<Real> value_deriv(Real z) const {
    if (z < 0) throw numeric_error(errc::domain_error, "cross_kernel: negative argument");
    const auto p = plus_.reduced(z);
    const auto m = minus_.reduced(shift_ * z);
    return {front_ * (p.value - c_ * m.value), front_ * (p.deriv - c_ * shift_ * m.deriv)};
  }
  Real value(Real z) const { return value_deriv(z).value; }

  /// The kernel and its x-derivative as functions of x = z^2 <= 0.
  ValueDeriv<Real> value_deriv_at_square(Real x) const {
    const Real s2 = shift_ * shift_;
    const auto p = plus_.reduced_at_square(x);
    const auto m = minus_.reduced_at_square(s2 * x);
    return {front_ * (p.value - c_ * m.value), front_ * (p.deriv - c_ * s2 * m.deriv)};
  }

  /// c below this keeps the kernel positive on (0, z_1).
  Real positivity_threshold() const { return plus_.prefactor() / minus_.prefactor(); }

  const HahnExton<Real>& plus() const noexcept { return plus_; }
  const HahnExton<Real>& minus() const noexcept { return minus_; }
  Real shift() const noexcept { return shift_; }

 private:
  Real q_;
  Real nu_;
  Real c_;
  HahnExton<Real> plus_;
  HahnExton<Real> minus_;
  Real front_;
  Real shift_;
};

template <std::floating_point Real>
Real cross_kernel(const KernelSpec& spec, Real z) {
  if (!(z > 0)) throw numeric_error(errc::domain_error, "cross_kernel: need z > 0");
  return CrossKernel<Real>(spec).value(z);
}

template <std::floating_point Real>
Real cross_kernel_deriv(const KernelSpec& spec, Real z) {
  if (!(z > 0)) throw numeric_error(errc::domain_error, "cross_kernel_deriv: need z > 0");
  return CrossKernel<Real>(spec).value_deriv(z).deriv;
}

/// Uniform evaluator over either kernel kind.
template <std::floating_point Real = double>
class Kernel {
 public:
  explicit Kernel(const KernelSpec& spec) : kind_(spec.kind), base_(static_cast<Real>(spec.ctx.q()) * static_cast<Real>(spec.ctx.q())) {
    const Real q = static_cast<Real>(spec.ctx.q());
    if (kind_ == KernelKind::j_kernel)
      j_.emplace(static_cast<Real>(spec.nu.value()), q * q, spec.ctx);
    else
      cross_.emplace(spec);
  }

  ValueDeriv<Real> value_deriv(Real z) const {
    return j_ ? j_->value_deriv(z) : cross_->value_deriv(z);
  }
  ValueDeriv<Real> value_deriv(const NodePoint<Real>& p) const {
    return j_ ? j_->value_deriv(p) : cross_->value_deriv(p.to_real(base_));
  }
  Real value(Real z) const { return value_deriv(z).value; }
  Real value(const NodePoint<Real>& p) const { return value_deriv(p).value; }
  /// Base q^2 of the node representation.
  Real base() const noexcept { return base_; }

 private:
  KernelKind kind_;
  Real base_;
  std::optional<HahnExton<Real>> j_;
  std::optional<CrossKernel<Real>> cross_;
};

/// Ordered positive zeros of a kernel with per-zero certificates.
template <std::floating_point Real = double>
struct ZeroTable {
  KernelSpec spec;
  std::vector<Real> zeros;
  std::vector<NodePoint<Real>> nodes;            ///< zeros in node form, base q^2
  std::vector<Real> residual;                    ///< |kernel(z_k)|
  std::vector<Real> derivative;                  ///< kernel'(z_k)
  std::vector<std::pair<Real, Real>> bracket;    ///< sign-change bracket
  int scan_steps = 0;

  std::size_t size() const noexcept { return zeros.size(); }
  /// 1-based access matching the usual j_{k nu} / z_k numbering.
  Real at(std::size_t k) const { return zeros.at(k - 1); }
  const NodePoint<Real>& node(std::size_t k) const { return nodes.at(k - 1); }
};

struct ZeroScanOptions {
  /// Grid start; defaults to root_tol.
  std::optional<double> z_start;
  /// Grid ratio; defaults to q^(-1/16).
  std::optional<double> ratio;
  int max_scan_steps = 400000;
};

namespace detail {

/// Absolute bisection tolerance at the scale of x.
template <std::floating_point Real>
Real root_tolerance(Real x, double root_tol) {
  return std::max(static_cast<Real>(root_tol), Real(8) * std::numeric_limits<Real>::epsilon() * std::abs(x));
}

/// Bisection on [lo, hi] with f(lo) f(hi) < 0. Returns the final bracket.
template <std::floating_point Real, class F>
std::pair<Real, Real> bisect(F&& f, Real lo, Real hi, Real flo, Real tol) {
  for (int it = 0; it < 400 && hi - lo > tol; ++it) {
    const Real mid = lo + (hi - lo) / 2;
    if (mid <= lo || mid >= hi) break;
    const Real fm = f(mid);
    if (fm == Real(0)) return {mid, mid};
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return {lo, hi};
}

/// Midpoint that halves [lo, hi] on a log scale when the endpoints share a
/// sign and differ by orders of magnitude, so tiny offsets are reached fast.
template <std::floating_point Real>
Real offset_midpoint(Real lo, Real hi) {
  const Real tiny = std::numeric_limits<Real>::min();
  if (lo < 0 && hi > 0) return hi > -lo ? tiny : -tiny;
  if (lo >= 0 && hi > 0 && hi > 4 * std::max(lo, tiny)) return std::sqrt(std::max(lo, tiny)) * std::sqrt(hi);
  if (hi <= 0 && lo < 0 && -lo > 4 * std::max(-hi, tiny)) return -std::sqrt(std::max(-hi, tiny)) * std::sqrt(-lo);
  return lo + (hi - lo) / 2;
}

/// Root of g(NodePoint{n, eps}) for eps in [lo, hi] with a sign change,
/// refined to full relative precision in eps.
template <std::floating_point Real, class G>
std::pair<Real, Real> bisect_offset(G&& g, long n, Real lo, Real hi) {
  Real glo = g(NodePoint<Real>{n, lo});
  for (int it = 0; it < 2000; ++it) {
    if (hi - lo <= Real(4) * std::numeric_limits<Real>::epsilon() * std::max(std::abs(lo), std::abs(hi))) break;
    const Real mid = offset_midpoint(lo, hi);
    if (!(mid > lo && mid < hi)) break;
    const Real gm = g(NodePoint<Real>{n, mid});
    if (gm == Real(0)) return {mid, mid};
    if ((gm < 0) == (glo < 0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return {lo, hi};
}

/// Refines a sign change of g between the real points a < b in the frame of
/// the node nearest to them. `exact_a` / `exact_b` replace the conversion of
/// an endpoint when it is already known in node form.
template <std::floating_point Real, class G>
NodePoint<Real> refine_root(G&& g, Real a, Real b, Real base, const std::optional<NodePoint<Real>>& exact_a = {},
                            const std::optional<NodePoint<Real>>& exact_b = {}) {
  const auto mid = NodePoint<Real>::from_real(a + (b - a) / 2, base);
  const long n = mid.n;
  auto offset_of = [&](Real z, const std::optional<NodePoint<Real>>& exact) {
    if (exact && exact->n == n) return exact->eps;
    const Real w = z * std::pow(base, Real(n + 1) / 2);
    return (Real(1) - w) * (Real(1) + w);
  };
  // larger z means smaller eps
  const Real lo = offset_of(b, exact_b);
  const Real hi = offset_of(a, exact_a);
  auto [l, h] = bisect_offset<Real>(g, n, lo, hi);
  return {n, l + (h - l) / 2};
}

}  // namespace detail

/// First `count` positive zeros, bracketed on the geometric grid
/// z_start * rho^m and refined by bisection in node coordinates.
template <std::floating_point Real = double>
ZeroTable<Real> find_zeros(const KernelSpec& spec, std::size_t count, const ZeroScanOptions& opt = {}) {
  const Kernel<Real> kernel(spec);
  const auto& ctx = spec.ctx;
  ZeroTable<Real> table{spec, {}, {}, {}, {}, {}, 0};
  if (count == 0) return table;
  const Real rho = static_cast<Real>(opt.ratio.value_or(std::pow(ctx.q(), -1.0 / 16.0)));
  if (!(rho > 1)) throw std::invalid_argument("find_zeros: grid ratio must exceed 1");
  Real z = static_cast<Real>(opt.z_start.value_or(ctx.root_tol()));
  auto f = [&](Real x) { return kernel.value(x); };
  auto g = [&](const NodePoint<Real>& p) { return kernel.value(p); };
  Real fz = f(z);
  for (int step = 0; step < opt.max_scan_steps; ++step) {
    const Real z2 = z * rho;
    const Real f2 = f(z2);
    table.scan_steps = step + 1;
    if (!std::isfinite(f2)) throw numeric_error(errc::scan_exhausted, "find_zeros: kernel overflowed during scan");
    if (f2 == Real(0) || (fz < 0) != (f2 < 0)) {
      const auto root = f2 == Real(0) ? NodePoint<Real>::from_real(z2, kernel.base())
                                      : detail::refine_root<Real>(g, z, z2, kernel.base());
      const Real zr = root.to_real(kernel.base());
      const auto vd = kernel.value_deriv(root);
      table.zeros.push_back(zr);
      table.nodes.push_back(root);
      table.residual.push_back(std::abs(vd.value));
      table.derivative.push_back(vd.deriv);
      table.bracket.emplace_back(z, z2);
      if (table.zeros.size() == count) return table;
      // step past an exact grid zero so it is not counted twice
      z = z2;
      fz = f2 == Real(0) ? f(z2 * (Real(1) + (rho - 1) / 2)) : f2;
      continue;
    }
    z = z2;
    fz = f2;
  }
  throw numeric_error(errc::scan_exhausted, "find_zeros: found " + std::to_string(table.zeros.size()) + " of " +
                                                std::to_string(count) + " zeros within the scan budget");
}

/// A zero z = +-i s of the cross kernel on the imaginary axis.
template <std::floating_point Real>
struct ImaginaryZero {
  Real s;
  Real x;         ///< z^2 = -s^2
  Real residual;  ///< |kernel| at x
  Real deriv;     ///< d kernel / dx at x
};

/// Zeros of the cross kernel on the imaginary axis with root_tol < s <= s_max,
/// from a sign scan of the kernel as a function of z^2 < 0. The kernel
/// tends to -sign(c) infinity along that ray, so a kernel positive at 0
/// (c below positivity_threshold) has at least one of them. The scan stops
/// early, without error, once the kernel leaves the floating-point range.
template <std::floating_point Real = double>
std::vector<ImaginaryZero<Real>> find_imaginary_zeros(const KernelSpec& spec, double s_max = 1e8,
                                                      const ZeroScanOptions& opt = {}) {
  const CrossKernel<Real> kernel(spec);
  const auto& ctx = spec.ctx;
  const Real rho = static_cast<Real>(opt.ratio.value_or(std::pow(ctx.q(), -1.0 / 16.0)));
  if (!(rho > 1)) throw std::invalid_argument("find_imaginary_zeros: grid ratio must exceed 1");
  auto f = [&](Real s) { return kernel.value_deriv_at_square(-s * s).value; };
  std::vector<ImaginaryZero<Real>> out;
  Real s = static_cast<Real>(opt.z_start.value_or(ctx.root_tol()));
  Real fs = f(s);
  for (int step = 0; step < opt.max_scan_steps && s < static_cast<Real>(s_max); ++step) {
    const Real s2 = s * rho;
    Real f2;
    try {
      f2 = f(s2);
    } catch (const numeric_error&) {
      break;
    }
    if (!std::isfinite(f2)) break;
    if (f2 == Real(0) || (fs < 0) != (f2 < 0)) {
      // bisect in x = -s^2
      Real lo = -s * s, hi = -s2 * s2, flo = fs;
      while (std::abs(hi - lo) > Real(4) * std::numeric_limits<Real>::epsilon() * std::abs(hi)) {
        const Real mid = (lo + hi) / 2;
        if (mid == lo || mid == hi) break;
        const Real fm = kernel.value_deriv_at_square(mid).value;
        if (fm == Real(0)) {
          lo = hi = mid;
          break;
        }
        if ((fm < 0) == (flo < 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      const Real x = (lo + hi) / 2;
      const auto vd = kernel.value_deriv_at_square(x);
      out.push_back({std::sqrt(-x), x, std::abs(vd.value), vd.deriv});
      s = s2;
      fs = f2 == Real(0) ? f(s2 * (Real(1) + (rho - 1) / 2)) : f2;
      continue;
    }
    s = s2;
    fs = f2;
  }
  return out;
}

/// Both sides of int_0^1 t J_nu(q j t; q^2)^2 d_qt
///   = -(1/2)(1-q) q^(nu-1) J_{nu+1}(q j; q^2) J_nu'(j; q^2).
template <std::floating_point Real>
std::pair<Real, Real> orthogonality_identity(const BesselOrder& nu, std::size_t k, const ZeroTable<Real>& table,
                                             const QContext& ctx) {
  if (table.spec.kind != KernelKind::j_kernel || table.spec.nu.value() != nu.value())
    throw std::invalid_argument("orthogonality_identity: table must hold J-kernel zeros of the same order");
  const Real q = static_cast<Real>(ctx.q());
  const Real n = static_cast<Real>(nu.value());
  const HahnExton<Real> j(n, q * q, ctx);
  const HahnExton<Real> j1(n + 1, q * q, ctx);
  const auto zk = table.node(k);
  // q j t at t = q^i is the node point of q j shifted by i
  const Real lhs = jackson_integral<Real>(
      [&](int i, Real t) { const Real v = j.value(zk.scaled(i + 1)); return t * v * v; }, Real(1), ctx);
  const Real rhs =
      -Real(0.5) * (Real(1) - q) * std::pow(q, n - 1) * j1.value(zk.scaled(1)) * j.value_deriv(zk).deriv;
  return {lhs, rhs};
}

}  // namespace qhankel
