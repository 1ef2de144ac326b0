#pragma once

// Finite q-Hankel-type transforms H, U, V, F on (0,1], q-Fourier coefficients
// against the two orthogonal systems built on kernel zeros, and detection of
// the index from which a coefficient stream alternates in sign.

#include <cmath>
#include <concepts>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qhankel/error.hpp"
#include "qhankel/qbessel.hpp"
#include "qhankel/qcore.hpp"

namespace qhankel {

enum class TransformKind { H, U, V, F };

namespace detail {

inline void require_F_order(double nu) {
  if (!(nu > 0.0 && nu < 1.0) || nu == 0.5)
    throw std::invalid_argument("F transform needs nu in (0,1) \\ {1/2}");
}

}  // namespace detail

/// Kernel of the F transform in the normalization of the Example 4.2 closed
/// form:
///   W(t, z) = t^(1/2) [J_nu(tz) J_{-nu}(z q^-nu) - J_{-nu}(tz q^-nu) J_nu(z)].
/// At a cross-kernel zero z = z_k, t -> W(t, z_k) is the k-th element of the
/// orthogonal system used for the b_k coefficients.
template <std::floating_point Real = double>
class CrossPair {
 public:
  CrossPair(Real nu, const QContext& ctx)
      : q_(static_cast<Real>(ctx.q())), plus_(nu, q_ * q_, ctx), minus_(-nu, q_ * q_, ctx),
        shift_(std::pow(q_, -nu)) {}

  struct Anchor {
    Real j_plus;   // J_nu(z)
    Real j_minus;  // J_{-nu}(z q^-nu)
  };
  Anchor anchor(Real z) const { return {plus_.value(z), minus_.value(z * shift_)}; }

  Real operator()(Real t, Real z, const Anchor& a) const {
    if (t == Real(0)) return Real(0);
    return std::sqrt(t) * (plus_.value(t * z) * a.j_minus - minus_.value(t * z * shift_) * a.j_plus);
  }

  const HahnExton<Real>& plus() const noexcept { return plus_; }
  const HahnExton<Real>& minus() const noexcept { return minus_; }
  Real q() const noexcept { return q_; }

  /// q^(-1/2) W(q, z), the same for every z: both J_nu(q^i z) and
  /// J_{-nu}(q^(i-nu) z) solve
  ///   y_{i+1} = (q^nu + q^-nu - q^(2i-nu) z^2) y_i - y_{i-1},
  /// whose Casoratian is constant and read off at i -> infinity.
  Real first_step() const {
    return -plus_.prefactor() * minus_.prefactor() * std::pow(q_, nu() * nu()) * (shift_ - Real(1) / shift_);
  }

  /// W(q^i, z) on the Jackson grid by the recurrence above, started from
  /// W(1, z) = 0. The two products in W cancel to many digits once z is
  /// large; the recurrence only ever adds terms of one growing solution.
  class Grid {
   public:
    Grid(const CrossPair& pair, Real z) : Grid(pair, z * z, 0) {}

    /// The recurrence only involves z^2, so W(., z) on the grid is also
    /// defined (and real) on the imaginary axis, z^2 < 0.
    static Grid at_square(const CrossPair& pair, Real z2) { return Grid(pair, z2, 0); }

    Real operator()(std::size_t i) const {
      while (w_.size() <= i) {
        const std::size_t n = w_.size() - 1;
        const Real a = qnu_ + Real(1) / qnu_ - std::pow(q_, Real(2 * n)) / qnu_ * z2_;
        w_.push_back(a * w_[n] - w_[n - 1]);
      }
      return std::pow(q_, Real(i) / 2) * w_[i];
    }

   private:
    Grid(const CrossPair& pair, Real z2, int)
        : q_(pair.q_), qnu_(Real(1) / pair.shift_), z2_(z2), w_{Real(0), pair.first_step()} {}

    Real q_, qnu_, z2_;
    mutable std::vector<Real> w_;
  };

 private:
  Real nu() const { return plus_.order(); }

  Real q_;
  HahnExton<Real> plus_;
  HahnExton<Real> minus_;
  Real shift_;
};

/// -q^(-nu(nu-1)-1/2)/(1+q) * Gamma_{q^2}(nu) Gamma_{q^2}(1-nu).
template <std::floating_point Real>
Real F_prefactor(Real nu, const QContext& ctx) {
  const Real q = static_cast<Real>(ctx.q());
  const Real g = q_gamma(nu, q * q, ctx) * q_gamma(Real(1) - nu, q * q, ctx);
  return -std::pow(q, -nu * (nu - 1) - Real(0.5)) / (Real(1) + q) * g;
}

/// An evaluatable transform of a fixed f.
template <std::floating_point Real = double>
class TransformEvaluator {
 public:
  TransformEvaluator(TransformKind kind, GridFunction<Real> f, const BesselOrder& nu, const QContext& ctx,
                     double c = 1.0)
      : kind_(kind), f_(std::move(f)), nu_(static_cast<Real>(nu.value())), c_(c), ctx_(ctx),
        j_(nu_, static_cast<Real>(ctx.q()) * static_cast<Real>(ctx.q()), ctx) {
    if (kind_ == TransformKind::F) {
      detail::require_F_order(nu.value());
      cross_.emplace(nu_, ctx);
      prefactor_ = F_prefactor(nu_, ctx);
    }
  }

  TransformKind kind() const noexcept { return kind_; }
  const GridFunction<Real>& function() const noexcept { return f_; }
  Real order() const noexcept { return nu_; }
  double c() const noexcept { return c_; }
  const QContext& context() const noexcept { return ctx_; }

  Real operator()(Real z) const {
    if (!(z > 0)) throw numeric_error(errc::domain_error, "transform: need z > 0");
    if (kind_ == TransformKind::F) return estimate(z).value;
    return (*this)(NodePoint<Real>::from_real(z, j_.base()));
  }

  /// Same transform at a point given in node form; the J-type kernels are
  /// then evaluated at exact q-multiples of it.
  Real operator()(const NodePoint<Real>& p) const { return estimate(p).value; }

  struct Value {
    Real value;
    Real abs_sum;  ///< the Jackson sum taken over absolute values of the terms
  };

  /// Value with the magnitude of its summands, which bounds the rounding
  /// error of the sum by a few ulps of abs_sum.
  Value estimate(const NodePoint<Real>& p) const {
    const Real z = p.to_real(j_.base());
    const Real one_minus_q = Real(1) - static_cast<Real>(ctx_.q());
    Real abs_sum(0);
    auto track = [&](Real t, Real v) {
      abs_sum += one_minus_q * t * std::abs(v);
      return v;
    };
    if (kind_ == TransformKind::F) return estimate_F(z);
    const Real power = kind_ == TransformKind::H ? Real(0.5) : kind_ == TransformKind::U ? -nu_ : Real(1) - nu_;
    const Real value =
        integrate([&](int i, Real t) { return track(t, f_(t) * std::pow(t * z, power) * j_.value(p.scaled(i))); });
    return {value, abs_sum};
  }
  /// F at a point given by x = z^2, which may be negative (z on the
  /// imaginary axis, where F is real).
  Value estimate_F_at_square(Real x) const {
    if (kind_ != TransformKind::F) throw std::invalid_argument("estimate_F_at_square: not an F transform");
    return estimate_F(CrossPair<Real>::Grid::at_square(*cross_, x));
  }

  Value estimate(Real z) const {
    if (!(z > 0)) throw numeric_error(errc::domain_error, "transform: need z > 0");
    if (kind_ == TransformKind::F) return estimate_F(z);
    return estimate(NodePoint<Real>::from_real(z, j_.base()));
  }

 private:
  Value estimate_F(Real z) const { return estimate_F(typename CrossPair<Real>::Grid(*cross_, z)); }

  Value estimate_F(const typename CrossPair<Real>::Grid& w) const {
    const Real one_minus_q = Real(1) - static_cast<Real>(ctx_.q());
    Real abs_sum(0);
    const Real value = integrate([&](int i, Real t) {
      const Real v = f_(t) * w(static_cast<std::size_t>(i));
      abs_sum += one_minus_q * t * std::abs(v);
      return v;
    });
    return {prefactor_ * value, std::abs(prefactor_) * abs_sum};
  }

  template <class G>
  Real integrate(G&& g) const {
    return jackson_integral<Real>(std::forward<G>(g), Real(1), ctx_);
  }

  TransformKind kind_;
  GridFunction<Real> f_;
  Real nu_;
  double c_;
  QContext ctx_;
  HahnExton<Real> j_;
  std::optional<CrossPair<Real>> cross_;
  Real prefactor_{};
};

/// H(f; z) = int_0^1 f(t) (tz)^(1/2) J_nu(tz; q^2) d_qt
template <std::floating_point Real>
Real eval_H(const GridFunction<Real>& f, const BesselOrder& nu, Real z, const QContext& ctx) {
  return TransformEvaluator<Real>(TransformKind::H, f, nu, ctx)(z);
}

/// U(z) = int_0^1 (tz)^-nu g(t) J_nu(tz; q^2) d_qt
template <std::floating_point Real>
Real eval_U(const GridFunction<Real>& g, const BesselOrder& nu, Real z, const QContext& ctx) {
  return TransformEvaluator<Real>(TransformKind::U, g, nu, ctx)(z);
}

/// V(z) = int_0^1 (tz)^(1-nu) g(t) J_nu(tz; q^2) d_qt
template <std::floating_point Real>
Real eval_V(const GridFunction<Real>& g, const BesselOrder& nu, Real z, const QContext& ctx) {
  return TransformEvaluator<Real>(TransformKind::V, g, nu, ctx)(z);
}

/// F(f; z) for real f, nu in (0,1) \ {1/2}. c does not enter the transform
/// itself; it only selects the sampling nodes.
template <std::floating_point Real>
Real eval_F(const GridFunction<Real>& f, const BesselOrder& nu, double c, Real z, const QContext& ctx) {
  return TransformEvaluator<Real>(TransformKind::F, f, nu, ctx, c)(z);
}

namespace detail {

/// Node form of x t when t is (to rounding) a power q^i and x is known in
/// node form; otherwise converted from the product.
template <std::floating_point Real>
NodePoint<Real> scaled_point(const NodePoint<Real>& x, Real t, Real q) {
  const Real i = std::round(std::log(t) / std::log(q));
  if (i >= 0 && i < Real(1e6) && std::abs(t / std::pow(q, i) - Real(1)) <= Real(64) * std::numeric_limits<Real>::epsilon())
    return x.scaled(static_cast<long>(i));
  return NodePoint<Real>::from_real(x.to_real(q * q) * t, q * q);
}

}  // namespace detail

/// k-th element (q j_k t)^(1/2) J_nu(q j_k t; q^2) of the J-system.
template <std::floating_point Real>
GridFunction<Real> j_basis_element(const ZeroTable<Real>& table, std::size_t k) {
  const Real q = static_cast<Real>(table.spec.ctx.q());
  const auto x = table.node(k).scaled(1);
  const Real xr = q * table.at(k);
  HahnExton<Real> j(static_cast<Real>(table.spec.nu.value()), q * q, table.spec.ctx);
  return GridFunction<Real>(
      [j, x, xr, q](Real t) {
        if (t == Real(0)) return Real(0);
        return std::sqrt(xr * t) * j.value(detail::scaled_point(x, t, q));
      },
      "J-basis[" + std::to_string(k) + "]");
}

/// k-th element t^(1/2)[J_nu(t z_k) J_{-nu}(z_k q^-nu) - J_{-nu}(t z_k q^-nu) J_nu(z_k)]
/// of the cross system.
template <std::floating_point Real>
GridFunction<Real> cross_basis_element(const ZeroTable<Real>& table, std::size_t k) {
  CrossPair<Real> pair(static_cast<Real>(table.spec.nu.value()), table.spec.ctx);
  const Real zk = table.at(k);
  const auto a = pair.anchor(zk);
  const auto grid = std::make_shared<typename CrossPair<Real>::Grid>(pair, zk);
  const Real q = pair.q();
  return GridFunction<Real>(
      [pair, zk, a, grid, q](Real t) {
        if (t > 0 && t <= 1) {
          const Real i = std::round(std::log(t) / std::log(q));
          if (i < Real(1e6) && std::abs(t / std::pow(q, i) - Real(1)) <= Real(64) * std::numeric_limits<Real>::epsilon())
            return (*grid)(static_cast<std::size_t>(i));
        }
        return pair(t, zk, a);
      },
      "cross-basis[" + std::to_string(k) + "]");
}

/// ||(q j_k t)^(1/2) J_nu(q j_k t)||^2 from the closed orthogonality norm.
template <std::floating_point Real>
Real j_basis_norm_sq_closed(const ZeroTable<Real>& table, std::size_t k) {
  const auto& ctx = table.spec.ctx;
  const Real q = static_cast<Real>(ctx.q());
  const Real nu = static_cast<Real>(table.spec.nu.value());
  const auto jk = table.node(k);
  const HahnExton<Real> j(nu, q * q, ctx);
  const HahnExton<Real> j1(nu + 1, q * q, ctx);
  return q * table.at(k) *
         (-Real(0.5) * (Real(1) - q) * std::pow(q, nu - 1) * j1.value(jk.scaled(1)) * j.value_deriv(jk).deriv);
}

/// a_k = H(f; q j_k) / ||basis_k||^2. The norm is taken from the closed form
/// and checked against direct q-integration.
template <std::floating_point Real>
Real fourier_coeff_a(const GridFunction<Real>& f, const BesselOrder& nu, const ZeroTable<Real>& table,
                     std::size_t k, const QContext& ctx) {
  if (table.spec.kind != KernelKind::j_kernel || table.spec.nu.value() != nu.value())
    throw std::invalid_argument("fourier_coeff_a: table must hold J-kernel zeros of the same order");
  const Real closed = j_basis_norm_sq_closed(table, k);
  const auto basis = j_basis_element(table, k);
  const Real direct = jackson_integral<Real>([&](Real t) { const Real v = basis(t); return v * v; }, Real(1), ctx);
  if (!(direct > 0)) throw numeric_error(errc::zero_norm, "fourier_coeff_a: basis element has zero norm");
  if (std::abs(closed - direct) > Real(1e-9) * direct)
    throw numeric_error(errc::inconsistent_norm, "fourier_coeff_a: closed-form and direct norms disagree");
  const TransformEvaluator<Real> h(TransformKind::H, f, nu, ctx);
  return h(table.node(k).scaled(1)) / closed;
}

/// b_k against the cross system, together with the value implied by the
/// F transform at z_k: -F(z_k) / (prefactor-free constant * ||basis_k||^2).
template <std::floating_point Real>
struct CrossCoefficient {
  Real b;              ///< <f, basis_k> / ||basis_k||^2
  Real via_transform;  ///< F(z_k) / (F_prefactor * ||basis_k||^2)
  Real norm_sq;
};

template <std::floating_point Real>
CrossCoefficient<Real> fourier_coeff_b(const GridFunction<Real>& f, const BesselOrder& nu, double c,
                                       const ZeroTable<Real>& table, std::size_t k, const QContext& ctx) {
  if (table.spec.kind != KernelKind::cross_kernel || table.spec.nu.value() != nu.value() || table.spec.c != c)
    throw std::invalid_argument("fourier_coeff_b: table must hold cross-kernel zeros for (nu, c)");
  const auto basis = cross_basis_element(table, k);
  const Real norm_sq = jackson_integral<Real>([&](Real t) { const Real v = basis(t); return v * v; }, Real(1), ctx);
  if (!(norm_sq > 0)) throw numeric_error(errc::zero_norm, "fourier_coeff_b: basis element has zero norm");
  const Real inner = jackson_integral<Real>([&](Real t) { return f(t) * basis(t); }, Real(1), ctx);
  const Real nu_r = static_cast<Real>(nu.value());
  const Real fz = eval_F(f, nu, c, table.at(k), ctx);
  return {inner / norm_sq, fz / (F_prefactor(nu_r, ctx) * norm_sq), norm_sq};
}

enum class OrthogonalSystem { j_system, cross_system };

/// A computed stream of q-Fourier coefficients.
struct CoeffSequence {
  std::vector<double> values;
  OrthogonalSystem system = OrthogonalSystem::j_system;
  /// Values with |v| <= noise_floor[i] have indeterminate sign. Empty means
  /// 100 * series_tol for every entry.
  std::vector<double> noise_floor;
  /// First index (1-based) from which the signs strictly alternate; empty = never.
  std::optional<std::size_t> m0;
};

/// Smallest m0 with sign(v[m] v[m+1]) = -1 for every computed m >= m0.
/// Returns nullopt when the last pair does not alternate.
inline std::optional<std::size_t> alternation_scan(const CoeffSequence& coeffs, double series_tol = 1e-16) {
  const auto& v = coeffs.values;
  if (v.size() < 4) throw std::invalid_argument("alternation_scan: need at least 4 coefficients");
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double floor = coeffs.noise_floor.empty() ? 100.0 * series_tol : coeffs.noise_floor.at(i);
    if (!(std::abs(v[i]) > floor))
      throw numeric_error(errc::indeterminate_sign,
                          "alternation_scan: coefficient " + std::to_string(i + 1) + " is within noise of 0");
  }
  std::size_t m = v.size() - 1;  // 1-based index of the last pair's first element
  if (!((v[m - 1] < 0) != (v[m] < 0))) return std::nullopt;
  while (m > 1 && ((v[m - 2] < 0) != (v[m - 1] < 0))) --m;
  return m;
}

namespace detail {

/// Relative accuracy of one summand: kernel values are truncated at
/// series_tol and rounded at working precision.
template <std::floating_point Real>
Real summand_accuracy(const QContext& ctx) {
  return Real(16) * std::max(static_cast<Real>(ctx.series_tol()), Real(16) * std::numeric_limits<Real>::epsilon());
}

}  // namespace detail

/// a_1..a_count with per-entry noise floors: each a_k is a Jackson sum over
/// a closed-form norm, so the summed magnitudes times the per-summand
/// accuracy bound its error.
template <std::floating_point Real>
CoeffSequence coefficient_stream_a(const GridFunction<Real>& f, const BesselOrder& nu, const ZeroTable<Real>& table,
                                   std::size_t count, const QContext& ctx) {
  CoeffSequence out;
  out.system = OrthogonalSystem::j_system;
  const TransformEvaluator<Real> h(TransformKind::H, f, nu, ctx);
  const Real ulps = detail::summand_accuracy<Real>(ctx);
  for (std::size_t k = 1; k <= count; ++k) {
    const Real a = fourier_coeff_a(f, nu, table, k, ctx);
    const auto est = h.estimate(table.node(k).scaled(1));
    const Real closed = j_basis_norm_sq_closed(table, k);
    out.values.push_back(static_cast<double>(a));
    out.noise_floor.push_back(static_cast<double>(ulps * est.abs_sum / std::abs(closed)));
  }
  return out;
}

/// b_1..b_count against the cross system, floors as for coefficient_stream_a.
template <std::floating_point Real>
CoeffSequence coefficient_stream_b(const GridFunction<Real>& f, const BesselOrder& nu, double c,
                                   const ZeroTable<Real>& table, std::size_t count, const QContext& ctx) {
  CoeffSequence out;
  out.system = OrthogonalSystem::cross_system;
  const Real ulps = detail::summand_accuracy<Real>(ctx);
  for (std::size_t k = 1; k <= count; ++k) {
    const auto b = fourier_coeff_b(f, nu, c, table, k, ctx);
    const auto basis = cross_basis_element(table, k);
    const Real abs_inner =
        jackson_integral<Real>([&](Real t) { return std::abs(f(t) * basis(t)); }, Real(1), ctx);
    out.values.push_back(static_cast<double>(b.b));
    out.noise_floor.push_back(static_cast<double>(ulps * abs_inner / b.norm_sq));
  }
  return out;
}

}  // namespace qhankel
