#pragma once

// Truncated sampling series for H and F, their partial-fraction forms, the
// shifted-alternation modification of F and the rational function of the
// interlacing lemma.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qhankel/error.hpp"
#include "qhankel/qbessel.hpp"
#include "qhankel/qcore.hpp"
#include "qhankel/transforms.hpp"

namespace qhankel {

/// sum_i coeffs[i] / (x - poles[i]).
template <std::floating_point Real = double>
class PartialFractionSum {
 public:
  PartialFractionSum(std::vector<Real> poles, std::vector<Real> coeffs, double guard)
      : poles_(std::move(poles)), coeffs_(std::move(coeffs)), guard_(static_cast<Real>(guard)) {
    if (poles_.size() != coeffs_.size()) throw std::invalid_argument("PartialFractionSum: size mismatch");
    auto sorted = poles_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("PartialFractionSum: duplicate poles");
  }

  /// Poles -x_m..-x_1, x_1..x_m with A_{-k} = A_k.
  static PartialFractionSum symmetric(const std::vector<Real>& x, const std::vector<Real>& a, double guard) {
    if (x.size() != a.size()) throw std::invalid_argument("PartialFractionSum: size mismatch");
    std::vector<Real> p, c;
    for (std::size_t i = x.size(); i-- > 0;) {
      p.push_back(-x[i]);
      c.push_back(a[i]);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!(x[i] > 0) || (i > 0 && !(x[i] > x[i - 1])))
        throw std::invalid_argument("PartialFractionSum: positive poles must increase strictly");
      p.push_back(x[i]);
      c.push_back(a[i]);
    }
    PartialFractionSum s(std::move(p), std::move(c), guard);
    s.m_ = x.size();
    return s;
  }

  Real operator()(Real x) const {
    Real sum(0);
    for (std::size_t i = 0; i < poles_.size(); ++i) {
      const Real d = x - poles_[i];
      if (std::abs(d) <= guard_) throw numeric_error(errc::pole_proximity, "partial fraction: too close to a pole");
      sum += coeffs_[i] / d;
    }
    return sum;
  }

  const std::vector<Real>& poles() const noexcept { return poles_; }
  const std::vector<Real>& coeffs() const noexcept { return coeffs_; }
  /// Number of symmetric pairs; 0 for a general sum.
  std::size_t m() const noexcept { return m_; }
  Real guard() const noexcept { return guard_; }

 private:
  std::vector<Real> poles_;
  std::vector<Real> coeffs_;
  Real guard_;
  std::size_t m_ = 0;
};

template <std::floating_point Real>
Real eval_partial_fraction(const PartialFractionSum<Real>& p, Real x) {
  return p(x);
}

enum class SeriesKind { H, F };

/// Samples at the kernel nodes and the kernel derivatives there.
template <std::floating_point Real = double>
struct SamplingSeries {
  SeriesKind kind;
  TransformEvaluator<Real> transform;
  ZeroTable<Real> table;
  std::vector<Real> nodes;    ///< q j_k (H) or z_k (F)
  std::vector<Real> samples;  ///< transform at the nodes
  std::vector<Real> weights;  ///< alpha_k (H) or beta_k (F)
  std::size_t m = 0;
  std::size_t modification_m0 = 1;
  /// F only: zeros +-i s of the kernel off the real axis, with F and
  /// d kernel/d(z^2) there. Each pair adds F(i s)/kernel_x * kernel(z)/(z^2 + s^2).
  std::vector<ImaginaryZero<Real>> imaginary;
  std::vector<Real> imaginary_samples;

  Real guard() const { return Real(100) * static_cast<Real>(transform.context().root_tol()); }
};

/// samples[k] = H(f; q j_k), weights[k] = q^-1 J_nu'(j_k; q^2).
template <std::floating_point Real>
SamplingSeries<Real> build_H_series(const GridFunction<Real>& f, const BesselOrder& nu, const ZeroTable<Real>& table,
                                    std::size_t m, const QContext& ctx) {
  if (table.spec.kind != KernelKind::j_kernel || table.spec.nu.value() != nu.value())
    throw std::invalid_argument("build_H_series: table must hold J-kernel zeros of the same order");
  if (table.size() < m) throw std::invalid_argument("build_H_series: table has fewer than m zeros");
  SamplingSeries<Real> s{SeriesKind::H, TransformEvaluator<Real>(TransformKind::H, f, nu, ctx), table, {}, {}, {}, m, 1, {}, {}};
  const Real q = static_cast<Real>(ctx.q());
  const HahnExton<Real> j(static_cast<Real>(nu.value()), q * q, ctx);
  for (std::size_t k = 1; k <= m; ++k) {
    const auto node = table.node(k).scaled(1);
    s.nodes.push_back(q * table.at(k));
    s.samples.push_back(s.transform(node));
    s.weights.push_back(j.value_deriv(table.node(k)).deriv / q);
  }
  return s;
}

enum class FSeriesTerms {
  all_zeros,           ///< the positive zeros and the zeros on the imaginary axis
  positive_zeros_only  ///< exactly the terms k = 1..m
};

/// samples[k] = F(f; z_k), weights[k] = cross-kernel derivative at z_k.
/// With a kernel positive at 0 the positive zeros alone do not give a
/// complete system; by default the imaginary pair is added.
template <std::floating_point Real>
SamplingSeries<Real> build_F_series(const GridFunction<Real>& f, const BesselOrder& nu, double c,
                                    const ZeroTable<Real>& table, std::size_t m, const QContext& ctx,
                                    FSeriesTerms terms = FSeriesTerms::all_zeros) {
  if (table.spec.kind != KernelKind::cross_kernel || table.spec.nu.value() != nu.value() || table.spec.c != c)
    throw std::invalid_argument("build_F_series: table must hold cross-kernel zeros for (nu, c)");
  if (table.size() < m) throw std::invalid_argument("build_F_series: table has fewer than m zeros");
  SamplingSeries<Real> s{SeriesKind::F, TransformEvaluator<Real>(TransformKind::F, f, nu, ctx, c), table, {}, {}, {}, m, 1, {}, {}};
  const CrossKernel<Real> kernel(table.spec);
  for (std::size_t k = 1; k <= m; ++k) {
    const Real zk = table.at(k);
    s.nodes.push_back(zk);
    s.samples.push_back(s.transform(zk));
    s.weights.push_back(kernel.value_deriv(zk).deriv);
  }
  if (terms == FSeriesTerms::all_zeros) {
    s.imaginary = find_imaginary_zeros<Real>(table.spec);
    for (const auto& iz : s.imaginary) s.imaginary_samples.push_back(s.transform.estimate_F_at_square(iz.x).value);
  }
  return s;
}

namespace detail {

template <std::floating_point Real>
void require_off_poles(const SamplingSeries<Real>& s, Real z) {
  for (Real x : s.nodes)
    if (std::abs(z - x) <= s.guard()) throw numeric_error(errc::pole_proximity, "sampling series: z is at a node");
}

}  // namespace detail

/// Truncated H sampling series at z > 0.
template <std::floating_point Real>
Real eval_H_series(const SamplingSeries<Real>& s, Real z) {
  if (s.kind != SeriesKind::H) throw std::invalid_argument("eval_H_series: not an H series");
  if (!(z > 0)) throw numeric_error(errc::domain_error, "eval_H_series: need z > 0");
  detail::require_off_poles(s, z);
  const auto& ctx = s.transform.context();
  const Real q = static_cast<Real>(ctx.q());
  const HahnExton<Real> j(s.transform.order(), q * q, ctx);
  const Real jz = j.value(z / q);
  Real sum(0);
  for (std::size_t k = 0; k < s.m; ++k) {
    const Real x = s.nodes[k];
    sum += s.samples[k] / s.weights[k] * std::sqrt(x / z) * (Real(1) / (z - x) + Real(1) / (z + x));
  }
  return sum * jz;
}

/// z F(z) reconstructed from the truncated F sampling series, divided by z.
template <std::floating_point Real>
Real eval_F_series(const SamplingSeries<Real>& s, Real z) {
  if (s.kind != SeriesKind::F) throw std::invalid_argument("eval_F_series: not an F series");
  if (!(z > 0)) throw numeric_error(errc::domain_error, "eval_F_series: need z > 0");
  detail::require_off_poles(s, z);
  const CrossKernel<Real> kernel(s.table.spec);
  const Real kz = kernel.value(z);
  Real sum(0);
  for (std::size_t k = 0; k < s.m; ++k) {
    const Real x = s.nodes[k];
    sum += x * s.samples[k] / s.weights[k] * Real(2) * z / ((z - x) * (z + x));
  }
  sum /= z;
  for (std::size_t k = 0; k < s.imaginary.size(); ++k)
    sum += s.imaginary_samples[k] / s.imaginary[k].deriv / (z * z - s.imaginary[k].x);
  return sum * kz;
}

/// H: xi_m with A_k = (q j_k)^(1/2) samples/weights, so that
/// z^(1/2) H(z) / J_nu(z/q) ~ xi_m(z). F: phi_m with B_k = z_k samples/weights,
/// so that z F(z) / kernel(z) ~ phi_m(z).
template <std::floating_point Real>
PartialFractionSum<Real> partial_fraction(const SamplingSeries<Real>& s) {
  std::vector<Real> x(s.nodes.begin(), s.nodes.begin() + static_cast<std::ptrdiff_t>(s.m));
  std::vector<Real> a;
  for (std::size_t k = 0; k < s.m; ++k) {
    const Real scale = s.kind == SeriesKind::H ? std::sqrt(s.nodes[k]) : s.nodes[k];
    a.push_back(scale * s.samples[k] / s.weights[k]);
  }
  return PartialFractionSum<Real>::symmetric(x, a, static_cast<double>(s.guard()));
}

/// F minus the pole pairs k = 1..m0-1 of its sampling series. It agrees with
/// F at every z_k, k >= m0, and vanishes at z_1..z_{m0-1}.
template <std::floating_point Real = double>
class ModifiedF {
 public:
  ModifiedF(const SamplingSeries<Real>& s, std::size_t m0)
      : transform_(s.transform), kernel_(s.table.spec), m0_(m0), guard_(s.guard()) {
    if (s.kind != SeriesKind::F) throw std::invalid_argument("modified_F_series: not an F series");
    if (m0 < 1) throw std::invalid_argument("modified_F_series: need m0 >= 1");
    if (m0 - 1 > s.m) throw std::invalid_argument("modified_F_series: series shorter than m0 - 1");
    for (std::size_t k = 0; k + 1 < m0; ++k) {
      nodes_.push_back(s.nodes[k]);
      ratio_.push_back(s.samples[k] / s.weights[k]);
    }
  }

  /// Only the subtracted part at z; F(z) - subtracted(z) is the value.
  Real subtracted(Real z) const {
    if (nodes_.empty()) return Real(0);
    for (Real x : nodes_)
      if (std::abs(z - x) <= guard_) throw numeric_error(errc::pole_proximity, "modified F: z is at a subtracted node");
    const Real kz = kernel_.value(z);
    Real sum(0);
    for (std::size_t k = 0; k < nodes_.size(); ++k)
      sum += ratio_[k] * Real(2) * nodes_[k] / ((z - nodes_[k]) * (z + nodes_[k]));
    return sum * kz;
  }

  Real operator()(Real z) const { return transform_(z) - subtracted(z); }

  std::size_t m0() const noexcept { return m0_; }

 private:
  TransformEvaluator<Real> transform_;
  CrossKernel<Real> kernel_;
  std::size_t m0_;
  Real guard_;
  std::vector<Real> nodes_;
  std::vector<Real> ratio_;  ///< F(z_k) / beta_k
};

template <std::floating_point Real>
ModifiedF<Real> modified_F_series(const SamplingSeries<Real>& s, std::size_t m0) {
  return ModifiedF<Real>(s, m0);
}

/// Two-sided limit of g at x from g(x +- h) and g(x +- h/2), Richardson
/// combined. For removable 0/0 points of the sampling series.
template <std::floating_point Real, class G>
Real two_sided_limit(G&& g, Real x, Real h) {
  const Real wide = (g(x + h) + g(x - h)) / 2;
  const Real narrow = (g(x + h / 2) + g(x - h / 2)) / 2;
  return (Real(4) * narrow - wide) / 3;
}

}  // namespace qhankel
