#pragma once

// Localization of the zeros of H and F in the intervals between consecutive
// kernel zeros, with a per-interval certificate, and the classical interval
// system of the Example 4.1 constants.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qhankel/error.hpp"
#include "qhankel/qbessel.hpp"
#include "qhankel/qcore.hpp"
#include "qhankel/sampling.hpp"
#include "qhankel/transforms.hpp"

namespace qhankel {

enum class Certification { certified_one_zero, no_sign_change, multiple_sign_changes };

inline const char* to_string(Certification c) {
  switch (c) {
    case Certification::certified_one_zero: return "certified-one-zero";
    case Certification::no_sign_change: return "no-sign-change";
    case Certification::multiple_sign_changes: return "multiple-sign-changes";
  }
  return "unknown";
}

/// theorem: an interval the theorem asserts one zero in. below_m0: between
/// z_k, z_{k+1} with k < m0, scanned on F itself. origin: (0, first node).
enum class IntervalTag { theorem, below_m0, origin };

inline const char* to_string(IntervalTag t) {
  switch (t) {
    case IntervalTag::theorem: return "theorem";
    case IntervalTag::below_m0: return "below-m0";
    case IntervalTag::origin: return "origin";
  }
  return "unknown";
}

template <std::floating_point Real>
struct ScanResult {
  int sign_lo = 0;  ///< sign at the left endpoint
  int sign_hi = 0;
  int sign_changes = 0;
  std::optional<Real> zero;
  Real residual{};  ///< |g(zero)|
  Certification certification = Certification::no_sign_change;
  /// |g| at both endpoints exceeds 10 * residual.
  bool endpoints_excluded = false;
};

template <std::floating_point Real>
struct IntervalRecord {
  std::size_t k = 0;
  Real lo{}, hi{};
  IntervalTag tag = IntervalTag::theorem;
  ScanResult<Real> scan;
  /// For the modified F: the same interval scanned on F itself.
  std::optional<ScanResult<Real>> transform_scan;
  /// The zero in node coordinates, when it lies within rounding of an
  /// endpoint node and was refined there.
  std::optional<NodePoint<Real>> zero_node;

  /// Zero of the transform itself (F rather than the modified F).
  std::optional<Real> transform_zero() const { return transform_scan ? transform_scan->zero : scan.zero; }
  bool certified() const { return scan.certification == Certification::certified_one_zero && scan.endpoints_excluded; }
};

template <std::floating_point Real>
struct LocalizationReport {
  TransformKind kind = TransformKind::H;
  std::vector<IntervalRecord<Real>> intervals;
  std::optional<IntervalRecord<Real>> origin;
  CoeffSequence coefficients;
  std::optional<std::size_t> detected_m0;
  std::size_t m0 = 1;
  bool hypothesis_holds = false;
  std::string hypothesis_note;
  std::size_t requested_K = 0;

  bool certified() const {
    if (!hypothesis_holds) return false;
    for (const auto& r : intervals)
      if (r.tag == IntervalTag::theorem && !r.certified()) return false;
    return true;
  }
};

namespace detail {

inline int sign_of(double v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

/// `points` equally spaced samples over [lo, hi] with the endpoint values
/// supplied by the caller, then bisection inside the one sign change.
template <std::floating_point Real, class G>
ScanResult<Real> scan_interval(G&& g, Real lo, Real hi, Real g_lo, Real g_hi, double root_tol, int points = 256) {
  ScanResult<Real> r;
  r.sign_lo = sign_of(static_cast<double>(g_lo));
  r.sign_hi = sign_of(static_cast<double>(g_hi));
  std::vector<Real> xs(static_cast<std::size_t>(points)), vs(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    xs[i] = i == points - 1 ? hi : lo + (hi - lo) * Real(i) / Real(points - 1);
    vs[i] = i == 0 ? g_lo : (i == points - 1 ? g_hi : g(xs[i]));
    if (!std::isfinite(vs[i])) throw numeric_error(errc::non_finite_sample, "zero scan: non-finite sample");
  }
  // sign changes between consecutive nonzero samples; exact zeros in
  // between belong to the change they sit in
  std::optional<std::pair<int, int>> bracket;
  int last = -1;
  for (int i = 0; i < points; ++i) {
    if (sign_of(static_cast<double>(vs[i])) == 0) continue;
    if (last >= 0 && sign_of(static_cast<double>(vs[last])) * sign_of(static_cast<double>(vs[i])) < 0) {
      ++r.sign_changes;
      bracket = std::make_pair(last, i);
    }
    last = i;
  }
  if (r.sign_changes == 0) {
    r.certification = Certification::no_sign_change;
    return r;
  }
  if (r.sign_changes > 1) {
    r.certification = Certification::multiple_sign_changes;
    return r;
  }
  Real a = xs[bracket->first], b = xs[bracket->second], fa = vs[bracket->first], fb = vs[bracket->second];
  const Real tol = std::max({static_cast<Real>(root_tol), Real(1e-12) * (hi - lo)});
  // zeros may sit far closer to an endpoint than tol, so the bracket is
  // narrowed to working precision; tol is what the certificate demands
  for (;;) {
    const Real m = a + (b - a) / 2;
    if (m <= a || m >= b) break;
    const Real fm = g(m);
    if (fm == Real(0)) {
      a = b = m;
      break;
    }
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
      fb = fm;
    }
  }
  const Real zero = a + (b - a) / 2;
  r.zero = zero;
  r.residual = std::abs(g(zero));
  // the residual must be consistent with the final bracket
  const bool settled = b - a <= tol && r.residual <= std::abs(fa) + std::abs(fb);
  r.certification = settled ? Certification::certified_one_zero : Certification::multiple_sign_changes;
  r.endpoints_excluded = std::abs(g_lo) > Real(10) * r.residual && std::abs(g_hi) > Real(10) * r.residual;
  return r;
}

template <std::floating_point Real>
std::size_t cap_intervals(const ZeroTable<Real>& table, std::size_t K) {
  // zeros crowd as q -> 1; stop before brackets that are not resolved
  std::size_t k = 0;
  while (k < K && table.at(k + 2) - table.at(k + 1) > Real(1e-9) * table.at(k + 2)) ++k;
  return k;
}

inline bool alternation_from(const CoeffSequence& c, std::size_t m0, std::optional<std::size_t>& detected,
                             std::string& note) {
  try {
    detected = alternation_scan(c);
  } catch (const numeric_error& e) {
    note = e.what();
    return false;
  }
  if (!detected) {
    note = "coefficients do not alternate at the end of the computed range";
    return false;
  }
  if (*detected > m0) {
    note = "coefficients alternate only from index " + std::to_string(*detected);
    return false;
  }
  return true;
}

}  // namespace detail

namespace detail {

/// Bisection in the offset eps of NodePoint{end.n, eps} for a zero that sits
/// closer to the node `end` than the spacing of Real near it. `z0` is the
/// zero found on the real axis and `toward` is +1 when the interval lies
/// above the node. On success the record's zero, residual and endpoint
/// exclusion are replaced by the refined ones.
template <std::floating_point Real, class H>
void refine_at_node(const H& h, const NodePoint<Real>& end, Real g_end, int toward, Real base, Real g_lo, Real g_hi,
                    IntervalRecord<Real>& r) {
  const int s_end = sign_of(static_cast<double>(g_end));
  if (s_end == 0) return;
  const Real z0 = *r.scan.zero;
  Real step = std::abs(z0) * std::numeric_limits<Real>::epsilon();
  std::optional<NodePoint<Real>> other;
  for (int i = 0; i < 64 && !other; ++i, step *= 2) {
    const auto p = NodePoint<Real>::from_real(z0 + Real(toward) * step, base);
    if (p.n != end.n) return;
    if (sign_of(static_cast<double>(h(p))) == -s_end) other = p;
  }
  if (!other) return;
  Real a = end.eps, b = other->eps;
  for (;;) {
    const Real m = a + (b - a) / 2;
    if (m == a || m == b) break;
    const int sm = sign_of(static_cast<double>(h(NodePoint<Real>{end.n, m})));
    if (sm == 0) {
      a = b = m;
      break;
    }
    (sm == s_end ? a : b) = m;
  }
  const NodePoint<Real> zero{end.n, a + (b - a) / 2};
  if (zero.eps == end.eps) return;
  r.zero_node = zero;
  r.scan.zero = zero.to_real(base);
  r.scan.residual = std::abs(h(zero));
  r.scan.endpoints_excluded = std::abs(g_lo) > Real(10) * r.scan.residual && std::abs(g_hi) > Real(10) * r.scan.residual;
}

}  // namespace detail

/// Zeros of H(f; .) in (q j_k, q j_{k+1}), k = 1..K (Theorem 3.2 intervals).
/// The hypothesis is that the q-Fourier coefficients a_k alternate from
/// k = 1; when it fails the report is still produced, uncertified.
template <std::floating_point Real>
LocalizationReport<Real> localize_H_zeros(const GridFunction<Real>& f, const BesselOrder& nu,
                                          const ZeroTable<Real>& table, std::size_t K, const QContext& ctx) {
  if (table.spec.kind != KernelKind::j_kernel || table.spec.nu.value() != nu.value())
    throw std::invalid_argument("localize_H_zeros: table must hold J-kernel zeros of the same order");
  if (table.size() < K + 1) throw std::invalid_argument("localize_H_zeros: table needs K+1 zeros");
  LocalizationReport<Real> rep;
  rep.kind = TransformKind::H;
  rep.requested_K = K;
  rep.coefficients = coefficient_stream_a(f, nu, table, std::max<std::size_t>(K + 1, 4), ctx);
  rep.hypothesis_holds = detail::alternation_from(rep.coefficients, 1, rep.detected_m0, rep.hypothesis_note);
  rep.coefficients.m0 = rep.detected_m0;

  const TransformEvaluator<Real> h(TransformKind::H, f, nu, ctx);
  const Real q = static_cast<Real>(ctx.q());
  auto g = [&](Real z) { return h(z); };
  auto end_value = [&](std::size_t k) { return h(table.node(k).scaled(1)); };
  const std::size_t n = detail::cap_intervals(table, K);
  Real hv = end_value(1);
  for (std::size_t k = 1; k <= n; ++k) {
    IntervalRecord<Real> r;
    r.k = k;
    r.lo = q * table.at(k);
    r.hi = q * table.at(k + 1);
    const Real next = end_value(k + 1);
    r.scan = detail::scan_interval<Real>(g, r.lo, r.hi, hv, next, ctx.root_tol());
    if (r.scan.certification == Certification::certified_one_zero && !r.scan.endpoints_excluded) {
      const bool near_hi = r.hi - *r.scan.zero < *r.scan.zero - r.lo;
      const auto end = table.node(near_hi ? k + 1 : k).scaled(1);
      detail::refine_at_node(h, end, near_hi ? next : hv, near_hi ? -1 : 1, q * q, hv, next, r);
    }
    rep.intervals.push_back(r);
    hv = next;
  }
  IntervalRecord<Real> o;
  o.tag = IntervalTag::origin;
  o.hi = q * table.at(1);
  o.lo = o.hi / 512;
  o.scan = detail::scan_interval<Real>(g, o.lo, o.hi, h(o.lo), end_value(1), ctx.root_tol());
  rep.origin = o;
  return rep;
}

/// Zeros of F(f; .) in (z_k, z_{k+1}). For m0 = 1 these are certified on F
/// (Theorem 3.3); for m0 > 1 the intervals with k >= m0 are certified on
/// the modified transform of Remark 3.4 and F itself is scanned alongside,
/// and the intervals below m0 are scanned on F without a theorem behind them.
template <std::floating_point Real>
LocalizationReport<Real> localize_F_zeros(const GridFunction<Real>& f, const BesselOrder& nu, double c,
                                          const ZeroTable<Real>& table, std::size_t K, std::size_t m0,
                                          const QContext& ctx) {
  if (table.spec.kind != KernelKind::cross_kernel || table.spec.nu.value() != nu.value() || table.spec.c != c)
    throw std::invalid_argument("localize_F_zeros: table must hold cross-kernel zeros for (nu, c)");
  if (table.size() < K + 1) throw std::invalid_argument("localize_F_zeros: table needs K+1 zeros");
  if (m0 < 1) throw std::invalid_argument("localize_F_zeros: need m0 >= 1");
  LocalizationReport<Real> rep;
  rep.kind = TransformKind::F;
  rep.requested_K = K;
  rep.m0 = m0;
  rep.coefficients = coefficient_stream_b(f, nu, c, table, std::max<std::size_t>(K + 1, 4), ctx);
  rep.hypothesis_holds = detail::alternation_from(rep.coefficients, m0, rep.detected_m0, rep.hypothesis_note);
  rep.coefficients.m0 = rep.detected_m0;

  const TransformEvaluator<Real> F(TransformKind::F, f, nu, ctx, c);
  auto plain = [&](Real z) { return F(z); };
  std::optional<ModifiedF<Real>> modified;
  if (m0 > 1) {
    const auto s = build_F_series(f, nu, c, table, m0 - 1, ctx, FSeriesTerms::positive_zeros_only);
    modified.emplace(s, m0);
  }
  auto mod = [&](Real z) { return (*modified)(z); };

  const std::size_t n = detail::cap_intervals(table, K);
  for (std::size_t k = 1; k <= n; ++k) {
    IntervalRecord<Real> r;
    r.k = k;
    r.lo = table.at(k);
    r.hi = table.at(k + 1);
    const Real f_lo = plain(r.lo), f_hi = plain(r.hi);
    if (k < m0) {
      r.tag = IntervalTag::below_m0;
      r.scan = detail::scan_interval<Real>(plain, r.lo, r.hi, f_lo, f_hi, ctx.root_tol());
    } else if (!modified) {
      r.scan = detail::scan_interval<Real>(plain, r.lo, r.hi, f_lo, f_hi, ctx.root_tol());
    } else {
      r.scan = detail::scan_interval<Real>(mod, r.lo, r.hi, mod(r.lo), mod(r.hi), ctx.root_tol());
      r.transform_scan = detail::scan_interval<Real>(plain, r.lo, r.hi, f_lo, f_hi, ctx.root_tol());
    }
    rep.intervals.push_back(r);
  }
  IntervalRecord<Real> o;
  o.tag = IntervalTag::origin;
  o.hi = table.at(1);
  o.lo = o.hi / 512;
  o.scan = detail::scan_interval<Real>(plain, o.lo, o.hi, plain(o.lo), plain(o.hi), ctx.root_tol());
  rep.origin = o;
  return rep;
}

/// Endpoints mu_m of the classical interval system and its admissibility.
struct ClassicalIntervals {
  std::vector<double> mu;  ///< mu_1..mu_{m_max}
  double b = 0;
  double B = 0;
  bool admissible = false;  ///< q^-1 (1-q) b/B > 1
};

/// Example 4.1 constants b = 1, B = 1/((1-q^2)(1-q^6)):
/// mu_m = q^(-m+1/2) sqrt((1-q^2)(1-q^6)).
inline ClassicalIntervals classical_intervals_example41(double q, std::size_t m_max) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("classical_intervals_example41: q must lie in (0,1)");
  ClassicalIntervals out;
  out.b = 1.0;
  out.B = 1.0 / ((1.0 - q * q) * (1.0 - std::pow(q, 6)));
  out.admissible = (1.0 - q) / q * out.b / out.B > 1.0;
  for (std::size_t m = 1; m <= m_max; ++m)
    out.mu.push_back(std::pow(q, -static_cast<double>(m) + 0.5) / std::sqrt(out.B));
  return out;
}

struct IntersectionRow {
  std::size_t k = 0;
  double mu_lo = 0, mu_hi = 0;
  double L_lo = 0, L_hi = 0;
  std::optional<std::pair<double, double>> intersection;  ///< empty when disjoint
  std::optional<double> r;
  bool contained = false;  ///< r inside the intersection, widened by the guard band
};

/// Per k: the classical interval (mu_k, mu_{k+1}), the theorem interval
/// (L_k, L_{k+1}), their intersection and whether r_k lies in it. `guard`
/// widens the intersection by that relative amount on both sides.
template <std::floating_point Real>
std::vector<IntersectionRow> interval_intersection_report(const ClassicalIntervals& classical,
                                                          const LocalizationReport<Real>& report,
                                                          double guard = 0.0) {
  std::vector<IntersectionRow> rows;
  for (const auto& rec : report.intervals) {
    if (rec.k + 1 > classical.mu.size()) break;
    IntersectionRow row;
    row.k = rec.k;
    row.mu_lo = classical.mu[rec.k - 1];
    row.mu_hi = classical.mu[rec.k];
    row.L_lo = static_cast<double>(rec.lo);
    row.L_hi = static_cast<double>(rec.hi);
    const double lo = std::max(row.mu_lo, row.L_lo), hi = std::min(row.mu_hi, row.L_hi);
    if (lo < hi) row.intersection = std::make_pair(lo, hi);
    if (const auto z = rec.transform_zero()) row.r = static_cast<double>(*z);
    row.contained = row.intersection && row.r && *row.r > row.intersection->first * (1.0 - guard) &&
                    *row.r < row.intersection->second * (1.0 + guard);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace qhankel
