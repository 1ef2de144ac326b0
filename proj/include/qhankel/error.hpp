#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qhankel {

/// Failure categories raised by the numerical kernels.
enum class errc {
  budget_exhausted,        ///< max_terms reached before the truncation rule fired
  divergence_suspected,    ///< series terms keep growing
  singular_parameter,      ///< a denominator Pochhammer factor vanished
  pole,                    ///< q-Gamma evaluated at a pole
  non_finite_sample,       ///< integrand returned NaN/inf at a Jackson node
  no_limit,                ///< q-derivative at 0 did not stabilize
  domain_error,            ///< argument outside the supported domain
  integer_order_unsupported,
  scan_exhausted,          ///< fewer sign changes than requested
  zero_norm,
  pole_proximity,
  indeterminate_sign,
  inconsistent_norm,       ///< closed-form and direct norms disagree
};

constexpr std::string_view to_string(errc e) noexcept {
  switch (e) {
    case errc::budget_exhausted: return "budget-exhausted";
    case errc::divergence_suspected: return "divergence-suspected";
    case errc::singular_parameter: return "singular-parameter";
    case errc::pole: return "pole";
    case errc::non_finite_sample: return "non-finite-sample";
    case errc::no_limit: return "no-limit";
    case errc::domain_error: return "domain-error";
    case errc::integer_order_unsupported: return "integer-order-unsupported";
    case errc::scan_exhausted: return "scan-exhausted";
    case errc::zero_norm: return "zero-norm";
    case errc::pole_proximity: return "pole-proximity";
    case errc::indeterminate_sign: return "indeterminate-sign";
    case errc::inconsistent_norm: return "inconsistent-norm";
  }
  return "unknown";
}

class numeric_error : public std::runtime_error {
 public:
  numeric_error(errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

}  // namespace qhankel
