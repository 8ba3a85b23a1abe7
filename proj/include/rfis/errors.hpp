#pragma once

#include <stdexcept>
#include <string>

namespace rfis {

enum class errc {
  non_monotonic_axis,
  shape_mismatch,
  non_uniform_spacing,
  index_out_of_range,
  non_uniform_domains,
  non_square_domain,
  syntax_error,
  unknown_identifier,
  eval_error,
  cap_violation,
  not_contractive,
  out_of_domain,
  not_irreducible,
  dead_region,
  not_converged,
  not_uniform,
  empty_rect,
  depth_too_shallow,
  config_error,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::non_monotonic_axis: return "NonMonotonicAxis";
    case errc::shape_mismatch: return "ShapeMismatch";
    case errc::non_uniform_spacing: return "NonUniformSpacing";
    case errc::index_out_of_range: return "IndexOutOfRange";
    case errc::non_uniform_domains: return "NonUniformDomains";
    case errc::non_square_domain: return "NonSquareDomain";
    case errc::syntax_error: return "SyntaxError";
    case errc::unknown_identifier: return "UnknownIdentifier";
    case errc::eval_error: return "EvalError";
    case errc::cap_violation: return "CapViolation";
    case errc::not_contractive: return "NotContractive";
    case errc::out_of_domain: return "OutOfDomain";
    case errc::not_irreducible: return "NotIrreducible";
    case errc::dead_region: return "DeadRegion";
    case errc::not_converged: return "NotConverged";
    case errc::not_uniform: return "NotUniform";
    case errc::empty_rect: return "EmptyRect";
    case errc::depth_too_shallow: return "DepthTooShallow";
    case errc::config_error: return "ConfigError";
  }
  return "UnknownError";
}

/// CLI exit categories: 0 success, 2 validation, 3 non-convergence,
/// 4 uniformity/hypothesis gate.
inline int exit_code(errc c) {
  switch (c) {
    case errc::not_converged:
      return 3;
    case errc::non_uniform_spacing:
    case errc::non_uniform_domains:
    case errc::non_square_domain:
    case errc::not_uniform:
      return 4;
    default:
      return 2;
  }
}

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg),
        code_(code),
        detail_(msg) {}

  errc code() const noexcept { return code_; }
  /// Message without the error-name prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  errc code_;
  std::string detail_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace rfis
