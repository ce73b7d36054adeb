#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mtperf {

// Every failure mode the library reports, so callers can branch on kind
// rather than parse messages.
enum class errc {
  malformed_row,
  duplicate_key,
  out_of_range,
  degenerate_scaling,
  empty_corpus,
  divergence_undefined,
  feature_unavailable,
  underdetermined_fit,
  fit_failure,
  fold_infeasible,
  empty_analysis,
  sample_too_small,
  degenerate_sample,
  test_undefined,
  correlation_undefined,
  io_failure,
  usage,
};

inline std::string_view errc_name(errc kind) noexcept {
  switch (kind) {
    case errc::malformed_row: return "malformed_row";
    case errc::duplicate_key: return "duplicate_key";
    case errc::out_of_range: return "out_of_range";
    case errc::degenerate_scaling: return "degenerate_scaling";
    case errc::empty_corpus: return "empty_corpus";
    case errc::divergence_undefined: return "divergence_undefined";
    case errc::feature_unavailable: return "feature_unavailable";
    case errc::underdetermined_fit: return "underdetermined_fit";
    case errc::fit_failure: return "fit_failure";
    case errc::fold_infeasible: return "fold_infeasible";
    case errc::empty_analysis: return "empty_analysis";
    case errc::sample_too_small: return "sample_too_small";
    case errc::degenerate_sample: return "degenerate_sample";
    case errc::test_undefined: return "test_undefined";
    case errc::correlation_undefined: return "correlation_undefined";
    case errc::io_failure: return "io_failure";
    case errc::usage: return "usage";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(errc kind, const std::string& message)
      : std::runtime_error(std::string(errc_name(kind)) + ": " + message),
        kind_(kind) {}

  errc kind() const noexcept { return kind_; }

 private:
  errc kind_;
};

}  // namespace mtperf
