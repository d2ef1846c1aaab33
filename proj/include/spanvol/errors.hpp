#ifndef SPANVOL_ERRORS_HPP
#define SPANVOL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace spanvol {

enum class errc {
  non_finite,
  all_zero,
  singular_state,
  not_in_set,
  degenerate_swap,
  rank_deficient,
  iteration_cap_exceeded,
  subset_rank_deficient,
  bad_epsilon,
  too_large,
  parse_error,
  ragged_rows,
  verification_failed,
  invalid_config,
};

/// Library error with a stable code for programmatic handling.
class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::non_finite: return "NonFinite";
    case errc::all_zero: return "AllZero";
    case errc::singular_state: return "SingularState";
    case errc::not_in_set: return "NotInSet";
    case errc::degenerate_swap: return "DegenerateSwap";
    case errc::rank_deficient: return "RankDeficient";
    case errc::iteration_cap_exceeded: return "IterationCapExceeded";
    case errc::subset_rank_deficient: return "SubsetRankDeficient";
    case errc::bad_epsilon: return "BadEpsilon";
    case errc::too_large: return "TooLarge";
    case errc::parse_error: return "ParseError";
    case errc::ragged_rows: return "RaggedRows";
    case errc::verification_failed: return "VerificationFailed";
    case errc::invalid_config: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace spanvol

#endif  // SPANVOL_ERRORS_HPP
