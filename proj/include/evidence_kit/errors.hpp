#pragma once

// Error taxonomy shared by every module.

#include <stdexcept>
#include <string>
#include <string_view>

namespace evidence_kit {

enum class ErrorCode {
  invalid_input,
  negative_weight,
  weights_do_not_sum_to_one,
  space_mismatch,
  not_a_product_space,
  invalid_kappa,
  quadrature_did_not_converge,
  value_out_of_range,
  invalid_parameter,
  invalid_alphabet,
  budget_exceeded,
  n_too_small,
  out_of_range,
  did_not_converge,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_input: return "InvalidInput";
    case ErrorCode::negative_weight: return "NegativeWeight";
    case ErrorCode::weights_do_not_sum_to_one: return "WeightsDoNotSumToOne";
    case ErrorCode::space_mismatch: return "SpaceMismatch";
    case ErrorCode::not_a_product_space: return "NotAProductSpace";
    case ErrorCode::invalid_kappa: return "InvalidKappa";
    case ErrorCode::quadrature_did_not_converge: return "QuadratureDidNotConverge";
    case ErrorCode::value_out_of_range: return "ValueOutOfRange";
    case ErrorCode::invalid_parameter: return "InvalidParameter";
    case ErrorCode::invalid_alphabet: return "InvalidAlphabet";
    case ErrorCode::budget_exceeded: return "BudgetExceeded";
    case ErrorCode::n_too_small: return "NTooSmall";
    case ErrorCode::out_of_range: return "OutOfRange";
    case ErrorCode::did_not_converge: return "DidNotConverge";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace evidence_kit
