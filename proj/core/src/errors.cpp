#include "robustmult/types.hpp"

namespace robustmult {

void Tolerances::validate() const {
  if (!(psd_margin > 0.0) || !(rank_rel > 0.0) || !(det_zero_rel > 0.0) ||
      !(eig_cond_max > 0.0) || !(rank_rel < 1.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "tolerances must be positive with rank_rel < 1");
  }
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroMatrix: return "ZeroMatrix";
    case ErrorCode::NegativeRealEigenvalue: return "NegativeRealEigenvalue";
    case ErrorCode::DefectiveZeroEigenvalue: return "DefectiveZeroEigenvalue";
    case ErrorCode::DefectiveNonzeroEigenvalue:
      return "DefectiveNonzeroEigenvalue";
    case ErrorCode::UnitCircleEigenvalue: return "UnitCircleEigenvalue";
    case ErrorCode::IllConditionedEigenvectors:
      return "IllConditionedEigenvectors";
    case ErrorCode::TargetOutsideRange: return "TargetOutsideRange";
    case ErrorCode::NotSectorial: return "NotSectorial";
    case ErrorCode::UnknownForm: return "UnknownForm";
    case ErrorCode::NotVerifiedForSource: return "NotVerifiedForSource";
    case ErrorCode::ConversionFailsVerification:
      return "ConversionFailsVerification";
    case ErrorCode::SpectrumOnNegativeRealAxis:
      return "SpectrumOnNegativeRealAxis";
    case ErrorCode::PhaseSumViolated: return "PhaseSumViolated";
    case ErrorCode::ClassViolated: return "ClassViolated";
    case ErrorCode::NoGainCertificate: return "NoGainCertificate";
    case ErrorCode::ConditionHolds: return "ConditionHolds";
    case ErrorCode::ConstructionFallbackFailed:
      return "ConstructionFallbackFailed";
    case ErrorCode::VerificationFailed: return "VerificationFailed";
    case ErrorCode::ResolventSingular: return "ResolventSingular";
    case ErrorCode::OpenLoopUnstable: return "OpenLoopUnstable";
    case ErrorCode::IllPosed: return "IllPosed";
    case ErrorCode::SignConditionViolated: return "SignConditionViolated";
    case ErrorCode::InverseNotInRHinf: return "InverseNotInRHinf";
    case ErrorCode::FeedbackUnstable: return "FeedbackUnstable";
    case ErrorCode::EpsilonUnderflow: return "EpsilonUnderflow";
    case ErrorCode::PerFrequencyFailure: return "PerFrequencyFailure";
    case ErrorCode::XiInconsistent: return "XiInconsistent";
    case ErrorCode::PreconditionViolatedAtOmega:
      return "PreconditionViolatedAtOmega";
    case ErrorCode::EndpointInfeasible: return "EndpointInfeasible";
    case ErrorCode::NonPositiveParameter: return "NonPositiveParameter";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::DimensionError: return "DimensionError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

Error::Error(ErrorCode code, const std::string& message, Complex value)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      value_(value) {}

}  // namespace robustmult
