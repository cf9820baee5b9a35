#include "halfline/common.hpp"

namespace hl {

const char* error_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Input: return "InputError";
    case ErrorKind::NonIntegrableTail: return "NonIntegrableTail";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::TailTooShort: return "TailTooShort";
    case ErrorKind::ZeroOnContour: return "ZeroOnContour";
    case ErrorKind::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorKind::MultiplicityAboveOne: return "MultiplicityAboveOne";
    case ErrorKind::AtEigenvalue: return "AtEigenvalue";
    case ErrorKind::TooCloseToContinuousSpectrum: return "TooCloseToContinuousSpectrum";
    case ErrorKind::JordanBlockDetected: return "JordanBlockDetected";
    case ErrorKind::NearSingularity: return "NearSingularity";
    case ErrorKind::AliasingDetected: return "AliasingDetected";
    case ErrorKind::StepTooLarge: return "StepTooLarge";
    case ErrorKind::DomainEscape: return "DomainEscape";
  }
  return "Unknown";
}

int error_exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Input:
    case ErrorKind::NonIntegrableTail:
    case ErrorKind::DomainEscape:
      return 2;
    default:
      return 3;
  }
}

}  // namespace hl
