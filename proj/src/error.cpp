#include "ovals/error.hpp"

namespace ovals {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Singular: return "singular-profile";
    case ErrorKind::Stiffness: return "stiffness";
    case ErrorKind::Branch: return "branch";
    case ErrorKind::Normalization: return "normalization";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::ConstructionFailed: return "construction-failed";
    case ErrorKind::Inapplicable: return "inapplicable";
    case ErrorKind::Resolution: return "resolution";
    case ErrorKind::Region: return "region";
    case ErrorKind::Unfit: return "unfit";
    case ErrorKind::Incompatible: return "incompatible";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::TipNotResolved: return "tip-not-resolved";
  }
  return "unknown";
}

}  // namespace ovals
