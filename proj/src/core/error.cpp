#include "mgeom/error.hpp"

namespace mgeom {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidInput: return "invalid-input";
    case ErrorCode::NotPsd: return "not-psd";
    case ErrorCode::InsufficientPoints: return "insufficient-points";
    case ErrorCode::UndefinedCorrelation: return "undefined-correlation";
    case ErrorCode::DegenerateManifold: return "degenerate-manifold";
    case ErrorCode::DegenerateNeighborhood: return "degenerate-neighborhood";
    case ErrorCode::FitFailure: return "fit-failure";
    case ErrorCode::UnreliableEstimate: return "unreliable-estimate";
    case ErrorCode::InvalidCurvature: return "invalid-curvature";
    case ErrorCode::InvalidSchedule: return "invalid-schedule";
    case ErrorCode::EmptyPool: return "empty-pool";
    case ErrorCode::IncompletePool: return "incomplete-pool";
    case ErrorCode::InvalidState: return "invalid-state";
    case ErrorCode::TrainingDiverged: return "training-diverged";
    case ErrorCode::Io: return "io";
    case ErrorCode::Parse: return "parse";
  }
  return "unknown";
}

}  // namespace mgeom
