#include "bounty/error.hpp"

namespace bounty {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::bad_schema: return "BadSchema";
    case Errc::missing_column: return "MissingColumn";
    case Errc::duplicate_header: return "DuplicateHeader";
    case Errc::type_mismatch: return "TypeMismatch";
    case Errc::label_out_of_range: return "LabelOutOfRange";
    case Errc::malformed_row: return "MalformedRow";
    case Errc::bad_weights: return "BadWeights";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::empty_input: return "EmptyInput";
    case Errc::empty_group: return "EmptyGroup";
    case Errc::syntax_error: return "SyntaxError";
    case Errc::unknown_feature: return "UnknownFeature";
    case Errc::limit_exceeded: return "LimitExceeded";
    case Errc::version_unsupported: return "VersionUnsupported";
    case Errc::non_finite_parameter: return "NonFiniteParameter";
    case Errc::invalid_bundle: return "InvalidBundle";
    case Errc::empty_dataset: return "EmptyDataset";
    case Errc::singular_system: return "SingularSystem";
    case Errc::invalid_hypothesis: return "InvalidHypothesis";
    case Errc::bad_target: return "BadTarget";
    case Errc::unknown_version: return "UnknownVersion";
    case Errc::rate_limited: return "RateLimited";
    case Errc::unknown_team: return "UnknownTeam";
    case Errc::duplicate_team: return "DuplicateTeam";
    case Errc::frozen: return "Frozen";
    case Errc::bad_config: return "BadConfig";
    case Errc::bad_spec: return "BadSpec";
    case Errc::io_error: return "IoError";
    case Errc::replay_mismatch: return "ReplayMismatch";
  }
  return "Unknown";
}

}  // namespace bounty
