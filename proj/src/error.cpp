#include "mtplab/error.hpp"

namespace mtplab {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::dimension: return "dimension";
    case Errc::capacity: return "capacity";
    case Errc::parse: return "parse";
    case Errc::singular_loss: return "singular_loss";
    case Errc::evaluation: return "evaluation";
    case Errc::generation: return "generation";
    case Errc::encoding: return "encoding";
    case Errc::integration: return "integration";
    case Errc::divergence: return "divergence";
    case Errc::io: return "io";
    case Errc::invalid_argument: return "invalid_argument";
  }
  return "unknown";
}

}  // namespace mtplab
