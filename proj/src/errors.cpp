#include "nanolaser/errors.hpp"

#include <sstream>

namespace nanolaser {

namespace {

std::string describe(const std::vector<TrajectoryFailure>& failures) {
  std::ostringstream os;
  os << failures.size() << " trajectory failure(s):";
  for (const auto& f : failures) {
    os << " [traj " << f.trajectory << " at t=" << f.time_ns << " ns: " << f.message << "]";
  }
  return os.str();
}

}  // namespace

EnsembleError::EnsembleError(std::vector<TrajectoryFailure> failures)
    : std::runtime_error(describe(failures)), failures_(std::move(failures)) {}

}  // namespace nanolaser
