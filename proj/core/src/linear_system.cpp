#include "ntkcond/linear_system.hpp"

namespace ntkcond {

LinearSystem::LinearSystem(Matrix a) : a_(std::move(a)) {
  require(a_.rows() > 0 && a_.cols() > 0, "LinearSystem: matrix must be non-empty");
  require(a_.allFinite(), "LinearSystem: matrix must be finite");
}

}  // namespace ntkcond
