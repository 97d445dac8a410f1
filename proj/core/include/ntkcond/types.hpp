#ifndef NTKCOND_TYPES_HPP
#define NTKCOND_TYPES_HPP

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace ntkcond {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// A caller broke a documented precondition on arguments (dimensions, ranges).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The requested operation needs structure the object does not have
/// (second derivatives of a ReLU network, for example).
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Problem too large for the dense path.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A mathematical hypothesis of an analysis does not hold at the given input
/// (e.g. the probe point is not near-interpolating, or m <= R^2).
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractError(message);
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace ntkcond

#endif  // NTKCOND_TYPES_HPP
