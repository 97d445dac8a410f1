#ifndef NTKCOND_DATASET_HPP
#define NTKCOND_DATASET_HPP

#include <cstdint>
#include <vector>

#include "ntkcond/types.hpp"

namespace ntkcond {

struct Dataset {
  std::vector<Vector> inputs;
  Vector targets;

  Index size() const { return static_cast<Index>(inputs.size()); }
  Index input_dim() const { return inputs.empty() ? 0 : inputs.front().size(); }
  /// First coordinate of every input; the shallow models take scalar inputs.
  std::vector<double> scalar_inputs() const;
  /// max_i ||x_i||_inf, the C_x of the deep-network bounds.
  double max_abs_input() const;
  void validate() const;
};

namespace systems {

/// x_i ~ U[0,1] i.i.d., y_i = 2 x_i + 1/2.
Dataset synthetic_dataset(Index n, std::uint64_t seed);

/// d-dimensional variant: x_i ~ U[0,1]^d, y_i = 2 mean(x_i) + 1/2, which
/// reduces to the scalar rule when d = 1.
Dataset synthetic_dataset(Index n, Index input_dim, std::uint64_t seed);

}  // namespace systems
}  // namespace ntkcond

#endif  // NTKCOND_DATASET_HPP
