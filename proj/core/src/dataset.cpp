#include "ntkcond/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "ntkcond/random.hpp"

namespace ntkcond {

std::vector<double> Dataset::scalar_inputs() const {
  std::vector<double> xs;
  xs.reserve(inputs.size());
  for (const auto& x : inputs) xs.push_back(x[0]);
  return xs;
}

double Dataset::max_abs_input() const {
  double c = 0.0;
  for (const auto& x : inputs) c = std::max(c, x.cwiseAbs().maxCoeff());
  return c;
}

void Dataset::validate() const {
  require(!inputs.empty(), "dataset is empty");
  require(static_cast<Index>(inputs.size()) == targets.size(),
          "dataset inputs and targets differ in length");
  const Index d = inputs.front().size();
  for (const auto& x : inputs) {
    require(x.size() == d, "dataset inputs have inconsistent dimension");
    require(x.allFinite(), "dataset input is not finite");
  }
  require(targets.allFinite(), "dataset target is not finite");
}

namespace systems {

Dataset synthetic_dataset(Index n, std::uint64_t seed) { return synthetic_dataset(n, 1, seed); }

Dataset synthetic_dataset(Index n, Index input_dim, std::uint64_t seed) {
  require(n >= 1, "synthetic_dataset: n must be at least 1");
  require(input_dim >= 1, "synthetic_dataset: input dimension must be at least 1");
  Rng rng(seed);
  Dataset data;
  data.inputs.reserve(static_cast<std::size_t>(n));
  data.targets.resize(n);
  for (Index i = 0; i < n; ++i) {
    Vector x(input_dim);
    for (Index k = 0; k < input_dim; ++k) x[k] = rng.uniform();
    data.targets[i] = 2.0 * x.mean() + 0.5;
    data.inputs.push_back(std::move(x));
  }
  return data;
}

}  // namespace systems
}  // namespace ntkcond
