#ifndef NTKCOND_TESTS_SUPPORT_HPP
#define NTKCOND_TESTS_SUPPORT_HPP

#include <cmath>
#include <memory>
#include <vector>

#include "ntkcond/dataset.hpp"
#include "ntkcond/deep_mlp.hpp"
#include "ntkcond/linear_system.hpp"
#include "ntkcond/quadratic_system.hpp"
#include "ntkcond/random.hpp"
#include "ntkcond/shallow_net.hpp"
#include "ntkcond/sparse_additive.hpp"
#include "ntkcond/transformed_system.hpp"

namespace ntkcond::testing {

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index i = 0;
  for (const auto& r : rows) {
    Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

struct Case {
  std::string label;
  SystemPtr system;
  Vector w;
  Vector targets;
};

inline Case shallow_case(Index width, Index n, const std::string& act = "tanh",
                         ShallowParameterization p = ShallowParameterization::kFull,
                         std::uint64_t seed = 0) {
  Dataset d = systems::synthetic_dataset(n, seed);
  ShallowNetSpec spec{width, Activation::parse(act), p};
  ShallowInit init = ShallowNet::gaussian_init(spec, seed);
  auto sys = std::make_shared<ShallowNet>(spec, d.scalar_inputs(), init.output_signs);
  return {"shallow-" + act, sys, init.params, d.targets};
}

/// Shallow net on five well-separated inputs x = -2..2 with y = 2x + 1/2;
/// its kernel stays well conditioned (lambda_min ~ 0.06, lambda_max ~ 3.6).
inline Case spread_case(Index width, const std::string& act = "tanh", std::uint64_t seed = 0) {
  const std::vector<double> xs{-2, -1, 0, 1, 2};
  ShallowNetSpec spec{width, Activation::parse(act), ShallowParameterization::kFull};
  ShallowInit init = ShallowNet::gaussian_init(spec, seed);
  Vector y(5);
  for (Index i = 0; i < 5; ++i) y(i) = 2 * xs[static_cast<std::size_t>(i)] + 0.5;
  return {"spread-" + act, std::make_shared<ShallowNet>(spec, xs, init.output_signs), init.params, y};
}

/// A smooth model of every family, at unit-scale seeded points.
inline std::vector<Case> model_zoo(std::uint64_t seed) {
  std::vector<Case> zoo;
  Rng rng(seed);
  Matrix a = Matrix::NullaryExpr(4, 7, [&] { return rng.normal(); });
  zoo.push_back({"linear", std::make_shared<LinearSystem>(a), rng.normal_vector(7), rng.normal_vector(4)});
  auto q = std::make_shared<QuadraticSystem>(QuadraticSystem::random(3, 6, 1.0, seed));
  zoo.push_back({"quadratic", q, rng.normal_vector(6), rng.normal_vector(3)});
  for (const char* act : {"tanh", "swish", "softplus", "quadratic"}) {
    zoo.push_back(shallow_case(12, 5, act, ShallowParameterization::kFull, seed));
    zoo.push_back(shallow_case(12, 5, act, ShallowParameterization::kHiddenOnly, seed));
  }
  {
    Dataset d = systems::synthetic_dataset(4, 3, seed);
    DeepMlpSpec spec{3, 3, 6, Activation::parse("tanh")};
    zoo.push_back({"deep-tanh", std::make_shared<DeepMlp>(spec, d.inputs),
                   DeepMlp::gaussian_init(spec, seed), d.targets});
  }
  {
    Dataset d = systems::synthetic_dataset(5, seed);
    SparseAdditiveSpec spec{10, 3, Activation::parse("tanh"), std::nullopt};
    zoo.push_back({"sparse-tanh", std::make_shared<SparseAdditiveModel>(spec, d.scalar_inputs(), seed),
                   SparseAdditiveModel::gaussian_init(spec, seed), d.targets});
  }
  {
    Case base = shallow_case(10, 4, "tanh", ShallowParameterization::kFull, seed);
    zoo.push_back({"shallow+tanh3",
                   std::make_shared<TransformedSystem>(base.system, OutputMap::parse("tanh3")), base.w,
                   base.targets});
  }
  return zoo;
}

}  // namespace ntkcond::testing

#endif  // NTKCOND_TESTS_SUPPORT_HPP
