#include <benchmark/benchmark.h>

#include "ntkcond/conditioning.hpp"
#include "ntkcond/dataset.hpp"
#include "ntkcond/hessian.hpp"
#include "ntkcond/optimize.hpp"
#include "ntkcond/random.hpp"
#include "ntkcond/shallow_net.hpp"

namespace ntkcond {
namespace {

struct Net {
  ShallowNet system;
  Vector w;
  Vector y;
};

Net make_net(Index width) {
  const Dataset d = systems::synthetic_dataset(20, 0);
  const ShallowNetSpec spec{width, Activation::parse("tanh"), ShallowParameterization::kFull};
  const ShallowInit init = ShallowNet::gaussian_init(spec, 0);
  return {ShallowNet(spec, d.scalar_inputs(), init.output_signs), init.params, d.targets};
}

void BM_Jacobian(benchmark::State& state) {
  const Net net = make_net(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(net.system.jacobian(net.w));
}
BENCHMARK(BM_Jacobian)->RangeMultiplier(10)->Range(100, 10000);

void BM_TangentKernel(benchmark::State& state) {
  const Net net = make_net(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(tangent_kernel(net.system, net.w).lambda_min);
}
BENCHMARK(BM_TangentKernel)->RangeMultiplier(10)->Range(100, 10000);

void BM_LossHvp(benchmark::State& state) {
  const Net net = make_net(state.range(0));
  Rng rng(1);
  const Vector u = rng.normal_vector(net.w.size());
  const Vector r = net.system.evaluate(net.w) - net.y;
  for (auto _ : state) benchmark::DoNotOptimize(net.system.weighted_hvp(net.w, r, u));
}
BENCHMARK(BM_LossHvp)->RangeMultiplier(10)->Range(100, 10000);

void BM_HessianNormStructured(benchmark::State& state) {
  const Net net = make_net(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(hessian_tensor_norm(net.system, net.w).tensor_norm);
}
BENCHMARK(BM_HessianNormStructured)->RangeMultiplier(4)->Range(64, 4096);

void BM_HessianNormPower(benchmark::State& state) {
  const Net net = make_net(state.range(0));
  HessianNormOptions o;
  o.use_structure = false;
  o.dense_limit = 0;
  for (auto _ : state) benchmark::DoNotOptimize(hessian_tensor_norm(net.system, net.w, o).tensor_norm);
}
BENCHMARK(BM_HessianNormPower)->RangeMultiplier(4)->Range(64, 256)->Unit(benchmark::kMillisecond);

void BM_GdSteps(benchmark::State& state) {
  const Net net = make_net(state.range(0));
  GdOptions o;
  o.max_iters = 100;
  o.loss_tol = -1.0;
  for (auto _ : state) benchmark::DoNotOptimize(run_gd(net.system, net.w, net.y, 0.01, o).final_w);
  state.SetItemsProcessed(state.iterations() * o.max_iters);
}
BENCHMARK(BM_GdSteps)->RangeMultiplier(10)->Range(100, 10000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace ntkcond

BENCHMARK_MAIN();
