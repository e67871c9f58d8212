#include <benchmark/benchmark.h>

#include <numbers>

#include "mfac/analysis.hpp"
#include "mfac/controller.hpp"
#include "mfac/kinematics.hpp"
#include "mfac/pathgen.hpp"
#include "mfac/plant.hpp"

using namespace mfac;

namespace {

RegressorWindow busy_window() {
  RegressorWindow w = example1_initial_window();
  Vector u(2);
  u << 0.05, -0.1;
  Vector y(2);
  y << 0.1, 0.2;
  return w.advanced(y, u);
}

Vector frame_a() {
  Vector q(6);
  q << -std::numbers::pi / 2, 0, 0, 0, -std::numbers::pi / 2, 0;
  return q;
}

}  // namespace

static void BM_PjmFirstOrder(benchmark::State& state) {
  const Example1Plant plant;
  const RegressorWindow w = busy_window();
  for (auto _ : state) benchmark::DoNotOptimize(pjm_first_order(plant, w));
}
BENCHMARK(BM_PjmFirstOrder);

static void BM_MfacStep(benchmark::State& state) {
  const Example1Plant plant;
  const RegressorWindow w = busy_window();
  const PseudoJacobian pjm = pjm_first_order(plant, w);
  const Vector y = Vector::Constant(2, 0.1), target = Vector::Constant(2, 0.2);
  const Weighting lam = Weighting::uniform(2, 0.2);
  for (auto _ : state) benchmark::DoNotOptimize(mfac_step(pjm, w, y, target, lam));
}
BENCHMARK(BM_MfacStep);

static void BM_QuarticStep(benchmark::State& state) {
  const Example1Plant plant;
  const RegressorWindow w = busy_window();
  const Vector y = Vector::Constant(2, 0.1), target = Vector::Constant(2, 0.2);
  const Weighting lam = Weighting::uniform(2, 0.2);
  for (auto _ : state) benchmark::DoNotOptimize(mfac_quartic_step(plant, w, y, target, lam));
}
BENCHMARK(BM_QuarticStep);

static void BM_Example1Run(benchmark::State& state) {
  const auto variant = static_cast<ControllerVariant>(state.range(0));
  SimulationOptions opt;
  opt.box = example1_box();
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate(Example1Plant(), variant, Example1Reference(), 800,
                                      example1_initial_window(), Weighting::uniform(2, 0.2), opt));
  }
}
BENCHMARK(BM_Example1Run)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

static void BM_Determinant(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  PolyMatrix m(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) m(r, c) = Poly({1.0 + r, 0.1 * c - 0.3, 0.05 * (r - c)});
  }
  for (auto _ : state) benchmark::DoNotOptimize(determinant(m));
}
BENCHMARK(BM_Determinant)->Arg(2)->Arg(4)->Arg(8);

static void BM_StabilityCheck(benchmark::State& state) {
  Matrix p1(2, 2), p2(2, 2);
  p1 << 1.5, 0.2, 0.1, 1.2;
  p2 << 1.0, 0.3, -0.2, 0.8;
  const PolyMatrix t = closed_loop_matrix(PseudoJacobian({p1}, {p2}), Weighting::uniform(2, 0.5));
  for (auto _ : state) benchmark::DoNotOptimize(stability_check(t));
}
BENCHMARK(BM_StabilityCheck);

static void BM_ForwardKinematics(benchmark::State& state) {
  const KinematicChain c = KinematicChain::table_one();
  const Vector q = frame_a();
  for (auto _ : state) benchmark::DoNotOptimize(forward_kinematics(c, q));
}
BENCHMARK(BM_ForwardKinematics);

static void BM_TaskJacobian(benchmark::State& state) {
  const KinematicChain c = KinematicChain::table_one();
  const Vector q = frame_a();
  for (auto _ : state) benchmark::DoNotOptimize(task_jacobian(c, q));
}
BENCHMARK(BM_TaskJacobian);

static void BM_IkSolve(benchmark::State& state) {
  const KinematicChain c = KinematicChain::table_one();
  const Vector q = frame_a();
  Pose target = forward_kinematics(c, q);
  target.position.y() += 5.0;
  for (auto _ : state) benchmark::DoNotOptimize(ik_solve(c, q, target));
}
BENCHMARK(BM_IkSolve);

static void BM_GeneratePath(benchmark::State& state) {
  const KinematicChain c = KinematicChain::table_one();
  Vector goal(6);
  goal << std::numbers::pi / 2, 0, 0, 0, std::numbers::pi / 2, 0;
  PathSpec spec;
  spec.start = TaskVector::from_pose(forward_kinematics(c, frame_a()));
  spec.goal = TaskVector::from_pose(forward_kinematics(c, goal));
  for (auto _ : state) benchmark::DoNotOptimize(generate_path(spec));
}
BENCHMARK(BM_GeneratePath)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
