#include <gtest/gtest.h>

#include <cmath>

#include "gpsplit/adaptive.hpp"
#include "gpsplit/errors.hpp"
#include "gpsplit/groundstate.hpp"
#include "support.hpp"

namespace gpsplit {
namespace {

using testing::grid;
using testing::max_diff;

// Gaussian displaced to x = 2 in a harmonic trap: a smooth, non-stationary benchmark.
struct Benchmark {
  std::shared_ptr<const SpectralGrid> g = grid(1, 256, 10.0);
  Problem p;
  State start;

  explicit Benchmark(double theta)
      : p(ProblemSpec::harmonic(1, -0.5, 0.5, theta), g),
        start(init_state(p, InitKind::gaussian, Mode::real, {2.0})) {}
};

double max_energy_drift(const std::vector<ObservableRecord>& records) {
  double drift = 0.0;
  for (const auto& r : records)
    drift = std::max(drift, std::abs(r.E - records.front().E) / std::abs(records.front().E));
  return drift;
}

TEST(Controller, FormulaExamples) {
  ControllerParams params;
  params.tol = 1e6;
  EXPECT_DOUBLE_EQ(propose_step(params, 0.1, 1e-3), params.fac_max * 0.1);
  EXPECT_DOUBLE_EQ(propose_step(params, 0.1, 0.0), params.fac_max * 0.1);
  params.tol = 1e-6;
  EXPECT_DOUBLE_EQ(propose_step(params, 0.1, 1e-6), params.safety * 0.1);
  EXPECT_DOUBLE_EQ(propose_step(params, 0.1, 1.0), params.fac_min * 0.1);
  // (tol / eps)^(1/3) = 0.5 for eps = 8 tol.
  EXPECT_NEAR(propose_step(params, 0.1, 8e-6), 0.9 * 0.5 * 0.1, 1e-15);
  params.strategy = ErrorStrategy::B;
  EXPECT_NEAR(propose_step(params, 0.1, 32e-6), 0.9 * 0.5 * 0.1, 1e-15);
  params.exponent = 1.0;
  EXPECT_NEAR(propose_step(params, 0.1, 2e-6), 0.9 * 0.5 * 0.1, 1e-15);
  params.fac_max = 1.0;
  EXPECT_DOUBLE_EQ(propose_step(params, 0.1, 1e-12), 0.1);
}

TEST(Controller, ValidateRejectsInconsistentParameters) {
  ControllerParams ok;
  EXPECT_NO_THROW(ok.validate());
  auto bad = [](auto mutate) {
    ControllerParams p;
    mutate(p);
    return p;
  };
  EXPECT_THROW(bad([](auto& p) { p.tol = 0.0; }).validate(), ConfigError);
  EXPECT_THROW(bad([](auto& p) { p.fac_min = 0.0; }).validate(), ConfigError);
  EXPECT_THROW(bad([](auto& p) { p.fac_min = 1.5; }).validate(), ConfigError);
  EXPECT_THROW(bad([](auto& p) { p.fac_max = 0.5; }).validate(), ConfigError);
  EXPECT_THROW(bad([](auto& p) { p.tau_min = 2.0; }).validate(), ConfigError);
  EXPECT_THROW(bad([](auto& p) { p.max_rejections = 0; }).validate(), ConfigError);
  EXPECT_THROW(bad([](auto& p) { p.exponent = -1.0; }).validate(), ConfigError);
}

TEST(EmbeddedStep, StrategyBScalesByStepSquared) {
  Benchmark b(1.0);
  Fourier fft(b.g);
  ControllerParams a, bb;
  bb.strategy = ErrorStrategy::B;
  const double tau = 0.1;
  const StepResult ra = embedded_step(b.p, fft, b.start, tau, a);
  const StepResult rb = embedded_step(b.p, fft, b.start, tau, bb);
  EXPECT_GT(ra.err, 0.0);
  EXPECT_NEAR(rb.err, tau * tau * ra.err, 1e-15 * ra.err);
  EXPECT_EQ(ra.accepted, ra.err <= a.tol);
}

TEST(EmbeddedStep, AcceptedStepReturnsModifiedMethodResult) {
  Benchmark b(1.0);
  Fourier fft(b.g);
  ControllerParams params;
  params.tol = 1e6;
  const StepResult r = embedded_step(b.p, fft, b.start, 0.05, params);
  ASSERT_TRUE(r.accepted);
  State expected = b.start;
  step(b.p, fft, expected, method_catalog("chin_modified4"), 0.05);
  EXPECT_EQ(max_diff(r.state.psi, expected.psi), 0.0);
  EXPECT_DOUBLE_EQ(r.state.t, 0.05);
  EXPECT_DOUBLE_EQ(r.tau_next, 0.1);
}

TEST(EmbeddedStep, RejectionLeavesStateUnchanged) {
  Benchmark b(1.0);
  Fourier fft(b.g);
  ControllerParams params;
  params.tol = 1e-14;
  const StepResult r = embedded_step(b.p, fft, b.start, 0.2, params);
  EXPECT_FALSE(r.accepted);
  EXPECT_GT(r.err, params.tol);
  EXPECT_EQ(r.state.t, b.start.t);
  EXPECT_EQ(max_diff(r.state.psi, b.start.psi), 0.0);
  EXPECT_LT(r.tau_next, 0.2);
  EXPECT_GE(r.tau_next, params.fac_min * 0.2);
}

TEST(EmbeddedStep, StepBelowMinimumIsControllerFailure) {
  Benchmark b(1.0);
  Fourier fft(b.g);
  ControllerParams params;
  params.tol = 1e-14;
  params.tau_min = 0.1;
  EXPECT_THROW(embedded_step(b.p, fft, b.start, 0.2, params), ControllerError);
}

TEST(EvolveFixed, StepCountAndTransforms) {
  Benchmark b(1.0);
  Fourier fft(b.g);
  const MethodSpec strang = method_catalog("strang");
  std::vector<ObservableRecord> records;
  const EvolveResult r = evolve(b.p, fft, b.start, 1.0, FixedStepper{strang, 0.3}, [&](const auto& rec) {
    records.push_back(rec);
  });
  EXPECT_EQ(r.accepted, 4);
  EXPECT_EQ(records.size(), 5u);
  EXPECT_DOUBLE_EQ(r.state.t, 1.0);
  EXPECT_EQ(r.transforms, 4 * transforms_per_step(b.p, strang, Mode::real));
  EXPECT_EQ(records.back().transforms, r.transforms);
  for (std::size_t i = 0; i < records.size(); ++i) EXPECT_EQ(records[i].step, static_cast<std::int64_t>(i));
}

TEST(EvolveFixed, StrangEnergyErrorIsSecondOrder) {
  Benchmark b(2.0);
  std::vector<double> drifts;
  for (int n : {100, 200, 400}) {
    Fourier fft(b.g);
    std::vector<ObservableRecord> records;
    evolve(b.p, fft, b.start, 2.0, FixedStepper{method_catalog("strang"), 2.0 / n},
           [&](const auto& rec) { records.push_back(rec); });
    drifts.push_back(max_energy_drift(records));
  }
  EXPECT_NEAR(drifts[0] / drifts[1], 4.0, 0.6);
  EXPECT_NEAR(drifts[1] / drifts[2], 4.0, 0.6);
}

TEST(EvolveFixed, FusedStagesMatchUnfused) {
  Benchmark b(1.0);
  for (const char* name : {"strang", "chin_modified4", "yoshida4"}) {
    const MethodSpec m = method_catalog(name);
    Fourier f1(b.g), f2(b.g);
    const EvolveResult plain = evolve(b.p, f1, b.start, 1.0, FixedStepper{m, 0.05});
    EvolveOptions fused;
    fused.fuse_stages = true;
    const EvolveResult merged = evolve(b.p, f2, b.start, 1.0, FixedStepper{m, 0.05}, {}, fused);
    EXPECT_LE(max_diff(plain.state.psi, merged.state.psi), 1e-12) << name;
    EXPECT_LE(merged.transforms, plain.transforms) << name;
  }
}

TEST(EvolveFixed, DivergenceAbortsWithPartialDiagnostics) {
  const auto g = grid(1, 256, 10.0);
  Problem p(ProblemSpec::harmonic(1, -0.5, 0.5, 0.0), g);
  Fourier fft(g);
  std::int64_t seen = 0;
  const EvolveResult r = evolve(p, fft, init_state(p, InitKind::constant), 200.0,
                                FixedStepper{method_catalog("yoshida4"), 5.0},
                                [&](const auto&) { ++seen; });
  ASSERT_TRUE(r.failure.has_value());
  EXPECT_GE(r.failure_stage, 0);
  EXPECT_EQ(seen, r.accepted + 1);
  EXPECT_LT(r.accepted, 40);
}

TEST(EvolveAdaptive, LandsOnEndTimeAndIsDeterministic) {
  Benchmark b(1.0);
  AdaptiveStepper stepper{ControllerParams{}, 0.1};
  stepper.params.tol = 1e-6;
  auto run = [&](std::vector<ObservableRecord>& records, std::int64_t& observed) {
    Fourier fft(b.g);
    EvolveOptions options;
    options.observer = [&](const State&, std::int64_t) { ++observed; };
    return evolve(b.p, fft, b.start, 3.0, stepper, [&](const auto& r) { records.push_back(r); },
                  options);
  };
  std::vector<ObservableRecord> first, second;
  std::int64_t n1 = 0, n2 = 0;
  const EvolveResult r1 = run(first, n1);
  const EvolveResult r2 = run(second, n2);
  EXPECT_FALSE(r1.failure.has_value());
  EXPECT_EQ(r1.state.t, 3.0);
  EXPECT_EQ(n1, r1.accepted);
  ASSERT_EQ(first.size(), second.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    EXPECT_EQ(first[i].tau, second[i].tau);
    EXPECT_EQ(first[i].E, second[i].E);
    EXPECT_LE(first[i].err_estimate, stepper.params.tol);
  }
  EXPECT_EQ(max_diff(r1.state.psi, r2.state.psi), 0.0);
  EXPECT_EQ(r1.accepted, r2.accepted);
  EXPECT_EQ(n1, n2);
}

TEST(EvolveAdaptive, LongRunEnergyDriftWithinTenTolerances) {
  const auto g = grid(1, 256, 10.0);
  Problem p(ProblemSpec::harmonic(1, -0.5, 0.5, 0.0), g);
  const State start = init_state(p, InitKind::gaussian, Mode::real, {2.0});
  Fourier fft(g);
  AdaptiveStepper stepper{ControllerParams{}, 0.1};
  stepper.params.tol = 1e-8;
  std::vector<ObservableRecord> records;
  const EvolveResult r = evolve(p, fft, start, 50.0, stepper, [&](const auto& rec) { records.push_back(rec); });
  ASSERT_FALSE(r.failure.has_value());
  EXPECT_LE(max_energy_drift(records), 10 * stepper.params.tol);
}

TEST(EvolveAdaptive, ToleranceResponseIsMonotone) {
  Benchmark b(1.0);
  for (ErrorStrategy strategy : {ErrorStrategy::A, ErrorStrategy::B}) {
    std::vector<std::int64_t> counts;
    for (double tol : {1e-4, 1e-5, 1e-6, 1e-7, 1e-8}) {
      Fourier fft(b.g);
      AdaptiveStepper stepper{ControllerParams{}, 0.1};
      stepper.params.tol = tol;
      stepper.params.strategy = strategy;
      const EvolveResult r = evolve(b.p, fft, b.start, 10.0, stepper);
      ASSERT_FALSE(r.failure.has_value());
      counts.push_back(r.accepted);
    }
    double log_ratio = 0.0;
    for (std::size_t i = 1; i < counts.size(); ++i) {
      EXPECT_GT(counts[i], counts[i - 1]);
      log_ratio += std::log(static_cast<double>(counts[i]) / counts[i - 1]);
    }
    const double q2 = std::exp(log_ratio / (counts.size() - 1));
    const int local = strategy == ErrorStrategy::A ? 3 : 5;
    EXPECT_NEAR(std::log(10.0) / std::log(q2), local, 0.2 * local);
  }
}

TEST(EvolveAdaptive, NoWorseThanFixedAtEqualStepCount) {
  const auto g = grid(1, 256, 10.0);
  Problem p(ProblemSpec::harmonic(1, -0.5, 0.5, 1.0), g);
  const State start = init_state(p, InitKind::gaussian, Mode::real, {2.0});
  const double t_end = 2.0;
  const MethodSpec chin = method_catalog("chin_modified4");
  Fourier fft(g);
  const EvolveResult reference = evolve(p, fft, start, t_end, FixedStepper{chin, 1e-3});
  for (double tol : {1e-5, 1e-7}) {
    AdaptiveStepper stepper{ControllerParams{}, 0.1};
    stepper.params.tol = tol;
    const EvolveResult adaptive = evolve(p, fft, start, t_end, stepper);
    const EvolveResult fixed =
        evolve(p, fft, start, t_end, FixedStepper{chin, t_end / static_cast<double>(adaptive.accepted)});
    ASSERT_EQ(fixed.accepted, adaptive.accepted);
    const double err_adaptive = max_diff(adaptive.state.psi, reference.state.psi);
    const double err_fixed = max_diff(fixed.state.psi, reference.state.psi);
    EXPECT_LE(err_adaptive, 2.0 * err_fixed) << tol;
  }
}

TEST(EvolveAdaptive, RepeatedRejectionsAbort) {
  Benchmark b(1.0);
  Fourier fft(b.g);
  AdaptiveStepper stepper{ControllerParams{}, 0.5};
  stepper.params.tol = 1e-14;
  stepper.params.max_rejections = 2;
  const EvolveResult r = evolve(b.p, fft, b.start, 1.0, stepper);
  EXPECT_TRUE(r.controller_failure);
  ASSERT_TRUE(r.failure.has_value());
  EXPECT_NE(r.failure->find("rejections"), std::string::npos);
  EXPECT_EQ(r.state.t, 0.0);
}

TEST(EvolveAdaptive, RejectsBadArguments) {
  Benchmark b(1.0);
  Fourier fft(b.g);
  EXPECT_THROW(evolve(b.p, fft, b.start, 0.0, FixedStepper{method_catalog("strang"), 0.1}),
               std::invalid_argument);
  AdaptiveStepper stepper{ControllerParams{}, 0.1};
  stepper.params.fac_max = 0.5;
  EXPECT_THROW(evolve(b.p, fft, b.start, 1.0, stepper), ConfigError);
}

}  // namespace
}  // namespace gpsplit
