#include <cmath>

#include <gtest/gtest.h>

#include "ringcirc/optimize.hpp"

using namespace ringcirc;

namespace {

const PhysicalSpec& qps() { static const PhysicalSpec s = preset("tableS1-qps"); return s; }

OptimizerOptions coarse(Direction d = Direction::Clockwise)
{
    OptimizerOptions o;
    o.direction = d;
    o.x_min = 0.30;
    o.x_max = 0.44;
    o.x_step = 0.02;
    o.omega_span = 0.6;
    o.omega_step = 0.1;
    o.optimize_segments = false;
    return o;
}

} // namespace

TEST(Optimizer, FindsTheCirculationBasin)
{
    const OptimizationResult r = optimize_bias(qps(), 12.0, coarse());
    EXPECT_FALSE(r.no_basin);
    EXPECT_TRUE(r.converged);
    EXPECT_GT(r.achieved, 0.99);
    EXPECT_EQ(r.achieved, r.s(2, 0));
    EXPECT_GT(r.bias.x, 0.3);
    EXPECT_LT(r.bias.x, 0.44);
    EXPECT_EQ(static_cast<std::size_t>(r.evaluations), r.trace.size());
    for (const auto& step : r.trace) {
        EXPECT_LE(step.objective, r.achieved + 1e-12);
    }
}

TEST(Optimizer, IsDeterministic)
{
    OptimizerOptions a = coarse();
    a.solver.threads = 1;
    OptimizerOptions b = coarse();
    b.solver.threads = 4;
    const OptimizationResult r1 = optimize_bias(qps(), 12.0, a);
    const OptimizationResult r2 = optimize_bias(qps(), 12.0, b);
    EXPECT_EQ(r1.bias.x, r2.bias.x);
    EXPECT_EQ(r1.omega, r2.omega);
    EXPECT_EQ(r1.achieved, r2.achieved);
    EXPECT_EQ(r1.evaluations, r2.evaluations);
}

TEST(Optimizer, CounterClockwiseMirrorsClockwise)
{
    const OptimizationResult cw = optimize_bias(qps(), 12.0, coarse());
    const OptimizationResult ccw = optimize_bias(qps(), 12.0, coarse(Direction::CounterClockwise));
    EXPECT_FALSE(ccw.no_basin);
    EXPECT_EQ(ccw.achieved, ccw.s(0, 2));
    EXPECT_NEAR(ccw.bias.x, 1.0 - cw.bias.x, 2e-3);
    EXPECT_NEAR(ccw.omega, cw.omega, 2e-2);
    EXPECT_NEAR(ccw.achieved, cw.achieved, 1e-3);
}

TEST(Optimizer, SegmentRefinementDoesNotLoseGround)
{
    OptimizerOptions o = coarse();
    const OptimizationResult fixed = optimize_bias(qps(), 12.0, o);
    o.optimize_segments = true;
    const OptimizationResult free = optimize_bias(qps(), 12.0, o);
    EXPECT_GE(free.achieved, fixed.achieved - 1e-4);
}

TEST(Optimizer, RefinementStaysInTheSearchWindow)
{
    OptimizerOptions o = coarse();
    o.optimize_segments = true;
    o.segment_span = 0.1;
    const OptimizationResult r = optimize_bias(qps(), 12.0, o);
    EXPECT_GE(r.omega, 12.0 - o.omega_span - 1e-9);
    EXPECT_LE(r.omega, 12.0 + o.omega_span + 1e-9);
    for (int k = 0; k < 3; ++k) {
        EXPECT_LE(std::abs(r.bias.segment[k] - 1.0 / 3.0), 0.1 + 1e-12);
    }
}

TEST(Optimizer, RecoversCirculationWithOneStrongJunction)
{
    const PhysicalSpec spec = with_tunnel_energy(qps(), 0, 0.10);
    OptimizerOptions o;
    o.x_min = 0.30;
    o.x_max = 0.44;
    const OptimizationResult r = optimize_bias(spec, 12.293, o);
    EXPECT_GE(r.achieved, 0.9);
    EXPECT_FALSE(r.no_basin);
}

TEST(Optimizer, FlagsMissingBasin)
{
    PhysicalSpec dark = qps();
    dark.line_param.reset();
    dark.direct_coupling = 0.0;
    const OptimizationResult r = optimize_bias(dark, 12.0, coarse());
    EXPECT_TRUE(r.no_basin);
    EXPECT_FALSE(r.flag.empty());
    EXPECT_EQ(r.achieved, 0.0);
}

TEST(Optimizer, RejectsEmptyGrids)
{
    OptimizerOptions o = coarse();
    o.x_step = 0.0;
    EXPECT_THROW(optimize_bias(qps(), 12.0, o), ConfigError);
    o = coarse();
    o.x_max = 0.1;
    EXPECT_THROW(optimize_bias(qps(), 12.0, o), ConfigError);
    EXPECT_THROW(optimize_bias(qps(), 40.0, coarse()), ConfigError);
}

TEST(Disorder, AxesRoundTripAndAliases)
{
    for (auto a : {DisorderAxes::TunnelEnergy, DisorderAxes::ParasiticMass, DisorderAxes::JunctionMass}) {
        EXPECT_EQ(disorder_axes_from_string(to_string(a)), a);
    }
    EXPECT_EQ(disorder_axes_from_string("E_T"), DisorderAxes::TunnelEnergy);
    EXPECT_EQ(disorder_axes_from_string("C_g"), DisorderAxes::ParasiticMass);
    EXPECT_EQ(disorder_axes_from_string("L_s"), DisorderAxes::JunctionMass);
    EXPECT_THROW(disorder_axes_from_string("nope"), ConfigError);
}

TEST(Disorder, PerturbTouchesOnlyTheChosenElements)
{
    const PhysicalSpec p = perturb(qps(), DisorderAxes::TunnelEnergy, {0, 2}, 0.01, -0.02);
    EXPECT_NEAR(p.tunnel_energy[0], qps().tunnel_energy[0] * 1.01, 1e-12);
    EXPECT_EQ(p.tunnel_energy[1], qps().tunnel_energy[1]);
    EXPECT_NEAR(p.tunnel_energy[2], qps().tunnel_energy[2] * 0.98, 1e-12);
    EXPECT_EQ(p.junction_mass, qps().junction_mass);
    EXPECT_THROW(perturb(qps(), DisorderAxes::JunctionMass, {1, 1}, 0.01, 0.01), ConfigError);
}

TEST(Disorder, StudyReoptimisesEveryRealization)
{
    DisorderOptions d;
    d.grid_a = {0.0, 0.01};
    d.grid_b = {-0.01, 0.0};
    d.omega_hint = 12.0;
    d.optimizer = coarse();
    const DisorderStudy st = disorder_study(qps(), d);
    ASSERT_EQ(st.realizations.size(), 4u);
    EXPECT_EQ(st.realizations[1].delta_a, 0.0);
    EXPECT_EQ(st.realizations[1].delta_b, 0.0);
    EXPECT_EQ(st.realizations[2].delta_a, 0.01);
    EXPECT_EQ(st.realizations[1].optimum.bias.x, st.reference.bias.x);
    EXPECT_EQ(st.realizations[1].optimum.omega, st.reference.omega);
    EXPECT_EQ(st.realizations[1].optimum.achieved, st.reference.achieved);
    for (const auto& r : st.realizations) {
        EXPECT_FALSE(r.optimum.no_basin);
        EXPECT_GT(r.optimum.achieved, 0.97);
    }
    d.grid_a.clear();
    EXPECT_THROW(disorder_study(qps(), d), ConfigError);
}
