#include "ietmfc/meanfield.hpp"
#include "ietmfc/propagation.hpp"

#include "oracle.hpp"
#include "scenarios.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <memory>

namespace ietmfc {
namespace {

using testing_support::vec1;

double rel(double value, double ref) { return std::abs(value - ref) / std::abs(ref); }

struct Fixture {
  Scenario sc = reference_scenario();
  FlowSet fs = solve_flowset(sc.params, sc.grid);
  oracle::Fine fine{sc.params};
};

const Fixture& reference() {
  static const auto fx = std::make_unique<Fixture>();
  return *fx;
}

TEST(PredictMf, RestartReproducesTail) {
  const auto& fs = reference().fs;
  const MFPrediction full = predict_mf(fs, vec1(0.0), 0);
  const long k0 = 700;
  const MFPrediction tail = predict_mf(fs, full.z.at(k0), k0);
  EXPECT_EQ(tail.start_node, k0);
  EXPECT_EQ(tail.z.first_node(), k0);
  for (long k = k0; k <= fs.last_node(); ++k)
    ASSERT_NEAR(tail.z.at(k)(0, 0), full.z.at(k)(0, 0), 1e-12) << k;
}

TEST(PredictMf, MatchesFineOracle) {
  const auto& [sc, fs, fine] = reference();
  const MFPrediction pred = predict_mf(fs, vec1(0.0), 0);
  const oracle::Path z = fine.predict(0.0, 0);
  for (long k : {100L, 1000L, fs.last_node()})
    EXPECT_LT(rel(pred.z.at(k)(0, 0), z[fine.index(k, fs.step())]), 1e-6) << k;
}

TEST(PredictMf, MeanControlUsesEquilibriumOffset) {
  const auto& fs = reference().fs;
  const MFPrediction pred = predict_mf(fs, vec1(1.5), 0);
  for (long k = 0; k <= fs.last_node(); k += 97) {
    const Eigen::MatrixXd expected = -fs.m.Rinv_Bt * (fs.P0.at(k) * pred.z.at(k) + fs.G.at(k));
    ASSERT_NEAR(pred.ubar.at(k)(0, 0), expected(0, 0), 1e-14);
  }
}

TEST(PredictMf, ShiftPropagatesThroughPhi1) {
  const auto& fs = reference().fs;
  const MFPrediction base = predict_mf(fs, vec1(0.0), 0);
  const MFPrediction shifted = predict_mf(fs, vec1(5.0), 0);
  for (long k = 0; k <= fs.last_node(); ++k)
    ASSERT_NEAR(shifted.z.at(k)(0, 0) - base.z.at(k)(0, 0), 5.0 * fs.Phi1.at(k)(0, 0), 1e-8);
}

TEST(PredictMf, RejectsStartAtHorizon) {
  const auto& fs = reference().fs;
  EXPECT_THROW(predict_mf(fs, vec1(0.0), fs.last_node()), std::invalid_argument);
  EXPECT_THROW(predict_mf(fs, vec1(0.0), -1), std::invalid_argument);
}

TEST(SolveOffset, MatchesFineOracle) {
  const auto& [sc, fs, fine] = reference();
  const MFPrediction pred = predict_mf(fs, vec1(5.0), 0);
  const ControlLaw law = solve_offset(fs, pred);
  const oracle::Path g = fine.offset(fine.predict(5.0, 0));
  for (long k : {0L, 500L, 1500L})
    EXPECT_LT(rel(law.g.at(k)(0, 0), g[fine.index(k, fs.step())]), 1e-6) << k;
  EXPECT_EQ(law.valid_from, 0);
  EXPECT_EQ(law.valid_to, fs.last_node());
}

TEST(SolveOffset, BeliefShiftMovesOffsetThroughMg) {
  const auto& fs = reference().fs;
  const KernelSet ks = build_kernels(fs, 0);
  const ControlLaw g0 = solve_offset(fs, predict_mf(fs, vec1(0.0), 0));
  const ControlLaw g5 = solve_offset(fs, predict_mf(fs, vec1(5.0), 0));
  // Believing z0 + E instead of z0 shifts the offset by Mg E.
  for (long k = 0; k <= fs.last_node(); ++k)
    ASSERT_NEAR(g5.g.at(k)(0, 0) - g0.g.at(k)(0, 0), 5.0 * ks.Mg.at(k)(0, 0), 1e-7) << k;
}

TEST(SolveOffset, FeedbackIsAffine) {
  const auto& fs = reference().fs;
  const ControlLaw law = solve_offset(fs, predict_mf(fs, vec1(0.0), 0));
  const Eigen::VectorXd x = vec1(1.2), y = vec1(-3.4);
  for (long k : {0L, 999L, 2000L}) {
    const Eigen::VectorXd mix = law.feedback(0.3 * x + 0.7 * y, k);
    const Eigen::VectorXd parts = 0.3 * law.feedback(x, k) + 0.7 * law.feedback(y, k);
    EXPECT_NEAR(mix(0), parts(0), 1e-9);
  }
  const Eigen::VectorXd u0 = law.feedback(vec1(0.0), 10);
  EXPECT_NEAR(u0(0), -(fs.m.Rinv_Bt * law.g.at(10))(0, 0), 1e-15);
}

TEST(DualRepresentation, HoldsOnReferenceAndPlanar) {
  const auto& fs = reference().fs;
  for (double z0 : {0.0, 5.0, -20.0}) {
    const MFPrediction pred = predict_mf(fs, vec1(z0), 0);
    EXPECT_LE(dual_representation_check(fs, pred, solve_offset(fs, pred)), 1e-6);
  }
  const Scenario planar = testing_support::planar();
  const FlowSet pfs = solve_flowset(planar.params, planar.grid);
  const MFPrediction pred = predict_mf(pfs, Eigen::VectorXd::Constant(2, 3.0), 0);
  EXPECT_LE(dual_representation_check(pfs, pred, solve_offset(pfs, pred)), 1e-6);
  const MFPrediction late = predict_mf(pfs, pred.z.at(400), 400);
  EXPECT_LE(dual_representation_check(pfs, late, solve_offset(pfs, late)), 1e-6);
}

TEST(DualRepresentation, VanishesForZeroCosts) {
  const Scenario sc = testing_support::zero_cost(0.5, -1.0, 0.1);
  const FlowSet fs = solve_flowset(sc.params, sc.grid);
  const MFPrediction pred = predict_mf(fs, vec1(2.0), 0);
  EXPECT_EQ(dual_representation_check(fs, pred, solve_offset(fs, pred)), 0.0);
}

TEST(DualRepresentation, DetectsMismatchedLaw) {
  const auto& fs = reference().fs;
  const MFPrediction pred = predict_mf(fs, vec1(0.0), 0);
  const ControlLaw other = solve_offset(fs, predict_mf(fs, vec1(5.0), 0));
  EXPECT_GT(dual_representation_check(fs, pred, other), 1e-3);
}

TEST(ActualMf, ZeroMeanErrorReproducesPrediction) {
  const auto& fs = reference().fs;
  const MFPrediction pred = predict_mf(fs, vec1(0.0), 0);
  const GridFunction zA = actual_mf(fs, vec1(0.0), vec1(0.0));
  for (long k = 0; k <= fs.last_node(); ++k)
    ASSERT_NEAR(zA.at(k)(0, 0), pred.z.at(k)(0, 0), 1e-8) << k;
}

TEST(ActualMf, MatchesFineOracle) {
  const auto& [sc, fs, fine] = reference();
  const ActualMeanField sys = actual_mf_system(fs, vec1(0.0), vec1(5.0));
  const auto ref = fine.actual(0.0, 5.0);
  for (long k : {200L, 1000L, fs.last_node()}) {
    const long i = fine.index(k, fs.step());
    EXPECT_LT(rel(sys.z_actual.at(k)(0, 0), ref.zA[i]), 1e-6) << k;
    EXPECT_LT(rel(sys.z_bar.at(k)(0, 0), ref.zbar[i]), 1e-6) << k;
  }
  EXPECT_LT(rel(sys.g_bar.at(0)(0, 0), ref.gbar[0]), 1e-6);
}

TEST(ActualMf, DeviationIsMzTimesMeanError) {
  const auto& fs = reference().fs;
  const KernelSet ks = build_kernels(fs, 0);
  const MFPrediction base = predict_mf(fs, vec1(0.0), 0);
  const GridFunction zA = actual_mf(fs, vec1(0.0), vec1(5.0));
  double worst = 0.0, scale = 0.0;
  for (long k = 0; k <= fs.last_node(); ++k) {
    const double expected = base.z.at(k)(0, 0) + 5.0 * ks.Mz.at(k)(0, 0);
    worst = std::max(worst, std::abs(zA.at(k)(0, 0) - expected));
    scale = std::max(scale, std::abs(zA.at(k)(0, 0)));
  }
  EXPECT_LT(worst / scale, 1e-6);
}

TEST(ActualMf, LinearInMeanError) {
  const auto& fs = reference().fs;
  const GridFunction z0 = actual_mf(fs, vec1(1.0), vec1(0.0));
  const GridFunction za = actual_mf(fs, vec1(1.0), vec1(2.0));
  const GridFunction zb = actual_mf(fs, vec1(1.0), vec1(-7.0));
  const GridFunction zab = actual_mf(fs, vec1(1.0), vec1(-5.0));
  for (long k = 0; k <= fs.last_node(); k += 13) {
    const double lhs = zab.at(k)(0, 0) - z0.at(k)(0, 0);
    const double rhs = (za.at(k)(0, 0) - z0.at(k)(0, 0)) + (zb.at(k)(0, 0) - z0.at(k)(0, 0));
    ASSERT_NEAR(lhs, rhs, 1e-9) << k;
  }
}

TEST(ActualMf, DoublingMeanErrorDoublesDeviation) {
  const auto& fs = reference().fs;
  const GridFunction base = predict_mf(fs, vec1(0.0), 0).z;
  const GridFunction once = actual_mf(fs, vec1(0.0), vec1(10.0));
  const GridFunction twice = actual_mf(fs, vec1(0.0), vec1(20.0));
  for (long k = 0; k <= fs.last_node(); ++k)
    ASSERT_NEAR(twice.at(k)(0, 0) - base.at(k)(0, 0), 2.0 * (once.at(k)(0, 0) - base.at(k)(0, 0)),
                1e-8)
        << k;
}

}  // namespace
}  // namespace ietmfc
