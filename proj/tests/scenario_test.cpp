#include "irscrlb/scenario.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "irscrlb/kv_config.hpp"
#include "test_util.hpp"

namespace irscrlb {
namespace {

TEST(PathLoss, ReferenceDistance) {
  const Scenario s = reference_scenario();
  EXPECT_NEAR(path_loss(1.0, s), 1e-3, 1e-18);
  Scenario unit = s;
  unit.pathloss_ref = 1.0;
  unit.ref_distance_m = 3.0;
  EXPECT_DOUBLE_EQ(path_loss(3.0, unit), 1.0);
}

TEST(PathLoss, ApToIrsDistance) {
  const double expected = 1e-3 * std::pow(50.0, -1.25);
  EXPECT_NEAR(path_loss(std::sqrt(50.0), reference_scenario()), expected, 1e-12 * expected);
  EXPECT_NEAR(expected, 7.52e-6, 0.01e-6);
}

TEST(PathLoss, StrictlyDecreasing) {
  const Scenario s = reference_scenario();
  double prev = path_loss(0.01, s);
  for (double d = 0.02; d < 100.0; d *= 1.3) {
    const double cur = path_loss(d, s);
    EXPECT_LT(cur, prev);
    prev = cur;
  }
}

TEST(PathLoss, RejectsNonPositiveDistance) {
  EXPECT_THROW(path_loss(0.0, reference_scenario()), std::domain_error);
  EXPECT_THROW(path_loss(-1.0, reference_scenario()), std::domain_error);
}

TEST(Geometry, ReferenceTargetSitsOnBroadside) {
  const Scenario s = reference_scenario();
  EXPECT_NEAR(target_doa(s), 0.0, 1e-15);
  // IRS at (5, 5) looking straight down at the target.
  EXPECT_NEAR(irs_broadside(s), -kPi / 2.0, 1e-15);
}

TEST(Geometry, AngleSignFollowsArrayAxis) {
  // Broadside along +y; the array axis is broadside rotated clockwise, i.e. +x.
  EXPECT_NEAR(angle_from_broadside({0, 0}, {1, 1}, kPi / 2.0), kPi / 4.0, 1e-15);
  EXPECT_NEAR(angle_from_broadside({0, 0}, {-1, 1}, kPi / 2.0), -kPi / 4.0, 1e-15);
  EXPECT_NEAR(angle_from_broadside({0, 0}, {0, 3}, kPi / 2.0), 0.0, 1e-15);
}

TEST(UlaResponse, UnitModulusAndPhaseStep) {
  const CVector a = ula_response(4, kPi / 6.0, 0.5);
  const Complex expected[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (int n = 0; n < 4; ++n) EXPECT_LT(std::abs(a(n) - expected[n]), 1e-12);
}

TEST(GenerateChannel, ReproducibleWithSeed) {
  const Scenario s = reference_scenario();
  Rng r1(42), r2(42), r3(43);
  const auto a = generate_channel(s, r1);
  const auto b = generate_channel(s, r2);
  const auto c = generate_channel(s, r3);
  EXPECT_TRUE(a.G == b.G);
  EXPECT_EQ(a.alpha, b.alpha);
  EXPECT_FALSE(a.G == c.G);
}

TEST(GenerateChannel, PureLosIsRankOne) {
  Scenario s = reference_scenario();
  s.rician_factor = std::numeric_limits<double>::infinity();
  Rng rng(5);
  const auto ch = generate_channel(s, rng);
  Eigen::JacobiSVD<CMatrix> svd(ch.G);
  const auto sv = svd.singularValues();
  EXPECT_GT(sv(0), 0.0);
  EXPECT_LT(sv(1), 1e-12 * sv(0));
}

TEST(GenerateChannel, RicianDrawIsFullRank) {
  const Scenario s = reference_scenario();
  Rng rng(7);
  const auto ch = generate_channel(s, rng);
  Eigen::JacobiSVD<CMatrix> svd(ch.G);
  const auto sv = svd.singularValues();
  EXPECT_GT(sv(sv.size() - 1), 1e-6 * sv(0));
}

TEST(GenerateChannel, LosComponentIsOuterProductOfArrayResponses) {
  Scenario s = reference_scenario();
  s.rician_factor = std::numeric_limits<double>::infinity();
  Rng rng(1);
  const auto ch = generate_channel(s, rng);
  const double pl = path_loss(std::hypot(5.0, 5.0), s);
  const double phi_irs = angle_from_broadside(s.irs_position, s.ap_position, irs_broadside(s));
  const double phi_ap = angle_from_broadside(s.ap_position, s.irs_position, s.ap_broadside_rad);
  const CMatrix expected = std::sqrt(pl) * ula_response(s.num_irs_elements, phi_irs, s.element_spacing_ratio) *
                           ula_response(s.num_ap_antennas, phi_ap, 0.5).transpose();
  EXPECT_LT((ch.G - expected).norm(), 1e-12 * expected.norm());
}

TEST(GenerateChannel, NlosEnergyConcentrates) {
  Scenario s = reference_scenario();
  s.rician_factor = 0.0;
  const double pl = path_loss(std::hypot(5.0, 5.0), s);
  Rng rng(11);
  double sum = 0.0;
  const int draws = 1000;
  for (int i = 0; i < draws; ++i) sum += generate_channel(s, rng).G.squaredNorm() / pl;
  const double nm = s.num_ap_antennas * s.num_irs_elements;
  EXPECT_NEAR(sum / draws, nm, 0.05 * nm);
}

TEST(GenerateChannel, TargetCoefficientMagnitude) {
  Scenario s = reference_scenario();
  s.rcs = 4.0;
  Rng rng(2);
  const auto ch = generate_channel(s, rng);
  const double one_way = 1e-3 * std::pow(5.0, -2.5);
  EXPECT_NEAR(std::abs(ch.alpha), 2.0 * one_way, 1e-12 * one_way);
  EXPECT_NEAR(ch.theta, 0.0, 1e-15);
}

TEST(ScenarioFile, RoundTripsThroughCanonicalText) {
  Scenario s = reference_scenario();
  s.num_irs_elements = 12;
  s.rician_factor = std::numeric_limits<double>::infinity();
  s.noise_power_w = 3.7e-14;
  s.irs_broadside_rad = 0.25;
  s.rng_seed = 987654321987654321ull;
  const Scenario back = parse_scenario(serialize_scenario(s));
  EXPECT_EQ(serialize_scenario(back), serialize_scenario(s));
  EXPECT_EQ(scenario_hash(back), scenario_hash(s));
  EXPECT_EQ(back.num_irs_elements, 12);
  EXPECT_TRUE(std::isinf(back.rician_factor));
  EXPECT_EQ(back.noise_power_w, 3.7e-14);
}

TEST(ScenarioFile, UnitsConvertedOnLoad) {
  const Scenario s = parse_scenario("power_budget_dbm = 20\nnoise_power_dbm = -90\npathloss_ref_db = -20\n");
  EXPECT_NEAR(s.power_budget_w, 0.1, 1e-15);
  EXPECT_NEAR(s.noise_power_w, 1e-12, 1e-25);
  EXPECT_NEAR(s.pathloss_ref, 1e-2, 1e-16);
}

TEST(ScenarioFile, HashChangesWithContent) {
  Scenario s = reference_scenario();
  const auto h = scenario_hash(s);
  s.dwell_slots = 128;
  EXPECT_NE(scenario_hash(s), h);
}

TEST(ScenarioFile, ErrorsNameTheKey) {
  auto key_of = [](std::string_view text) {
    try {
      parse_scenario(text);
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(key_of("num_ap_antennas = eight\n"), "num_ap_antennas");
  EXPECT_EQ(key_of("wavelength = 0.1\n"), "wavelength");
  EXPECT_EQ(key_of("ap_position = 1\n"), "ap_position");
  EXPECT_EQ(key_of("num_irs_elements = 1\n"), "num_irs_elements");
  EXPECT_EQ(key_of("power_budget_dbm = 1\npower_budget_w = 1\n"), "power_budget_dbm");
}

TEST(ScenarioValidate, RejectsInvalidFields) {
  auto bad = [](auto mutate) {
    Scenario s = reference_scenario();
    mutate(s);
    return s;
  };
  EXPECT_THROW(bad([](Scenario& s) { s.num_ap_antennas = 1; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](Scenario& s) { s.num_irs_elements = 1; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](Scenario& s) { s.dwell_slots = 0; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](Scenario& s) { s.power_budget_w = 0.0; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](Scenario& s) { s.noise_power_w = -1.0; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](Scenario& s) { s.element_spacing_ratio = 0.0; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](Scenario& s) { s.rician_factor = -0.1; }).validate(), std::invalid_argument);
  EXPECT_NO_THROW(reference_scenario().validate());
}

TEST(DeriveRng, StreamsAreIndependentAndStable) {
  auto first = [](std::uint64_t seed, std::initializer_list<std::uint64_t> s) { return derive_rng(seed, s)(); };
  EXPECT_EQ(first(1, {2, 3}), first(1, {2, 3}));
  EXPECT_NE(first(1, {2, 3}), first(1, {3, 2}));
  EXPECT_NE(first(1, {2}), first(2, {2}));
  EXPECT_NE(first(1, {2}), first(1, {2, 0}));
}

TEST(Units, DbmRoundTrip) {
  EXPECT_DOUBLE_EQ(dbm_to_watts(30.0), 1.0);
  EXPECT_NEAR(watts_to_dbm(dbm_to_watts(-17.5)), -17.5, 1e-12);
  EXPECT_DOUBLE_EQ(db_to_linear(-30.0), 1e-3);
}

}  // namespace
}  // namespace irscrlb
