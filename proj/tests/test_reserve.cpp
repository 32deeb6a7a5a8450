#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "gridrisk/gbm.hpp"
#include "gridrisk/reserve.hpp"
#include "gridrisk/rng.hpp"
#include "oracles.hpp"

using gridrisk::gbm::GbmParams;
using gridrisk::gbm::MeanConvention;
using gridrisk::reserve::ReserveProblem;

namespace {

ReserveProblem paper_problem() {
  ReserveProblem p;
  p.gbm = GbmParams{20.0, 0.1, 0.3};
  p.demand = 25.0;
  p.block_power = 1.0;
  p.horizon = 5.0;
  p.tolerance = 6.25;  // 0.01 per-unit^2 on a 25 kW base
  return p;
}

}  // namespace

TEST_SUITE("reserve") {

TEST_CASE("block count clamps at zero when generation covers demand") {
  ReserveProblem p = paper_problem();
  CHECK(gridrisk::reserve::optimal_blocks(p, 30.0, 0.5) == 0.0);
  CHECK(gridrisk::reserve::optimal_blocks(p, 30.0, 4.0) == 0.0);
}

TEST_CASE("zero-drift block count is the plain deficit") {
  ReserveProblem p = paper_problem();
  p.gbm.mu_g = 0.0;
  p.block_power = 5.0;
  for (double dt : {0.1, 1.0, 4.0}) {
    CHECK(gridrisk::reserve::optimal_blocks(p, 20.0, dt) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("worked block count for the drifting case") {
  ReserveProblem p = paper_problem();
  const double k = gridrisk::reserve::optimal_blocks(p, 20.0, 0.5);
  CHECK(k == doctest::Approx(25.0 - 20.508438550409649).epsilon(1e-10));
}

TEST_CASE("closed-form block count beats golden-section search") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> p_dist(5.0, 40.0);
  std::uniform_real_distribution<double> dt_dist(0.05, 3.0);
  std::uniform_real_distribution<double> d_dist(5.0, 40.0);
  std::uniform_real_distribution<double> pb_dist(0.5, 5.0);
  for (int trial = 0; trial < 60; ++trial) {
    ReserveProblem p = paper_problem();
    p.demand = d_dist(rng);
    p.block_power = pb_dist(rng);
    const double p_obs = p_dist(rng);
    const double dt = dt_dist(rng);
    const double k_closed = gridrisk::reserve::optimal_blocks(p, p_obs, dt);
    const double k_best = oracles::golden_section_min(
        [&](double k) {
          return gridrisk::reserve::expected_sq_mismatch(p, p_obs, k, dt);
        },
        0.0, 10.0 * p.demand / p.block_power);
    const double f_closed =
        gridrisk::reserve::expected_sq_mismatch(p, p_obs, k_closed, dt);
    const double f_best =
        gridrisk::reserve::expected_sq_mismatch(p, p_obs, k_best, dt);
    CAPTURE(trial);
    CHECK(f_closed <= f_best + 1e-7);
  }
}

TEST_CASE("expected mismatch of a deterministic flat process") {
  ReserveProblem p = paper_problem();
  p.gbm = GbmParams{20.0, 0.0, 0.0};
  p.block_power = 1.0;
  // Exact match: p + k Pb = D.
  CHECK(gridrisk::reserve::expected_sq_mismatch(p, 20.0, 5.0, 1.0) ==
        doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  // Constant shortfall of 5 kW.
  CHECK(gridrisk::reserve::expected_sq_mismatch(p, 20.0, 0.0, 1.0) ==
        doctest::Approx(25.0).epsilon(1e-12));
}

TEST_CASE("expected mismatch agrees with moment quadrature") {
  ReserveProblem p = paper_problem();
  const double p_obs = 20.0;
  const double dt = 0.5;
  const double k = 4.4915614495903486;
  const double got = gridrisk::reserve::expected_sq_mismatch(p, p_obs, k, dt);
  const double mu = p.gbm.mu_g;
  const double sig2 = p.gbm.sigma_g * p.gbm.sigma_g;
  const double c = k * p.block_power - p.demand;
  const double want =
      oracles::simpson(
          [&](double s) {
            const double first = p_obs * std::exp(mu * s);
            const double second = p_obs * p_obs * std::exp((2.0 * mu + sig2) * s);
            return second + 2.0 * c * first + c * c;
          },
          0.0, dt, 4000) /
      dt;
  CHECK(got == doctest::Approx(want).epsilon(1e-8));
}

TEST_CASE("zero blocks is optimal whenever the unclamped count is negative") {
  ReserveProblem p = paper_problem();
  p.demand = 10.0;  // well below generation
  for (double dt : {0.2, 1.0, 3.0}) {
    const double k = gridrisk::reserve::optimal_blocks(p, 20.0, dt);
    REQUIRE(k == 0.0);
    const double at_zero =
        gridrisk::reserve::expected_sq_mismatch(p, 20.0, 0.0, dt);
    for (double k_alt : {0.1, 1.0, 5.0, 20.0}) {
      CHECK(at_zero <= gridrisk::reserve::expected_sq_mismatch(p, 20.0, k_alt, dt));
    }
  }
}

TEST_CASE("optimal mismatch is nondecreasing in the window length") {
  ReserveProblem p = paper_problem();
  double prev = 0.0;
  for (double dt : {0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 4.0}) {
    const double k = gridrisk::reserve::optimal_blocks(p, 20.0, dt);
    const double m = gridrisk::reserve::expected_sq_mismatch(p, 20.0, k, dt);
    CHECK(m >= prev - 1e-12);
    prev = m;
  }
}

TEST_CASE("interval_length spans the horizon for a deterministic process") {
  ReserveProblem p = paper_problem();
  p.gbm = GbmParams{20.0, 0.0, 0.0};
  const auto choice = gridrisk::reserve::interval_length(p, 20.0);
  CHECK(choice.dt == doctest::Approx(5.0));
  CHECK(choice.tolerance_met);
}

TEST_CASE("vanishing tolerance clamps to the step floor") {
  ReserveProblem p = paper_problem();
  p.tolerance = 1e-12;
  const auto choice = gridrisk::reserve::interval_length(p, 20.0);
  CHECK(choice.dt == doctest::Approx(p.horizon / 1e4));
  CHECK_FALSE(choice.tolerance_met);
}

TEST_CASE("interval_length shrinks with volatility") {
  double prev = 1e300;
  for (double sigma : {0.1, 0.2, 0.3, 0.5}) {
    ReserveProblem p = paper_problem();
    p.gbm.sigma_g = sigma;
    p.tolerance = 1.0;
    const auto choice = gridrisk::reserve::interval_length(p, 20.0);
    CHECK(choice.dt <= prev + 1e-12);
    CHECK(choice.dt > 0.0);
    prev = choice.dt;
  }
}

TEST_CASE("interval_length honors the mismatch tolerance at its choice") {
  ReserveProblem p = paper_problem();
  const auto choice = gridrisk::reserve::interval_length(p, 20.0);
  REQUIRE(choice.tolerance_met);
  const double k = gridrisk::reserve::optimal_blocks(p, 20.0, choice.dt);
  CHECK(gridrisk::reserve::expected_sq_mismatch(p, 20.0, k, choice.dt) <=
        p.tolerance * (1.0 + 1e-9));
  // Slightly longer windows break the tolerance (the choice is maximal).
  const double k2 = gridrisk::reserve::optimal_blocks(p, 20.0, choice.dt * 1.01);
  CHECK(gridrisk::reserve::expected_sq_mismatch(p, 20.0, k2, choice.dt * 1.01) >
        p.tolerance);
}

TEST_CASE("deterministic exact-match plan is a single empty interval") {
  ReserveProblem p = paper_problem();
  p.gbm = GbmParams{25.0, 0.0, 0.0};
  p.demand = 25.0;
  const auto path = gridrisk::gbm::simulate_path(p.gbm, 5.0, 300, 1);
  const auto plan = gridrisk::reserve::plan_horizon(p, path);
  REQUIRE(plan.intervals.size() == 1);
  CHECK(plan.intervals[0].t_start == 0.0);
  CHECK(plan.intervals[0].t_end == doctest::Approx(5.0));
  CHECK(plan.intervals[0].k_blocks == 0.0);
  CHECK(plan.intervals[0].realized_avg_sq_mismatch ==
        doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(plan.total_covered >= 5.0 - 1e-12);
}

TEST_CASE("plans are contiguous, covering, and nonnegative") {
  ReserveProblem p = paper_problem();
  for (std::uint64_t seed : {3u, 17u, 90u}) {
    const auto path = gridrisk::gbm::simulate_path(
        p.gbm, p.horizon, 300, gridrisk::rng::mix_seed(seed, 0));
    const auto plan = gridrisk::reserve::plan_horizon(p, path);
    CAPTURE(seed);
    REQUIRE(!plan.intervals.empty());
    CHECK(plan.intervals.front().t_start == 0.0);
    for (std::size_t i = 0; i < plan.intervals.size(); ++i) {
      const auto& iv = plan.intervals[i];
      CHECK(iv.t_end > iv.t_start);
      CHECK(iv.k_blocks >= 0.0);
      if (i > 0) {
        CHECK(iv.t_start == plan.intervals[i - 1].t_end);
      }
    }
    CHECK(plan.intervals.back().t_end == doctest::Approx(p.horizon));
    CHECK(plan.total_covered >= p.horizon - 1e-9);
    // Nonuniform steps: the adaptive rule reacts to the observed level.
    if (plan.intervals.size() >= 3) {
      bool all_equal = true;
      const double first = plan.intervals[0].t_end - plan.intervals[0].t_start;
      for (const auto& iv : plan.intervals) {
        if (std::abs((iv.t_end - iv.t_start) - first) > 1e-9) {
          all_equal = false;
        }
      }
      CHECK_FALSE(all_equal);
    }
  }
}

TEST_CASE("integer block mode rounds up and reports its cost") {
  ReserveProblem p = paper_problem();
  p.integer_blocks = true;
  const auto path = gridrisk::gbm::simulate_path(p.gbm, p.horizon, 300, 12);
  const auto plan = gridrisk::reserve::plan_horizon(p, path);
  for (const auto& iv : plan.intervals) {
    CHECK(iv.k_blocks == std::floor(iv.k_blocks));
    CHECK(iv.rounding_penalty >= -1e-12);
  }
}

TEST_CASE("literal convention shifts the block count off the Markov value") {
  ReserveProblem p = paper_problem();
  const double markov = gridrisk::reserve::optimal_blocks(p, 20.0, 0.5, 2.0);
  p.convention = MeanConvention::literal_printed;
  const double literal_t0 = gridrisk::reserve::optimal_blocks(p, 20.0, 0.5, 0.0);
  const double literal_t2 = gridrisk::reserve::optimal_blocks(p, 20.0, 0.5, 2.0);
  CHECK(literal_t0 == doctest::Approx(markov).epsilon(1e-12));
  CHECK(literal_t2 < markov);  // inflated conditional mean, fewer blocks
}

TEST_CASE("argument validation") {
  ReserveProblem p = paper_problem();
  CHECK_THROWS_AS(gridrisk::reserve::optimal_blocks(p, 0.0, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(gridrisk::reserve::optimal_blocks(p, 20.0, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(gridrisk::reserve::expected_sq_mismatch(p, 20.0, -1.0, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(gridrisk::reserve::interval_length(p, -3.0),
                  std::invalid_argument);
  const auto short_path = gridrisk::gbm::simulate_path(p.gbm, 2.0, 50, 1);
  CHECK_THROWS_AS(gridrisk::reserve::plan_horizon(p, short_path),
                  std::invalid_argument);
}

}  // TEST_SUITE
