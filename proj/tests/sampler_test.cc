#include "bornrate/sampler.h"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <sstream>

#include "bornrate/error.h"
#include "bornrate/philox.h"
#include "gtest/gtest.h"
#include "test_oracles.h"

namespace bornrate {
namespace {

const BornDistribution& Gaussian() {
  static const auto d =
      BornDistribution::Validate(WavefunctionSpec::Gaussian(1.0, 8.0));
  return d;
}

TEST(Philox, KnownAnswerVectors) {
  // Expected blocks from the Random123 known-answer file (kat_vectors).
  EXPECT_EQ(Philox4x64::Generate({0, 0, 0, 0}, {0, 0}),
            (Philox4x64::Block{0x16554d9eca36314cULL, 0xdb20fe9d672d0fdcULL,
                               0xd7e772cee186176bULL, 0x7e68b68aec7ba23bULL}));
  EXPECT_EQ(Philox4x64::Generate({0x243f6a8885a308d3ULL, 0x13198a2e03707344ULL,
                                  0xa4093822299f31d0ULL, 0x082efa98ec4e6c89ULL},
                                 {0x452821e638d01377ULL, 0xbe5466cf34e90c6cULL}),
            (Philox4x64::Block{0xa528f45403e61d95ULL, 0x38c72dbd566e9788ULL,
                               0xa5a1610e72fd18b5ULL, 0x57bd43b5e52b7fe6ULL}));
  // Project layout: seed 12345, draw 0 of the thinning stream (value from
  // tests/oracles/philox_oracle.py).
  EXPECT_EQ(DrawBits(12345, Substream::kThinning, 0), 0x71d90372eaaf8400ULL);
}

TEST(Philox, UniformStrictlyInsideUnitInterval) {
  EXPECT_GT(BitsToUnitOpen(0), 0.0);
  EXPECT_LT(BitsToUnitOpen(~0ULL), 1.0);
  EXPECT_EQ(BitsToUnitOpen(0), 0x1.0p-53);
  EXPECT_EQ(BitsToUnitOpen(~0ULL), 1.0 - 0x1.0p-53);
}

TEST(SampleEvents, FullEfficiencyKeepsEverything) {
  const auto log = SampleEvents(Gaussian(), {1.0}, 1000, 1);
  ASSERT_EQ(log.events.size(), 1000u);
  for (std::size_t i = 0; i < log.events.size(); ++i) {
    EXPECT_EQ(log.events[i].seq, i + 1);
    EXPECT_LE(std::abs(log.events[i].x), 8.0);
  }
  EXPECT_EQ(log.emitted_count, 1000u);
  EXPECT_EQ(log.rng, "philox4x64-10");
}

TEST(SampleEvents, ZeroEfficiencyKeepsNothing) {
  EXPECT_TRUE(SampleEvents(Gaussian(), {0.0}, 1000, 1).events.empty());
}

TEST(SampleEvents, RejectsEfficiencyOutsideUnitInterval) {
  EXPECT_THROW(SampleEvents(Gaussian(), {1.5}, 10, 1), Error);
  EXPECT_THROW(SampleEvents(Gaussian(), {-0.1}, 10, 1), Error);
}

TEST(SampleEvents, HalfEfficiencyCountAndMoments) {
  const auto log = SampleEvents(Gaussian(), {0.5}, 100000, 2024);
  const double n = static_cast<double>(log.events.size());
  // Binomial(1e5, 0.5): 4 sd = 632.
  EXPECT_LE(std::abs(n - 50000.0), 4.0 * std::sqrt(100000 * 0.25));
  double mean = 0.0;
  for (const auto& ev : log.events) mean += ev.x;
  mean /= n;
  double var = 0.0;
  for (const auto& ev : log.events) var += (ev.x - mean) * (ev.x - mean);
  var /= n - 1.0;
  // Moments of N(0, 1) truncated at 8 sigma: mean 0, variance 1 - 3e-14.
  EXPECT_LE(std::abs(mean), 3.0 / std::sqrt(n));
  EXPECT_LE(std::abs(var - 1.0), 3.0 * std::sqrt(2.0 / (n - 1.0)));
}

TEST(SampleEvents, DeterministicAndByteIdentical) {
  const auto a = SampleEvents(Gaussian(), {0.7}, 5000, 99);
  const auto b = SampleEvents(Gaussian(), {0.7}, 5000, 99);
  EXPECT_EQ(a, b);
  std::ostringstream sa, sb;
  WriteEventLog(sa, a);
  WriteEventLog(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_NE(SampleEvents(Gaussian(), {0.7}, 5000, 100), a);
}

TEST(SampleEvents, ThinningNeverMovesSurvivors) {
  const auto full = SampleEvents(Gaussian(), {1.0}, 40000, 5);
  const auto thin = SampleEvents(Gaussian(), {0.25}, 40000, 5);
  // Survivors form a subsequence of the full stream.
  std::size_t k = 0;
  for (const auto& ev : full.events) {
    if (k < thin.events.size() && ev.x == thin.events[k].x) ++k;
  }
  EXPECT_EQ(k, thin.events.size());

  // Matched recorded-N comparison within DKW bands.
  const std::size_t n = thin.events.size();
  std::vector<double> head;
  for (std::size_t i = 0; i < n; ++i) head.push_back(full.events[i].x);
  const double band = testing::DkwHalfWidth(static_cast<double>(n), 0.001);
  auto cdf = [](double x) { return Gaussian().Cdf(x); };
  EXPECT_LE(testing::BruteForceKs(head, cdf), band);
  EXPECT_LE(testing::BruteForceKs(thin.Positions(), cdf), band);
}

TEST(SampleEvents, ChiSquareOnEqualMassCells) {
  const auto log = SampleEvents(Gaussian(), {1.0}, 1000000, 77);
  // Cell edges from Boost's normal quantile, not from the sampler.
  boost::math::normal_distribution<double> normal;
  std::vector<double> edges;
  for (int k = 1; k < 64; ++k) {
    edges.push_back(boost::math::quantile(normal, k / 64.0));
  }
  std::vector<double> counts(64, 0.0);
  for (const auto& ev : log.events) {
    const auto cell = std::upper_bound(edges.begin(), edges.end(), ev.x) -
                      edges.begin();
    counts[static_cast<std::size_t>(cell)] += 1.0;
  }
  const double expected = 1e6 / 64.0;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  boost::math::chi_squared_distribution<double> ref(63);
  EXPECT_LT(chi2, boost::math::quantile(ref, 0.999));
}

TEST(GoodnessOfFit, StratifiedPlacement) {
  const auto& d = Gaussian();
  EventLog log;
  log.emitted_count = 1000;
  for (int i = 1; i <= 1000; ++i) {
    log.events.push_back({static_cast<std::uint64_t>(i), d.Quantile(i / 1001.0)});
  }
  const auto gof = CheckGoodnessOfFit(log, d);
  EXPECT_LE(gof.d_raw, 1.0 / 1001.0 + 1e-9);
  EXPECT_TRUE(gof.within_band);
}

TEST(GoodnessOfFit, SingleEventAtMedian) {
  EventLog log;
  log.emitted_count = 1;
  log.events.push_back({1, Gaussian().Quantile(0.5)});
  EXPECT_NEAR(CheckGoodnessOfFit(log, Gaussian()).d_raw, 0.5, 1e-10);
}

TEST(GoodnessOfFit, EmptyLogIsInsufficient) {
  try {
    CheckGoodnessOfFit(EventLog{}, Gaussian());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientData);
  }
}

TEST(GoodnessOfFit, AgreesWithBruteForceKs) {
  const auto log = SampleEvents(Gaussian(), {1.0}, 20000, 8);
  const double brute = testing::BruteForceKs(
      log.Positions(), [](double x) { return testing::StdNormalCdf(x); });
  EXPECT_NEAR(CheckGoodnessOfFit(log, Gaussian()).d_raw, brute, 1e-9);
}

TEST(GoodnessOfFit, HundredSeedsInsideDkwBand) {
  int inside = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto log = SampleEvents(Gaussian(), {1.0}, 100000, seed);
    inside += CheckGoodnessOfFit(log, Gaussian()).within_band;
  }
  EXPECT_GE(inside, 99);
}

TEST(EventLogFormat, ExactRoundTrip) {
  auto dist = BornDistribution::Validate(WavefunctionSpec::Tabulated(
      {{-1, 0.1}, {0, 3.25}, {0.5, 0.0}, {1, 1.0 / 3.0}}));
  for (const BornDistribution* d : {&Gaussian(), static_cast<const BornDistribution*>(&dist)}) {
    const auto log = SampleEvents(*d, {0.3}, 3000, 0xfeedfacecafebeefULL);
    std::stringstream ss;
    WriteEventLog(ss, log, {{"tool", "test"}});
    EXPECT_EQ(ReadEventLog(ss), log);
  }
}

TEST(EventLogFormat, HeaderLayout) {
  const auto log = SampleEvents(Gaussian(), {1.0}, 2, 42);
  std::ostringstream os;
  WriteEventLog(os, log);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# seed=42");
  std::getline(in, line);
  EXPECT_EQ(line, "# e=1");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("# spec={", 0), 0u);
  std::getline(in, line);
  EXPECT_EQ(line, "# emitted=2");
  std::getline(in, line);
  EXPECT_EQ(line, "# rng=philox4x64-10");
  std::getline(in, line);
  EXPECT_EQ(line, "seq,x");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("1,", 0), 0u);
}

TEST(EventLogFormat, ParseErrorsCarryLineNumbers) {
  const std::string head =
      "# seed=1\n# e=1\n# spec={\"kind\":\"gaussian\",\"sigma\":1,\"L\":8}\n"
      "# emitted=5\nseq,x\n";
  auto line_of = [](const std::string& text) -> std::string {
    std::istringstream in(text);
    try {
      ReadEventLog(in);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kParse);
      return e.what();
    }
    return "no error";
  };
  EXPECT_NE(line_of(head + "1,0.5\n2,abc\n").find("line 7"), std::string::npos);
  EXPECT_NE(line_of(head + "1,0.5\n3,0.1\n").find("line 7"), std::string::npos);
  EXPECT_NE(line_of("# seed=1\nseq,x\n").find("line 2"), std::string::npos);
  EXPECT_NE(line_of(head + "1,0.1\n2,0.1\n3,0.1\n4,0.1\n5,0.1\n6,0.1\n")
                .find("more events"),
            std::string::npos);
}

}  // namespace
}  // namespace bornrate
