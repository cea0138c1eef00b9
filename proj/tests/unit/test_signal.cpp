// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "megtext/error.hpp"
#include "megtext/signal/filters.hpp"
#include "megtext/signal/npy.hpp"
#include "megtext/signal/preprocess.hpp"
#include "megtext/signal/resample.hpp"
#include "megtext/signal/scaling.hpp"
#include "support/oracles.hpp"

using namespace megtext;
using megtext::oracle::db;
using megtext::oracle::sine_recording;
using megtext::oracle::tone_power;

namespace {

// Power ratio in dB (output over input) of a pure tone through `f`, measured away from the edges.
template <typename F>
double tone_gain_db(double freq_hz, double rate_hz, F&& f, double seconds = 8.0) {
  auto in = sine_recording(1, seconds, rate_hz, freq_hz);
  auto out = f(in);
  const Eigen::Index n = in.time_samples();
  const Eigen::Index first = n / 4, count = n / 2;
  return db(tone_power(out.samples, 0, rate_hz, freq_hz, first, count) /
            tone_power(in.samples, 0, rate_hz, freq_hz, first, count));
}

}  // namespace

TEST(Notch, AttenuatesLineFrequency) {
  const double g = tone_gain_db(50.0, 1000.0, [](auto r) { return signal::notch_filter(r, 50.0); });
  EXPECT_LE(g, -20.0);
}

TEST(Notch, LeavesFarBandAlone) {
  for (double f : {10.0, 30.0, 120.0}) {
    const double g = tone_gain_db(f, 1000.0, [](auto r) { return signal::notch_filter(r, 50.0); });
    EXPECT_LT(std::abs(g), 1.0) << f << " Hz";
  }
}

TEST(Notch, RejectsNyquistAndAbove) {
  auto rec = sine_recording(1, 1.0, 100.0, 5.0);
  EXPECT_THROW(signal::notch_filter(rec, 50.0), ConfigError);
  EXPECT_THROW(signal::notch_filter(rec, 70.0), ConfigError);
}

TEST(Bandpass, EdgesAndPassband) {
  auto bp = [](auto r) { return signal::bandpass_filter(r, 1.0, 60.0); };
  EXPECT_LT(std::abs(tone_gain_db(30.0, 1000.0, bp)), 1.0);
  EXPECT_LT(std::abs(tone_gain_db(10.0, 1000.0, bp)), 1.0);
  EXPECT_LE(tone_gain_db(0.5, 1000.0, bp, 16.0), -12.0);
  EXPECT_LE(tone_gain_db(0.2, 1000.0, bp, 20.0), -12.0);
  EXPECT_LE(tone_gain_db(90.0, 1000.0, bp), -12.0);
}

TEST(Bandpass, HighEdgeClampedNearNyquist) {
  // At 200 Hz the upper test tone is min(1.5 * 80, 0.9 * 100) = 90 Hz.
  auto bp = [](auto r) { return signal::bandpass_filter(r, 1.0, 60.0); };
  EXPECT_LE(tone_gain_db(90.0, 200.0, bp), -12.0);
}

TEST(Bandpass, InvalidEdges) {
  auto rec = sine_recording(1, 1.0, 1000.0, 5.0);
  EXPECT_THROW(signal::bandpass_filter(rec, 60.0, 1.0), ConfigError);
  EXPECT_THROW(signal::bandpass_filter(rec, 0.0, 60.0), ConfigError);
  EXPECT_THROW(signal::bandpass_filter(rec, 1.0, 500.0), ConfigError);
}

TEST(Filters, ZerosStayZero) {
  signal::Recording z{signal::SampleMatrix::Zero(3, 4000), 1000.0, {}};
  EXPECT_TRUE(signal::notch_filter(z, 50.0).samples.isZero(0.0));
  EXPECT_TRUE(signal::bandpass_filter(z, 1.0, 60.0).samples.isZero(0.0));
}

TEST(Resample, LengthAndRate) {
  signal::Recording r{signal::SampleMatrix::Random(3, 10000), 1000.0, {}};
  auto out = signal::resample(r, 200.0);
  EXPECT_EQ(out.time_samples(), 2000);
  EXPECT_EQ(out.channels(), 3);
  EXPECT_DOUBLE_EQ(out.sample_rate_hz, 200.0);
  auto odd = signal::resample(signal::Recording{signal::SampleMatrix::Random(1, 1234), 1000.0, {}}, 300.0);
  EXPECT_EQ(odd.time_samples(), std::lround(1234 * 0.3));
}

TEST(Resample, PreservesLowTone) {
  auto out = signal::resample(sine_recording(1, 10.0, 1000.0, 1.0), 200.0);
  const Eigen::Index n = out.time_samples();
  double sxy = 0, sxx = 0, syy = 0;
  for (Eigen::Index i = n / 10; i < n - n / 10; ++i) {
    const double ref = std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / 200.0);
    sxy += ref * out.samples(0, i);
    sxx += ref * ref;
    syy += out.samples(0, i) * out.samples(0, i);
  }
  EXPECT_GE(sxy / std::sqrt(sxx * syy), 0.999);
}

TEST(Resample, IdentityAtSameRate) {
  signal::Recording r{signal::SampleMatrix::Random(2, 500), 250.0, {}};
  auto out = signal::resample(r, 250.0);
  EXPECT_LE((out.samples - r.samples).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(RobustScale, WorkedExamples) {
  signal::Recording r{signal::SampleMatrix(2, 5), 1.0, {}};
  r.samples << 0, 1, 2, 3, 4, 7, 7, 7, 7, 7;
  auto out = signal::robust_scale(r, 0.25, 0.75);
  Eigen::RowVectorXd expected(5);
  expected << -1, -0.5, 0, 0.5, 1;
  EXPECT_LE((out.samples.row(0) - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE(out.samples.row(1).isZero(0.0));
}

TEST(RobustScale, MatchesSortOracleOnRandomMatrices) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> rows(1, 16), cols(1, 256), kind(0, 4);
  std::normal_distribution<double> normal(0.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int c = rows(rng), t = cols(rng);
    signal::Recording r{signal::SampleMatrix(c, t), 100.0, {}};
    for (int i = 0; i < c; ++i) {
      const int k = kind(rng);
      for (int j = 0; j < t; ++j) r.samples(i, j) = k == 0 ? 4.25 : (k == 1 ? std::round(normal(rng)) : normal(rng));
    }
    const auto out = signal::robust_scale(r, 0.25, 0.75);
    for (int i = 0; i < c; ++i) {
      std::vector<double> v(r.samples.row(i).data(), r.samples.row(i).data() + t);
      const double med = oracle::sorted_quantile(v, 0.5);
      double iqr = oracle::sorted_quantile(v, 0.75) - oracle::sorted_quantile(v, 0.25);
      if (iqr < 1e-12) iqr = 1.0;
      for (int j = 0; j < t; ++j) ASSERT_NEAR(out.samples(i, j), (v[j] - med) / iqr, 1e-9) << trial;
    }
  }
}

TEST(RobustScale, FixedPoint) {
  signal::Recording r{signal::SampleMatrix(1, 5), 1.0, {}};
  r.samples << -1, -0.5, 0, 0.5, 1;
  EXPECT_LE((signal::robust_scale(r, 0.25, 0.75).samples - r.samples).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(ClipAndRescale, Examples) {
  signal::Recording r{signal::SampleMatrix(1, 3), 1.0, {}};
  r.samples << 15, -12, 5;
  auto out = signal::clip_and_rescale(r, 10.0);
  EXPECT_DOUBLE_EQ(out.samples(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(out.samples(0, 1), -1.0);
  EXPECT_DOUBLE_EQ(out.samples(0, 2), 0.5);
  EXPECT_THROW(signal::clip_and_rescale(r, 0.0), ConfigError);
}

TEST(Preprocess, ShapeRangeAndDeterminism) {
  std::mt19937_64 rng(5);
  std::student_t_distribution<double> heavy(1.5);
  signal::Recording r{signal::SampleMatrix(16, 10000), 1000.0, {}};
  for (Eigen::Index i = 0; i < r.samples.size(); ++i) r.samples.data()[i] = 50.0 * heavy(rng);
  signal::PreprocessConfig cfg;
  auto a = signal::preprocess(r, cfg);
  auto b = signal::preprocess(r, cfg);
  EXPECT_EQ(a.channels(), 16);
  EXPECT_EQ(a.time_samples(), 2000);
  EXPECT_DOUBLE_EQ(a.sample_rate_hz, 200.0);
  EXPECT_LE(a.samples.cwiseAbs().maxCoeff(), 1.0);
  EXPECT_TRUE((a.samples.array() == b.samples.array()).all());
}

TEST(Preprocess, ZerosInZerosOut) {
  signal::Recording z{signal::SampleMatrix::Zero(4, 3000), 1000.0, {}};
  EXPECT_TRUE(signal::preprocess(z, {}).samples.isZero(0.0));
}

TEST(PreprocessConfig, Invariants) {
  signal::PreprocessConfig c;
  EXPECT_NO_THROW(c.validate());
  c.band_high_hz = 100.0;  // equals Nyquist at 200 Hz
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.scaler_quantile_low = 0.8;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Recording, RejectsNonFinite) {
  signal::Recording r{signal::SampleMatrix::Zero(2, 3), 100.0, {}};
  r.samples(1, 2) = std::nan("");
  EXPECT_ANY_THROW(r.validate());
}

TEST(Npy, RoundTripKeepsRateAndValues) {
  const auto dir = std::filesystem::temp_directory_path() / "megtext_npy_test";
  std::filesystem::create_directories(dir);
  signal::Recording r{signal::SampleMatrix::Random(3, 17), 321.5, {"a", "b", "c"}};
  signal::save_recording(dir / "x.npy", r);
  auto back = signal::load_recording(dir / "x.npy");
  EXPECT_TRUE((back.samples.array() == r.samples.array()).all());
  EXPECT_DOUBLE_EQ(back.sample_rate_hz, 321.5);
  EXPECT_EQ(back.channel_names, r.channel_names);
  std::filesystem::remove_all(dir);
}
