#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "modsamp/signal_core.hpp"

using namespace modsamp;

namespace {

double naive_series(const std::vector<double>& a, double period, double t) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double u = (t - static_cast<double>(i + 1) * period) / period;
        sum += a[i] * (u == 0.0 ? 1.0 : std::sin(std::numbers::pi * u) / (std::numbers::pi * u));
    }
    return sum;
}

DenseWaveform tone(std::size_t n, double dt, double omega, double amp = 1.0) {
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = amp * std::cos(omega * static_cast<double>(k) * dt + 0.3);
    return DenseWaveform(std::move(v), dt);
}

}  // namespace

TEST(GenerateSignal, CoefficientsInRangeAndCounted) {
    const BandlimitedSignal s = generate_random_bl_signal(98, 1e-4, -0.5, 0.5, 42);
    ASSERT_EQ(s.n_terms(), 98u);
    EXPECT_EQ(s.nyquist_period(), 1e-4);
    for (double a : s.coeffs()) {
        EXPECT_GE(a, -0.5);
        EXPECT_LE(a, 0.5);
    }
}

TEST(GenerateSignal, SingleTermWithinTinyBounds) {
    const double eps = 1e-9;
    const BandlimitedSignal s = generate_random_bl_signal(1, 1.0, -eps, eps, 5);
    ASSERT_EQ(s.n_terms(), 1u);
    EXPECT_LT(std::abs(s.coeffs()[0]), eps);
}

TEST(GenerateSignal, SameSeedSameSignal) {
    const BandlimitedSignal a = generate_random_bl_signal(98, 1e-4, -0.5, 0.5, 9);
    const BandlimitedSignal b = generate_random_bl_signal(98, 1e-4, -0.5, 0.5, 9);
    const BandlimitedSignal c = generate_random_bl_signal(98, 1e-4, -0.5, 0.5, 10);
    EXPECT_TRUE(std::equal(a.coeffs().begin(), a.coeffs().end(), b.coeffs().begin()));
    EXPECT_FALSE(std::equal(a.coeffs().begin(), a.coeffs().end(), c.coeffs().begin()));
}

TEST(GenerateSignal, RejectsBadParameters) {
    EXPECT_THROW(generate_random_bl_signal(0, 1e-4, -0.5, 0.5, 1), ParameterError);
    EXPECT_THROW(generate_random_bl_signal(5, 1e-4, 0.5, 0.5, 1), ParameterError);
    EXPECT_THROW(generate_random_bl_signal(5, 0.0, -0.5, 0.5, 1), ParameterError);
    EXPECT_THROW(generate_random_bl_signal(5, -1.0, -0.5, 0.5, 1), ParameterError);
}

TEST(Evaluate, ZeroCoefficientsGiveZero) {
    const BandlimitedSignal s({0.0, 0.0, 0.0}, 1e-3);
    for (double t : {-1.0, 0.0, 1.2e-3, 0.5}) EXPECT_EQ(evaluate(s, t), 0.0);
}

TEST(Evaluate, SincCentre) {
    const BandlimitedSignal s({1.0}, 1.0);
    EXPECT_DOUBLE_EQ(evaluate(s, 1.0), 1.0);
}

TEST(Evaluate, TwoTermMidpoint) {
    const BandlimitedSignal s({1.0, 1.0}, 1.0);
    const double half = std::sin(std::numbers::pi / 2) / (std::numbers::pi / 2);
    EXPECT_NEAR(evaluate(s, 1.5), 2.0 * half, 1e-15);
    EXPECT_NEAR(evaluate(s, 1.5), 4.0 / std::numbers::pi, 1e-15);
}

TEST(Evaluate, MatchesNaiveSeries) {
    const BandlimitedSignal s = generate_random_bl_signal(98, 1e-4, -0.5, 0.5, 3);
    const std::vector<double> a(s.coeffs().begin(), s.coeffs().end());
    for (int k = -50; k <= 10100; k += 7) {
        const double t = static_cast<double>(k) * 1e-6 + 1.3e-8;
        EXPECT_NEAR(s(t), naive_series(a, 1e-4, t), 1e-13) << "t=" << t;
    }
}

TEST(Evaluate, LinearInCoefficients) {
    const BandlimitedSignal f = generate_random_bl_signal(20, 1e-3, -1.0, 1.0, 1);
    const BandlimitedSignal g = generate_random_bl_signal(20, 1e-3, -1.0, 1.0, 2);
    std::vector<double> c(20);
    for (std::size_t i = 0; i < 20; ++i) c[i] = 2.5 * f.coeffs()[i] - 0.75 * g.coeffs()[i];
    const BandlimitedSignal h(c, 1e-3);
    for (double t = -2e-3; t < 25e-3; t += 3.7e-4) EXPECT_NEAR(h(t), 2.5 * f(t) - 0.75 * g(t), 1e-13);
}

TEST(BandlimitedSignal, DefaultWindowAndValidation) {
    const BandlimitedSignal s({1.0, 2.0}, 0.5);
    EXPECT_DOUBLE_EQ(s.duration(), 1.5);
    EXPECT_THROW(BandlimitedSignal({}, 1.0), ParameterError);
    EXPECT_THROW(BandlimitedSignal({1.0}, 0.0), ParameterError);
    EXPECT_THROW(BandlimitedSignal({std::numeric_limits<double>::quiet_NaN()}, 1.0), ParameterError);
}

TEST(RenderDense, RefineOneIsPointwise) {
    const BandlimitedSignal s = generate_random_bl_signal(10, 1e-3, -0.5, 0.5, 4);
    const DenseWaveform w = render_dense(s, 2e-4, 1, 0.0, 60);
    ASSERT_EQ(w.size(), 60u);
    EXPECT_EQ(w.dense_period(), 2e-4);
    for (std::size_t n = 0; n < 60; ++n) EXPECT_EQ(w[n], s(static_cast<double>(n) * 2e-4));
}

TEST(RenderDense, ZeroSignalGivesZeros) {
    const BandlimitedSignal s({0.0, 0.0}, 1.0);
    const DenseWaveform w = render_dense(s, 0.1, 4, 0.0, 10);
    for (double v : w.values()) EXPECT_EQ(v, 0.0);
}

TEST(RenderDense, EveryRthPointIsASample) {
    const BandlimitedSignal s = generate_random_bl_signal(98, 1e-4, -0.5, 0.5, 8);
    const double ts = 1e-5;
    const std::size_t count = 991;
    const DenseWaveform w = render_dense(s, ts, 64, 0.0, count);
    const DenseWaveform coarse = render_dense(s, ts, 1, 0.0, count);
    ASSERT_EQ(w.size(), (count - 1) * 64 + 1);
    EXPECT_DOUBLE_EQ(w.dense_period(), ts / 64);
    for (std::size_t n = 0; n < count; ++n) {
        EXPECT_EQ(w[n * 64], evaluate(s, static_cast<double>(n) * ts));
        EXPECT_EQ(w[n * 64], coarse[n]);
    }
}

TEST(RenderDense, RejectsBadArguments) {
    const BandlimitedSignal s({1.0}, 1.0);
    EXPECT_THROW(render_dense(s, 1.0, 0, 0.0, 10), ParameterError);
    EXPECT_THROW(render_dense(s, 1.0, 1, 0.0, 1), ParameterError);
    EXPECT_THROW(render_dense(s, 1.0, std::numeric_limits<std::size_t>::max() / 2, 0.0, 10), CapacityError);
}

TEST(InfNorm, Basics) {
    EXPECT_EQ(inf_norm(DenseWaveform({0.0, 0.0, 0.0}, 1.0)), 0.0);
    EXPECT_EQ(inf_norm(SampleSequence({3.5}, 1.0)), 3.5);
    EXPECT_EQ(inf_norm(SampleSequence({-4.0, 2.0}, 1.0)), 4.0);
    EXPECT_THROW(inf_norm(SampleSequence({}, 1.0)), ParameterError);
}

TEST(InfNorm, SineToneOnFineGrid) {
    std::vector<double> v(200001);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = std::sin(2 * std::numbers::pi * 1000 * k * 1e-8);
    EXPECT_NEAR(inf_norm(DenseWaveform(v, 1e-8)), 1.0, 1e-4);
}

TEST(InfNorm, SignalOverInterval) {
    const BandlimitedSignal s({1.0}, 1.0);
    EXPECT_NEAR(inf_norm(s, 0.0, 2.0, 1e-3), 1.0, 1e-12);
    EXPECT_THROW(inf_norm(s, 1.0, 1.0, 1e-3), ParameterError);
    EXPECT_THROW(inf_norm(s, 0.0, 1.0, 0.0), ParameterError);
}

TEST(IdealLowpass, PassbandUntouched) {
    const std::size_t n = 1024;
    const double dt = 1e-5;
    const double w0 = 2 * std::numbers::pi * 10 / (n * dt);
    const DenseWaveform x = tone(n, dt, w0);
    const DenseWaveform y = ideal_lowpass(x, 2 * w0);
    for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(y[k], x[k], 1e-9);
}

TEST(IdealLowpass, StopbandRemoved) {
    const std::size_t n = 1024;
    const double dt = 1e-5;
    const double w1 = 2 * std::numbers::pi * 200 / (n * dt);
    const DenseWaveform y = ideal_lowpass(tone(n, dt, w1, 3.0), w1 / 2);
    for (double v : y.values()) EXPECT_LT(std::abs(v), 1e-9 * 3.0);
}

TEST(IdealLowpass, KeepsOnlyPassbandTone) {
    const std::size_t n = 2048;
    const double dt = 1e-5;
    const double w0 = 2 * std::numbers::pi * 7 / (n * dt);
    const double w1 = 2 * std::numbers::pi * 300 / (n * dt);
    std::vector<double> sum(n);
    const DenseWaveform a = tone(n, dt, w0);
    const DenseWaveform b = tone(n, dt, w1, 0.5);
    for (std::size_t k = 0; k < n; ++k) sum[k] = a[k] + b[k];
    const DenseWaveform y = ideal_lowpass(DenseWaveform(sum, dt), 2 * std::numbers::pi * 100 / (n * dt));
    for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(y[k], a[k], 1e-9);
    EXPECT_EQ(y.dense_period(), dt);
    EXPECT_EQ(y.size(), n);
}

TEST(IdealLowpass, IdempotentAndEnergyNonIncreasing) {
    const BandlimitedSignal s = generate_random_bl_signal(30, 1e-3, -0.5, 0.5, 2);
    const DenseWaveform w = render_dense(s, 1e-4, 4, 0.0, 301);
    const double cutoff = std::numbers::pi / 1e-3;
    const DenseWaveform once = ideal_lowpass(w, cutoff);
    const DenseWaveform twice = ideal_lowpass(once, cutoff);
    double e_in = 0.0;
    double e_out = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        EXPECT_NEAR(once[k], twice[k], 1e-12);
        e_in += w[k] * w[k];
        e_out += once[k] * once[k];
    }
    EXPECT_LE(e_out, e_in * (1 + 1e-12));
}

TEST(IdealLowpass, RejectsCutoffAboveGridNyquist) {
    const DenseWaveform w({1.0, 2.0, 3.0, 4.0}, 1e-3);
    EXPECT_THROW(ideal_lowpass(w, 1.01 * std::numbers::pi / 1e-3), ParameterError);
    EXPECT_THROW(ideal_lowpass(w, 0.0), ParameterError);
    EXPECT_NO_THROW(ideal_lowpass(w, std::numbers::pi / 1e-3));
}

TEST(DigitalLowpass, ConstantUnchanged) {
    const SampleSequence s(std::vector<double>(64, 0.7), 1e-4);
    const SampleSequence y = digital_lowpass(s, 1000.0);
    for (double v : y.values()) EXPECT_NEAR(v, 0.7, 1e-12);
}

TEST(DigitalLowpass, AlternatingSequenceRemoved) {
    std::vector<double> v(128);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = k % 2 ? -1.0 : 1.0;
    const double period = 1e-4;
    const SampleSequence y = digital_lowpass(SampleSequence(v, period), 0.9 * std::numbers::pi / period);
    for (double x : y.values()) EXPECT_LT(std::abs(x), 1e-12);
}

TEST(SampleSequence, RejectsNonFinite) {
    EXPECT_THROW(SampleSequence({1.0, std::numeric_limits<double>::infinity()}, 1.0), ParameterError);
    EXPECT_THROW(SampleSequence({1.0}, 0.0), ParameterError);
}

TEST(DenseWaveform, Validation) {
    EXPECT_THROW(DenseWaveform({1.0}, 1.0), ParameterError);
    EXPECT_THROW(DenseWaveform({1.0, 2.0}, 0.0), ParameterError);
}
