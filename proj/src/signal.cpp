#include "lalign/signal.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "lalign/error.hpp"

namespace lalign {

namespace {

double sinc_lowpass(double cutoff, double m) {
  // impulse response of an ideal low-pass with normalized cutoff (cycles/sample)
  if (m == 0.0) return 2.0 * cutoff;
  return std::sin(2.0 * std::numbers::pi * cutoff * m) / (std::numbers::pi * m);
}

void require_finite(const ContinuousRecording& rec) {
  if (!rec.data.allFinite()) throw Error(ErrorCode::NonFinite, "recording contains NaN/Inf samples");
}

void filter_channel(const double* x, double* y, Eigen::Index n, const Vector& h) {
  const Eigen::Index taps = h.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    const Eigen::Index kmax = std::min<Eigen::Index>(taps - 1, i);
    for (Eigen::Index k = 0; k <= kmax; ++k) acc += h(k) * x[i - k];
    y[i] = acc;
  }
}

}  // namespace

Vector design_fir_bandpass(int order, double lo_hz, double hi_hz, double fs) {
  if (order <= 0 || order % 2 != 0) {
    throw Error(ErrorCode::InvalidBand, "filter order must be even and positive, got " + std::to_string(order));
  }
  if (!(fs > 0.0) || !(lo_hz > 0.0) || !(lo_hz < hi_hz) || !(hi_hz < fs / 2.0)) {
    throw Error(ErrorCode::InvalidBand, "need 0 < lo < hi < fs/2, got lo=" + std::to_string(lo_hz) +
                                            " hi=" + std::to_string(hi_hz) + " fs=" + std::to_string(fs));
  }
  const double f1 = lo_hz / fs;
  const double f2 = hi_hz / fs;
  const double half = order / 2.0;
  Vector h(order + 1);
  for (int n = 0; n <= order; ++n) {
    const double m = n - half;
    const double ideal = sinc_lowpass(f2, m) - sinc_lowpass(f1, m);
    const double window = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / order);
    h(n) = ideal * window;
  }
  // exact symmetry regardless of rounding in the sinc evaluation
  for (int n = 0; n < order / 2; ++n) h(order - n) = h(n);
  h /= fir_gain(h, 0.5 * (lo_hz + hi_hz), fs);
  return h;
}

double fir_gain(const Vector& coeffs, double hz, double fs) {
  const double w = 2.0 * std::numbers::pi * hz / fs;
  double re = 0.0;
  double im = 0.0;
  for (Eigen::Index n = 0; n < coeffs.size(); ++n) {
    re += coeffs(n) * std::cos(w * static_cast<double>(n));
    im -= coeffs(n) * std::sin(w * static_cast<double>(n));
  }
  return std::hypot(re, im);
}

ContinuousRecording filter_causal_serial(const ContinuousRecording& rec, const Vector& coeffs) {
  if (coeffs.size() == 0) throw Error(ErrorCode::EmptyInput, "filter_causal: empty coefficient vector");
  require_finite(rec);
  ContinuousRecording out{rec.sample_rate, Matrix(rec.channels(), rec.length()), rec.events};
  // row-major copies so each channel is contiguous
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> x = rec.data;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> y(rec.channels(), rec.length());
  for (Eigen::Index c = 0; c < rec.channels(); ++c) filter_channel(x.row(c).data(), y.row(c).data(), rec.length(), coeffs);
  out.data = y;
  return out;
}

ContinuousRecording filter_causal(const ContinuousRecording& rec, const Vector& coeffs) {
  if (coeffs.size() == 0) throw Error(ErrorCode::EmptyInput, "filter_causal: empty coefficient vector");
  require_finite(rec);
  ContinuousRecording out{rec.sample_rate, Matrix(rec.channels(), rec.length()), rec.events};
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> x = rec.data;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> y(rec.channels(), rec.length());
  const long channels = static_cast<long>(rec.channels());
#pragma omp parallel for schedule(static)
  for (long c = 0; c < channels; ++c) filter_channel(x.row(c).data(), y.row(c).data(), rec.length(), coeffs);
  out.data = y;
  return out;
}

std::vector<Trial> epoch(const ContinuousRecording& rec, double start_s, double end_s) {
  if (!(end_s > start_s)) {
    throw Error(ErrorCode::WindowOutOfRange, "epoch window end must exceed start");
  }
  const auto samples = static_cast<Eigen::Index>(std::lround((end_s - start_s) * rec.sample_rate));
  const auto offset = static_cast<Eigen::Index>(std::lround(start_s * rec.sample_rate));
  std::vector<Trial> trials;
  trials.reserve(rec.events.size());
  for (std::size_t e = 0; e < rec.events.size(); ++e) {
    const auto begin = rec.events[e].sample_index + offset;
    if (begin < 0 || begin + samples > rec.length() || samples <= 0) {
      throw Error(ErrorCode::WindowOutOfRange, "event " + std::to_string(e) + " at sample " +
                                                   std::to_string(rec.events[e].sample_index) + ": window [" +
                                                   std::to_string(begin) + ", " + std::to_string(begin + samples) +
                                                   ") exceeds recording length " + std::to_string(rec.length()));
    }
    trials.push_back({rec.data.middleCols(begin, samples), rec.events[e].label});
  }
  return trials;
}

ContinuousRecording downsample(const ContinuousRecording& rec, int factor) {
  if (factor < 1) throw Error(ErrorCode::InvalidConfig, "downsample factor must be >= 1");
  const Eigen::Index n = (rec.length() + factor - 1) / factor;
  ContinuousRecording out{rec.sample_rate / factor, Matrix(rec.channels(), n), rec.events};
  for (Eigen::Index i = 0; i < n; ++i) out.data.col(i) = rec.data.col(i * factor);
  for (auto& ev : out.events) ev.sample_index /= factor;
  return out;
}

ContinuousRecording resample_rational(const ContinuousRecording& rec, int up, int down) {
  if (up < 1 || down < 1) throw Error(ErrorCode::InvalidConfig, "resampling factors must be >= 1");
  const Eigen::Index n = rec.length();
  if (n == 0) return {rec.sample_rate * up / down, Matrix(rec.channels(), 0), {}};
  // upsampled grid holds (n - 1) * up + 1 points; the last original sample is not extrapolated
  const Eigen::Index m = (n - 1) * up + 1;
  Matrix fine(rec.channels(), m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Eigen::Index i = j / up;
    const Eigen::Index r = j % up;
    if (r == 0) {
      fine.col(j) = rec.data.col(i);
    } else {
      const double t = static_cast<double>(r) / up;
      fine.col(j) = (1.0 - t) * rec.data.col(i) + t * rec.data.col(i + 1);
    }
  }
  ContinuousRecording upsampled{rec.sample_rate * up, std::move(fine), rec.events};
  for (auto& ev : upsampled.events) ev.sample_index *= up;
  return downsample(upsampled, down);
}

}  // namespace lalign
