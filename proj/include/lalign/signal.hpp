#pragma once

#include <optional>
#include <vector>

#include "lalign/spd.hpp"

namespace lalign {

using Label = int;

/// One multichannel epoch: channels x samples.
struct Trial {
  Matrix data;
  std::optional<Label> label;

  Eigen::Index channels() const { return data.rows(); }
  Eigen::Index samples() const { return data.cols(); }
};

struct Event {
  Eigen::Index sample_index = 0;
  Label label = 0;
};

struct ContinuousRecording {
  double sample_rate = 0.0;
  Matrix data;  // channels x N
  std::vector<Event> events;

  Eigen::Index channels() const { return data.rows(); }
  Eigen::Index length() const { return data.cols(); }
};

/// Hamming-windowed sinc band-pass of length order + 1, scaled to unit gain
/// at the passband centre (the fir1 convention). Throws InvalidBand.
Vector design_fir_bandpass(int order, double lo_hz, double hi_hz, double fs);

/// Magnitude of the DTFT of `coeffs` at `hz`.
double fir_gain(const Vector& coeffs, double hz, double fs);

/// Direct-form causal FIR with zero initial state, channels filtered in
/// parallel. Bitwise identical to filter_causal_serial.
ContinuousRecording filter_causal(const ContinuousRecording& rec, const Vector& coeffs);
ContinuousRecording filter_causal_serial(const ContinuousRecording& rec, const Vector& coeffs);

/// One trial per event covering [start_s, end_s) relative to the cue.
/// Throws WindowOutOfRange naming the offending event.
std::vector<Trial> epoch(const ContinuousRecording& rec, double start_s, double end_s);

/// Keeps every factor-th sample; event indices are floor-divided.
ContinuousRecording downsample(const ContinuousRecording& rec, int factor);

/// Linear-interpolation upsampling by `up` followed by decimation by `down`
/// (250 Hz -> 100 Hz is up = 2, down = 5).
ContinuousRecording resample_rational(const ContinuousRecording& rec, int up, int down);

}  // namespace lalign
