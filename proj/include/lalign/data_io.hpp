#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lalign/signal.hpp"
#include "lalign/spd.hpp"

namespace lalign {

/// Trial file layout (all integers and floats little-endian):
///   offset 0   magic "EEGT"
///   offset 4   version byte (1)
///   offset 5   u32 channels
///   offset 9   u32 samples
///   offset 13  u32 trials
///   offset 17  float64 payload, trial-major, then channel, then sample
inline constexpr std::size_t kTrialHeaderBytes = 17;
inline constexpr std::uint8_t kTrialFormatVersion = 1;

/// Errors carry the byte offset of the problem: BadMagic, UnsupportedVersion,
/// TruncatedHeader, TruncatedPayload, TrailingBytes, NonFinitePayload.
std::vector<Trial> decode_trials(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_trials(std::span<const Trial> trials);

std::vector<Trial> read_trials(const std::filesystem::path& path);
/// Trials must share one shape and hold finite values.
void write_trials(const std::filesystem::path& path, std::span<const Trial> trials);

/// One integer per line.
std::vector<Label> read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, std::span<const Label> labels);

struct SubjectEntry {
  std::string name;
  std::filesystem::path trials;  // resolved against the manifest directory
  std::filesystem::path labels;
  double sample_rate = 0.0;
  std::vector<Label> label_set;
};

/// JSON manifest, schema version 1:
///   {"version": 1, "subjects": [{"name": ..., "trials": ..., "labels": ...,
///                                "sample_rate": ..., "label_set": [...]}, ...]}
/// Relative paths are resolved against the manifest's directory.
struct DatasetManifest {
  std::vector<SubjectEntry> subjects;
};

DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

struct SubjectData {
  std::string name;
  std::vector<Trial> trials;  // labels attached
  double sample_rate = 0.0;
  std::vector<Label> label_set;
};

/// Loads every subject and checks trial/label counts and declared label sets.
std::vector<SubjectData> load_dataset(const DatasetManifest& manifest);

struct SynthConfig {
  int channels = 8;
  int samples = 300;
  int classes = 2;
  int trials_per_class = 72;
  int subjects = 9;
  double class_separation = 1.0;
  double subject_shift = 1.0;
  int noise_df = 100;
  std::uint64_t seed = 0;
  double sample_rate = 100.0;
};

/// Throws InvalidConfig.
void validate(const SynthConfig& cfg);

struct SynthDataset {
  std::vector<SubjectData> subjects;  // names S01, S02, ...; labels 1..classes
  std::vector<SpdMatrix> prototypes;  // P_m
  std::vector<Matrix> shifts;  // W_s
};

/// Class prototypes P_m = exp(sep * D_m) (D_m random symmetric, unit
/// Frobenius norm); subject shifts W_s = exp(shift * G_s / 2) so that
/// |log(W_s^T W_s)|_F = shift. Trial j of subject s has label 1 + j % classes
/// and data X = W_s^T P_m^{1/2} J Z, with Z standard normal C x T and J the
/// Cholesky factor of a Wishart(noise_df, I)/noise_df draw, so that
/// E[X X^T] = T W_s^T P_m W_s.
SynthDataset generate_synthetic(const SynthConfig& cfg);

}  // namespace lalign
