#include "lalign/data_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lalign/error.hpp"
#include "lalign/rng.hpp"

namespace lalign {

static_assert(std::endian::native == std::endian::little, "trial files are written with native little-endian stores");

namespace {

std::uint32_t load_u32(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) | static_cast<std::uint32_t>(b[off + 1]) << 8 |
         static_cast<std::uint32_t>(b[off + 2]) << 16 | static_cast<std::uint32_t>(b[off + 3]) << 24;
}

void store_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::string at(std::size_t offset) { return " at byte offset " + std::to_string(offset); }

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::vector<Trial> decode_trials(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw Error(ErrorCode::TruncatedHeader, "file ends" + at(bytes.size()) + " inside the magic", bytes.size());
  if (std::memcmp(bytes.data(), "EEGT", 4) != 0) throw Error(ErrorCode::BadMagic, "expected \"EEGT\"" + at(0), 0);
  if (bytes.size() < 5) throw Error(ErrorCode::TruncatedHeader, "file ends" + at(bytes.size()) + " before the version", bytes.size());
  if (bytes[4] != kTrialFormatVersion) {
    throw Error(ErrorCode::UnsupportedVersion, "version " + std::to_string(bytes[4]) + at(4), 4);
  }
  if (bytes.size() < kTrialHeaderBytes) {
    throw Error(ErrorCode::TruncatedHeader, "file ends" + at(bytes.size()) + " inside the 17-byte header", bytes.size());
  }
  const std::uint64_t channels = load_u32(bytes, 5);
  const std::uint64_t samples = load_u32(bytes, 9);
  const std::uint64_t trials = load_u32(bytes, 13);
  const std::uint64_t values = channels * samples * trials;
  const std::uint64_t expected = kTrialHeaderBytes + 8 * values;
  if (bytes.size() < expected) {
    throw Error(ErrorCode::TruncatedPayload, "payload ends" + at(bytes.size()) + "; header implies " +
                                                 std::to_string(expected) + " bytes",
                bytes.size());
  }
  if (bytes.size() > expected) {
    throw Error(ErrorCode::TrailingBytes, "unexpected data" + at(expected), expected);
  }

  std::vector<Trial> out;
  out.reserve(trials);
  std::size_t off = kTrialHeaderBytes;
  for (std::uint64_t t = 0; t < trials; ++t) {
    Trial trial{Matrix(static_cast<Eigen::Index>(channels), static_cast<Eigen::Index>(samples)), std::nullopt};
    for (std::uint64_t c = 0; c < channels; ++c) {
      for (std::uint64_t s = 0; s < samples; ++s) {
        double v;
        std::memcpy(&v, bytes.data() + off, 8);
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFinitePayload, "NaN/Inf value" + at(off), off);
        trial.data(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(s)) = v;
        off += 8;
      }
    }
    out.push_back(std::move(trial));
  }
  return out;
}

std::vector<std::uint8_t> encode_trials(std::span<const Trial> trials) {
  const Eigen::Index channels = trials.empty() ? 0 : trials.front().channels();
  const Eigen::Index samples = trials.empty() ? 0 : trials.front().samples();
  for (std::size_t i = 0; i < trials.size(); ++i) {
    if (trials[i].channels() != channels || trials[i].samples() != samples) {
      throw Error(ErrorCode::DimMismatch, "trial " + std::to_string(i) + " differs in shape from trial 0");
    }
    if (!trials[i].data.allFinite()) throw Error(ErrorCode::NonFinite, "trial " + std::to_string(i) + " has NaN/Inf");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kTrialHeaderBytes + 8 * trials.size() * static_cast<std::size_t>(channels * samples));
  out.insert(out.end(), {'E', 'E', 'G', 'T', kTrialFormatVersion});
  store_u32(out, static_cast<std::uint32_t>(channels));
  store_u32(out, static_cast<std::uint32_t>(samples));
  store_u32(out, static_cast<std::uint32_t>(trials.size()));
  for (const auto& t : trials) {
    for (Eigen::Index c = 0; c < channels; ++c) {
      for (Eigen::Index s = 0; s < samples; ++s) {
        std::uint8_t buf[8];
        const double v = t.data(c, s);
        std::memcpy(buf, &v, 8);
        out.insert(out.end(), buf, buf + 8);
      }
    }
  }
  return out;
}

std::vector<Trial> read_trials(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  try {
    return decode_trials(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail(), e.byte_offset());
  }
}

void write_trials(const std::filesystem::path& path, std::span<const Trial> trials) {
  const auto bytes = encode_trials(trials);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

std::vector<Label> read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<Label> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    long long v;
    std::string rest;
    if (!(ss >> v) || (ss >> rest) || v < std::numeric_limits<Label>::min() || v > std::numeric_limits<Label>::max()) {
      throw Error(ErrorCode::BadLabelFile, path.string() + ":" + std::to_string(lineno) + ": not an integer: '" + line + "'");
    }
    out.push_back(static_cast<Label>(v));
  }
  return out;
}

void write_labels(const std::filesystem::path& path, std::span<const Label> labels) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  for (Label l : labels) out << l << '\n';
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadManifest, path.string() + ": " + e.what());
  }
  const auto base = path.parent_path();
  DatasetManifest m;
  try {
    if (j.at("version").get<int>() != 1) throw Error(ErrorCode::BadManifest, path.string() + ": unsupported version");
    for (const auto& s : j.at("subjects")) {
      SubjectEntry e;
      e.name = s.at("name").get<std::string>();
      e.trials = base / s.at("trials").get<std::string>();
      e.labels = base / s.at("labels").get<std::string>();
      e.sample_rate = s.at("sample_rate").get<double>();
      e.label_set = s.at("label_set").get<std::vector<Label>>();
      if (!(e.sample_rate > 0.0)) throw Error(ErrorCode::BadManifest, e.name + ": sample_rate must be positive");
      m.subjects.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadManifest, path.string() + ": " + e.what());
  }
  if (m.subjects.empty()) throw Error(ErrorCode::BadManifest, path.string() + ": no subjects");
  return m;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["subjects"] = nlohmann::ordered_json::array();
  const auto base = path.parent_path();
  for (const auto& s : manifest.subjects) {
    nlohmann::ordered_json e;
    e["name"] = s.name;
    e["trials"] = s.trials.lexically_proximate(base).generic_string();
    e["labels"] = s.labels.lexically_proximate(base).generic_string();
    e["sample_rate"] = s.sample_rate;
    e["label_set"] = s.label_set;
    j["subjects"].push_back(e);
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::vector<SubjectData> load_dataset(const DatasetManifest& manifest) {
  std::vector<SubjectData> out;
  for (const auto& e : manifest.subjects) {
    auto trials = read_trials(e.trials);
    const auto labels = read_labels(e.labels);
    if (labels.size() != trials.size()) {
      throw Error(ErrorCode::BadLabelFile, e.labels.string() + ": " + std::to_string(labels.size()) + " labels for " +
                                               std::to_string(trials.size()) + " trials");
    }
    const std::set<Label> allowed(e.label_set.begin(), e.label_set.end());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (!allowed.contains(labels[i])) {
        throw Error(ErrorCode::BadLabelFile, e.labels.string() + ": label " + std::to_string(labels[i]) +
                                                 " on line " + std::to_string(i + 1) + " is not in label_set");
      }
      trials[i].label = labels[i];
    }
    out.push_back({e.name, std::move(trials), e.sample_rate, e.label_set});
  }
  return out;
}

void validate(const SynthConfig& cfg) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, "synth config: " + what); };
  if (cfg.channels < 1) fail("channels must be positive");
  if (cfg.samples < 1) fail("samples must be positive");
  if (cfg.classes < 1) fail("classes must be positive");
  if (cfg.trials_per_class < 1) fail("trials_per_class must be positive");
  if (cfg.subjects < 1) fail("subjects must be positive");
  if (!(cfg.class_separation >= 0.0)) fail("class_separation must be >= 0");
  if (!(cfg.subject_shift >= 0.0)) fail("subject_shift must be >= 0");
  if (cfg.noise_df <= cfg.channels) fail("noise_df must exceed channels");
  if (!(cfg.sample_rate > 0.0)) fail("sample_rate must be positive");
}

namespace {

constexpr std::uint64_t kPrototypeStream = 1;
constexpr std::uint64_t kShiftStream = 2;
constexpr std::uint64_t kTrialStream = 3;

Matrix gaussian(CounterRng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix g(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) g(r, c) = rng.normal();
  return g;
}

SymMatrix unit_symmetric_direction(CounterRng& rng, Eigen::Index dim) {
  const Matrix g = gaussian(rng, dim, dim);
  Matrix d = 0.5 * (g + g.transpose());
  d /= d.norm();
  return SymMatrix(d);
}

}  // namespace

SynthDataset generate_synthetic(const SynthConfig& cfg) {
  validate(cfg);
  const Eigen::Index c = cfg.channels;
  SynthDataset ds;

  std::vector<Matrix> proto_sqrt;
  for (int m = 0; m < cfg.classes; ++m) {
    CounterRng rng(CounterRng::derive(cfg.seed, {kPrototypeStream, static_cast<std::uint64_t>(m)}));
    const SymMatrix dir = unit_symmetric_direction(rng, c);
    ds.prototypes.push_back(spd_exp(SymMatrix(cfg.class_separation * dir.matrix())));
    proto_sqrt.push_back(spd_sqrt(ds.prototypes.back()).matrix());
  }

  const int per_subject = cfg.classes * cfg.trials_per_class;
  for (int s = 0; s < cfg.subjects; ++s) {
    CounterRng shift_rng(CounterRng::derive(cfg.seed, {kShiftStream, static_cast<std::uint64_t>(s)}));
    const SymMatrix dir = unit_symmetric_direction(shift_rng, c);
    const Matrix w = spd_exp(SymMatrix(0.5 * cfg.subject_shift * dir.matrix())).matrix();
    ds.shifts.push_back(w);

    char name[16];
    std::snprintf(name, sizeof name, "S%02d", s + 1);
    SubjectData subject{name, {}, cfg.sample_rate, {}};
    for (int m = 1; m <= cfg.classes; ++m) subject.label_set.push_back(m);
    subject.trials.resize(static_cast<std::size_t>(per_subject));

    const long n = per_subject;
#pragma omp parallel for schedule(static)
    for (long j = 0; j < n; ++j) {
      CounterRng rng(CounterRng::derive(cfg.seed, {kTrialStream, static_cast<std::uint64_t>(s),
                                                   static_cast<std::uint64_t>(j)}));
      const int cls = static_cast<int>(j % cfg.classes);
      const Matrix g = gaussian(rng, c, cfg.noise_df);
      const Matrix wishart = g * g.transpose() / static_cast<double>(cfg.noise_df);
      const Matrix jitter = Eigen::LLT<Matrix>(wishart).matrixL();
      const Matrix z = gaussian(rng, c, cfg.samples);
      subject.trials[static_cast<std::size_t>(j)] = {w.transpose() * proto_sqrt[static_cast<std::size_t>(cls)] * jitter * z,
                                                     cls + 1};
    }
    ds.subjects.push_back(std::move(subject));
  }
  return ds;
}

}  // namespace lalign
