#include <doctest.h>

#include <cstring>
#include <fstream>
#include <limits>

#include "lalign/data_io.hpp"
#include "lalign/error.hpp"
#include "lalign/features.hpp"
#include "support.hpp"

using namespace lalign;
using namespace lalign::testing;

namespace {

std::vector<Trial> random_trials(CounterRng& rng, int n, Eigen::Index c, Eigen::Index t) {
  std::vector<Trial> out;
  for (int i = 0; i < n; ++i) out.push_back(random_trial(rng, c, t));
  return out;
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void spit_text(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

Error decode_error(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_trials(bytes);
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected a decode error");
  return Error(ErrorCode::Io, "");
}

}  // namespace

TEST_SUITE("trial files") {
  TEST_CASE("write then read three random trials") {
    ScratchDir dir("trials_rt");
    CounterRng rng(81);
    const auto trials = random_trials(rng, 3, 4, 25);
    write_trials(dir / "a.eegt", trials);
    const auto back = read_trials(dir / "a.eegt");
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(back[i].data == trials[i].data);
      CHECK_FALSE(back[i].label.has_value());
    }
    write_trials(dir / "b.eegt", back);
    CHECK(slurp(dir / "a.eegt") == slurp(dir / "b.eegt"));
  }

  TEST_CASE("layout is little-endian with a 17-byte header") {
    Matrix x(2, 3);
    x << 1, 2, 3, 4, 5, 6;
    const std::vector<Trial> trials{{x, std::nullopt}};
    const auto bytes = encode_trials(trials);
    REQUIRE(bytes.size() == 17 + 8 * 6);
    CHECK(std::memcmp(bytes.data(), "EEGT", 4) == 0);
    CHECK(bytes[4] == 1);
    CHECK(bytes[5] == 2);
    CHECK(bytes[9] == 3);
    CHECK(bytes[13] == 1);
    // channel-major within a trial: 1, 2, 3, 4, ...
    double second;
    std::memcpy(&second, bytes.data() + 17 + 8, 8);
    CHECK(second == 2.0);
    double fourth;
    std::memcpy(&fourth, bytes.data() + 17 + 24, 8);
    CHECK(fourth == 4.0);
  }

  TEST_CASE("special doubles round-trip bit for bit") {
    Matrix x(1, 4);
    x << -0.0, std::numeric_limits<double>::denorm_min(), std::numeric_limits<double>::max(), 1.0 / 3.0;
    const std::vector<Trial> trials{{x, std::nullopt}};
    const auto bytes = encode_trials(trials);
    CHECK(encode_trials(decode_trials(bytes)) == bytes);
    CHECK(std::signbit(decode_trials(bytes)[0].data(0, 0)));
  }

  TEST_CASE("empty file set") {
    const std::vector<Trial> none;
    const auto bytes = encode_trials(none);
    CHECK(bytes.size() == 17);
    CHECK(decode_trials(bytes).empty());
  }

  TEST_CASE("bad magic") {
    CounterRng rng(82);
    auto bytes = encode_trials(random_trials(rng, 1, 2, 2));
    std::memcpy(bytes.data(), "XXXX", 4);
    const auto e = decode_error(bytes);
    CHECK(e.code() == ErrorCode::BadMagic);
    CHECK(e.byte_offset() == 0);
    CHECK(std::string(e.what()).find("offset 0") != std::string::npos);
  }

  TEST_CASE("header promises two trials, payload holds one") {
    CounterRng rng(83);
    auto bytes = encode_trials(random_trials(rng, 1, 3, 5));
    bytes[13] = 2;
    const auto e = decode_error(bytes);
    CHECK(e.code() == ErrorCode::TruncatedPayload);
    // the payload stops after 17 + 8 * 15 bytes
    CHECK(e.byte_offset() == 17 + 8 * 15);
    CHECK(std::string(e.what()).find("offset 137") != std::string::npos);
  }

  TEST_CASE("other malformed files") {
    CounterRng rng(84);
    const auto good = encode_trials(random_trials(rng, 2, 2, 3));

    auto version = good;
    version[4] = 2;
    CHECK(decode_error(version).code() == ErrorCode::UnsupportedVersion);
    CHECK(decode_error(version).byte_offset() == 4);

    const std::vector<std::uint8_t> header(good.begin(), good.begin() + 10);
    CHECK(decode_error(header).code() == ErrorCode::TruncatedHeader);
    CHECK(decode_error(header).byte_offset() == 10);

    auto trailing = good;
    trailing.push_back(0);
    CHECK(decode_error(trailing).code() == ErrorCode::TrailingBytes);
    CHECK(decode_error(trailing).byte_offset() == good.size());

    auto nan = good;
    const double q = std::numeric_limits<double>::quiet_NaN();
    std::memcpy(nan.data() + 17 + 8 * 7, &q, 8);
    CHECK(decode_error(nan).code() == ErrorCode::NonFinitePayload);
    CHECK(decode_error(nan).byte_offset() == 17 + 8 * 7);
  }

  TEST_CASE("read_trials keeps the offset and names the file") {
    ScratchDir dir("trials_bad");
    spit(dir / "bad.eegt", {'E', 'E', 'G', 'X', 1});
    try {
      read_trials(dir / "bad.eegt");
      FAIL("expected BadMagic");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::BadMagic);
      CHECK(e.byte_offset() == 0);
      CHECK(std::string(e.what()).find("bad.eegt") != std::string::npos);
    }
    CHECK_THROWS_AS(read_trials(dir / "missing.eegt"), Error);
  }

  TEST_CASE("writing rejects ragged or non-finite trials") {
    const std::vector<Trial> ragged{{Matrix::Zero(2, 3), std::nullopt}, {Matrix::Zero(2, 4), std::nullopt}};
    CHECK_THROWS_AS(encode_trials(ragged), Error);
    Matrix bad = Matrix::Zero(1, 2);
    bad(0, 1) = INFINITY;
    const std::vector<Trial> inf{{bad, std::nullopt}};
    CHECK_THROWS_AS(encode_trials(inf), Error);
  }
}

TEST_SUITE("labels and manifests") {
  TEST_CASE("label file round trip") {
    ScratchDir dir("labels");
    const std::vector<Label> labels{1, 2, -3, 40};
    write_labels(dir / "l.txt", labels);
    CHECK(read_labels(dir / "l.txt") == labels);
  }

  TEST_CASE("malformed label files") {
    ScratchDir dir("labels_bad");
    spit_text(dir / "a.txt", "1\n2\nleft\n");
    spit_text(dir / "b.txt", "1 2\n");
    spit_text(dir / "c.txt", "99999999999\n");
    for (const char* f : {"a.txt", "b.txt", "c.txt"}) {
      try {
        read_labels(dir / f);
        FAIL("expected BadLabelFile");
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BadLabelFile);
      }
    }
  }

  TEST_CASE("manifest round trip and dataset loading") {
    ScratchDir dir("manifest");
    CounterRng rng(85);
    std::filesystem::create_directories(dir / "data");
    const auto trials = random_trials(rng, 4, 3, 10);
    write_trials(dir / "data/s1.eegt", trials);
    write_labels(dir / "data/s1.labels", std::vector<Label>{1, 2, 2, 1});

    DatasetManifest m;
    m.subjects.push_back({"s1", dir / "data/s1.eegt", dir / "data/s1.labels", 100.0, {1, 2}});
    write_manifest(dir / "manifest.json", m);
    const auto back = read_manifest(dir / "manifest.json");
    REQUIRE(back.subjects.size() == 1);
    CHECK(back.subjects[0].name == "s1");
    CHECK(std::filesystem::equivalent(back.subjects[0].trials, dir / "data/s1.eegt"));
    CHECK(back.subjects[0].label_set == std::vector<Label>{1, 2});

    const auto data = load_dataset(back);
    REQUIRE(data.size() == 1);
    CHECK(data[0].trials.size() == 4);
    CHECK(data[0].trials[2].label == 2);
    CHECK(data[0].trials[3].data == trials[3].data);
  }

  TEST_CASE("inconsistent datasets") {
    ScratchDir dir("manifest_bad");
    CounterRng rng(86);
    write_trials(dir / "s.eegt", random_trials(rng, 2, 2, 4));
    write_labels(dir / "s.labels", std::vector<Label>{1, 3});
    write_labels(dir / "short.labels", std::vector<Label>{1});
    auto code = [](const DatasetManifest& m) {
      try {
        load_dataset(m);
      } catch (const Error& e) {
        return e.code();
      }
      return ErrorCode::Io;
    };
    CHECK(code({{{"s", dir / "s.eegt", dir / "s.labels", 100, {1, 2}}}}) == ErrorCode::BadLabelFile);
    CHECK(code({{{"s", dir / "s.eegt", dir / "short.labels", 100, {1, 3}}}}) == ErrorCode::BadLabelFile);

    spit_text(dir / "m1.json", "{\"version\": 2, \"subjects\": []}");
    spit_text(dir / "m2.json", "{\"version\": 1, \"subjects\": [{\"name\": \"x\"}]}");
    spit_text(dir / "m3.json", "not json");
    spit_text(dir / "m4.json", "{\"version\": 1, \"subjects\": []}");
    for (const char* f : {"m1.json", "m2.json", "m3.json", "m4.json"}) {
      try {
        read_manifest(dir / f);
        FAIL("expected BadManifest");
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BadManifest);
      }
    }
  }
}

TEST_SUITE("synthetic generator") {
  TEST_CASE("no shift and no separation gives identity covariances") {
    SynthConfig cfg;
    cfg.class_separation = 0;
    cfg.subject_shift = 0;
    cfg.subjects = 1;
    cfg.trials_per_class = 5;
    cfg.seed = 1;
    const auto ds = generate_synthetic(cfg);
    for (const auto& t : ds.subjects[0].trials) {
      const Matrix c = trial_covariance(t).matrix() / cfg.samples;
      CHECK((c - Matrix::Identity(8, 8)).norm() <= 0.2 * 8);
    }
    for (const auto& p : ds.prototypes) CHECK(p.matrix().isApprox(Matrix::Identity(8, 8), 1e-14));
  }

  TEST_CASE("same seed, same data") {
    SynthConfig cfg;
    cfg.subjects = 2;
    cfg.trials_per_class = 4;
    cfg.seed = 17;
    const auto a = generate_synthetic(cfg), b = generate_synthetic(cfg);
    for (std::size_t s = 0; s < 2; ++s)
      for (std::size_t i = 0; i < a.subjects[s].trials.size(); ++i) {
        CHECK(a.subjects[s].trials[i].data == b.subjects[s].trials[i].data);
        CHECK(a.subjects[s].trials[i].label == b.subjects[s].trials[i].label);
      }
    cfg.seed = 18;
    CHECK(generate_synthetic(cfg).subjects[0].trials[0].data != a.subjects[0].trials[0].data);
  }

  TEST_CASE("a subject does not depend on how many follow it") {
    SynthConfig cfg;
    cfg.subjects = 1;
    cfg.trials_per_class = 3;
    cfg.seed = 19;
    const auto one = generate_synthetic(cfg);
    cfg.subjects = 3;
    const auto three = generate_synthetic(cfg);
    CHECK(one.subjects[0].trials[5].data == three.subjects[0].trials[5].data);
  }

  TEST_CASE("separated prototypes are distinct") {
    SynthConfig cfg;
    cfg.subjects = 1;
    cfg.trials_per_class = 1;
    const auto ds = generate_synthetic(cfg);
    REQUIRE(ds.prototypes.size() == 2);
    CHECK(riemannian_distance(ds.prototypes[0], ds.prototypes[1]) > 0.0);
    // exp(sep * D) with |D|_F = 1 sits at distance sep from the identity
    CHECK(riemannian_distance(SpdMatrix::identity(8), ds.prototypes[0]) == doctest::Approx(1.0).epsilon(1e-10));
  }

  TEST_CASE("shift magnitude and labels") {
    SynthConfig cfg;
    cfg.subjects = 3;
    cfg.classes = 3;
    cfg.trials_per_class = 2;
    cfg.subject_shift = 1.5;
    const auto ds = generate_synthetic(cfg);
    for (const auto& w : ds.shifts) {
      const auto wtw = spd_from_matrix(w.transpose() * w);
      CHECK(spd_log(wtw).matrix().norm() == doctest::Approx(1.5).epsilon(1e-10));
    }
    CHECK(ds.subjects[1].name == "S02");
    CHECK(ds.subjects[0].label_set == std::vector<Label>{1, 2, 3});
    for (std::size_t j = 0; j < 6; ++j) CHECK(ds.subjects[0].trials[j].label == 1 + static_cast<int>(j % 3));
  }

  TEST_CASE("class covariance converges to the shifted prototype") {
    SynthConfig cfg;
    cfg.subjects = 1;
    cfg.trials_per_class = 100;
    cfg.seed = 23;
    const auto ds = generate_synthetic(cfg);
    const Matrix& w = ds.shifts[0];
    for (Label m : {1, 2}) {
      Matrix sum = Matrix::Zero(8, 8);
      for (const auto& t : ds.subjects[0].trials)
        if (t.label == m) sum += trial_covariance(t).matrix();
      const Matrix empirical = sum / (100.0 * cfg.samples);
      const Matrix expected = w.transpose() * ds.prototypes[m - 1].matrix() * w;
      CHECK(rel_fro(empirical, expected) <= 0.1);
    }
  }

  TEST_CASE("config validation") {
    SynthConfig cfg;
    cfg.noise_df = 8;
    CHECK_THROWS_AS(generate_synthetic(cfg), Error);
    cfg = {};
    cfg.subjects = 0;
    CHECK_THROWS_AS(validate(cfg), Error);
    cfg = {};
    cfg.class_separation = -1;
    CHECK_THROWS_AS(validate(cfg), Error);
  }
}
