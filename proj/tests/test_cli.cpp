#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using sefusion::cli::run;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream f(p);
  std::vector<std::string> lines;
  for (std::string l; std::getline(f, l);) {
    if (!l.empty()) lines.push_back(l);
  }
  return lines;
}

std::size_t count_wavs(const fs::path& dir) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.path().extension() == ".wav";
  return n;
}

}  // namespace

TEST_CASE("stem helpers") {
  std::string u, n;
  double s = 0.0;
  CHECK(sefusion::cli::make_stem("utt01", "white", 5.0) == "utt01__white__5dB");
  CHECK(sefusion::cli::make_stem("a", "pink", -2.5) == "a__pink__-2.5dB");
  CHECK(sefusion::cli::parse_stem("utt01__white__5dB", u, n, s));
  CHECK(u == "utt01");
  CHECK(n == "white");
  CHECK(s == 5.0);
  CHECK_FALSE(sefusion::cli::parse_stem("utt01", u, n, s));
}

TEST_CASE("usage errors exit 2") {
  CHECK(call({}).code == 2);
  CHECK(call({"frobnicate"}).code == 2);
  CHECK(call({"mix", "--clean", "x"}).code == 2);
  CHECK(call({"--version"}).code == 0);
}

TEST_CASE("synth, mix, enhance, eval, report") {
  testing::TempDir dir("cli");
  const auto root = dir.path;
  const auto fx = (root / "fx").string();
  REQUIRE(call({"synth", "--out", fx, "--count", "2", "--duration", "2.5"}).code == 0);
  CHECK(count_wavs(root / "fx" / "clean") == 2);
  CHECK(count_wavs(root / "fx" / "noise") == 3);

  SUBCASE("one clean file, three SNRs") {
    const auto out = (root / "one").string();
    const auto r = call({"mix", "--clean", fx + "/clean/utt00.wav", "--noise", fx + "/noise/white.wav",
                         "--snr", "0,5,10", "--out", out, "--seed", "3"});
    REQUIRE(r.code == 0);
    CHECK(count_wavs(root / "one" / "noisy") == 3);
    CHECK(count_wavs(root / "one" / "clean") == 3);
    CHECK(count_wavs(root / "one" / "noise") == 3);
    CHECK(fs::is_regular_file(root / "one" / "manifest.json"));
    CHECK(fs::is_regular_file(root / "one" / "noisy" / "utt00__white__5dB.wav"));
  }

  SUBCASE("missing noise file names the path") {
    const auto missing = (root / "nope.wav").string();
    const auto r = call({"mix", "--clean", fx + "/clean", "--noise", missing, "--snr", "0", "--out",
                         (root / "m").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find(missing) != std::string::npos);
  }

  SUBCASE("lead-in shorter than one modulation window is rejected") {
    const auto r = call({"mix", "--clean", fx + "/clean", "--noise", fx + "/noise/white.wav", "--snr",
                         "0", "--out", (root / "m").string(), "--lead-ms", "100"});
    CHECK(r.code == 2);
  }

  SUBCASE("full grid: 3 noises x 3 SNRs x 2 methods") {
    const auto mixd = (root / "mix").string();
    REQUIRE(call({"mix", "--clean", fx + "/clean", "--noise", fx + "/noise/white.wav", "--noise",
                  fx + "/noise/pink.wav", "--noise", fx + "/noise/babble.wav", "--snr", "0,5,10",
                  "--out", mixd, "--seed", "1"})
                .code == 0);
    CHECK(count_wavs(root / "mix" / "noisy") == 18);

    const auto fused = (root / "fused").string();
    const auto acoustic = (root / "acoustic").string();
    REQUIRE(call({"enhance", "--in", mixd + "/noisy", "--out", fused, "--noise-ref", mixd + "/noise",
                  "--jobs", "2"})
                .code == 0);
    REQUIRE(call({"enhance", "--in", mixd + "/noisy", "--out", acoustic, "--mode", "acoustic",
                  "--noise-ref", mixd + "/noise"})
                .code == 0);
    CHECK(count_wavs(root / "fused") == 18);
    CHECK(fs::is_regular_file(root / "fused" / "manifest.json"));

    const auto csv1 = (root / "fused.csv").string();
    const auto csv2 = (root / "acoustic.csv").string();
    REQUIRE(call({"eval", "--clean", mixd + "/clean", "--processed", fused, "--csv", csv1}).code == 0);
    REQUIRE(call({"eval", "--clean", mixd + "/clean", "--processed", acoustic, "--csv", csv2}).code == 0);
    const auto rows = lines_of(csv1);
    REQUIRE(rows.size() == 19);
    CHECK(rows[0] == "utterance_id,noise_type,snr_db,method,estoi,seg_snr_db");
    CHECK(rows[1].find(",fused,") != std::string::npos);

    const auto md = (root / "table.md").string();
    REQUIRE(call({"report", "--csv", csv1, "--csv", csv2, "--markdown", md}).code == 0);
    const auto table = lines_of(md);
    REQUIRE(table.size() == 2 + 18);
    CHECK(table[0].find("ESTOI") != std::string::npos);
    CHECK(table[0].find("segSNR") != std::string::npos);
  }

  SUBCASE("identical directories score at least 0.999") {
    const auto csv = (root / "self.csv").string();
    REQUIRE(call({"eval", "--clean", fx + "/clean", "--processed", fx + "/clean", "--csv", csv,
                  "--trim-ms", "0"})
                .code == 0);
    const auto rows = lines_of(csv);
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto a = rows[i].rfind(',');
      const auto b = rows[i].rfind(',', a - 1);
      CHECK(std::stod(rows[i].substr(b + 1, a - b - 1)) >= 0.999);
    }
  }

  SUBCASE("empty intersection is an error") {
    fs::create_directories(root / "empty");
    const auto r = call({"eval", "--clean", fx + "/clean", "--processed", (root / "empty").string(),
                         "--csv", (root / "e.csv").string()});
    CHECK(r.code == 2);
  }

  SUBCASE("enhance configuration errors") {
    const auto noisy = fx + "/clean/utt00.wav";
    const auto out = (root / "o.wav").string();
    CHECK(call({"enhance", "--in", noisy, "--out", out}).code == 2);  // oracle without reference
    const auto bad = root / "bad.json";
    std::ofstream(bad) << R"({"modmask": {"mc_hz": 50}})";
    const auto r = call({"enhance", "--in", noisy, "--out", out, "--noise-psd", "blind", "--config",
                         bad.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("mc_hz") != std::string::npos);
    const auto typo = root / "typo.json";
    std::ofstream(typo) << R"({"fusoin": {}})";
    CHECK(call({"enhance", "--in", noisy, "--out", out, "--noise-psd", "blind", "--config",
                typo.string()})
              .code == 2);
    REQUIRE(call({"enhance", "--in", noisy, "--out", out, "--noise-psd", "blind", "--mode", "modmask"})
                .code == 0);
    CHECK(fs::is_regular_file(out));
    CHECK(fs::is_regular_file(root / "o.manifest.json"));
  }
}
