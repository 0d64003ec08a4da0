#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include <CLI11.hpp>
#include <json.hpp>

#include "sefusion/corpus.hpp"
#include "sefusion/metrics.hpp"
#include "sefusion/pipeline.hpp"
#include "sefusion/synth.hpp"

namespace sefusion::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Raised for problems that make the whole command invalid (exit 2).
struct UsageError : Error {
  using Error::Error;
};

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fixed6(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// Stable across platforms, unlike std::hash.
std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<fs::path> wav_files(const fs::path& p, const char* what) {
  if (!fs::exists(p)) throw UsageError(std::string(what) + " not found: " + p.string());
  if (fs::is_regular_file(p)) return {p};
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(p)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw UsageError(std::string(what) + " contains no .wav files: " + p.string());
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("write failed for " + path.string());
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn fn) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

unsigned default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

// --- mix ---------------------------------------------------------------------

struct MixOptions {
  std::string clean;
  std::vector<std::string> noise;
  std::vector<double> snr;
  std::string out;
  std::uint64_t seed = 0;
  double lead_ms = 300.0;
};

// Shortest lead that still gives the modulation estimator one full window of
// noise-only frames at the default framing.
constexpr double kMinLeadMs = 256.0;

int cmd_mix(const MixOptions& o, std::ostream& out, std::ostream& err) {
  if (o.snr.empty()) throw UsageError("mix: --snr needs at least one value");
  for (double s : o.snr) {
    if (!std::isfinite(s)) throw UsageError("mix: SNR values must be finite");
  }
  if (!(o.lead_ms >= kMinLeadMs)) {
    throw UsageError("mix: --lead-ms must be >= " + format_number(kMinLeadMs) +
                     " so the modulation path has a noise-only window");
  }
  for (const auto& n : o.noise) {
    if (!fs::is_regular_file(n)) throw UsageError("mix: noise file not found: " + n);
  }
  const auto cleans = wav_files(o.clean, "mix: clean path");
  std::vector<fs::path> noises(o.noise.begin(), o.noise.end());
  std::sort(noises.begin(), noises.end());

  struct Job {
    fs::path clean, noise;
    double snr;
    std::string stem;
  };
  std::vector<Job> jobs;
  for (const auto& c : cleans) {
    for (const auto& n : noises) {
      for (double s : o.snr) {
        jobs.push_back({c, n, s, make_stem(c.stem().string(), n.stem().string(), s)});
      }
    }
  }
  std::sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) { return a.stem < b.stem; });

  const fs::path root(o.out);
  for (const char* sub : {"noisy", "clean", "noise"}) fs::create_directories(root / sub);

  json entries = json::array();
  std::size_t failures = 0;
  for (const auto& j : jobs) {
    json e = {{"stem", j.stem},
              {"clean_source", j.clean.string()},
              {"noise_source", j.noise.string()},
              {"snr_db", j.snr}};
    try {
      corpus::MixSpec spec;
      spec.clean_path = j.clean;
      spec.noise_path = j.noise;
      spec.snr_db = j.snr;
      spec.lead_noise_ms = o.lead_ms;
      spec.offset = corpus::SeededRandomOffset{o.seed ^ fnv1a(j.stem)};
      const auto mix = corpus::mix_at_snr(spec);
      const fs::path noisy = root / "noisy" / (j.stem + ".wav");
      const fs::path clean = root / "clean" / (j.stem + ".wav");
      const fs::path noise = root / "noise" / (j.stem + ".wav");
      const auto rep = corpus::write_wav(noisy, mix.noisy);
      corpus::write_wav(clean, mix.clean_aligned);
      corpus::write_wav(noise, mix.noise_scaled);
      e["noisy"] = noisy.string();
      e["clean"] = clean.string();
      e["noise"] = noise.string();
      e["noise_offset"] = mix.noise_offset;
      e["noise_gain"] = mix.noise_gain;
      e["clipped_samples"] = rep.clipped;
      e["status"] = "ok";
    } catch (const Error& ex) {
      ++failures;
      e["status"] = "error";
      e["error"] = ex.what();
      err << "mix: " << j.stem << ": " << ex.what() << "\n";
    }
    entries.push_back(std::move(e));
  }

  json manifest = {{"tool", "sefusion"},
                   {"version", kToolVersion},
                   {"command", "mix"},
                   {"seed", o.seed},
                   {"lead_noise_ms", o.lead_ms},
                   {"entries", std::move(entries)}};
  write_text(root / "manifest.json", manifest.dump(2) + "\n");
  out << "mix: " << jobs.size() - failures << " of " << jobs.size() << " mixtures written to "
      << root.string() << "\n";
  return failures ? kExitPartial : kExitOk;
}

// --- enhance -------------------------------------------------------------------

struct EnhanceOptions {
  std::string in;
  std::string out;
  std::string mode;
  std::string config;
  std::string noise_ref;
  std::string noise_psd;
  std::string dump_spectra;
  std::string manifest;
  unsigned jobs = 0;
};

pipeline::Mode cli_mode(const std::string& s) {
  if (s == "fusion") return pipeline::Mode::fusion;
  if (s == "acoustic") return pipeline::Mode::acoustic_only;
  if (s == "modmask") return pipeline::Mode::modmask_only;
  if (s == "modssub") return pipeline::Mode::modssub_only;
  return pipeline::mode_from_string(s);
}

void dump_matrix(const fs::path& path, const Matrix<double>& m) {
  std::string text;
  char buf[40];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, c == 0 ? "%.9g" : ",%.9g", m(r, c));
      text += buf;
    }
    text += '\n';
  }
  write_text(path, text);
}

int cmd_enhance(const EnhanceOptions& o, std::ostream& out, std::ostream& err) {
  pipeline::EnhancementConfig cfg;
  if (!o.config.empty()) {
    if (!fs::is_regular_file(o.config)) throw UsageError("enhance: config not found: " + o.config);
    cfg = pipeline::load_config(o.config);
  }
  if (!o.mode.empty()) cfg.mode = cli_mode(o.mode);
  if (!o.noise_psd.empty()) cfg.noise_psd_mode = pipeline::noise_psd_mode_from_string(o.noise_psd);
  pipeline::validate(cfg);
  const bool needs_ref = cfg.noise_psd_mode == pipeline::NoisePsdMode::oracle &&
                         (cfg.mode == pipeline::Mode::fusion ||
                          cfg.mode == pipeline::Mode::acoustic_only);
  if (needs_ref && o.noise_ref.empty()) {
    throw ConfigError("noise_psd_mode 'oracle' requires --noise-ref");
  }

  const fs::path in(o.in);
  if (!fs::exists(in)) throw UsageError("enhance: input not found: " + o.in);
  const bool dir_mode = fs::is_directory(in);
  const auto inputs = wav_files(in, "enhance: input");
  std::vector<fs::path> outputs;
  std::vector<std::optional<fs::path>> refs;
  for (const auto& p : inputs) {
    outputs.push_back(dir_mode ? fs::path(o.out) / p.filename() : fs::path(o.out));
    if (!needs_ref) {
      refs.emplace_back();
    } else if (dir_mode) {
      if (!fs::is_directory(o.noise_ref)) {
        throw UsageError("enhance: --noise-ref must be a directory when --in is one");
      }
      refs.emplace_back(fs::path(o.noise_ref) / p.filename());
    } else {
      if (!fs::is_regular_file(o.noise_ref)) {
        throw UsageError("enhance: noise reference not found: " + o.noise_ref);
      }
      refs.emplace_back(o.noise_ref);
    }
  }
  if (dir_mode) fs::create_directories(o.out);
  else if (fs::path(o.out).has_parent_path()) fs::create_directories(fs::path(o.out).parent_path());

  std::vector<json> rows(inputs.size());
  std::atomic<std::size_t> failures{0};
  std::mutex err_mutex;
  parallel_for(inputs.size(), o.jobs ? o.jobs : default_jobs(), [&](std::size_t i) {
    json row = {{"input", inputs[i].string()}, {"output", outputs[i].string()}};
    if (refs[i]) row["noise_ref"] = refs[i]->string();
    try {
      const Waveform noisy = corpus::read_wav(inputs[i]);
      std::optional<Waveform> ref;
      if (refs[i]) ref = corpus::read_wav(*refs[i]);
      const auto r = pipeline::enhance_detailed(noisy, ref, cfg);
      const auto rep = corpus::write_wav(outputs[i], r.waveform);
      row["clipped_samples"] = rep.clipped;
      row["modulation_clamp_rate"] = r.clamp_rate;
      row["retained_fraction"] = r.retained_fraction;
      if (!o.dump_spectra.empty()) {
        const fs::path d(o.dump_spectra);
        const std::string stem = inputs[i].stem().string();
        dump_matrix(d / (stem + ".noisy.csv"), r.noisy_mag);
        if (!r.acoustic_mag.empty()) dump_matrix(d / (stem + ".acoustic.csv"), r.acoustic_mag);
        if (!r.modulation_mag.empty()) dump_matrix(d / (stem + ".modulation.csv"), r.modulation_mag);
        dump_matrix(d / (stem + ".enhanced.csv"), r.output_mag);
      }
      row["status"] = "ok";
    } catch (const Error& ex) {
      ++failures;
      row["status"] = "error";
      row["error"] = ex.what();
      std::lock_guard<std::mutex> lock(err_mutex);
      err << "enhance: " << inputs[i].string() << ": " << ex.what() << "\n";
    }
    rows[i] = std::move(row);
  });

  json manifest = {{"tool", "sefusion"},
                   {"version", kToolVersion},
                   {"command", "enhance"},
                   {"config", pipeline::to_json(cfg)},
                   {"entries", rows}};
  fs::path manifest_path = o.manifest;
  if (manifest_path.empty()) {
    manifest_path = dir_mode ? fs::path(o.out) / "manifest.json"
                             : fs::path(o.out).replace_extension(".manifest.json");
  }
  write_text(manifest_path, manifest.dump(2) + "\n");
  out << "enhance: " << inputs.size() - failures << " of " << inputs.size() << " files enhanced ("
      << pipeline::to_string(cfg.mode) << ")\n";
  return failures ? kExitPartial : kExitOk;
}

// --- eval ------------------------------------------------------------------------

struct EvalOptions {
  std::string clean;
  std::string processed;
  std::string csv;
  std::string method;
  double trim_ms = 300.0;
  unsigned jobs = 0;
};

const char* kCsvHeader = "utterance_id,noise_type,snr_db,method,estoi,seg_snr_db";

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

Waveform trimmed(const Waveform& w, std::size_t n) {
  Waveform t;
  t.sample_rate_hz = w.sample_rate_hz;
  if (n < w.size()) t.samples.assign(w.samples.begin() + static_cast<std::ptrdiff_t>(n), w.samples.end());
  return t;
}

int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& err) {
  if (!fs::is_directory(o.clean)) throw UsageError("eval: clean directory not found: " + o.clean);
  if (!fs::is_directory(o.processed)) {
    throw UsageError("eval: processed directory not found: " + o.processed);
  }
  if (!(o.trim_ms >= 0.0)) throw UsageError("eval: --trim-ms must be >= 0");
  std::map<std::string, fs::path> clean, processed;
  for (const auto& p : wav_files(o.clean, "eval: clean directory")) clean[p.stem().string()] = p;
  for (const auto& p : wav_files(o.processed, "eval: processed directory")) {
    processed[p.stem().string()] = p;
  }
  std::vector<std::string> stems;
  std::size_t unmatched = 0;
  for (const auto& [stem, _] : clean) {
    if (processed.count(stem)) {
      stems.push_back(stem);
    } else {
      ++unmatched;
      err << "eval: no processed file for " << stem << "\n";
    }
  }
  for (const auto& [stem, _] : processed) {
    if (!clean.count(stem)) {
      ++unmatched;
      err << "eval: no clean file for " << stem << "\n";
    }
  }
  if (stems.empty()) throw UsageError("eval: no file stems in common between the two directories");

  std::string method = o.method;
  if (method.empty()) method = fs::path(o.processed).lexically_normal().filename().string();
  if (method.empty()) method = fs::path(o.processed).lexically_normal().parent_path().filename().string();

  std::vector<std::string> lines(stems.size());
  std::atomic<std::size_t> failures{0};
  std::mutex err_mutex;
  parallel_for(stems.size(), o.jobs ? o.jobs : default_jobs(), [&](std::size_t i) {
    const std::string& stem = stems[i];
    try {
      const Waveform c = corpus::read_wav(clean.at(stem));
      Waveform p = corpus::read_wav(processed.at(stem));
      if (p.sample_rate_hz != c.sample_rate_hz) p = corpus::resample_to(p, c.sample_rate_hz);
      p.samples.resize(c.size(), 0.0);
      const auto trim = static_cast<std::size_t>(std::lround(o.trim_ms * c.sample_rate_hz / 1000.0));
      const Waveform ct = trimmed(c, trim);
      const Waveform pt = trimmed(p, trim);
      if (ct.samples.empty()) throw DomainError("nothing left after trimming " + format_number(o.trim_ms) + " ms");
      metrics::MetricReport m;
      double snr = std::nan("");
      if (!parse_stem(stem, m.utterance_id, m.noise_type, snr)) m.utterance_id = stem;
      m.method = method;
      m.estoi = metrics::estoi(ct, pt);
      m.seg_snr_db = metrics::segmental_snr(ct, pt);
      lines[i] = csv_field(m.utterance_id) + "," + csv_field(m.noise_type) + "," +
                 (std::isnan(snr) ? std::string() : format_number(snr)) + "," + csv_field(m.method) +
                 "," + fixed6(m.estoi) + "," + fixed6(m.seg_snr_db) + "\n";
    } catch (const Error& ex) {
      ++failures;
      std::lock_guard<std::mutex> lock(err_mutex);
      err << "eval: " << stem << ": " << ex.what() << "\n";
    }
  });

  std::string text = std::string(kCsvHeader) + "\n";
  for (const auto& l : lines) text += l;
  write_text(o.csv, text);
  out << "eval: " << stems.size() - failures << " rows written to " << o.csv << "\n";
  return (failures || unmatched) ? kExitPartial : kExitOk;
}

// --- report ----------------------------------------------------------------------

struct ReportOptions {
  std::vector<std::string> csv;
  std::string markdown;
};

double parse_double(const std::string& s, const std::string& where) {
  if (s.empty()) return std::nan("");
  if (s == "nan") return std::nan("");
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw UsageError(where + ": not a number: '" + s + "'");
  }
  return v;
}

int cmd_report(const ReportOptions& o, std::ostream& out, std::ostream&) {
  struct Acc {
    std::size_t n = 0;
    double estoi = 0.0, seg = 0.0, pesq = 0.0;
    std::size_t pesq_n = 0;
  };
  // (noise, snr, method); SNR sorts numerically, a missing SNR sorts last.
  using Key = std::tuple<std::string, double, std::string>;
  auto less = [](const Key& a, const Key& b) {
    auto snr_key = [](double s) { return std::isnan(s) ? std::numeric_limits<double>::infinity() : s; };
    return std::make_tuple(std::get<0>(a), snr_key(std::get<1>(a)), std::get<2>(a)) <
           std::make_tuple(std::get<0>(b), snr_key(std::get<1>(b)), std::get<2>(b));
  };
  std::map<Key, Acc, decltype(less)> groups(less);
  bool any_pesq = false;

  for (const auto& path : o.csv) {
    std::ifstream f(path);
    if (!f) throw UsageError("report: cannot read " + path);
    std::string line;
    if (!std::getline(f, line)) throw UsageError("report: empty CSV " + path);
    const auto header = csv_split(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    for (const char* need : {"utterance_id", "noise_type", "snr_db", "method", "estoi", "seg_snr_db"}) {
      if (!col.count(need)) throw UsageError("report: " + path + " lacks column '" + need + "'");
    }
    const bool has_pesq = col.count("pesq") > 0;
    std::size_t line_no = 1;
    while (std::getline(f, line)) {
      ++line_no;
      if (line.empty() || line == "\r") continue;
      const auto cells = csv_split(line);
      if (cells.size() != header.size()) {
        throw UsageError("report: " + path + ":" + std::to_string(line_no) + ": expected " +
                         std::to_string(header.size()) + " fields");
      }
      const std::string where = path + ":" + std::to_string(line_no);
      Key key{cells[col["noise_type"]], parse_double(cells[col["snr_db"]], where), cells[col["method"]]};
      auto& acc = groups[key];
      ++acc.n;
      acc.estoi += parse_double(cells[col["estoi"]], where);
      acc.seg += parse_double(cells[col["seg_snr_db"]], where);
      if (has_pesq && !cells[col["pesq"]].empty()) {
        acc.pesq += parse_double(cells[col["pesq"]], where);
        ++acc.pesq_n;
        any_pesq = true;
      }
    }
  }
  if (groups.empty()) throw UsageError("report: no data rows in the given CSV files");

  std::ostringstream md;
  md << "| Noise | SNR (dB) | Method | N | ESTOI | segSNR (dB) |" << (any_pesq ? " PESQ |" : "") << "\n";
  md << "|---|---:|---|---:|---:|---:|" << (any_pesq ? "---:|" : "") << "\n";
  for (const auto& [key, acc] : groups) {
    const auto& [noise, snr, method] = key;
    const double n = static_cast<double>(acc.n);
    char e[32], s[32];
    std::snprintf(e, sizeof e, "%.3f", acc.estoi / n);
    std::snprintf(s, sizeof s, "%.2f", acc.seg / n);
    md << "| " << (noise.empty() ? "-" : noise) << " | " << (std::isnan(snr) ? "-" : format_number(snr))
       << " | " << method << " | " << acc.n << " | " << e << " | " << s << " |";
    if (any_pesq) {
      if (acc.pesq_n) {
        char q[32];
        std::snprintf(q, sizeof q, "%.2f", acc.pesq / static_cast<double>(acc.pesq_n));
        md << " " << q << " |";
      } else {
        md << " - |";
      }
    }
    md << "\n";
  }
  write_text(o.markdown, md.str());
  out << "report: " << groups.size() << " condition rows written to " << o.markdown << "\n";
  return kExitOk;
}

// --- synth -----------------------------------------------------------------------

struct SynthOptions {
  std::string out;
  std::size_t count = 10;
  std::uint64_t seed = 0;
  double duration_s = 2.5;
};

int cmd_synth(const SynthOptions& o, std::ostream& out, std::ostream&) {
  if (o.count == 0) throw UsageError("synth: --count must be >= 1");
  if (!(o.duration_s >= 1.0)) throw UsageError("synth: --duration must be >= 1 s");
  const fs::path root(o.out);
  fs::create_directories(root / "clean");
  fs::create_directories(root / "noise");
  for (std::size_t i = 0; i < o.count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "utt%02zu.wav", i);
    corpus::write_wav(root / "clean" / name, synth::speech_like(o.seed * 1000 + i, o.duration_s));
  }
  // Long enough for the lead-in and a random offset.
  const double noise_s = o.duration_s + 3.0;
  corpus::write_wav(root / "noise" / "white.wav", synth::white_noise(o.seed, noise_s));
  corpus::write_wav(root / "noise" / "pink.wav", synth::pink_noise(o.seed, noise_s));
  corpus::write_wav(root / "noise" / "babble.wav", synth::babble_noise(o.seed, noise_s));
  out << "synth: " << o.count << " utterances and 3 noises written to " << root.string() << "\n";
  return kExitOk;
}

}  // namespace

std::string make_stem(const std::string& utterance, const std::string& noise, double snr_db) {
  return utterance + "__" + noise + "__" + format_number(snr_db) + "dB";
}

bool parse_stem(const std::string& stem, std::string& utterance, std::string& noise, double& snr_db) {
  const auto a = stem.find("__");
  if (a == std::string::npos) return false;
  const auto b = stem.find("__", a + 2);
  if (b == std::string::npos || stem.find("__", b + 2) != std::string::npos) return false;
  const std::string snr = stem.substr(b + 2);
  if (snr.size() < 3 || snr.compare(snr.size() - 2, 2, "dB") != 0) return false;
  double v = 0.0;
  const char* first = snr.data();
  const char* last = snr.data() + snr.size() - 2;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) return false;
  utterance = stem.substr(0, a);
  noise = stem.substr(a + 2, b - a - 2);
  snr_db = v;
  return true;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Single-channel speech enhancement by fusing acoustic-domain Bayesian amplitude "
               "estimation with modulation-domain channel selection",
               "sefusion"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  MixOptions mix;
  auto* c_mix = app.add_subcommand("mix", "Mix clean speech with noise at given SNRs");
  c_mix->add_option("--clean", mix.clean, "Clean WAV file or directory")->required();
  c_mix->add_option("--noise", mix.noise, "Noise WAV file(s); the file stem names the noise type")
      ->required();
  c_mix->add_option("--snr", mix.snr, "SNR list in dB, e.g. 0,5,10")->required()->delimiter(',');
  c_mix->add_option("--out", mix.out, "Output directory")->required();
  c_mix->add_option("--seed", mix.seed, "Seed for noise segment offsets");
  c_mix->add_option("--lead-ms", mix.lead_ms, "Noise-only lead-in before the speech (ms)");

  EnhanceOptions enh;
  auto* c_enh = app.add_subcommand("enhance", "Enhance a noisy WAV file or directory");
  c_enh->add_option("--in", enh.in, "Noisy WAV file or directory")->required();
  c_enh->add_option("--out", enh.out, "Output WAV file or directory")->required();
  c_enh->add_option("--mode", enh.mode, "fusion | acoustic | modmask | modssub (overrides config)");
  c_enh->add_option("--config", enh.config, "JSON configuration file");
  c_enh->add_option("--noise-ref", enh.noise_ref, "Noise reference file or directory (oracle mode)");
  c_enh->add_option("--noise-psd", enh.noise_psd, "oracle | blind (overrides config)");
  c_enh->add_option("--dump-spectra", enh.dump_spectra, "Directory for magnitude matrices (CSV)");
  c_enh->add_option("--manifest", enh.manifest, "Manifest path");
  c_enh->add_option("--jobs", enh.jobs, "Worker threads (default: CPU count)");

  EvalOptions ev;
  auto* c_eval = app.add_subcommand("eval", "Score processed files against clean references");
  c_eval->add_option("--clean", ev.clean, "Clean reference directory")->required();
  c_eval->add_option("--processed", ev.processed, "Processed directory")->required();
  c_eval->add_option("--csv", ev.csv, "Output CSV")->required();
  c_eval->add_option("--method", ev.method, "Method label (default: processed directory name)");
  c_eval->add_option("--trim-ms", ev.trim_ms, "Leading span excluded from scoring (ms)");
  c_eval->add_option("--jobs", ev.jobs, "Worker threads (default: CPU count)");

  ReportOptions rep;
  auto* c_rep = app.add_subcommand("report", "Aggregate evaluation CSVs into a markdown table");
  c_rep->add_option("--csv", rep.csv, "Evaluation CSV file(s)")->required();
  c_rep->add_option("--markdown", rep.markdown, "Output markdown file")->required();

  SynthOptions syn;
  auto* c_syn = app.add_subcommand("synth", "Write the synthetic fixture corpus");
  c_syn->add_option("--out", syn.out, "Output directory")->required();
  c_syn->add_option("--count", syn.count, "Number of utterances");
  c_syn->add_option("--seed", syn.seed, "Generator seed");
  c_syn->add_option("--duration", syn.duration_s, "Utterance duration (s)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*c_mix) return cmd_mix(mix, out, err);
    if (*c_enh) return cmd_enhance(enh, out, err);
    if (*c_eval) return cmd_eval(ev, out, err);
    if (*c_rep) return cmd_report(rep, out, err);
    if (*c_syn) return cmd_synth(syn, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace sefusion::cli
