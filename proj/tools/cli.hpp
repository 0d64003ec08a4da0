#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sefusion::cli {

constexpr const char* kToolVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;  // some files failed, the rest were written
constexpr int kExitUsage = 2;    // bad arguments, paths or configuration

/// Runs one command line (without the program name). Diagnostics go to
/// `err`, progress summaries to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Splits a `<utterance>__<noise>__<snr>dB` stem. Returns false when the
/// stem does not follow that pattern.
bool parse_stem(const std::string& stem, std::string& utterance, std::string& noise,
                double& snr_db);
std::string make_stem(const std::string& utterance, const std::string& noise, double snr_db);

}  // namespace sefusion::cli
