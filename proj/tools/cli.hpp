#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "pv5/complex.hpp"

namespace pv5::cli {

enum ExitCode : int { kPass = 0, kVerdictFail = 2, kNumericalFail = 3, kUsage = 64 };

enum class Format { json, csv, both };

struct RunConfig {
  Complex u_hat{1.0, 0.0};
  double t0 = 0.05;
  double t1 = 40.0;
  double rtol = 1e-12;
  double atol = 1e-14;
  double radius = 0.0;  // 0: R_min(t) at each point
  std::vector<double> t_scan{1.0, 2.0, 4.0};
  std::string output_dir = ".";
  Format format = Format::both;
  int seed_order = -1;  // -1: summed 1/t series, 0: leading order only, k: series truncated at 1/t^k

  // Throws std::invalid_argument on a violated invariant.
  void validate() const;
};

// Flat "key = value" text; '#' starts a comment. Keys are the long flag names.
std::map<std::string, std::string> read_config_file(const std::string& path);
void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& kv);

nlohmann::ordered_json to_json(const RunConfig& cfg);

// 64-bit FNV-1a of the serialized record, as 16 hex digits.
std::string content_hash(const std::string& text);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pv5::cli
