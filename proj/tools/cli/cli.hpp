#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "intent_lab/simulation.hpp"

namespace intent_lab::cli {

enum ExitCode : int { kOk = 0, kCertificateFailed = 1, kUsageError = 2, kNumericalFailure = 3 };

// Schema or value error in a config document; the message starts with "file:line:".
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct VerifySettings {
  int bid_resolution = 50;
  int type_points = 5;
  int quadrature_nodes = 256;
  double epsilon = 1e-3;
};

struct Config {
  std::string path;
  std::string text;                  // raw bytes, hashed into the manifest
  SimConfig sim;
  double max_failure_fraction = 0.0; // share of non-converged draws tolerated by `run`
  VerifySettings verify;
};

Config load_config(const std::string& path);
Config parse_config(const std::string& text, const std::string& path = "<config>");

// Re-validates after a programmatic change (sweeps); throws ConfigError anchored at `key_path`.
void revalidate(const Config& config, const std::string& key_path);

std::uint64_t fnv1a64(const std::string& bytes);

struct Manifest {
  std::string subcommand;
  std::string config_digest;
  std::string version;
  std::string timestamp;
  std::vector<std::string> outputs;
};

Manifest make_manifest(const Config& config, const std::string& subcommand, std::vector<std::string> outputs);
std::string manifest_json(const Manifest& m);

// Four-quadrant regime map of the fair combinatorial auction over the type rectangle.
std::string regime_map_svg(const MarketParams& params, int cells);

// Entry point shared by the executable and the tests. args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace intent_lab::cli
