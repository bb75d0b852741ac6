#pragma once
// Experiment configuration: a flat "key = value" document, optionally
// overridden by command-line flags, validated in full before any work.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "divprog/arith.hpp"
#include "divprog/bessel.hpp"
#include "divprog/kloosterman.hpp"
#include "divprog/progressions.hpp"
#include "json.hpp"

namespace divprog::cli {

inline constexpr const char* kLibraryVersion = "divprog 1.0.0";

using KeyValues = std::map<std::string, std::string>;

const std::vector<std::string>& known_keys();

// One "key = value" per line, '#' starts a comment.  Unknown keys, repeated
// keys and lines without '=' are rejected.
KeyValues parse_key_values(std::istream& in, const std::string& source);
KeyValues read_config_file(const std::string& path);

struct ExperimentConfig {
  std::string command;
  std::vector<Kind> kinds{Kind::Divisor};
  std::vector<std::uint32_t> primes;
  std::string prime_range;        // "lo:hi", expanded into `primes`
  std::optional<double> x;        // explicit window
  double phi_c = 50.0;            // Phi(p) = phi_c (log p)^phi_e
  double phi_e = 0.0;
  std::string profile = "bump";   // named profile or "custom"
  double w0 = 1.0, w1 = 2.0;
  ProjectiveMap gamma{1, 1, 0, 1};
  int kappa_max = 4;
  int lambda_max = 2;
  Normalization normalization = Normalization::Empirical;
  int residues = 10;              // voronoi-check residues per (kind, p)
  std::int64_t n_max = 0;         // voronoi-check truncation, 0 = automatic
  std::uint64_t dump_n = 1000;    // sieve-dump length
  std::string maps;               // kloosterman: "a,b,c,d;a,b,c,d;..."
  std::string out = "out";
  unsigned workers = 1;
  std::string format = "json";
  std::string cache_dir;

  // floor(p^2 / Phi(p)) or the explicit X.
  double window(std::uint32_t p) const;
  WeightProfile weight() const;
  std::vector<ProjectiveMap> map_list() const;
};

ExperimentConfig build_config(const KeyValues& kv);

// Command-specific checks (prime list, capacities, p0(gamma)).
void validate_for_command(const ExperimentConfig& cfg);

// Effective configuration, every key in a fixed order.
std::string emit_config(const ExperimentConfig& cfg);
// The same without the execution settings (out, workers), for report headers.
KeyValues report_config(const ExperimentConfig& cfg);

std::vector<std::uint32_t> expand_prime_range(const std::string& range);

}  // namespace divprog::cli
