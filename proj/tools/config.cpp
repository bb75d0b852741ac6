#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "divprog/errors.hpp"

namespace divprog::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ValidationError(key + ": expected a number, got '" + text + "'");
  }
  return v;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& text) {
  Int v = 0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size()) {
    throw ValidationError(key + ": expected an integer, got '" + text + "'");
  }
  return v;
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "command", "kind",      "primes",     "prime_range", "x",         "phi_c",    "phi_e",
      "profile", "w0",        "w1",         "gamma",       "kappa_max", "lambda_max", "normalization",
      "residues", "n_max",    "dump_n",     "maps",        "out",       "workers",  "format",
      "cache_dir"};
  return keys;
}

KeyValues parse_key_values(std::istream& in, const std::string& source) {
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ValidationError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ValidationError(where + ": unknown key '" + key + "'");
    }
    if (kv.count(key)) throw ValidationError(where + ": key '" + key + "' given twice");
    kv[key] = value;
  }
  return kv;
}

KeyValues read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file " + path);
  return parse_key_values(in, path);
}

std::vector<std::uint32_t> expand_prime_range(const std::string& range) {
  const auto parts = split(range, ':');
  if (parts.size() != 2) throw ValidationError("prime_range: expected 'lo:hi', got '" + range + "'");
  const auto lo = parse_int<std::uint32_t>("prime_range", parts[0]);
  const auto hi = parse_int<std::uint32_t>("prime_range", parts[1]);
  if (lo > hi) throw ValidationError("prime_range: lo > hi");
  if (hi - lo > 10'000'000) throw ValidationError("prime_range: range too wide");
  std::vector<std::uint32_t> out;
  for (std::uint64_t n = lo; n <= hi; ++n) {
    if (is_prime(n)) out.push_back(static_cast<std::uint32_t>(n));
  }
  return out;
}

double ExperimentConfig::window(std::uint32_t p) const {
  if (x) return *x;
  const double phi = phi_c * std::pow(std::log(static_cast<double>(p)), phi_e);
  // Integer floor of p^2 / Phi when Phi is an integer, to avoid rounding at
  // exact quotients.
  const double pp = static_cast<double>(p) * p;
  if (phi == std::floor(phi) && phi < 9e15) {
    const auto num = static_cast<std::uint64_t>(p) * p;
    return static_cast<double>(num / static_cast<std::uint64_t>(phi));
  }
  return std::floor(pp / phi);
}

WeightProfile ExperimentConfig::weight() const {
  return WeightProfile(w0, w1, 1.0, profile);
}

std::vector<ProjectiveMap> ExperimentConfig::map_list() const {
  std::vector<ProjectiveMap> out;
  if (maps.empty()) return out;
  for (const auto& m : split(maps, ';')) {
    if (!m.empty()) out.push_back(parse_map(m));
  }
  return out;
}

ExperimentConfig build_config(const KeyValues& kv) {
  ExperimentConfig c;
  auto get = [&](const char* key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };

  if (auto v = get("command")) c.command = *v;
  if (auto v = get("kind")) {
    c.kinds.clear();
    for (const auto& k : split(*v, ',')) {
      const Kind kind = parse_kind(k);
      if (std::find(c.kinds.begin(), c.kinds.end(), kind) != c.kinds.end()) {
        throw ValidationError("kind: '" + k + "' listed twice");
      }
      c.kinds.push_back(kind);
    }
    if (c.kinds.empty()) throw ValidationError("kind: empty list");
  }

  const auto* primes = get("primes");
  const auto* range = get("prime_range");
  if (primes && range && !primes->empty() && !range->empty()) {
    throw ValidationError("primes and prime_range are mutually exclusive");
  }
  if (primes && !primes->empty()) {
    for (const auto& t : split(*primes, ',')) {
      const auto p = parse_int<std::uint32_t>("primes", t);
      if (!is_prime(p)) throw ValidationError("primes: " + t + " is not prime");
      c.primes.push_back(p);
    }
  }
  if (range && !range->empty()) {
    c.prime_range = *range;
    c.primes = expand_prime_range(*range);
  }

  const auto* x = get("x");
  const auto* pc = get("phi_c");
  const auto* pe = get("phi_e");
  if (x && (pc || pe)) throw ValidationError("X is given both explicitly and by the Phi rule");
  if (x) {
    c.x = parse_double("x", *x);
    if (!(*c.x >= 1.0)) throw ValidationError("x must be >= 1");
  }
  if (pc) c.phi_c = parse_double("phi_c", *pc);
  if (pe) c.phi_e = parse_double("phi_e", *pe);
  if (!(c.phi_c > 0)) throw ValidationError("phi_c must be > 0");
  if (!(c.phi_e >= 0)) throw ValidationError("phi_e must be >= 0");

  const auto* prof = get("profile");
  const auto* w0 = get("w0");
  const auto* w1 = get("w1");
  if (prof && *prof != "custom") {
    const auto named = WeightProfile::named(*prof);
    c.profile = *prof;
    c.w0 = named.w0();
    c.w1 = named.w1();
    if ((w0 && parse_double("w0", *w0) != c.w0) || (w1 && parse_double("w1", *w1) != c.w1)) {
      throw ValidationError("w0/w1 conflict with profile '" + *prof + "'");
    }
  } else if (w0 || w1) {
    c.profile = "custom";
    if (w0) c.w0 = parse_double("w0", *w0);
    if (w1) c.w1 = parse_double("w1", *w1);
  } else if (prof) {
    throw ValidationError("profile = custom needs w0 and w1");
  }
  default_weight(c.w0, c.w1);  // validates the support

  if (auto v = get("gamma")) c.gamma = parse_map(*v);
  if (auto v = get("kappa_max")) c.kappa_max = parse_int<int>("kappa_max", *v);
  if (auto v = get("lambda_max")) c.lambda_max = parse_int<int>("lambda_max", *v);
  if (c.kappa_max < 1 || c.kappa_max > 16) throw ValidationError("kappa_max must be in 1..16");
  if (c.lambda_max < 0 || c.lambda_max > 16) throw ValidationError("lambda_max must be in 0..16");
  if (auto v = get("normalization")) c.normalization = parse_normalization(*v);
  if (auto v = get("residues")) c.residues = parse_int<int>("residues", *v);
  if (c.residues < 1) throw ValidationError("residues must be >= 1");
  if (auto v = get("n_max")) c.n_max = parse_int<std::int64_t>("n_max", *v);
  if (c.n_max < 0) throw ValidationError("n_max must be >= 0");
  if (auto v = get("dump_n")) c.dump_n = parse_int<std::uint64_t>("dump_n", *v);
  if (c.dump_n < 1) throw ValidationError("dump_n must be >= 1");
  if (auto v = get("maps")) {
    c.maps = *v;
    c.map_list();
  }
  if (auto v = get("out")) c.out = *v;
  if (c.out.empty()) throw ValidationError("out must not be empty");
  if (auto v = get("workers")) c.workers = parse_int<unsigned>("workers", *v);
  if (c.workers < 1 || c.workers > 256) throw ValidationError("workers must be in 1..256");
  if (auto v = get("format")) c.format = *v;
  if (c.format != "json" && c.format != "csv") throw ValidationError("format must be csv or json");
  if (auto v = get("cache_dir")) c.cache_dir = *v;
  return c;
}

namespace {

const std::vector<std::string> kCommands{"sieve-dump", "bessel-selftest", "voronoi-check", "kloosterman",
                                         "moments",    "mixed",           "clt-sweep"};

std::uint64_t cap_of(Kind kind) { return kind == Kind::Divisor ? kDivisorCap : kCuspFormCap; }

}  // namespace

void validate_for_command(const ExperimentConfig& cfg) {
  if (std::find(kCommands.begin(), kCommands.end(), cfg.command) == kCommands.end()) {
    throw ValidationError("unknown command '" + cfg.command + "'");
  }
  const bool needs_primes = cfg.command != "sieve-dump" && cfg.command != "bessel-selftest";
  if (needs_primes && cfg.primes.empty()) throw ValidationError("empty prime list");
  if (cfg.command == "sieve-dump") {
    for (Kind k : cfg.kinds) {
      if (cfg.dump_n > cap_of(k)) throw ValidationError("dump_n exceeds the table cap for kind " + std::string(to_string(k)));
    }
  }
  if (cfg.command == "kloosterman") {
    for (auto p : cfg.primes) {
      if (p > 50'000'000) throw ValidationError("kloosterman: p too large for a full table");
    }
  }
  const bool windowed = cfg.command == "voronoi-check" || cfg.command == "moments" || cfg.command == "mixed" ||
                        cfg.command == "clt-sweep";
  if (!windowed) return;
  for (auto p : cfg.primes) {
    const double X = cfg.window(p);
    if (!(X >= 1.0)) throw ValidationError("window X < 1 at p = " + std::to_string(p));
    for (Kind k : cfg.kinds) {
      if (std::floor(cfg.w1 * X) > static_cast<double>(cap_of(k))) {
        throw ValidationError("w1 X = " + format_double(cfg.w1 * X) + " exceeds the table cap " +
                              std::to_string(cap_of(k)) + " for kind " + std::string(to_string(k)) + " at p = " +
                              std::to_string(p));
      }
    }
    if (cfg.command == "mixed") check_mixed_prime(cfg.gamma, p);
    if (cfg.command == "voronoi-check" && cfg.n_max > 0) {
      for (Kind k : cfg.kinds) {
        if (static_cast<std::uint64_t>(cfg.n_max) > cap_of(k)) throw ValidationError("n_max exceeds the table cap");
      }
    }
  }
}

namespace {

std::vector<std::pair<std::string, std::string>> ordered(const ExperimentConfig& c) {
  std::vector<std::pair<std::string, std::string>> kv;
  std::string kinds;
  for (Kind k : c.kinds) kinds += (kinds.empty() ? "" : ",") + std::string(to_string(k));
  kv.emplace_back("command", c.command);
  kv.emplace_back("kind", kinds);
  if (!c.prime_range.empty()) {
    kv.emplace_back("prime_range", c.prime_range);
  } else {
    std::string ps;
    for (auto p : c.primes) ps += (ps.empty() ? "" : ",") + std::to_string(p);
    kv.emplace_back("primes", ps);
  }
  if (c.x) {
    kv.emplace_back("x", format_double(*c.x));
  } else {
    kv.emplace_back("phi_c", format_double(c.phi_c));
    kv.emplace_back("phi_e", format_double(c.phi_e));
  }
  kv.emplace_back("profile", c.profile);
  kv.emplace_back("w0", format_double(c.w0));
  kv.emplace_back("w1", format_double(c.w1));
  kv.emplace_back("gamma", format_map(c.gamma));
  kv.emplace_back("kappa_max", std::to_string(c.kappa_max));
  kv.emplace_back("lambda_max", std::to_string(c.lambda_max));
  kv.emplace_back("normalization", std::string(to_string(c.normalization)));
  kv.emplace_back("residues", std::to_string(c.residues));
  kv.emplace_back("n_max", std::to_string(c.n_max));
  kv.emplace_back("dump_n", std::to_string(c.dump_n));
  kv.emplace_back("maps", c.maps);
  kv.emplace_back("format", c.format);
  kv.emplace_back("cache_dir", c.cache_dir);
  kv.emplace_back("out", c.out);
  kv.emplace_back("workers", std::to_string(c.workers));
  return kv;
}

}  // namespace

std::string emit_config(const ExperimentConfig& cfg) {
  std::string s;
  for (const auto& [k, v] : ordered(cfg)) s += k + " = " + v + "\n";
  return s;
}

KeyValues report_config(const ExperimentConfig& cfg) {
  KeyValues kv;
  for (const auto& [k, v] : ordered(cfg)) {
    if (k != "out" && k != "workers") kv[k] = v;
  }
  return kv;
}

}  // namespace divprog::cli
