#include "runner.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "divprog/errors.hpp"
#include "divprog/stats.hpp"

namespace divprog::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string int128_string(Int128 v) {
  if (v == 0) return "0";
  const bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
  std::string s;
  while (u > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) s.push_back('-');
  return {s.rbegin(), s.rend()};
}

std::uint64_t cap_of(Kind kind) { return kind == Kind::Divisor ? kDivisorCap : kCuspFormCap; }

struct JobResult {
  std::string stem;
  json result;
  std::string table;  // report body for --format csv
  std::vector<std::pair<std::string, std::string>> dumps;
  bool accepted = true;
  std::string summary;
};

struct Job {
  Kind kind = Kind::Divisor;
  std::uint32_t p = 0;
};

class Resources {
 public:
  Resources(const ExperimentConfig& cfg) : cfg_(cfg), w_(cfg.weight()) {}

  const WeightProfile& weight() const { return w_; }

  const TransformInterpolant& transform(Kind kind) {
    auto& slot = transforms_[kind];
    if (!slot) slot = std::make_unique<TransformInterpolant>(kind, w_);
    return *slot;
  }

  void require(Kind kind, std::uint64_t n) {
    auto& need = needs_[kind];
    need = std::max<std::uint64_t>(need, std::min(n, cap_of(kind)));
  }

  void build() {
    for (const auto& [kind, need] : needs_) {
      const std::uint64_t n = std::max<std::uint64_t>(need, 16);
      CoefficientTable t =
          cfg_.cache_dir.empty() ? build_table(kind, n) : load_or_build(cfg_.cache_dir, kind, n);
      caches_.push_back({{"kind", to_string(kind)},
                         {"n_max", t.n_max()},
                         {"checksum", t.checksum()},
                         {"format_version", kCacheFormatVersion}});
      tables_.emplace(kind, std::move(t));
    }
  }

  const CoefficientTable& table(Kind kind) const { return tables_.at(kind); }
  const json& caches() const { return caches_; }

  // Called before any job starts; jobs only read c_f.
  void prepare_rankin(Kind kind) {
    if (kind == Kind::CuspForm && !rankin_) rankin_ = rankin_constant(table(kind), table(kind).n_max());
  }
  double c_f(Kind kind) const { return kind == Kind::CuspForm && rankin_ ? rankin_->c_f : 0.0; }

 private:
  const ExperimentConfig& cfg_;
  WeightProfile w_;
  std::map<Kind, std::unique_ptr<TransformInterpolant>> transforms_;
  std::map<Kind, std::uint64_t> needs_;
  std::map<Kind, CoefficientTable> tables_;
  json caches_ = json::array();
  std::optional<RankinEstimate> rankin_;
};

// Runs f(i) for i < n on `workers` threads; the first failure in index order
// is rethrown after every thread has finished.
template <class F>
void parallel_for(std::size_t n, unsigned workers, F&& f) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned t = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < t; ++k) pool.emplace_back(body);
  body();
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string stem_of(const std::string& base, Kind kind, std::uint32_t p) {
  return base + "_" + std::string(to_string(kind)) + "_p" + std::to_string(p);
}

void check_partition(const ResidueErrorVector& ev) {
  const double d = ev.partition_discrepancy();
  if (!(d <= 1e-9 * std::max(1.0, std::abs(ev.smoothed_total)))) {
    throw NumericIntegrityError("partition identity violated by " + num(d));
  }
  for (std::uint32_t a = 1; a < ev.p; ++a) {
    if (!std::isfinite(ev.E[a])) throw NumericIntegrityError("non-finite E(a)");
  }
}

std::string residue_csv(const ResidueErrorVector& ev) {
  std::ostringstream s;
  s << "p,X,kind,a,S,E\n";
  for (std::uint32_t a = 1; a < ev.p; ++a) {
    s << ev.p << ',' << num(ev.X) << ',' << to_string(ev.kind) << ',' << a << ',' << num(ev.S[a]) << ','
      << num(ev.E[a]) << '\n';
  }
  return s.str();
}

std::string histogram_csv(const Histogram& h) {
  std::ostringstream s;
  write_histogram_csv(s, h);
  return s.str();
}

// --- jobs --------------------------------------------------------------------

JobResult sieve_job(const ExperimentConfig& cfg, Resources& res, Kind kind) {
  const auto& t = res.table(kind);
  JobResult r;
  r.stem = "sieve_" + std::string(to_string(kind));
  std::ostringstream csv;
  if (kind == Kind::Divisor) {
    csv << "n,d\n";
    for (std::uint64_t n = 1; n <= cfg.dump_n; ++n) csv << n << ',' << t.divisor_count(n) << '\n';
  } else {
    csv << "n,tau,rho\n";
    for (std::uint64_t n = 1; n <= cfg.dump_n; ++n) csv << n << ',' << int128_string(t.tau(n)) << ',' << num(t.at(n)) << '\n';
  }
  r.dumps.emplace_back("coefficients_" + std::string(to_string(kind)) + ".csv", csv.str());
  r.result = {{"kind", to_string(kind)}, {"dumped", cfg.dump_n}, {"n_max", t.n_max()}, {"checksum", t.checksum()}};
  r.table = "kind,dumped,n_max,checksum\n" + std::string(to_string(kind)) + "," + std::to_string(cfg.dump_n) + "," +
            std::to_string(t.n_max()) + "," + std::to_string(t.checksum()) + "\n";
  r.summary = "sieve " + std::string(to_string(kind)) + ": " + std::to_string(cfg.dump_n) + " values";
  return r;
}

JobResult selftest_job(Resources& res, Kind kind) {
  const auto& W = res.transform(kind);
  JobResult r;
  r.stem = "bessel_" + std::string(to_string(kind));
  const auto rows = bessel_selftest(W);
  std::ostringstream csv;
  csv << "kind,y,W,bound_check\n";
  std::size_t failures = 0;
  for (const auto& row : rows) {
    csv << to_string(row.kind) << ',' << num(row.y) << ',' << num(row.W) << ',' << (row.bound_check ? 1 : 0) << '\n';
    if (!row.bound_check) ++failures;
  }
  r.dumps.emplace_back("bessel_selftest_" + std::string(to_string(kind)) + ".csv", csv.str());
  const auto pl = plancherel_check(W);
  const auto& cert = W.certificate();
  r.accepted = failures == 0 && pl.diff <= 1e-6;
  r.result = {{"kind", to_string(kind)},
              {"profile", res.weight().name()},
              {"certificate", {{"A", cert.A}, {"C", cert.C}, {"y_max", cert.y_max}}},
              {"y_cut", {{"positive", W.y_cut(+1)}, {"negative", W.y_cut(-1)}}},
              {"plancherel", {{"lhs", pl.lhs}, {"rhs", pl.rhs}, {"diff", pl.diff}}},
              {"rows", rows.size()},
              {"bound_failures", failures}};
  r.table = "kind,rows,bound_failures,plancherel_lhs,plancherel_rhs,plancherel_diff,cert_C\n" +
            std::string(to_string(kind)) + "," + std::to_string(rows.size()) + "," + std::to_string(failures) + "," +
            num(pl.lhs) + "," + num(pl.rhs) + "," + num(pl.diff) + "," + num(cert.C) + "\n";
  r.summary = "bessel-selftest " + std::string(to_string(kind)) + ": " + std::to_string(failures) +
              " bound failures, Plancherel diff " + num(pl.diff);
  return r;
}

JobResult voronoi_job(const ExperimentConfig& cfg, Resources& res, Job job) {
  const auto& t = res.table(job.kind);
  const auto& W = res.transform(job.kind);
  const double X = cfg.window(job.p);
  const auto ev = progression_sums(t, X, job.p, res.weight());
  check_partition(ev);
  const KlTable kl(job.p);
  const std::uint32_t R = std::min<std::uint32_t>(static_cast<std::uint32_t>(cfg.residues), job.p - 1);
  JobResult r;
  r.stem = stem_of("voronoi", job.kind, job.p);
  json rows = json::array();
  std::ostringstream csv;
  csv << "a,lhs,rhs,diff,tail_bound,n_max\n";
  double worst = 0.0;
  for (std::uint32_t j = 0; j < R; ++j) {
    const std::uint64_t a = 1 + static_cast<std::uint64_t>(j) * (job.p - 1) / R;
    const auto v = voronoi_check(ev, W, t, kl, a, cfg.n_max);
    rows.push_back(v);
    csv << a << ',' << num(v.lhs) << ',' << num(v.rhs) << ',' << num(v.diff) << ',' << num(v.tail_bound) << ','
        << v.n_max << '\n';
    worst = std::max(worst, v.diff - v.tail_bound);
    if (!(v.diff <= v.tail_bound + 1e-3)) r.accepted = false;
  }
  r.result = {{"kind", to_string(job.kind)}, {"p", job.p}, {"X", X}, {"Y", ev.Y}, {"tolerance", 1e-3},
              {"max_excess", worst}, {"rows", rows}};
  r.table = csv.str();
  r.summary = "voronoi " + std::string(to_string(job.kind)) + " p=" + std::to_string(job.p) +
              ": max(diff - tail) = " + num(worst) + (r.accepted ? "" : "  [FAIL]");
  return r;
}

JobResult kloosterman_job(const ExperimentConfig& cfg, std::uint32_t p) {
  const KlTable kl(p);
  JobResult r;
  r.stem = "kloosterman_p" + std::to_string(p);
  const auto angles = sato_tate_angles(kl);
  std::ostringstream csv;
  csv << "a,Kl,theta\n";
  double max_abs = 0.0;
  for (std::uint32_t a = 1; a < p; ++a) {
    csv << a << ',' << num(kl[a]) << ',' << num(angles[a - 1]) << '\n';
    max_abs = std::max(max_abs, std::abs(kl[a]));
  }
  if (max_abs > 2.0 + 1e-9) throw NumericIntegrityError("Weil bound violated at p = " + std::to_string(p));
  r.dumps.emplace_back("kl_table_p" + std::to_string(p) + ".csv", csv.str());
  const double ks = ks_statistic(angles, sato_tate_cdf);
  r.result = {{"p", p}, {"max_abs_kl", max_abs}, {"sato_tate_ks", ks}};
  r.table = "p,max_abs_kl,sato_tate_ks,kappa,configuration,A,S,ratio,excluded\n";
  std::string tail = std::to_string(p) + "," + num(max_abs) + "," + num(ks);
  const auto maps = cfg.map_list();
  if (!maps.empty()) {
    const auto s = configuration_sum(std::span<const ProjectiveMap>(maps), kl);
    r.result["configuration_sum"] = s;
    tail += "," + std::to_string(s.kappa) + "," + format_configuration(s.config) + "," + std::to_string(s.a_value) +
            "," + num(s.value) + "," + num(s.ratio) + "," + std::to_string(s.excluded);
  } else {
    tail += ",,,,,,";
  }
  r.table += tail + "\n";
  r.summary = "kloosterman p=" + std::to_string(p) + ": Sato-Tate KS " + num(ks);
  return r;
}

double normalization_for(const ExperimentConfig& cfg, Resources& res, const ResidueErrorVector& ev) {
  const MomentInputs in{ev, res.table(ev.kind), res.transform(ev.kind), res.c_f(ev.kind)};
  return normalization_constant(in, cfg.normalization);
}

JobResult moments_job(const ExperimentConfig& cfg, Resources& res, Job job) {
  const double X = cfg.window(job.p);
  const auto ev = progression_sums(res.table(job.kind), X, job.p, res.weight());
  check_partition(ev);
  const double c = normalization_for(cfg, res, ev);
  const auto rep = moment_report(ev, cfg.kappa_max, c, cfg.normalization);
  JobResult r;
  r.stem = stem_of("moments", job.kind, job.p);
  r.result = rep;
  r.result["main_term"] = ev.main_term;
  r.result["partition_discrepancy"] = ev.partition_discrepancy();
  std::ostringstream csv;
  csv << "kappa,empirical,predicted,normalized,envelope\n";
  for (std::size_t i = 0; i < rep.kappas.size(); ++i) {
    csv << rep.kappas[i] << ',' << num(rep.empirical[i]) << ',' << num(rep.predicted[i]) << ','
        << num(rep.normalized[i]) << ',' << num(rep.envelope[i]) << '\n';
  }
  r.table = csv.str();
  const std::string tag = std::string(to_string(job.kind)) + "_p" + std::to_string(job.p);
  r.dumps.emplace_back("residues_" + tag + ".csv", residue_csv(ev));
  r.dumps.emplace_back("histogram_" + tag + ".csv", histogram_csv(rep.z_summary.histogram));
  r.summary = "moments " + tag + ": c = " + num(c) + ", KS = " + num(rep.z_summary.ks_normal);
  return r;
}

JobResult mixed_job(const ExperimentConfig& cfg, Resources& res, Job job) {
  const double X = cfg.window(job.p);
  const auto& t = res.table(job.kind);
  const auto ev = progression_sums(t, X, job.p, res.weight());
  check_partition(ev);
  const MomentInputs in{ev, t, res.transform(job.kind), res.c_f(job.kind)};
  const double c = normalization_constant(in, cfg.normalization);
  const double ct = correlation_constant(in, cfg.normalization, cfg.gamma);
  const double G = covariance_G(t, res.weight(), cfg.gamma);
  const auto rep = mixed_report(ev, cfg.gamma, cfg.kappa_max, cfg.lambda_max, c, ct, G, cfg.normalization);
  JobResult r;
  r.stem = stem_of("mixed", job.kind, job.p);
  r.result = rep;
  std::ostringstream csv;
  csv << "kappa,lambda,empirical,predicted,normalized\n";
  for (const auto& e : rep.entries) {
    csv << e.kappa << ',' << e.lambda << ',' << num(e.empirical) << ',' << num(e.predicted) << ','
        << num(e.normalized) << '\n';
  }
  r.table = csv.str();
  r.summary = "mixed " + std::string(to_string(job.kind)) + " p=" + std::to_string(job.p) + " gamma=" +
              format_map(cfg.gamma) + ": correlation " + num(rep.empirical_correlation) + ", G " + num(G);
  return r;
}

struct SweepRow {
  std::uint32_t p = 0;
  double X = 0, Y = 0, c = 0, ks = 0;
  std::vector<double> normalized;
};

SweepRow sweep_row(const ExperimentConfig& cfg, Resources& res, Job job) {
  const double X = cfg.window(job.p);
  const auto ev = progression_sums(res.table(job.kind), X, job.p, res.weight());
  check_partition(ev);
  const double c = normalization_for(cfg, res, ev);
  const auto rep = moment_report(ev, cfg.kappa_max, c, cfg.normalization);
  return {job.p, X, ev.Y, c, rep.z_summary.ks_normal, rep.normalized};
}

JobResult sweep_summary(const ExperimentConfig& cfg, Kind kind, const std::vector<SweepRow>& rows) {
  JobResult r;
  r.stem = "clt_sweep_" + std::string(to_string(kind));
  json jr = json::array();
  std::ostringstream csv;
  csv << "p,X,Y,c,ks";
  for (int k = 1; k <= cfg.kappa_max; ++k) csv << ",M" << k;
  csv << '\n';
  bool monotone = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    jr.push_back({{"p", row.p}, {"X", row.X}, {"Y", row.Y}, {"c", row.c}, {"ks", row.ks}, {"normalized", row.normalized}});
    csv << row.p << ',' << num(row.X) << ',' << num(row.Y) << ',' << num(row.c) << ',' << num(row.ks);
    for (double v : row.normalized) csv << ',' << num(v);
    csv << '\n';
    if (i > 0 && row.ks > rows[i - 1].ks) monotone = false;
  }
  r.result = {{"kind", to_string(kind)},
              {"normalization", to_string(cfg.normalization)},
              {"rows", jr},
              {"ks_non_increasing", monotone},
              {"ks_first", rows.empty() ? 0.0 : rows.front().ks},
              {"ks_last", rows.empty() ? 0.0 : rows.back().ks}};
  r.table = csv.str();
  r.summary = "clt-sweep " + std::string(to_string(kind)) + ": KS " + num(rows.front().ks) + " -> " +
              num(rows.back().ks) + (monotone ? " (non-increasing)" : " (not monotone)");
  return r;
}

// --- output ------------------------------------------------------------------

std::string csv_header(const ExperimentConfig& cfg, const Resources& res) {
  std::ostringstream s;
  s << "# schema_version = " << kReportSchemaVersion << '\n';
  s << "# library_version = " << kLibraryVersion << '\n';
  for (const auto& [k, v] : report_config(cfg)) s << "# config." << k << " = " << v << '\n';
  for (const auto& c : res.caches()) {
    s << "# cache." << c["kind"].get<std::string>() << " = n_max:" << c["n_max"] << " checksum:" << c["checksum"]
      << " format:" << c["format_version"] << '\n';
  }
  return s.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << content;
}

void write_results(const ExperimentConfig& cfg, const Resources& res, const std::vector<JobResult>& results,
                   std::ostream& log) {
  const fs::path dir(cfg.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory " + cfg.out + ": " + ec.message());
  const std::string header = csv_header(cfg, res);
  json cfg_json = report_config(cfg);
  for (const auto& r : results) {
    if (cfg.format == "json") {
      json doc = {{"schema_version", kReportSchemaVersion},
                  {"library_version", kLibraryVersion},
                  {"command", cfg.command},
                  {"config", cfg_json},
                  {"caches", res.caches()},
                  {"accepted", r.accepted},
                  {"result", r.result}};
      write_file(dir / (r.stem + ".json"), doc.dump(2) + "\n");
    } else {
      write_file(dir / (r.stem + ".csv"), header + r.table);
    }
    for (const auto& [name, body] : r.dumps) write_file(dir / name, header + body);
    log << r.summary << '\n';
  }
}

}  // namespace

int run(const ExperimentConfig& cfg, std::ostream& log) {
  validate_for_command(cfg);
  Resources res(cfg);
  const auto& w = res.weight();

  std::vector<Job> jobs;
  for (Kind k : cfg.kinds) {
    for (auto p : cfg.primes) jobs.push_back({k, p});
  }

  // Table sizes.
  if (cfg.command == "sieve-dump") {
    for (Kind k : cfg.kinds) res.require(k, cfg.dump_n);
  }
  if (cfg.command == "voronoi-check" || cfg.command == "moments" || cfg.command == "mixed" ||
      cfg.command == "clt-sweep") {
    for (const auto& job : jobs) {
      const double X = cfg.window(job.p);
      const double Y = static_cast<double>(job.p) * job.p / X;
      const auto& W = res.transform(job.kind);
      const double reach = Y * std::max(W.y_cut(+1), W.y_cut(-1));
      res.require(job.kind, static_cast<std::uint64_t>(std::floor(w.w1() * X)));
      if (cfg.command == "voronoi-check") {
        res.require(job.kind, static_cast<std::uint64_t>(std::min(reach, 1e12)));
        res.require(job.kind, static_cast<std::uint64_t>(cfg.n_max));
      } else {
        const bool needs_b = cfg.normalization == Normalization::Empirical || cfg.command == "mixed";
        if (needs_b) res.require(job.kind, static_cast<std::uint64_t>(std::min<double>(reach, (job.p - 1) / 2)));
        if (cfg.normalization == Normalization::Analytic && job.kind == Kind::CuspForm) {
          res.require(job.kind, 200'000);
        }
      }
    }
  }
  res.build();

  std::vector<JobResult> results;
  if (cfg.command == "sieve-dump" || cfg.command == "bessel-selftest") {
    results.resize(cfg.kinds.size());
    for (Kind k : cfg.kinds) res.transform(k);
    parallel_for(cfg.kinds.size(), cfg.workers, [&](std::size_t i) {
      results[i] = cfg.command == "sieve-dump" ? sieve_job(cfg, res, cfg.kinds[i]) : selftest_job(res, cfg.kinds[i]);
    });
  } else if (cfg.command == "kloosterman") {
    results.resize(cfg.primes.size());
    parallel_for(cfg.primes.size(), cfg.workers,
                 [&](std::size_t i) { results[i] = kloosterman_job(cfg, cfg.primes[i]); });
  } else if (cfg.command == "clt-sweep") {
    if (cfg.normalization == Normalization::Analytic) {
      for (Kind k : cfg.kinds) res.prepare_rankin(k);
    }
    std::vector<SweepRow> rows(jobs.size());
    parallel_for(jobs.size(), cfg.workers, [&](std::size_t i) { rows[i] = sweep_row(cfg, res, jobs[i]); });
    std::size_t i = 0;
    for (Kind k : cfg.kinds) {
      std::vector<SweepRow> mine(rows.begin() + static_cast<std::ptrdiff_t>(i),
                                 rows.begin() + static_cast<std::ptrdiff_t>(i + cfg.primes.size()));
      i += cfg.primes.size();
      results.push_back(sweep_summary(cfg, k, mine));
    }
  } else {
    if (cfg.normalization == Normalization::Analytic) {
      for (Kind k : cfg.kinds) res.prepare_rankin(k);
    }
    results.resize(jobs.size());
    parallel_for(jobs.size(), cfg.workers, [&](std::size_t i) {
      if (cfg.command == "voronoi-check") results[i] = voronoi_job(cfg, res, jobs[i]);
      if (cfg.command == "moments") results[i] = moments_job(cfg, res, jobs[i]);
      if (cfg.command == "mixed") results[i] = mixed_job(cfg, res, jobs[i]);
    });
  }
  write_results(cfg, res, results, log);
  for (const auto& r : results) {
    if (!r.accepted) return kExitAcceptance;
  }
  return kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Divisor-function and Hecke-eigenvalue statistics in residue classes modulo primes"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::string config_path;
  bool dump_config = false;
  app.add_option("--config", config_path, "flat key = value configuration file");
  app.add_flag("--dump-config", dump_config, "print the effective configuration and exit");

  struct Flag {
    const char* name;
    const char* key;
    const char* help;
  };
  const std::vector<Flag> flags{
      {"--kind", "kind", "d, f or d,f"},
      {"--prime-range", "prime_range", "lo:hi"},
      {"--x", "x", "explicit window X"},
      {"--phi-c", "phi_c", "Phi(p) = c (log p)^e: c"},
      {"--phi-e", "phi_e", "Phi(p) = c (log p)^e: e"},
      {"--w0", "w0", "weight support start"},
      {"--w1", "w1", "weight support end"},
      {"--profile", "profile", "bump, wide, half, disjoint or custom"},
      {"--gamma", "gamma", "a,b,c,d"},
      {"--kappa-max", "kappa_max", "largest kappa"},
      {"--lambda-max", "lambda_max", "largest lambda"},
      {"--normalization", "normalization", "empirical or analytic"},
      {"--residues", "residues", "residues per voronoi-check job"},
      {"--n-max", "n_max", "voronoi truncation (0 = automatic)"},
      {"--dump-n", "dump_n", "sieve-dump length"},
      {"--maps", "maps", "kloosterman map tuple a,b,c,d;..."},
      {"--out", "out", "output directory"},
      {"--workers", "workers", "worker threads"},
      {"--format", "format", "csv or json"},
      {"--cache-dir", "cache_dir", "coefficient cache directory"},
  };
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  for (const auto& f : flags) options[f.key] = app.add_option(f.name, values[f.key], f.help);
  std::vector<std::string> prime_flags;
  auto* prime_opt = app.add_option("--prime", prime_flags, "prime modulus (repeatable, or a comma list)");

  for (const char* name : {"sieve-dump", "bessel-selftest", "voronoi-check", "kloosterman", "moments", "mixed",
                           "clt-sweep"}) {
    app.add_subcommand(name);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    KeyValues kv;
    if (!config_path.empty()) kv = read_config_file(config_path);
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) kv[key] = values[key];
    }
    if (prime_opt->count() > 0) {
      std::string joined;
      for (const auto& p : prime_flags) joined += (joined.empty() ? "" : ",") + p;
      kv["primes"] = joined;
      kv.erase("prime_range");
    }
    if (options["prime_range"]->count() > 0 && prime_opt->count() == 0) kv.erase("primes");
    const auto subs = app.get_subcommands();
    if (!subs.empty()) kv["command"] = subs.front()->get_name();

    const ExperimentConfig cfg = build_config(kv);
    if (dump_config) {
      out << emit_config(cfg);
      return kExitOk;
    }
    if (cfg.command.empty()) throw ValidationError("no command given");
    return run(cfg, out);
  } catch (const CapacityError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const QuadratureError& e) {
    err << "numeric error: " << e.what() << " (achieved " << e.achieved_error() << ")\n";
    return kExitNumeric;
  } catch (const NumericIntegrityError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitNumeric;
  }
}

}  // namespace divprog::cli
