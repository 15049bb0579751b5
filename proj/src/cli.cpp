#include "mvre/cli.hpp"

#include "mvre/diagnostics.hpp"
#include "mvre/linalg.hpp"
#include "mvre/model.hpp"
#include "mvre/sampler.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace mvre::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void parse_fail(const std::string& source, std::size_t line, const std::string& msg) {
  throw Error(ErrorCode::ParseError, source + ":" + std::to_string(line) + ": " + msg, line);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool skip_line(const std::string& line) {
  const std::string t = trim(line);
  return t.empty() || t.front() == '#';
}

double parse_number(const std::string& field, const std::string& source, std::size_t line) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || field.empty() || !std::isfinite(v)) {
    parse_fail(source, line, "not a finite number: '" + field + "'");
  }
  return v;
}

long parse_integer(const std::string& field, const std::string& source, std::size_t line) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    parse_fail(source, line, "not an integer: '" + field + "'");
  }
  return v;
}

std::vector<std::string> generic_header(int p) {
  std::vector<std::string> h{"study"};
  for (int i = 1; i <= p; ++i) h.push_back("x" + std::to_string(i));
  for (int i = 1; i <= p; ++i) {
    for (int j = 1; j <= i; ++j) h.push_back("u" + std::to_string(i) + std::to_string(j));
  }
  return h;
}

std::vector<std::string> trace_header(int p) {
  std::vector<std::string> h{"chain", "iter"};
  for (const std::string& name : parameter_names(p)) h.push_back(name);
  return h;
}

template <class Fn>
void write_file(const fs::path& path, Fn&& fn) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidConfig, "cannot write " + path.string());
  fn(f);
  if (!f) throw Error(ErrorCode::InvalidConfig, "failed writing " + path.string());
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::vector<RawStudy> parse_dataset_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    header = split_csv(line);
    for (std::string& h : header) std::transform(h.begin(), h.end(), h.begin(), ::tolower);
    break;
  }
  if (header.empty()) parse_fail(source, line_no, "missing header");

  const bool sd_format = header == std::vector<std::string>{"study", "x1", "x2", "sd1", "rho12", "sd2"};
  int p = 0;
  if (!sd_format) {
    p = static_cast<int>(std::count_if(header.begin(), header.end(), [](const std::string& h) {
      return h.size() > 1 && h.front() == 'x';
    }));
    if (p < 1 || header != generic_header(p)) {
      parse_fail(source, line_no, "unrecognized header; expected study,x1,x2,sd1,rho12,sd2 or study,x1..xp,u11,u21,u22,...");
    }
  }

  std::vector<RawStudy> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != header.size()) {
      parse_fail(source, line_no,
                 "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
    }
    if (fields[0].empty()) parse_fail(source, line_no, "empty study label");
    std::vector<double> v;
    for (std::size_t k = 1; k < fields.size(); ++k) v.push_back(parse_number(fields[k], source, line_no));
    if (sd_format) {
      if (v[2] <= 0.0 || v[4] <= 0.0) parse_fail(source, line_no, "standard deviations must be positive");
      records.push_back(raw_from_sd_corr(fields[0], v[0], v[1], v[2], v[3], v[4]));
    } else {
      RawStudy r;
      r.label = fields[0];
      r.x.assign(v.begin(), v.begin() + p);
      r.cov_lower.assign(v.begin() + p, v.end());
      records.push_back(std::move(r));
    }
  }
  if (records.empty()) parse_fail(source, line_no, "no study records");
  return records;
}

Dataset load_dataset(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::ParseError, "cannot open dataset " + path.string());
  return validate_dataset(parse_dataset_csv(f, path.string()));
}

void write_traces_csv(std::ostream& out, const ChainSet& set) {
  const std::vector<std::string> header = trace_header(set.p);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  const int count = parameter_count(set.p);
  const long thin = std::max(set.config.thin, 1);
  for (std::size_t c = 0; c < set.chains.size(); ++c) {
    const auto& draws = set.chains[c].draws;
    for (std::size_t i = 0; i < draws.size(); ++i) {
      out << c + 1 << ',' << set.config.burn_in + 1 + static_cast<long>(i) * thin;
      for (int k = 0; k < count; ++k) out << ',' << format_number(parameter_value(draws[i].mu, draws[i].psi, k));
      out << '\n';
    }
  }
}

ChainSet parse_traces_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    header = split_csv(line);
    break;
  }
  if (header.size() < 3) parse_fail(source, line_no, "missing or short trace header");
  const int p = static_cast<int>(std::count_if(header.begin(), header.end(),
                                               [](const std::string& h) { return h.starts_with("mu_"); }));
  if (p < 1 || p > kMaxDim || header != trace_header(p)) parse_fail(source, line_no, "unrecognized trace header");

  ChainSet set;
  set.p = p;
  std::vector<long> ids;
  const int count = parameter_count(p);
  const DenseMatrix dup = duplication_matrix(p);
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != header.size()) parse_fail(source, line_no, "wrong number of fields");
    const long id = parse_integer(fields[0], source, line_no);
    parse_integer(fields[1], source, line_no);
    auto it = std::find(ids.begin(), ids.end(), id);
    if (it == ids.end()) {
      ids.push_back(id);
      set.chains.emplace_back();
      it = ids.end() - 1;
    } else if (it != ids.end() - 1) {
      parse_fail(source, line_no, "rows of chain " + std::to_string(id) + " are not contiguous");
    }
    Draw d;
    d.mu.resize(p);
    DenseVector half(count - p);
    for (int k = 0; k < count; ++k) {
      const double v = parse_number(fields[static_cast<std::size_t>(k + 2)], source, line_no);
      if (k < p) {
        d.mu(k) = v;
      } else {
        half(k - p) = v;
      }
    }
    d.psi = unvech(half, p);
    set.chains.back().draws.push_back(std::move(d));
  }
  if (set.chains.empty()) parse_fail(source, line_no, "no trace rows");
  for (const Chain& c : set.chains) {
    if (c.draws.size() != set.chains.front().draws.size()) {
      throw Error(ErrorCode::DimensionMismatch, source + ": chains have different lengths");
    }
  }
  return set;
}

ChainSet merge_chain_sets(const std::vector<ChainSet>& sets) {
  if (sets.empty()) throw Error(ErrorCode::EmptySample, "no trace sets to merge");
  ChainSet out;
  out.p = sets.front().p;
  out.spec = sets.front().spec;
  out.config = sets.front().config;
  for (const ChainSet& s : sets) {
    if (s.p != out.p) throw Error(ErrorCode::DimensionMismatch, "trace files have different dimensions");
    for (const Chain& c : s.chains) {
      if (!out.chains.empty() && c.draws.size() != out.chains.front().draws.size()) {
        throw Error(ErrorCode::DimensionMismatch, "trace files have different chain lengths");
      }
      out.chains.push_back(c);
    }
  }
  return out;
}

void write_summary_csv(std::ostream& out, const EmpiricalResult& result) {
  out << "parameter,mean,median,sd,ci_low,ci_high,rhat\n";
  for (std::size_t k = 0; k < result.summary.size(); ++k) {
    const SummaryRow& r = result.summary[k];
    out << result.parameters[k] << ',' << format_number(r.mean) << ',' << format_number(r.median) << ','
        << format_number(r.sd) << ',' << format_number(r.ci_low) << ',' << format_number(r.ci_high) << ','
        << format_number(r.rhat) << '\n';
  }
}

void write_summary_json(std::ostream& out, const EmpiricalResult& result, const EmpiricalOptions& options) {
  json rows = json::array();
  for (std::size_t k = 0; k < result.summary.size(); ++k) {
    const SummaryRow& r = result.summary[k];
    rows.push_back({{"parameter", result.parameters[k]},
                    {"mean", r.mean},
                    {"median", r.median},
                    {"sd", r.sd},
                    {"ci_low", r.ci_low},
                    {"ci_high", r.ci_high},
                    {"rhat", r.rhat}});
  }
  const json doc{{"alpha", options.alpha},
                 {"mu_beta", options.mu_beta},
                 {"psi_beta", options.psi_beta},
                 {"chains", result.chains.chains.size()},
                 {"draws_per_chain", result.chains.chains.empty() ? 0 : result.chains.chains.front().draws.size()},
                 {"summary", rows}};
  out << doc.dump(2) << '\n';
}

void write_rank_histograms_csv(std::ostream& out, const EmpiricalResult& result) {
  out << "parameter,chain,bin,count\n";
  for (std::size_t k = 0; k < result.rank_histograms.size(); ++k) {
    const auto& per_chain = result.rank_histograms[k];
    for (std::size_t c = 0; c < per_chain.size(); ++c) {
      for (std::size_t b = 0; b < per_chain[c].size(); ++b) {
        out << result.parameters[k] << ',' << c + 1 << ',' << b + 1 << ',' << per_chain[c][b] << '\n';
      }
    }
  }
}

void write_kde_csv(std::ostream& out, const EmpiricalResult& result) {
  out << "parameter,x,density\n";
  for (std::size_t k = 0; k < result.kde.size(); ++k) {
    const KdeCurve& curve = result.kde[k];
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
      out << result.parameters[k] << ',' << format_number(curve.grid[i]) << ',' << format_number(curve.density[i])
          << '\n';
    }
  }
}

void write_study_csv(std::ostream& out, const std::vector<StudyCell>& cells) {
  out << "tau2,parameter,metric,value,mc_se\n";
  for (const StudyCell& c : cells) {
    out << format_number(c.tau2) << ',' << c.parameter << ',' << c.metric << ',' << format_number(c.value) << ','
        << format_number(c.mc_se) << '\n';
  }
}

std::map<std::string, std::string> parse_config(std::istream& in, const std::string& source) {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) parse_fail(source, line_no, "expected key = value");
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) parse_fail(source, line_no, "empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    out[key] = value;
  }
  return out;
}

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[++i];
    } else if (args[i].starts_with("--config=")) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (config_path.empty()) return args;
  std::ifstream f(config_path);
  if (!f) throw Error(ErrorCode::ParseError, "cannot open config file " + config_path);
  const auto entries = parse_config(f, config_path);

  std::set<std::string> given;
  for (const std::string& a : rest) {
    if (!a.starts_with("--")) continue;
    given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
  }
  std::vector<std::string> extra;
  for (const auto& [key, value] : entries) {
    if (given.count(key)) continue;
    extra.push_back("--" + key);
    extra.push_back(value);
  }
  // args: program, subcommand, ...
  std::vector<std::string> out;
  const std::size_t head = std::min<std::size_t>(2, rest.size());
  out.insert(out.end(), rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(head));
  out.insert(out.end(), extra.begin(), extra.end());
  out.insert(out.end(), rest.begin() + static_cast<std::ptrdiff_t>(head), rest.end());
  return out;
}

namespace {

struct SamplerFlags {
  std::string family = "normal";
  double dof = 4.0;
  std::string prior = "jeffreys";
  int chains = 4;
  long length = 0;
  long burnin = 0;
  int thin = 1;
  std::uint64_t seed = 1;
  std::string mode = "standard";
  std::string path = "specialized";

  ModelSpec spec() const {
    ModelSpec s{parse_family(family), dof, parse_prior(prior)};
    s.validate();
    return s;
  }
  SamplerConfig config() const {
    SamplerConfig c;
    c.n_chains = chains;
    c.length = length;
    c.burn_in = burnin;
    c.thin = thin;
    c.seed = seed;
    c.mu_rejection_mode = parse_mu_rejection_mode(mode);
    if (path == "general") {
      c.path = SamplerPath::General;
    } else if (path == "specialized") {
      c.path = SamplerPath::Specialized;
    } else {
      throw Error(ErrorCode::InvalidConfig, "unknown sampler path '" + path + "'");
    }
    c.validate();
    return c;
  }
};

void add_model_flags(CLI::App* cmd, SamplerFlags& f) {
  cmd->add_option("--family", f.family, "normal | t");
  cmd->add_option("--dof", f.dof, "degrees of freedom of the t model");
  cmd->add_option("--prior", f.prior, "jeffreys | reference");
  cmd->add_option("--chains", f.chains, "number of chains");
  cmd->add_option("--length", f.length, "iterations per chain, burn-in included");
  cmd->add_option("--burnin", f.burnin, "iterations discarded at the start of each chain");
  cmd->add_option("--thin", f.thin, "keep every k-th draw after burn-in");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--mode", f.mode, "mu handling on a rejected Psi proposal: standard | literal");
  cmd->add_option("--sampler-path", f.path, "specialized | general");
}

void add_report_flags(CLI::App* cmd, EmpiricalOptions& o) {
  cmd->add_option("--alpha", o.alpha, "credible interval level is 1 - alpha");
  cmd->add_option("--mu-beta", o.mu_beta, "lower tail mass of the mu intervals");
  cmd->add_option("--psi-beta", o.psi_beta, "lower tail mass of the Psi intervals");
  cmd->add_option("--bins", o.rank_bins, "rank histogram bins");
  cmd->add_option("--kde-thin", o.kde_thin, "use every k-th draw for density estimates");
  cmd->add_option("--kde-points", o.kde_points, "density grid size");
}

struct Snapshot {
  json options = json::object();
  json positional = json::array();
};

Snapshot snapshot(const CLI::App* cmd) {
  Snapshot s;
  for (const CLI::Option* opt : cmd->get_options()) {
    if (opt->get_lnames().empty()) {
      if (opt->get_positional()) {
        for (const std::string& r : opt->results()) s.positional.push_back(r);
      }
      continue;
    }
    const std::string& name = opt->get_lnames().front();
    if (name == "help" || name == "config") continue;
    std::string value;
    if (opt->count() > 0) {
      for (const std::string& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    } else {
      value = opt->get_default_str();
    }
    if (!value.empty()) s.options[name] = value;
  }
  return s;
}

void write_manifest(const fs::path& dir, const std::string& command, Snapshot snap, const std::string& started,
                    double seconds, const std::vector<std::string>& outputs, json extra) {
  json doc{{"command", command},
           {"version", kVersion},
           {"options", std::move(snap.options)},
           {"positional", std::move(snap.positional)},
           {"started_utc", started},
           {"elapsed_seconds", seconds},
           {"outputs", outputs}};
  for (auto& [k, v] : extra.items()) doc[k] = v;
  write_file(dir / "manifest.json", [&](std::ostream& f) { f << doc.dump(2) << '\n'; });
}

void write_report(const fs::path& dir, const EmpiricalResult& result, const EmpiricalOptions& options,
                  std::vector<std::string>& outputs) {
  write_file(dir / "summary.csv", [&](std::ostream& f) { write_summary_csv(f, result); });
  write_file(dir / "summary.json", [&](std::ostream& f) { write_summary_json(f, result, options); });
  write_file(dir / "rank_hist.csv", [&](std::ostream& f) { write_rank_histograms_csv(f, result); });
  write_file(dir / "kde.csv", [&](std::ostream& f) { write_kde_csv(f, result); });
  outputs.insert(outputs.end(), {"summary.csv", "summary.json", "rank_hist.csv", "kde.csv"});
}

void print_summary(std::ostream& out, const EmpiricalResult& result) {
  out << "parameter      mean    median        sd    ci_low   ci_high      rhat\n";
  for (std::size_t k = 0; k < result.summary.size(); ++k) {
    const SummaryRow& r = result.summary[k];
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-9s %9.4f %9.4f %9.4f %9.4f %9.4f %9.4f\n", result.parameters[k].c_str(), r.mean,
                  r.median, r.sd, r.ci_low, r.ci_high, r.rhat);
    out << buf;
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Objective Bayesian multivariate random-effects meta-analysis"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // fit
  auto* fit = app.add_subcommand("fit", "sample the posterior for a dataset and write summaries");
  std::string data_path;
  std::string fit_out = "fit_out";
  SamplerFlags fit_flags;
  fit_flags.length = 200000;
  fit_flags.burnin = 100000;
  EmpiricalOptions fit_report;
  fit->add_option("--data", data_path, "dataset CSV")->required();
  add_model_flags(fit, fit_flags);
  add_report_flags(fit, fit_report);
  fit->add_option("--out", fit_out, "output directory");
  fit->add_option("--config", "key = value file; command-line flags win");

  // simulate
  auto* sim = app.add_subcommand("simulate", "run a simulation study and write long-format CSV");
  std::string kind;
  std::vector<double> tau2;
  std::vector<double> betas{0.0001, 0.001, 0.005, 0.01, 0.025, 0.05};
  int reps = 500;
  int sim_p = 2;
  int sim_n = 10;
  double sim_alpha = 0.05;
  std::string redraw = "true";
  std::string sim_out;
  SamplerFlags sim_flags;
  sim_flags.length = 2000;
  sim_flags.burnin = 1000;
  sim->add_option("kind", kind, "coverage | rhat | beta-curve")
      ->required()
      ->check(CLI::IsMember({"coverage", "rhat", "beta-curve"}));
  sim->add_option("--tau2", tau2, "comma-separated grid of tau^2 values")->delimiter(',');
  sim->add_option("--betas", betas, "comma-separated beta values for beta-curve")->delimiter(',');
  sim->add_option("--reps", reps, "repetitions per tau^2");
  sim->add_option("--p", sim_p, "dimension");
  sim->add_option("--n", sim_n, "studies per dataset");
  sim->add_option("--alpha", sim_alpha, "credible interval level is 1 - alpha");
  sim->add_option("--redraw-design", redraw, "redraw mu, Xi and U_i every repetition: true | false");
  add_model_flags(sim, sim_flags);
  sim->add_option("--out", sim_out, "output directory (default: CSV to stdout)");
  sim->add_option("--config", "key = value file; command-line flags win");

  // diagnose
  auto* diag = app.add_subcommand("diagnose", "recompute summaries and diagnostics from trace CSV files");
  std::vector<std::string> trace_files;
  std::string diag_out = "diagnose_out";
  EmpiricalOptions diag_report;
  diag->add_option("traces", trace_files, "trace CSV files written by fit")->required();
  add_report_flags(diag, diag_report);
  diag->add_option("--out", diag_out, "output directory");
  diag->add_option("--config", "key = value file; command-line flags win");

  // replay
  auto* replay = app.add_subcommand("replay", "rerun the command recorded in a manifest");
  std::string manifest_path;
  std::string replay_out;
  replay->add_option("manifest", manifest_path, "manifest.json")->required();
  replay->add_option("--out", replay_out, "output directory (default: the recorded one)");

  try {
    const std::vector<std::string> args = expand_config(raw_args);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();
    app.parse(reversed);

    const auto t0 = std::chrono::steady_clock::now();
    const std::string started = utc_now();

    if (fit->parsed()) {
      const Dataset data = load_dataset(data_path);
      const ModelSpec spec = fit_flags.spec();
      const SamplerConfig config = fit_flags.config();
      const EmpiricalResult result = empirical_analysis(data, spec, config, fit_report);
      const fs::path dir(fit_out);
      fs::create_directories(dir);
      std::vector<std::string> outputs;
      write_file(dir / "traces.csv", [&](std::ostream& f) { write_traces_csv(f, result.chains); });
      outputs.push_back("traces.csv");
      write_report(dir, result, fit_report, outputs);
      Snapshot snap = snapshot(fit);
      snap.options["data"] = fs::absolute(data_path).string();
      snap.options["out"] = fs::absolute(dir).string();
      json chains = json::array();
      for (const Chain& c : result.chains.chains) {
        chains.push_back({{"seed", c.seed}, {"stream", c.stream}, {"acceptance_rate", c.acceptance_rate},
                          {"retained", c.draws.size()}});
      }
      write_manifest(dir, "fit", snap, started, seconds_since(t0), outputs,
                     {{"seed", config.seed}, {"chains", chains}});
      print_summary(out, result);
      out << "wrote " << dir.string() << '\n';
      return 0;
    }

    if (sim->parsed()) {
      SimScenario sc;
      sc.p = sim_p;
      sc.n = sim_n;
      sc.spec = sim_flags.spec();
      sc.reps = reps;
      sc.sampler = sim_flags.config();
      if (redraw != "true" && redraw != "false") throw Error(ErrorCode::InvalidConfig, "--redraw-design is true or false");
      sc.redraw_design = redraw == "true";
      StudyRequest req;
      req.seed = sim_flags.seed;
      req.alpha = sim_alpha;
      if (!tau2.empty()) {
        req.tau2_grid = tau2;
      } else if (kind == "beta-curve") {
        req.tau2_grid = {0.25};
      }
      for (double t : req.tau2_grid) {
        if (!(t > 0.0) || !std::isfinite(t)) throw Error(ErrorCode::InvalidConfig, "tau2 values must be positive");
      }
      std::string metric = kind;
      if (kind == "beta-curve") {
        if (betas.empty()) throw Error(ErrorCode::InvalidConfig, "beta-curve needs --betas");
        req.betas = betas;
        metric = "coverage_beta=";
      }
      std::vector<StudyCell> cells = run_study(sc, req);
      std::erase_if(cells, [&](const StudyCell& c) {
        return metric == "coverage_beta=" ? !c.metric.starts_with(metric) : c.metric != metric;
      });
      if (sim_out.empty()) {
        write_study_csv(out, cells);
        return 0;
      }
      const fs::path dir(sim_out);
      fs::create_directories(dir);
      const std::string name = "simulate_" + kind + ".csv";
      write_file(dir / name, [&](std::ostream& f) { write_study_csv(f, cells); });
      Snapshot snap = snapshot(sim);
      snap.options["out"] = fs::absolute(dir).string();
      write_manifest(dir, "simulate", snap, started, seconds_since(t0), {name}, {{"seed", req.seed}});
      out << "wrote " << (dir / name).string() << '\n';
      return 0;
    }

    if (diag->parsed()) {
      std::vector<ChainSet> sets;
      for (const std::string& path : trace_files) {
        std::ifstream f(path);
        if (!f) throw Error(ErrorCode::ParseError, "cannot open trace file " + path);
        sets.push_back(parse_traces_csv(f, path));
      }
      const EmpiricalResult result = analyze_chains(merge_chain_sets(sets), diag_report);
      const fs::path dir(diag_out);
      fs::create_directories(dir);
      std::vector<std::string> outputs;
      write_report(dir, result, diag_report, outputs);
      Snapshot snap = snapshot(diag);
      snap.positional = json::array();
      for (const std::string& path : trace_files) snap.positional.push_back(fs::absolute(path).string());
      snap.options["out"] = fs::absolute(dir).string();
      write_manifest(dir, "diagnose", snap, started, seconds_since(t0), outputs, json::object());
      print_summary(out, result);
      out << "wrote " << dir.string() << '\n';
      return 0;
    }

    if (replay->parsed()) {
      std::ifstream f(manifest_path);
      if (!f) throw Error(ErrorCode::ParseError, "cannot open manifest " + manifest_path);
      json doc;
      try {
        doc = json::parse(f);
      } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, manifest_path + ": " + e.what());
      }
      if (!doc.contains("command") || !doc.contains("options")) {
        throw Error(ErrorCode::ParseError, manifest_path + ": not a run manifest");
      }
      std::vector<std::string> args{raw_args.empty() ? "mvre" : raw_args.front(), doc["command"].get<std::string>()};
      for (const auto& p : doc.value("positional", json::array())) args.push_back(p.get<std::string>());
      for (const auto& [key, value] : doc["options"].items()) {
        if (key == "out" && !replay_out.empty()) continue;
        args.push_back("--" + key);
        args.push_back(value.get<std::string>());
      }
      if (!replay_out.empty()) {
        args.push_back("--out");
        args.push_back(replay_out);
      }
      return run(args, out, err);
    }
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace mvre::cli
