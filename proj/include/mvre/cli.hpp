#pragma once

// Command-line front end: dataset and trace file formats, result writers,
// run manifests, and the fit / simulate / diagnose / replay commands.

#include "mvre/core.hpp"
#include "mvre/study.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace mvre::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Reads either `study,x1,x2,sd1,rho12,sd2` or `study,x1..xp,u11,u21,u22,...`
/// (lower triangle, row-major). Blank lines and lines starting with '#' are
/// skipped. Throws Error(ParseError) with the 1-based line in index().
std::vector<RawStudy> parse_dataset_csv(std::istream& in, const std::string& source);
Dataset load_dataset(const std::filesystem::path& path);

/// One row per retained draw: chain, iter, mu_1..mu_p, vech(Psi).
void write_traces_csv(std::ostream& out, const ChainSet& set);
/// Inverse of write_traces_csv. Chains are renumbered in order of appearance.
ChainSet parse_traces_csv(std::istream& in, const std::string& source);
/// Appends the chains of every set; throws Error(DimensionMismatch) when the
/// dimensions or chain lengths differ.
ChainSet merge_chain_sets(const std::vector<ChainSet>& sets);

void write_summary_csv(std::ostream& out, const EmpiricalResult& result);
void write_summary_json(std::ostream& out, const EmpiricalResult& result, const EmpiricalOptions& options);
void write_rank_histograms_csv(std::ostream& out, const EmpiricalResult& result);
void write_kde_csv(std::ostream& out, const EmpiricalResult& result);
/// Long format: tau2,parameter,metric,value,mc_se
void write_study_csv(std::ostream& out, const std::vector<StudyCell>& cells);

/// Flat `key = value` lines; '#' starts a comment. Throws Error(ParseError).
std::map<std::string, std::string> parse_config(std::istream& in, const std::string& source);

/// Replaces `--config FILE` with `--key value` pairs for every key not
/// already given on the command line, inserted right after the subcommand.
std::vector<std::string> expand_config(const std::vector<std::string>& args);

/// Runs the command line (args[0] is the program name). Returns the exit
/// code: 0 on success, 2 for usage, parse and validation errors, 1 otherwise.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mvre::cli
