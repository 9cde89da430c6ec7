// Command-line front end and the pieces shared with the REPL: running one
// parsed command, rendering results as text or JSON, and the study report.

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mixcheck/core.hpp"
#include "mixcheck/parser.hpp"
#include "mixcheck/predgen.hpp"

namespace mixcheck {

struct RunOptions {
  bool json = false;
  bool trace = false;
  bool allow_frame = true;
  bool open_tail = false;
  int budget = 4;
};

struct StudyRow {
  std::string name;
  int total = 0;
  int verified = 0;
  std::string error;  // non-empty for a file or command that failed
  std::vector<std::string> lines;  // "X is SUPERTYPE of Y" per pair
};

/// round(100 * verified / total); empty when total is 0.
std::optional<int> percentage(int verified, int total);

struct StudyReport {
  std::vector<StudyRow> rows;

  StudyRow totals() const;
};

std::string render_text(const StudyReport& r);
/// The `study` object of the JSON output, serialized.
std::string render_json(const StudyReport& r);

struct QueryResult {
  std::string kind;  // "entail", "subtype", "lin", "study"
  std::string input;
  std::string verdict;  // "Valid", "NotProven", "Error", or "Done" for lin
  std::optional<std::string> residue;
  std::vector<std::string> trace;
  std::vector<std::string> order;  // lin only
  std::optional<StudyReport> study;
  std::string error;

  bool not_proven() const { return verdict == "NotProven"; }
  bool is_error() const { return verdict == "Error"; }
};

/// Runs one command; engine errors become an "Error" verdict.
QueryResult run_command(const Program& p, const PredEnv& env, const Command& c, const RunOptions& opts);

/// Human-readable rendering of one result, newline-terminated.
std::string render_text(const QueryResult& q, bool trace);

/// `{version, queries[, study]}` with the results in order.
std::string render_json(const std::vector<QueryResult>& qs, const StudyReport* study = nullptr);

/// Study rows for every `study` command of every file; unreadable or
/// ill-formed files give an error row.
StudyReport study(const std::vector<std::string>& files, const RunOptions& opts);

/// Entry point. Exit status: 0 all checks pass, 1 some check is not
/// proven, 2 usage, input or engine error.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace mixcheck
