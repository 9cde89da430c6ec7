// Interactive session: declarations accumulate, commands run against the
// current declarations. A line that fails leaves the session untouched.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mixcheck/cli.hpp"
#include "mixcheck/core.hpp"

namespace mixcheck {

class Session {
 public:
  explicit Session(RunOptions opts = {}) : opts_(opts) {}

  struct Output {
    std::string text;
    std::vector<QueryResult> results;
    bool error = false;
    bool quit = false;
  };

  /// One declaration, command or meta-command (`:quit`, `:reset`,
  /// `:budget N`, `:dump`).
  Output eval_line(const std::string& line);

  const Program& program() const { return program_; }
  int budget() const { return opts_.budget; }
  const std::vector<std::pair<std::string, std::string>>& history() const { return history_; }
  /// Changes whenever the program or the budget changes.
  std::size_t state_hash() const;

 private:
  Output meta(const std::string& line);

  Program program_;
  RunOptions opts_;
  std::vector<std::pair<std::string, std::string>> history_;
};

inline constexpr const char* kPrompt = "mixcheck> ";

/// Reads lines until end of input or `:quit`. Returns 2 if any line failed,
/// else 1 if any query was not proven, else 0.
int run_repl(std::istream& in, std::ostream& out, Session& s);

}  // namespace mixcheck
