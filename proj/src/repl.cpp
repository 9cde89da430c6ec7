#include "mixcheck/repl.hpp"

#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

#include "mixcheck/parser.hpp"
#include "mixcheck/predgen.hpp"

namespace mixcheck {

namespace {

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

}  // namespace

std::size_t Session::state_hash() const {
  return std::hash<std::string>{}(to_string(program_)) ^ (std::hash<int>{}(opts_.budget) * 31);
}

Session::Output Session::meta(const std::string& line) {
  Output o;
  std::istringstream is(line);
  std::string cmd;
  is >> cmd;
  if (cmd == ":quit" || cmd == ":q") {
    o.quit = true;
  } else if (cmd == ":reset") {
    program_ = Program{};
    o.text = "session cleared\n";
  } else if (cmd == ":budget") {
    int n = -1;
    std::string extra;
    if (!(is >> n) || n < 0 || (is >> extra)) {
      o.error = true;
      o.text = "error: usage: :budget N (N >= 0)\n";
    } else {
      opts_.budget = n;
      o.text = "budget " + std::to_string(n) + "\n";
    }
  } else if (cmd == ":dump") {
    o.text = to_string(program_);
  } else {
    o.error = true;
    o.text = "error: unknown command '" + cmd + "' (try :quit, :reset, :budget N, :dump)\n";
  }
  return o;
}

Session::Output Session::eval_line(const std::string& raw) {
  const std::string line = trim(raw);
  Output o;
  if (line.empty()) return o;
  if (line[0] == ':') {
    o = meta(line);
  } else {
    ParseResult r = parse_program(line, program_, "<repl>");
    if (!r.ok()) {
      o.error = true;
      for (const auto& d : r.diagnostics) o.text += format_diagnostic(d) + "\n";
    } else {
      program_ = std::move(r.program);
      if (!r.commands.empty()) {
        PredEnv env(program_);
        for (const auto& c : r.commands) {
          QueryResult q = run_command(program_, env, c, opts_);
          o.error = o.error || q.is_error();
          o.results.push_back(std::move(q));
        }
        if (opts_.json) {
          o.text = render_json(o.results) + "\n";
        } else {
          for (const auto& q : o.results) o.text += render_text(q, opts_.trace);
        }
      }
    }
  }
  history_.emplace_back(line, o.text);
  return o;
}

int run_repl(std::istream& in, std::ostream& out, Session& s) {
  int status = 0;
  std::string line;
  for (;;) {
    out << kPrompt << std::flush;
    if (!std::getline(in, line)) {
      out << "\n";
      break;
    }
    Session::Output o = s.eval_line(line);
    out << o.text << std::flush;
    if (o.error) status = 2;
    for (const auto& q : o.results)
      if (q.not_proven() && status == 0) status = 1;
    if (o.quit) break;
  }
  return status;
}

}  // namespace mixcheck
