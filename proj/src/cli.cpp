#include "mixcheck/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "mixcheck/entail.hpp"
#include "mixcheck/linearizer.hpp"
#include "mixcheck/repl.hpp"
#include "mixcheck/subtype.hpp"

namespace mixcheck {

using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "mixcheck-1";

std::string pct_text(const StudyRow& r) {
  auto p = percentage(r.verified, r.total);
  return p ? std::to_string(*p) : "—";
}

// Display width, counting each UTF-8 sequence once.
std::size_t width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

std::string pad(const std::string& s, std::size_t w, bool right) {
  std::string fill(w > width(s) ? w - width(s) : 0, ' ');
  return right ? fill + s : s + fill;
}

json row_json(const StudyRow& r) {
  json j;
  j["name"] = r.name;
  j["total"] = r.total;
  j["verified"] = r.verified;
  auto p = percentage(r.verified, r.total);
  j["percentage"] = p ? json(*p) : json(nullptr);
  if (!r.error.empty()) j["error"] = r.error;
  if (!r.lines.empty()) j["lines"] = r.lines;
  return j;
}

json study_json(const StudyReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) rows.push_back(row_json(row));
  return json{{"rows", rows}, {"totals", row_json(r.totals())}};
}

json query_json(const QueryResult& q) {
  json j;
  j["kind"] = q.kind;
  j["input"] = q.input;
  j["verdict"] = q.verdict;
  if (q.residue) j["residue"] = *q.residue;
  if (!q.trace.empty()) j["trace"] = q.trace;
  if (!q.order.empty()) {
    j["order"] = q.order;
    j["arrow"] = arrow_string(Linearization{Ident(q.order.front()), [&] {
                                              std::vector<Ident> o;
                                              for (const auto& n : q.order) o.emplace_back(n);
                                              return o;
                                            }()});
  }
  if (q.study) j["study"] = study_json(*q.study);
  if (!q.error.empty()) j["error"] = q.error;
  return j;
}

std::string verdict_text(const std::string& v) {
  if (v == "Valid") return "Valid";
  if (v == "NotProven") return "Invalid (not proven)";
  return v;
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return std::nullopt;
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

QueryResult from_study(const Program& p, const Study& s, const RunOptions& opts) {
  QueryResult q;
  q.kind = "study";
  std::vector<std::pair<TypeExpr, TypeExpr>> pairs;
  for (const auto& [sub, super] : s.pairs) pairs.emplace_back(super, sub);
  StudyRow row{s.label, static_cast<int>(pairs.size()), 0, {}, {}};
  bool failed = false;
  for (const auto& e : supertype_report(p, pairs, SubtypeOptions{opts.open_tail, opts.budget, opts.allow_frame})) {
    row.lines.push_back(e.line());
    if (!e.verdict) {
      failed = true;
      if (row.error.empty()) row.error = e.error;
    } else if (e.verdict->yes()) {
      row.verified++;
    }
  }
  q.verdict = failed ? "Error" : row.verified == row.total ? "Valid" : "NotProven";
  q.error = row.error;
  q.study = StudyReport{{row}};
  return q;
}

}  // namespace

std::optional<int> percentage(int verified, int total) {
  if (total <= 0) return std::nullopt;
  return (200 * verified + total) / (2 * total);
}

StudyRow StudyReport::totals() const {
  StudyRow t{"Total", 0, 0, {}, {}};
  for (const auto& r : rows) {
    t.total += r.total;
    t.verified += r.verified;
  }
  return t;
}

std::string render_text(const StudyReport& r) {
  const std::vector<std::string> head{"Class Hierarchy", "Total Num of Mixins", "Mixins with Subtyping", "Percentage"};
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> errors;
  auto add = [&](const StudyRow& row) {
    cells.push_back({row.name, std::to_string(row.total), std::to_string(row.verified), pct_text(row)});
    if (!row.error.empty()) errors.push_back(row.name + ": " + row.error);
  };
  for (const auto& row : r.rows) add(row);
  add(r.totals());
  std::vector<std::size_t> w(head.size());
  for (std::size_t c = 0; c < head.size(); ++c) {
    w[c] = width(head[c]);
    for (const auto& row : cells) w[c] = std::max(w[c], width(row[c]));
  }
  auto line = [&](const std::vector<std::string>& row) {
    std::string out;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += "  ";
      out += pad(row[c], w[c], c > 0);
    }
    return out + "\n";
  };
  std::string out;
  for (const auto& row : r.rows)
    for (const auto& l : row.lines) out += l + "\n";
  if (!out.empty()) out += "\n";
  out += line(head);
  std::size_t total_w = 0;
  for (auto x : w) total_w += x;
  const std::string rule(total_w + 2 * (w.size() - 1), '-');
  out += rule + "\n";
  for (std::size_t i = 0; i + 1 < cells.size(); ++i) out += line(cells[i]);
  out += rule + "\n";
  out += line(cells.back());
  for (const auto& e : errors) out += "error: " + e + "\n";
  return out;
}

std::string render_json(const StudyReport& r) { return study_json(r).dump(2); }

QueryResult run_command(const Program& p, const PredEnv& env, const Command& c, const RunOptions& opts) {
  QueryResult q;
  q.input = command_source(c).empty() ? to_string(c) : command_source(c);
  try {
    if (const auto* e = std::get_if<CheckEntail>(&c)) {
      q.kind = "entail";
      EntailResult r = check_entail(env, e->ante, e->conseq, EntailOptions{opts.budget, opts.allow_frame});
      q.verdict = to_string(r.verdict);
      if (r.residue) q.residue = to_string(*r.residue);
      if (opts.trace) q.trace = r.trace;
    } else if (const auto* s = std::get_if<CheckSubtype>(&c)) {
      q.kind = "subtype";
      SubtypeVerdict v = is_subtype(p, env, s->sub, s->super, SubtypeOptions{opts.open_tail, opts.budget, opts.allow_frame});
      q.verdict = to_string(v.result.verdict);
      if (v.result.residue) q.residue = to_string(*v.result.residue);
      if (opts.trace) {
        q.trace.push_back("QUERY " + v.query());
        q.trace.insert(q.trace.end(), v.result.trace.begin(), v.result.trace.end());
      }
    } else if (const auto* l = std::get_if<Linearize>(&c)) {
      q.kind = "lin";
      for (const auto& n : linearize(p, l->name).order) q.order.push_back(n.str());
      q.verdict = "Done";
    } else {
      QueryResult s = from_study(p, std::get<Study>(c), opts);
      s.input = q.input;
      return s;
    }
  } catch (const Error& e) {
    q.verdict = "Error";
    q.error = e.what();
  }
  return q;
}

std::string render_text(const QueryResult& q, bool trace) {
  std::string out;
  if (q.kind == "lin" && !q.is_error()) {
    for (std::size_t i = 0; i < q.order.size(); ++i) out += (i ? " ← " : "") + q.order[i];
    return out + "\n";
  }
  if (q.kind == "study" && q.study) {
    out = render_text(*q.study);
    return out;
  }
  out += q.input + "\n";
  if (q.is_error()) return out + "  error: " + q.error + "\n";
  out += "  " + verdict_text(q.verdict) + "\n";
  if (q.residue) out += "  residue: " + *q.residue + "\n";
  if (trace)
    for (std::size_t i = 0; i < q.trace.size(); ++i) out += "  " + std::to_string(i + 1) + ". " + q.trace[i] + "\n";
  return out;
}

std::string render_json(const std::vector<QueryResult>& qs, const StudyReport* study) {
  json doc;
  doc["version"] = kVersion;
  doc["queries"] = json::array();
  for (const auto& q : qs) doc["queries"].push_back(query_json(q));
  if (study) doc["study"] = study_json(*study);
  return doc.dump(2);
}

StudyReport study(const std::vector<std::string>& files, const RunOptions& opts) {
  StudyReport rep;
  for (const auto& f : files) {
    auto text = read_file(f);
    if (!text) {
      rep.rows.push_back({f, 0, 0, "cannot read file", {}});
      continue;
    }
    ParseResult r = parse_program(*text, f);
    if (!r.ok()) {
      rep.rows.push_back({f, 0, 0, format_diagnostic(r.diagnostics.front()), {}});
      continue;
    }
    bool any = false;
    for (const auto& c : r.commands) {
      if (const auto* s = std::get_if<Study>(&c)) {
        any = true;
        rep.rows.push_back(from_study(r.program, *s, opts).study->rows.front());
      }
    }
    if (!any) rep.rows.push_back({f, 0, 0, "no study command", {}});
  }
  return rep;
}

namespace {

struct Loaded {
  ParseResult parsed;
  bool ok = false;
};

Loaded load(const std::string& file, std::ostream& err) {
  Loaded l;
  auto text = read_file(file);
  if (!text) {
    err << "error: cannot read '" << file << "'\n";
    return l;
  }
  l.parsed = parse_program(*text, file);
  if (!l.parsed.ok()) {
    for (const auto& d : l.parsed.diagnostics) err << format_diagnostic(d) << "\n";
    return l;
  }
  l.ok = true;
  return l;
}

int emit(const std::vector<QueryResult>& qs, const RunOptions& opts, std::ostream& out) {
  int status = 0;
  for (const auto& q : qs) {
    if (q.is_error()) status = 2;
    else if (q.not_proven() && status == 0) status = 1;
  }
  if (opts.json) {
    out << render_json(qs) << "\n";
  } else {
    for (const auto& q : qs) out << render_text(q, opts.trace);
  }
  return status;
}

}  // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Checks subtyping of trait and mixin compositions by separation-logic entailment."};
  app.name("mixcheck");
  RunOptions opts;
  bool no_frame = false;
  app.add_flag("--json", opts.json, "Machine-readable output");
  app.add_flag("--trace", opts.trace, "Print proof steps");
  app.add_option("--budget", opts.budget, "Unfolding budget (default 4)")
      ->envname("MIXCHECK_BUDGET")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--no-frame", no_frame, "Reject entailments that leave a residue heap");
  app.add_flag("--open-tail", opts.open_tail, "Let a supertype chain be a prefix of the subtype chain");
  app.require_subcommand(1);

  std::string file, name, query, sub, super;
  std::vector<std::string> files;
  auto* check = app.add_subcommand("check", "Run every command in FILE");
  check->add_option("FILE", file)->required();
  auto* lin = app.add_subcommand("lin", "Print the linearization of NAME");
  lin->add_option("FILE", file)->required();
  lin->add_option("NAME", name)->required();
  auto* entail = app.add_subcommand("entail", "Check the entailments in FILE, or QUERY (ANTE |- CONSEQ) against it");
  entail->add_option("FILE", file)->required();
  entail->add_option("QUERY", query);
  auto* subtype = app.add_subcommand("subtype", "Check SUB <: SUPER");
  subtype->add_option("FILE", file)->required();
  subtype->add_option("SUB", sub)->required();
  subtype->add_option("SUPER", super)->required();
  auto* stud = app.add_subcommand("study", "Report verified mixins per hierarchy");
  stud->add_option("FILE", files);
  auto* repl = app.add_subcommand("repl", "Interactive session, optionally preloaded with FILE");
  repl->add_option("FILE", file);
  auto* preds = app.add_subcommand("preds", "Print the predicates generated for FILE");
  preds->add_option("FILE", file)->required();
  for (auto* s : {check, lin, entail, subtype, stud, repl, preds}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }
  opts.allow_frame = !no_frame;

  try {
    if (*stud) {
      StudyReport rep = study(files, opts);
      if (opts.json) out << render_json({}, &rep) << "\n";
      else out << render_text(rep);
      for (const auto& r : rep.rows)
        if (!r.error.empty()) return 2;
      return 0;
    }

    if (*repl) {
      Session s(opts);
      if (!file.empty()) {
        auto text = read_file(file);
        if (!text) {
          err << "error: cannot read '" << file << "'\n";
          return 2;
        }
        Session::Output o = s.eval_line(*text);
        out << o.text;
        if (o.error) return 2;
      }
      return run_repl(in, out, s);
    }

    Loaded l = load(file, err);
    if (!l.ok) return 2;
    const Program& p = l.parsed.program;
    PredEnv env(p);

    if (*preds) {
      std::vector<PredDef> gs = generated_preds(p);
      if (opts.json) {
        json doc{{"version", kVersion}, {"preds", json::array()}};
        for (const auto& g : gs) doc["preds"].push_back(to_string(g));
        out << doc.dump(2) << "\n";
      } else {
        for (const auto& g : gs) out << to_string(g) << "\n";
      }
      return 0;
    }

    std::vector<Command> cmds;
    if (*check) {
      cmds = l.parsed.commands;
    } else if (*lin) {
      cmds.push_back(Linearize{Ident(name), {}, "lin " + name + "."});
      if (!p.find_trait(name) && !p.find_class(name)) {
        err << "error: '" << name << "' is not a declared trait or class\n";
        return 2;
      }
    } else if (*entail) {
      if (query.empty()) {
        for (const auto& c : l.parsed.commands)
          if (std::holds_alternative<CheckEntail>(c)) cmds.push_back(c);
      } else {
        std::string text = query;
        if (text.rfind("checkentail", 0) != 0) text = "checkentail " + text;
        if (text.find_last_not_of(" \t\n") == std::string::npos || text[text.find_last_not_of(" \t\n")] != '.')
          text += ".";
        ParseResult r = parse_program(text, p, "<query>");
        if (!r.ok()) {
          for (const auto& d : r.diagnostics) err << format_diagnostic(d) << "\n";
          return 2;
        }
        if (r.commands.size() != 1 || !std::holds_alternative<CheckEntail>(r.commands.front()) ||
            r.program.decls().size() != p.decls().size()) {
          err << "error: QUERY must be a single entailment ANTE |- CONSEQ\n";
          return 2;
        }
        cmds = r.commands;
      }
    } else if (*subtype) {
      TypeExpr a = parse_type_expr(sub), b = parse_type_expr(super);
      for (const auto* t : {&a, &b}) {
        auto ds = well_formed_type(p, *t, SourceSpan{"<args>", 1, 1, 1, 1});
        if (!ds.empty()) {
          err << "error: " << ds.front().message << "\n";
          return 2;
        }
      }
      cmds.push_back(CheckSubtype{a, b, {}, "subtype (" + to_string(a) + ") <: (" + to_string(b) + ")."});
    }

    std::vector<QueryResult> qs;
    for (const auto& c : cmds) qs.push_back(run_command(p, env, c, opts));
    return emit(qs, opts, out);
  } catch (const ParseError& e) {
    for (const auto& d : e.diagnostics()) err << format_diagnostic(d) << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace mixcheck
