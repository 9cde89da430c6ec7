#include "mixcheck/parser.hpp"

#include <cctype>
#include <optional>

#include "mixcheck/entail.hpp"

namespace mixcheck {

namespace {

enum class Tok { Ident, Keyword, Int, String, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::uint64_t id = 0;  // for fresh identifiers `name#id`
  std::int64_t value = 0;
  int line = 1, col = 1, end_line = 1, end_col = 1;
  std::size_t begin = 0, end = 0;
};

const char* const kKeywords[] = {"data",        "pred",    "trait", "class", "extends", "with",   "interface", "inv",
                                 "checkentail", "subtype", "lin",   "study", "exists",  "emp",    "null",      "true",
                                 "false"};

bool is_keyword(const std::string& s) {
  for (const char* k : kKeywords)
    if (s == k) return true;
  return false;
}

struct Failure {
  Diagnostic diag;
};

class Lexer {
 public:
  Lexer(std::string_view text, std::string file) : text_(text), file_(std::move(file)) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.line = line_;
      t.col = col_;
      t.begin = pos_;
      if (pos_ >= text_.size()) {
        t.kind = Tok::End;
        t.end = pos_;
        t.end_line = line_;
        t.end_col = col_;
        out.push_back(t);
        return out;
      }
      char c = text_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || (c == '_' && ident_char(peek(1)))) {
        lex_ident(t);
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        lex_int(t);
      } else if (c == '"') {
        lex_string(t);
      } else {
        lex_punct(t);
      }
      t.end = pos_;
      t.end_line = line_;
      t.end_col = col_;
      out.push_back(std::move(t));
    }
  }

 private:
  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }

  char peek(std::size_t k = 0) const { return pos_ + k < text_.size() ? text_[pos_ + k] : '\0'; }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  [[noreturn]] void fail(const std::string& msg, int line, int col) {
    throw Failure{{SourceSpan{file_, line, col, line_, col_}, msg}};
  }

  void skip_space() {
    for (;;) {
      if (pos_ >= text_.size()) return;
      char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (c == '/' && peek(1) == '*') {
        int l = line_, k = col_;
        advance();
        advance();
        while (pos_ < text_.size() && !(text_[pos_] == '*' && peek(1) == '/')) advance();
        if (pos_ >= text_.size()) fail("unterminated comment", l, k);
        advance();
        advance();
      } else {
        return;
      }
    }
  }

  void lex_ident(Token& t) {
    std::size_t start = pos_;
    while (pos_ < text_.size() && ident_char(text_[pos_])) advance();
    t.text = std::string(text_.substr(start, pos_ - start));
    if (peek() == '#' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      advance();
      std::size_t ds = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance();
      try {
        t.id = std::stoull(std::string(text_.substr(ds, pos_ - ds)));
      } catch (const std::exception&) {
        fail("identifier number out of range", t.line, t.col);
      }
      if (t.id == 0) fail("identifier number must be positive", t.line, t.col);
      t.kind = Tok::Ident;
      return;
    }
    t.kind = is_keyword(t.text) ? Tok::Keyword : Tok::Ident;
  }

  void lex_int(Token& t) {
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance();
    t.text = std::string(text_.substr(start, pos_ - start));
    if (t.text.size() > 12) fail("integer literal too large", t.line, t.col);
    t.value = std::stoll(t.text);
    t.kind = Tok::Int;
  }

  void lex_string(Token& t) {
    advance();
    std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '"' && text_[pos_] != '\n') advance();
    if (peek() != '"') fail("unterminated string", t.line, t.col);
    t.text = std::string(text_.substr(start, pos_ - start));
    advance();
    t.kind = Tok::String;
  }

  void lex_punct(Token& t) {
    static const char* const two[] = {"::", "<:", "<=", ">=", "!=", "==", "|-", "\\/"};
    for (const char* p : two) {
      if (peek() == p[0] && peek(1) == p[1]) {
        t.text = p;
        t.kind = Tok::Punct;
        advance();
        advance();
        return;
      }
    }
    static const std::string one = "<>,.{};*&=+-():_";
    char c = peek();
    if (one.find(c) == std::string::npos) {
      std::string shown = std::isprint(static_cast<unsigned char>(c)) ? std::string(1, c) : "\\x" + std::to_string(static_cast<unsigned char>(c));
      fail("unexpected character '" + shown + "'", line_, col_);
    }
    t.text = std::string(1, c);
    t.kind = Tok::Punct;
    advance();
  }

  std::string_view text_;
  std::string file_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::End:
      return "end of input";
    case Tok::String:
      return "string \"" + t.text + "\"";
    case Tok::Int:
      return "'" + t.text + "'";
    default:
      return "'" + (t.id ? t.text + "#" + std::to_string(t.id) : t.text) + "'";
  }
}

// One side of a pure relation.
struct Side {
  bool is_null = false;
  std::optional<Ident> bare;  // a lone unsigned identifier
  LinearExpr expr;
};

class Parser {
 public:
  Parser(std::vector<Token> toks, std::string_view text, std::string file)
      : toks_(std::move(toks)), text_(text), file_(std::move(file)) {}

  // Statements ---------------------------------------------------------------

  void program(Program& prog, std::vector<Command>& cmds, std::vector<Diagnostic>& diags) {
    while (!at_end()) {
      std::size_t start = i_;
      try {
        statement(prog, cmds);
      } catch (const Failure& f) {
        diags.push_back(f.diag);
        i_ = std::max(i_, start + 1);
        while (!at_end() && !is_punct(".")) ++i_;
        if (!at_end()) ++i_;
      }
    }
  }

  Formula formula_only() {
    Formula f = formula();
    accept(".");
    expect_end();
    return f;
  }

  TypeExpr type_only() {
    TypeExpr t = type_expr();
    accept(".");
    expect_end();
    return t;
  }

 private:
  void statement(Program& prog, std::vector<Command>& cmds) {
    const Token& first = cur();
    if (first.kind != Tok::Keyword) fail("expected a declaration or command, found " + describe(first));
    const std::string kw = first.text;
    std::size_t start = i_;
    if (kw == "data") {
      PredDef d = data_decl();
      add(prog, std::move(d), start);
    } else if (kw == "pred") {
      PredDef d = pred_decl();
      add(prog, std::move(d), start);
    } else if (kw == "trait" || kw == "interface") {
      TraitDecl d = trait_decl();
      add(prog, std::move(d), start);
    } else if (kw == "class") {
      ClassDecl d = class_decl();
      add(prog, std::move(d), start);
    } else if (kw == "checkentail") {
      next();
      Formula a = formula();
      expect("|-");
      Formula c = formula();
      expect(".");
      cmds.push_back(CheckEntail{std::move(a), std::move(c), span_from(start), source_from(start)});
    } else if (kw == "subtype") {
      next();
      TypeExpr sub = type_expr();
      accept("<:");
      TypeExpr super = type_expr();
      expect(".");
      cmds.push_back(CheckSubtype{std::move(sub), std::move(super), span_from(start), source_from(start)});
    } else if (kw == "lin") {
      next();
      Ident n = ident("a trait or class name");
      expect(".");
      cmds.push_back(Linearize{std::move(n), span_from(start), source_from(start)});
    } else if (kw == "study") {
      next();
      std::string label;
      if (cur().kind == Tok::String || cur().kind == Tok::Ident) {
        label = cur().text;
        next();
      } else {
        fail("expected a study label, found " + describe(cur()));
      }
      expect(":");
      std::vector<std::pair<TypeExpr, TypeExpr>> pairs;
      do {
        TypeExpr sub = type_expr();
        expect("<:");
        TypeExpr super = type_expr();
        pairs.emplace_back(std::move(sub), std::move(super));
      } while (accept(","));
      expect(".");
      cmds.push_back(Study{std::move(label), std::move(pairs), span_from(start), source_from(start)});
    } else {
      fail("expected a declaration or command, found " + describe(first));
    }
  }

  template <class D>
  void add(Program& prog, D d, std::size_t start) {
    d.span = span_from(start);
    if (prog.declares(d.name.name())) throw Failure{{d.span, "'" + d.name.str() + "' is already defined"}};
    prog.add(std::move(d));
  }

  PredDef data_decl() {
    next();
    Ident name = ident("a data type name");
    expect("{");
    std::vector<Field> fields;
    std::vector<Ident> params{Ident("self")};
    while (!is_punct("}")) {
      Ident ty = ident("a field type");
      Sort s;
      if (ty.name() == "int") s = Sort{Sort::Tag::Int, {}};
      else if (ty.name() == "bool") s = Sort{Sort::Tag::Bool, {}};
      else if (ty.name() == "bag") s = Sort{Sort::Tag::Bag, {}};
      else if (ty.name() == "shape") s = Sort{Sort::Tag::Shape, {}};
      else s = Sort::ptr(ty.name());
      Ident fname = ident("a field name");
      expect(";");
      fields.push_back(Field{s, fname});
      params.push_back(fname);
    }
    expect("}");
    expect(".");
    return PredDef{name, params, DataPred{std::move(fields)}, std::nullopt, {}};
  }

  PredDef pred_decl() {
    next();
    Ident name = ident("a predicate name");
    expect("<");
    std::vector<Ident> params{Ident("self")};
    if (!is_punct(">")) {
      do params.push_back(ident("a parameter name"));
      while (accept(","));
    }
    expect(">");
    std::variant<AbstractPred, DataPred, DefinedPred> kind = AbstractPred{};
    if (accept("==")) kind = DefinedPred{formula()};
    std::optional<PureFormula> inv;
    if (accept_kw("inv")) {
      SymbolicHeap scratch;
      pure_atom(scratch);
      while (accept("&")) pure_atom(scratch);
      if (!scratch.existentials.empty()) fail("wildcards are not allowed in invariants");
      inv = std::move(scratch.pure);
    }
    expect(".");
    return PredDef{name, params, std::move(kind), std::move(inv), {}};
  }

  TraitDecl trait_decl() {
    bool iface = accept_kw("interface");
    expect_kw("trait");
    Ident name = ident("a trait name");
    std::vector<Ident> parents;
    if (accept_kw("extends")) {
      parents.push_back(ident("a parent trait"));
      while (accept_kw("with")) parents.push_back(ident("a parent trait"));
    }
    expect(".");
    return TraitDecl{name, parents, iface, {}};
  }

  ClassDecl class_decl() {
    next();
    Ident name = ident("a class name");
    expect_kw("extends");
    std::vector<Ident> parents{ident("a parent")};
    while (accept_kw("with")) parents.push_back(ident("a parent"));
    expect(".");
    return ClassDecl{name, parents, {}};
  }

  TypeExpr type_expr() {
    bool paren = accept("(");
    TypeExpr t{ident("a trait or class name"), {}};
    while (accept_kw("with")) t.mixed.push_back(ident("a trait name"));
    if (paren) expect(")");
    return t;
  }

  // Formulas -----------------------------------------------------------------

  Formula formula() {
    std::vector<SymbolicHeap> ds;
    ds.push_back(disjunct());
    while (accept("\\/")) ds.push_back(disjunct());
    return Formula(std::move(ds));
  }

  SymbolicHeap disjunct() {
    SymbolicHeap h;
    if (accept_kw("exists")) {
      do h.existentials.push_back(ident("a variable"));
      while (accept(","));
      expect(":");
    }
    if (accept_kw("emp")) {
    } else if (starts_heap_atom()) {
      heap_atom(h);
    } else {
      pure_atom(h);
    }
    for (;;) {
      if (accept("*")) {
        if (!accept_kw("emp")) heap_atom(h);
      } else if (accept("&")) {
        pure_atom(h);
      } else {
        break;
      }
    }
    return h;
  }

  bool starts_heap_atom() const {
    const Token& t = cur();
    bool root = t.kind == Tok::Ident || (t.kind == Tok::Keyword && t.text == "null");
    return root && is_punct_at(i_ + 1, "::");
  }

  void heap_atom(SymbolicHeap& h) {
    Ident root = is_kw("null") ? (next(), Ident::null()) : ident("a heap atom");
    expect("::");
    Ident name = ident("a predicate name");
    expect("<");
    std::vector<Ident> args;
    if (!is_punct(">")) {
      do args.push_back(argument(h));
      while (accept(","));
    }
    expect(">");
    h.spatial.push_back(PredInst{name, root, std::move(args)});
  }

  Ident argument(SymbolicHeap& h) {
    if (accept_kw("null")) return Ident::null();
    if (accept("_")) {
      Ident w = Ident::fresh("anon");
      h.existentials.push_back(w);
      return w;
    }
    bool neg = accept("-");
    if (cur().kind == Tok::Int) {
      std::int64_t k = cur().value;
      next();
      Ident w = Ident::fresh("k");
      h.existentials.push_back(w);
      h.pure.add(PureAtom::eq0(LinearExpr::of_var(w) - LinearExpr::of_const(neg ? -k : k)));
      return w;
    }
    if (neg) fail("expected an integer after '-', found " + describe(cur()));
    return ident("an argument");
  }

  void pure_atom(SymbolicHeap& h) {
    if (accept_kw("true")) return;
    if (accept_kw("false")) {
      h.pure.add(PureAtom::falsum());
      return;
    }
    const Token at = cur();
    Side l = side();
    const Token op = cur();
    static const char* const ops[] = {"=", "!=", "<=", ">=", "<", ">"};
    bool known = false;
    for (const char* o : ops) known = known || is_punct(o);
    if (!known) fail("expected a comparison operator, found " + describe(op));
    next();
    Side r = side();
    const std::string& o = op.text;
    if (o == "=" || o == "!=") {
      bool neg = o == "!=";
      if (l.is_null || r.is_null) {
        if ((!l.is_null && !l.bare) || (!r.is_null && !r.bare)) fail_at(at, "null can only be compared with a variable");
        h.pure.add(PureAtom::equal(l.is_null ? Ident::null() : *l.bare, r.is_null ? Ident::null() : *r.bare, neg));
      } else if (l.bare && r.bare) {
        h.pure.add(PureAtom::var_eq(*l.bare, *r.bare, neg));
      } else {
        h.pure.add(PureAtom::eq0(l.expr - r.expr, neg));
      }
      return;
    }
    if (l.is_null || r.is_null) fail_at(at, "null cannot be ordered");
    if (o == "<=") h.pure.add(PureAtom::leq0(l.expr - r.expr));
    else if (o == ">=") h.pure.add(PureAtom::leq0(r.expr - l.expr));
    else if (o == "<") h.pure.add(PureAtom::leq0(r.expr - l.expr, true));
    else h.pure.add(PureAtom::leq0(l.expr - r.expr, true));
  }

  Side side() {
    Side s;
    if (accept_kw("null")) {
      s.is_null = true;
      return s;
    }
    bool first = true;
    bool only_ident = true;
    std::size_t terms = 0;
    for (;;) {
      std::int64_t sign = 1;
      if (first) {
        if (accept("-")) {
          sign = -1;
          only_ident = false;
        }
      } else if (accept("+")) {
      } else if (accept("-")) {
        sign = -1;
      } else {
        break;
      }
      first = false;
      ++terms;
      if (cur().kind == Tok::Int) {
        std::int64_t k = cur().value;
        next();
        only_ident = false;
        if (is_punct("*") && toks_[i_ + 1].kind == Tok::Ident && !is_punct_at(i_ + 2, "::")) {
          next();
          s.expr.add_term(ident("a variable"), sign * k);
        } else {
          s.expr.add(LinearExpr::of_const(sign * k));
        }
      } else {
        Ident v = ident("a variable or integer");
        s.expr.add_term(v, sign);
        if (terms == 1 && only_ident) s.bare = v;
      }
    }
    if (terms != 1 || !only_ident) s.bare.reset();
    return s;
  }

  // Tokens -------------------------------------------------------------------

  const Token& cur() const { return toks_[i_]; }
  void next() {
    if (toks_[i_].kind != Tok::End) ++i_;
  }
  bool at_end() const { return cur().kind == Tok::End; }
  bool is_punct_at(std::size_t i, const char* p) const {
    return i < toks_.size() && toks_[i].kind == Tok::Punct && toks_[i].text == p;
  }
  bool is_punct(const char* p) const { return is_punct_at(i_, p); }
  bool is_kw(const char* k) const { return cur().kind == Tok::Keyword && cur().text == k; }

  bool accept(const char* p) {
    if (!is_punct(p)) return false;
    next();
    return true;
  }
  bool accept_kw(const char* k) {
    if (!is_kw(k)) return false;
    next();
    return true;
  }
  void expect(const char* p) {
    if (!accept(p)) fail(std::string("expected '") + p + "', found " + describe(cur()));
  }
  void expect_kw(const char* k) {
    if (!accept_kw(k)) fail(std::string("expected '") + k + "', found " + describe(cur()));
  }
  void expect_end() {
    if (!at_end()) fail("unexpected " + describe(cur()));
  }

  Ident ident(const char* what) {
    const Token& t = cur();
    if (t.kind != Tok::Ident) fail(std::string("expected ") + what + ", found " + describe(t));
    Ident out(t.text, t.id);
    if (t.id) Ident::reserve(t.id);
    next();
    return out;
  }

  [[noreturn]] void fail(const std::string& msg) { fail_at(cur(), msg); }
  [[noreturn]] void fail_at(const Token& t, const std::string& msg) {
    throw Failure{{SourceSpan{file_, t.line, t.col, t.end_line, t.end_col}, msg}};
  }

  SourceSpan span_from(std::size_t start) const {
    const Token& a = toks_[start];
    const Token& b = toks_[i_ > start ? i_ - 1 : start];
    return SourceSpan{file_, a.line, a.col, b.end_line, b.end_col};
  }

  std::string source_from(std::size_t start) const {
    const Token& a = toks_[start];
    const Token& b = toks_[i_ > start ? i_ - 1 : start];
    return std::string(text_.substr(a.begin, b.end - a.begin));
  }

  std::vector<Token> toks_;
  std::string_view text_;
  std::string file_;
  std::size_t i_ = 0;
};

bool declared_type(const Program& p, const Ident& n) { return p.find_trait(n.name()) || p.find_class(n.name()); }

std::vector<Diagnostic> check_commands(const Program& p, const std::vector<Command>& cmds) {
  std::vector<Diagnostic> out;
  auto append = [&](std::vector<Diagnostic> ds) { out.insert(out.end(), ds.begin(), ds.end()); };
  for (const auto& c : cmds) {
    if (const auto* e = std::get_if<CheckEntail>(&c)) {
      append(well_formed_formula(p, e->ante, e->span));
      append(well_formed_formula(p, e->conseq, e->span));
    } else if (const auto* s = std::get_if<CheckSubtype>(&c)) {
      append(well_formed_type(p, s->sub, s->span));
      append(well_formed_type(p, s->super, s->span));
    } else if (const auto* l = std::get_if<Linearize>(&c)) {
      if (!declared_type(p, l->name)) out.push_back({l->span, "'" + l->name.str() + "' is not a declared trait or class"});
    } else if (const auto* st = std::get_if<Study>(&c)) {
      for (const auto& [sub, super] : st->pairs) {
        append(well_formed_type(p, sub, st->span));
        append(well_formed_type(p, super, st->span));
      }
    }
  }
  return out;
}

}  // namespace

const SourceSpan& command_span(const Command& c) {
  return std::visit([](const auto& x) -> const SourceSpan& { return x.span; }, c);
}

const std::string& command_source(const Command& c) {
  return std::visit([](const auto& x) -> const std::string& { return x.source; }, c);
}

std::string to_string(const Command& c) {
  if (const auto* e = std::get_if<CheckEntail>(&c)) return "checkentail " + to_string(e->ante) + " |- " + to_string(e->conseq) + ".";
  if (const auto* s = std::get_if<CheckSubtype>(&c)) return "subtype (" + to_string(s->sub) + ") <: (" + to_string(s->super) + ").";
  if (const auto* l = std::get_if<Linearize>(&c)) return "lin " + l->name.str() + ".";
  const auto& st = std::get<Study>(c);
  std::string out = "study \"" + st.label + "\":";
  for (std::size_t i = 0; i < st.pairs.size(); ++i)
    out += (i ? ", " : " ") + to_string(st.pairs[i].first) + " <: " + to_string(st.pairs[i].second);
  return out + ".";
}

ParseError::ParseError(std::vector<Diagnostic> ds)
    : Error(ds.empty() ? "parse error" : format_diagnostic(ds.front())), diags_(std::move(ds)) {}

ParseResult parse_program(std::string_view text, const std::string& file) { return parse_program(text, Program{}, file); }

ParseResult parse_program(std::string_view text, const Program& base, const std::string& file) {
  ParseResult r;
  std::vector<Token> toks;
  try {
    toks = Lexer(text, file).run();
  } catch (const Failure& f) {
    r.diagnostics.push_back(f.diag);
    return r;
  }
  r.program = base;
  Parser(std::move(toks), text, file).program(r.program, r.commands, r.diagnostics);
  if (r.ok()) r.diagnostics = well_formed(r.program);
  if (r.ok()) r.diagnostics = check_invariants(r.program);
  if (r.ok()) r.diagnostics = check_commands(r.program, r.commands);
  if (!r.ok()) {
    r.program = Program{};
    r.commands.clear();
  }
  return r;
}

Formula parse_formula(std::string_view text) {
  try {
    return Parser(Lexer(text, "<formula>").run(), text, "<formula>").formula_only();
  } catch (const Failure& f) {
    throw ParseError({f.diag});
  }
}

TypeExpr parse_type_expr(std::string_view text) {
  try {
    return Parser(Lexer(text, "<type>").run(), text, "<type>").type_only();
  } catch (const Failure& f) {
    throw ParseError({f.diag});
  }
}

}  // namespace mixcheck
