#include <cctype>
#include <fstream>
#include <sstream>

#include "construe/kb.hpp"

// Recursive-descent parser for the KB DSL:
//
//   kb              := (observable_decl | relation_decl | grammar_decl)*
//   observable_decl := "observable" ID "{" "process" ID ";"
//                      ("attr" ID ":" domain ";")* ("instant" ";")? "}"
//   domain          := "[" NUM "," NUM "]" ID? | "{" ID ("," ID)* "}" | "any"
//   relation_decl   := ("isa" ID ID | "excludes" ID ID) ";"
//   grammar_decl    := "grammar" ID "hypothesizes" ID ("salient" ID+)?
//                      ("detector" ID)? "{" production* "}"
//   production      := NT "->" (ID NT? | "lambda")
//                      "{" ("abstracted"|"environment")?
//                          (";" "theta" ID)? (";" constraint)* "}"
//   constraint      := expr cmp expr | NUM cmp expr cmp NUM
//                      | "pred" ID "(" arg ("," arg)* ")"
//   expr            := term (("-") term)? | NUM
//   term            := ("h"|"this"|"prev") "." ("begin"|"end"|"t")
//
// Times in constraints follow the observation time syntax (integer ms or
// fractional seconds).

namespace construe {

namespace {

enum class Tok { Id, Num, Sym, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double num = 0;
  int line = 1, col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { next(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    next();
    return t;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw KbError(msg, tok_.line, tok_.col);
  }

 private:
  void next() {
    skip_ws();
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) {
      tok_ = {Tok::End, "", 0, line_, col_};
      return;
    }
    const char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string id;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '_')) {
        id += src_[pos_];
        advance();
      }
      tok_ = {Tok::Id, id, 0, tok_.line, tok_.col};
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && pos_ + 1 < src_.size() &&
         std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      std::string num;
      if (c == '-') {
        num += c;
        advance();
      }
      while (pos_ < src_.size() &&
             (std::isdigit(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '.')) {
        num += src_[pos_];
        advance();
      }
      tok_ = {Tok::Num, num, std::stod(num), tok_.line, tok_.col};
      return;
    }
    // multi-char symbols
    static const char* two[] = {"->", "<=", ">=", "=="};
    for (const char* s : two) {
      if (src_.compare(pos_, 2, s) == 0) {
        tok_ = {Tok::Sym, s, 0, tok_.line, tok_.col};
        advance();
        advance();
        return;
      }
    }
    tok_ = {Tok::Sym, std::string(1, c), 0, tok_.line, tok_.col};
    advance();
  }

  void skip_ws() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '#' || (c == '/' && pos_ + 1 < src_.size() &&
                       src_[pos_ + 1] == '/')) {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

class Parser {
 public:
  Parser(const std::string& src, KnowledgeBase& kb) : lex_(src), kb_(kb) {}

  void run() {
    while (lex_.peek().kind != Tok::End) {
      const Token t = lex_.peek();
      if (t.kind != Tok::Id) lex_.fail("expected declaration");
      if (t.text == "observable") {
        parse_observable();
      } else if (t.text == "isa" || t.text == "excludes") {
        parse_relation();
      } else if (t.text == "grammar") {
        parse_grammar();
      } else {
        lex_.fail("unknown declaration '" + t.text + "'");
      }
    }
  }

 private:
  std::string expect_id() {
    if (lex_.peek().kind != Tok::Id) lex_.fail("expected identifier");
    return lex_.take().text;
  }

  void expect_sym(const std::string& s) {
    if (lex_.peek().kind != Tok::Sym || lex_.peek().text != s)
      lex_.fail("expected '" + s + "'");
    lex_.take();
  }

  bool accept_sym(const std::string& s) {
    if (lex_.peek().kind == Tok::Sym && lex_.peek().text == s) {
      lex_.take();
      return true;
    }
    return false;
  }

  bool accept_kw(const std::string& s) {
    if (lex_.peek().kind == Tok::Id && lex_.peek().text == s) {
      lex_.take();
      return true;
    }
    return false;
  }

  double expect_num() {
    if (lex_.peek().kind != Tok::Num) lex_.fail("expected number");
    return lex_.take().num;
  }

  void parse_observable() {
    lex_.take();  // observable
    Observable q;
    q.id = expect_id();
    expect_sym("{");
    if (!accept_kw("process")) lex_.fail("expected 'process'");
    q.process = expect_id();
    expect_sym(";");
    while (true) {
      if (accept_kw("attr")) {
        AttributeDecl a;
        a.name = expect_id();
        expect_sym(":");
        a.domain = parse_domain();
        expect_sym(";");
        q.attributes.push_back(std::move(a));
      } else if (accept_kw("instant")) {
        q.instantaneous = true;
        expect_sym(";");
      } else {
        break;
      }
    }
    expect_sym("}");
    kb_.relations.declare_observable(q);
  }

  ValueDomain parse_domain() {
    if (accept_kw("any")) return Unconstrained{};
    if (accept_sym("[")) {
      RealRange r;
      r.lo = expect_num();
      expect_sym(",");
      r.hi = expect_num();
      expect_sym("]");
      if (lex_.peek().kind == Tok::Id) r.unit = lex_.take().text;
      return r;
    }
    if (accept_sym("{")) {
      LabelSet ls;
      ls.labels.insert(expect_id());
      while (accept_sym(",")) ls.labels.insert(expect_id());
      expect_sym("}");
      return ls;
    }
    lex_.fail("expected attribute domain");
  }

  void parse_relation() {
    const std::string kind = lex_.take().text;
    const std::string a = expect_id();
    const std::string b = expect_id();
    expect_sym(";");
    if (kind == "isa")
      kb_.relations.declare_is_a(a, b);
    else
      kb_.relations.declare_excludes(a, b);
  }

  void parse_grammar() {
    lex_.take();  // grammar
    AbstractionGrammar g;
    g.id = expect_id();
    if (!accept_kw("hypothesizes")) lex_.fail("expected 'hypothesizes'");
    g.hypothesis = expect_id();
    if (accept_kw("salient")) {
      g.salient.push_back(expect_id());
      while (lex_.peek().kind == Tok::Id && lex_.peek().text != "detector")
        g.salient.push_back(lex_.take().text);
    }
    if (accept_kw("detector")) g.detector = expect_id();
    expect_sym("{");
    while (!accept_sym("}")) g.productions.push_back(parse_production());
    kb_.grammars.push_back(std::move(g));
  }

  Production parse_production() {
    Production p;
    p.lhs = expect_id();
    expect_sym("->");
    const std::string first = expect_id();
    if (first == "lambda") {
      p.terminal.clear();
      p.rhs_nonterminal.reset();
    } else {
      p.terminal = first;
      if (lex_.peek().kind == Tok::Id) p.rhs_nonterminal = lex_.take().text;
    }
    expect_sym("{");
    if (!p.is_lambda()) {
      if (accept_kw("abstracted"))
        p.abstracted = true;
      else if (accept_kw("environment"))
        p.abstracted = false;
      else
        lex_.fail("expected 'abstracted' or 'environment'");
    } else if (accept_kw("theta")) {
      p.theta = expect_id();
    }
    while (accept_sym(";")) {
      if (lex_.peek().kind == Tok::Sym && lex_.peek().text == "}") break;
      if (accept_kw("theta")) {
        p.theta = expect_id();
      } else if (lex_.peek().kind == Tok::Id && lex_.peek().text == "pred") {
        p.predicates.push_back(parse_predicate());
      } else {
        p.temporal.push_back(parse_temporal(p));
      }
    }
    expect_sym("}");
    return p;
  }

  PredicateSpec parse_predicate() {
    lex_.take();  // pred
    PredicateSpec ps;
    ps.name = expect_id();
    expect_sym("(");
    if (!accept_sym(")")) {
      ps.args.push_back(parse_pred_arg());
      while (accept_sym(",")) ps.args.push_back(parse_pred_arg());
      expect_sym(")");
    }
    ps.label = "pred:" + ps.name;
    return ps;
  }

  PredArgSpec parse_pred_arg() {
    if (lex_.peek().kind == Tok::Num) return expect_num();
    const std::string id = expect_id();
    if (id == "h") return EntityRef::Hypothesis;
    if (id == "this") return EntityRef::This;
    if (id == "prev") return EntityRef::Prev;
    return id;  // symbolic literal
  }

  // term := ("h"|"this"|"prev") "." ("begin"|"end"|"t")
  std::optional<TimeTermSpec> try_term() {
    if (lex_.peek().kind != Tok::Id) return std::nullopt;
    const std::string e = lex_.peek().text;
    if (e != "h" && e != "this" && e != "prev") return std::nullopt;
    lex_.take();
    expect_sym(".");
    const std::string f = expect_id();
    TimeTermSpec t;
    t.entity = e == "h"      ? EntityRef::Hypothesis
               : e == "this" ? EntityRef::This
                             : EntityRef::Prev;
    if (f == "begin")
      t.field = TimeField::Begin;
    else if (f == "end")
      t.field = TimeField::End;
    else if (f == "t")
      t.field = TimeField::Point;
    else
      lex_.fail("unknown time field '" + f + "'");
    return t;
  }

  TimeMs expect_time() {
    if (lex_.peek().kind != Tok::Num) lex_.fail("expected time literal");
    const Token t = lex_.take();
    auto ms = parse_time(t.text);
    if (!ms) lex_.fail("malformed time literal '" + t.text + "'");
    return *ms;
  }

  // diff := term | term "-" term
  struct Diff {
    TimeTermSpec a;
    std::optional<TimeTermSpec> b;
  };

  Diff expect_diff() {
    auto a = try_term();
    if (!a) lex_.fail("expected time term");
    Diff d{*a, std::nullopt};
    if (accept_sym("-")) {
      auto b = try_term();
      if (!b) lex_.fail("expected time term after '-'");
      d.b = *b;
    }
    return d;
  }

  // constraint := NUM cmp diff cmp NUM | diff cmp NUM | NUM cmp diff
  //             | diff "==" NUM | diff "==" diff
  TemporalConstraintSpec parse_temporal(const Production& p) {
    TemporalConstraintSpec c;
    std::ostringstream label;
    if (lex_.peek().kind == Tok::Num) {
      const TimeMs lo = expect_time();
      const std::string op = take_cmp();
      Diff d = expect_diff();
      c.a = d.a;
      c.b = d.b;
      c.lo = op == "<=" ? lo : lo + 1;
      if (lex_.peek().kind == Tok::Sym &&
          (lex_.peek().text == "<=" || lex_.peek().text == "<")) {
        const std::string op2 = take_cmp();
        const TimeMs hi = expect_time();
        c.hi = op2 == "<=" ? hi : hi - 1;
      }
    } else {
      Diff d = expect_diff();
      c.a = d.a;
      c.b = d.b;
      const std::string op = take_cmp();
      if (op == "==") {
        auto rhs_term = try_term();
        if (rhs_term) {
          // a - b == 0 form: rewrite as difference between the two terms
          if (c.b) lex_.fail("cannot equate a difference to a term");
          c.b = *rhs_term;
          c.lo = 0;
          c.hi = 0;
        } else {
          const TimeMs v = expect_time();
          c.lo = v;
          c.hi = v;
        }
      } else if (op == "<=" || op == "<") {
        const TimeMs hi = expect_time();
        c.hi = op == "<=" ? hi : hi - 1;
      } else {  // ">=" or ">"
        const TimeMs lo = expect_time();
        c.lo = op == ">=" ? lo : lo + 1;
      }
    }
    label << "t" << (p.temporal.size() + 1);
    c.label = label.str();
    return c;
  }

  std::string take_cmp() {
    if (lex_.peek().kind != Tok::Sym) lex_.fail("expected comparison");
    const std::string s = lex_.take().text;
    if (s != "<=" && s != "<" && s != ">=" && s != ">" && s != "==")
      lex_.fail("expected comparison, got '" + s + "'");
    return s;
  }

  Lexer lex_;
  KnowledgeBase& kb_;
};

}  // namespace

void parse_kb(const std::string& text, KnowledgeBase& kb) {
  Parser(text, kb).run();
}

void parse_kb_file(const std::string& path, KnowledgeBase& kb) {
  std::ifstream in(path);
  if (!in) throw KbError("cannot open KB file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  parse_kb(ss.str(), kb);
}

}  // namespace construe
