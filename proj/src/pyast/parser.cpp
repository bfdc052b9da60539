// SPDX-License-Identifier: Apache-2.0
#include "complint/pyast/parser.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "complint/pyast/lexer.hpp"
#include "pyast/string_literal.hpp"

namespace complint::pyast {

namespace {

struct RawError {
  std::string message;
  ErrorClass cls = ErrorClass::Syntax;
  int line = 1;
  int col = 0;
  // Grammar and tokenizer errors carry the source line, which enables the
  // legacy print/exec rewrite. Tree-construction errors do not.
  bool has_text = false;
};

struct SyntaxFailure {
  RawError err;
};

struct Pos {
  int line = 1;
  int col = 0;
};

constexpr int kMaxDepth = 1000;

bool is_augassign(const Token& t) {
  if (t.kind != TokenKind::Op) return false;
  static constexpr std::string_view ops[] = {"+=", "-=", "*=", "@=", "/=",  "%=",  "&=",
                                             "|=", "^=", "<<=", ">>=", "**=", "//="};
  return std::find(std::begin(ops), std::end(ops), t.text) != std::end(ops);
}

BinOperator augassign_operator(std::string_view op) {
  const std::string_view base = op.substr(0, op.size() - 1);
  if (base == "+") return BinOperator::Add;
  if (base == "-") return BinOperator::Sub;
  if (base == "*") return BinOperator::Mult;
  if (base == "@") return BinOperator::MatMult;
  if (base == "/") return BinOperator::Div;
  if (base == "%") return BinOperator::Mod;
  if (base == "&") return BinOperator::BitAnd;
  if (base == "|") return BinOperator::BitOr;
  if (base == "^") return BinOperator::BitXor;
  if (base == "<<") return BinOperator::LShift;
  if (base == ">>") return BinOperator::RShift;
  if (base == "**") return BinOperator::Pow;
  return BinOperator::FloorDiv;
}

// Name used by "cannot assign to X" / "cannot use named assignment with X".
const char* expr_name(const Node& n) {
  switch (n.kind) {
    case NodeKind::Attribute: return "attribute";
    case NodeKind::Subscript: return "subscript";
    case NodeKind::Starred: return "starred";
    case NodeKind::Name: return "name";
    case NodeKind::List: return "list";
    case NodeKind::Tuple: return "tuple";
    case NodeKind::Lambda: return "lambda";
    case NodeKind::Call: return "function call";
    case NodeKind::BoolOp:
    case NodeKind::BinOp:
    case NodeKind::UnaryOp: return "operator";
    case NodeKind::GeneratorExp: return "generator expression";
    case NodeKind::Yield:
    case NodeKind::YieldFrom: return "yield expression";
    case NodeKind::Await: return "await expression";
    case NodeKind::ListComp: return "list comprehension";
    case NodeKind::SetComp: return "set comprehension";
    case NodeKind::DictComp: return "dict comprehension";
    case NodeKind::Dict: return "dict display";
    case NodeKind::Set: return "set display";
    case NodeKind::JoinedStr:
    case NodeKind::FormattedValue: return "f-string expression";
    case NodeKind::Constant:
      switch (static_cast<ConstKind>(n.op)) {
        case ConstKind::None: return "None";
        case ConstKind::True: return "True";
        case ConstKind::False: return "False";
        case ConstKind::Ellipsis: return "Ellipsis";
        default: return "literal";
      }
    case NodeKind::Compare: return "comparison";
    case NodeKind::IfExp: return "conditional expression";
    case NodeKind::NamedExpr: return "named expression";
    default: return "expression";
  }
}

class Parser {
 public:
  Parser(const Lexer& lexer, Ast& ast) : lexer_(lexer), toks_(lexer.tokens()), ast_(ast) {}

  NodeId file_input() {
    std::vector<NodeId> body;
    while (cur().kind != TokenKind::EndMarker) {
      if (cur().kind == TokenKind::Newline) {
        advance();
        continue;
      }
      stmt(body);
    }
    Node m;
    m.kind = NodeKind::Module;
    const int last = std::max(1, lexer_.line_count());
    m.span = {1, 0, last, static_cast<int>(lexer_.line_text(last).size())};
    const NodeId id = ast_.add(std::move(m));
    ast_.set_field(id, field::kBody, body);
    ast_.set_root(id);
    return id;
  }

  // eval_input: testlist NEWLINE* ENDMARKER
  NodeId eval_input() {
    const NodeId e = testlist();
    while (cur().kind == TokenKind::Newline) advance();
    if (cur().kind != TokenKind::EndMarker) fail();
    ast_.set_root(e);
    return e;
  }

  const std::vector<RawError>& ast_errors() const noexcept { return ast_errors_; }

 private:
  // ---- token cursor -------------------------------------------------------

  const Token& cur() const { return toks_[std::min(pos_, toks_.size() - 1)]; }
  const Token& prev() const { return toks_[pos_ == 0 ? 0 : std::min(pos_ - 1, toks_.size() - 1)]; }
  /// Last consumed token that carries source text; block ends stop at the
  /// final statement, not at the NEWLINE/DEDENT that closes them.
  const Token& prev_significant() const {
    std::size_t i = pos_ == 0 ? 0 : std::min(pos_ - 1, toks_.size() - 1);
    while (i > 0 && (toks_[i].kind == TokenKind::Newline || toks_[i].kind == TokenKind::Indent ||
                     toks_[i].kind == TokenKind::Dedent || toks_[i].kind == TokenKind::EndMarker)) {
      --i;
    }
    return toks_[i];
  }
  const Token& advance() {
    const Token& t = cur();
    ++pos_;
    return t;
  }
  bool at_op(std::string_view s) const { return cur().kind == TokenKind::Op && cur().text == s; }
  bool at_kw(std::string_view s) const { return cur().kind == TokenKind::Name && cur().text == s; }
  bool at_name() const { return cur().kind == TokenKind::Name && !is_keyword(cur().text); }
  Pos start() const { return {cur().line, cur().col}; }
  Pos pos_of(NodeId id) const {
    const Node& n = ast_.node(id);
    return {n.span.line, n.span.col};
  }

  [[noreturn]] void fail(bool expected_indent = false) const {
    const Token& t = cur();
    RawError e;
    e.has_text = true;
    if (t.kind == TokenKind::Error) {
      e.message = t.message;
      e.cls = t.error_class;
      e.line = t.line;
      e.col = t.col;
    } else if (t.is_op("<>")) {
      e.message = "invalid syntax";
      e.line = t.end_line;
      e.col = t.col;
    } else if (t.at_eof) {
      e.message = "unexpected EOF while parsing";
      e.line = t.line;
      e.col = t.col;
    } else if (expected_indent) {
      e.message = "expected an indented block";
      e.cls = ErrorClass::Indentation;
      e.line = t.end_line;
      e.col = t.col;
    } else if (t.kind == TokenKind::Indent) {
      e.message = "unexpected indent";
      e.cls = ErrorClass::Indentation;
      e.line = t.line;
      e.col = t.col;
    } else if (t.kind == TokenKind::Dedent) {
      e.message = "unexpected unindent";
      e.cls = ErrorClass::Indentation;
      e.line = t.line;
      e.col = t.col;
    } else {
      e.message = "invalid syntax";
      e.line = t.end_line;
      e.col = t.col;
    }
    throw SyntaxFailure{std::move(e)};
  }

  void expect_op(std::string_view s) {
    if (!at_op(s)) fail();
    advance();
  }
  void expect_kw(std::string_view s) {
    if (!at_kw(s)) fail();
    advance();
  }
  const Token& expect_name() {
    if (!at_name()) fail();
    return advance();
  }
  void expect_newline() {
    if (cur().kind != TokenKind::Newline) fail();
    advance();
  }

  bool starts_atom() const {
    const Token& t = cur();
    switch (t.kind) {
      case TokenKind::Name:
        return !is_keyword(t.text) || t.text == "None" || t.text == "True" || t.text == "False";
      case TokenKind::Number:
      case TokenKind::String: return true;
      case TokenKind::Op: return t.text == "(" || t.text == "[" || t.text == "{" || t.text == "...";
      default: return false;
    }
  }
  bool starts_expr() const {
    return starts_atom() || at_kw("await") || at_op("+") || at_op("-") || at_op("~");
  }
  bool starts_test() const { return starts_expr() || at_kw("not") || at_kw("lambda"); }
  bool starts_comp_for() const { return at_kw("for") || at_kw("async"); }

  // ---- tree construction ----------------------------------------------------

  NodeId make(NodeKind k, Pos s) {
    Node n;
    n.kind = k;
    const Token& p = prev_significant();
    n.span = {s.line, s.col, p.end_line, p.end_col};
    if (n.span.end_line < s.line || (n.span.end_line == s.line && n.span.end_col < s.col)) {
      n.span.end_line = s.line;
      n.span.end_col = s.col;
    }
    return ast_.add(std::move(n));
  }

  void set(NodeId id, int f, NodeId kid) { ast_.set_field(id, f, kid); }
  void set(NodeId id, int f, const std::vector<NodeId>& kids) { ast_.set_field(id, f, kids); }

  // ---- tree-construction errors ---------------------------------------------

  std::size_t ast_mark() const noexcept { return ast_errors_.size(); }
  void ast_err(std::string msg, Pos at) { ast_errors_.push_back({std::move(msg), ErrorClass::Syntax, at.line, at.col}); }
  // Records an error that the reference front-end detects before anything
  // recorded since `mark`.
  void ast_err_at(std::size_t mark, std::string msg, Pos at) {
    ast_errors_.insert(ast_errors_.begin() + static_cast<std::ptrdiff_t>(mark),
                       RawError{std::move(msg), ErrorClass::Syntax, at.line, at.col});
  }

  bool forbidden(std::string_view name, Pos at) {
    if (name == "__debug__") {
      ast_err("cannot assign to __debug__", at);
      return true;
    }
    return false;
  }

  void set_context(NodeId e, ExprContext ctx, Pos at) {
    Node& n = ast_.node(e);
    const char* bad = nullptr;
    switch (n.kind) {
      case NodeKind::Attribute:
        n.ctx = ctx;
        if (ctx == ExprContext::Store) forbidden(n.ident, at);
        return;
      case NodeKind::Subscript: n.ctx = ctx; return;
      case NodeKind::Starred:
        n.ctx = ctx;
        set_context(ast_.child(e, field::kValue), ctx, at);
        return;
      case NodeKind::Name:
        if (ctx == ExprContext::Store) forbidden(n.ident, at);
        n.ctx = ctx;
        return;
      case NodeKind::List:
      case NodeKind::Tuple: {
        n.ctx = ctx;
        const auto elts = ast_.children(e, field::kElts);
        const std::vector<NodeId> copy(elts.begin(), elts.end());
        for (NodeId c : copy) set_context(c, ctx, at);
        return;
      }
      default: bad = expr_name(n); break;
    }
    ast_err(std::string("cannot ") + (ctx == ExprContext::Store ? "assign to " : "delete ") + bad, at);
  }

  // ---- statements -------------------------------------------------------------

  struct DepthGuard {
    explicit DepthGuard(Parser& p) : p_(p) {
      if (++p_.depth_ > kMaxDepth) {
        RawError e;
        e.message = "too many nested expressions";
        e.line = p_.cur().line;
        e.col = p_.cur().col;
        throw SyntaxFailure{std::move(e)};
      }
    }
    ~DepthGuard() { --p_.depth_; }
    DepthGuard(const DepthGuard&) = delete;
    DepthGuard& operator=(const DepthGuard&) = delete;
    Parser& p_;
  };

  void stmt(std::vector<NodeId>& out) {
    DepthGuard guard(*this);
    const Token& t = cur();
    if (t.kind == TokenKind::Name) {
      const std::string_view s = t.text;
      if (s == "if") return out.push_back(if_stmt(false));
      if (s == "while") return out.push_back(while_stmt());
      if (s == "for") return out.push_back(for_stmt(std::nullopt));
      if (s == "try") return out.push_back(try_stmt());
      if (s == "with") return out.push_back(with_stmt(std::nullopt));
      if (s == "def") return out.push_back(funcdef(start(), {}, std::nullopt));
      if (s == "class") return out.push_back(classdef(start(), {}));
      if (s == "async") return out.push_back(async_stmt());
    } else if (t.is_op("@")) {
      return out.push_back(decorated());
    }
    simple_stmt(out);
  }

  void simple_stmt(std::vector<NodeId>& out) {
    out.push_back(small_stmt());
    while (at_op(";")) {
      advance();
      if (cur().kind == TokenKind::Newline) break;
      out.push_back(small_stmt());
    }
    expect_newline();
  }

  std::vector<NodeId> suite() {
    std::vector<NodeId> body;
    if (cur().kind == TokenKind::Newline) {
      advance();
      if (cur().kind != TokenKind::Indent) fail(true);
      advance();
      do {
        stmt(body);
      } while (cur().kind != TokenKind::Dedent);
      advance();
    } else {
      simple_stmt(body);
    }
    return body;
  }

  NodeId small_stmt() {
    const Token& t = cur();
    if (t.kind == TokenKind::Name) {
      const std::string_view s = t.text;
      const Pos p = start();
      if (s == "pass" || s == "break" || s == "continue") {
        advance();
        return make(s == "pass" ? NodeKind::Pass : s == "break" ? NodeKind::Break : NodeKind::Continue, p);
      }
      if (s == "del") return del_stmt();
      if (s == "return") {
        advance();
        NodeId v = kNoNode;
        if (starts_test() || at_op("*")) v = testlist_star_expr();
        const NodeId id = make(NodeKind::Return, p);
        set(id, field::kValue, v);
        return id;
      }
      if (s == "raise") {
        advance();
        NodeId exc = kNoNode, cause = kNoNode;
        if (starts_test()) {
          exc = test();
          if (at_kw("from")) {
            advance();
            cause = test();
          }
        }
        const NodeId id = make(NodeKind::Raise, p);
        set(id, field::kRaiseExc, exc);
        set(id, field::kRaiseCause, cause);
        return id;
      }
      if (s == "yield") {
        const NodeId y = yield_expr();
        const NodeId id = make(NodeKind::Expr, p);
        set(id, field::kValue, y);
        return id;
      }
      if (s == "import") return import_name();
      if (s == "from") return import_from();
      if (s == "global" || s == "nonlocal") {
        advance();
        std::vector<std::string> names;
        names.emplace_back(expect_name().text);
        while (at_op(",")) {
          advance();
          names.emplace_back(expect_name().text);
        }
        const NodeId id = make(s == "global" ? NodeKind::Global : NodeKind::Nonlocal, p);
        ast_.node(id).names = std::move(names);
        return id;
      }
      if (s == "assert") {
        advance();
        const NodeId t1 = test();
        NodeId msg = kNoNode;
        if (at_op(",")) {
          advance();
          msg = test();
        }
        const NodeId id = make(NodeKind::Assert, p);
        set(id, field::kAssertTest, t1);
        set(id, field::kAssertMsg, msg);
        return id;
      }
    }
    return expr_stmt();
  }

  NodeId expr_stmt() {
    const Pos s = start();
    if (!starts_test() && !at_op("*")) fail();
    const NodeId first = testlist_star_expr();

    if (at_op(":")) {
      advance();
      const Node& tn = ast_.node(first);
      bool simple = false;
      switch (tn.kind) {
        case NodeKind::Name:
          simple = parenthesized_.count(first) == 0;
          if (!forbidden(tn.ident, s)) ast_.node(first).ctx = ExprContext::Store;
          break;
        case NodeKind::Attribute:
          if (!forbidden(tn.ident, s)) ast_.node(first).ctx = ExprContext::Store;
          break;
        case NodeKind::Subscript: ast_.node(first).ctx = ExprContext::Store; break;
        case NodeKind::List: ast_err("only single target (not list) can be annotated", s); break;
        case NodeKind::Tuple: ast_err("only single target (not tuple) can be annotated", s); break;
        default: ast_err("illegal target for annotation", s); break;
      }
      const NodeId ann = test();
      NodeId value = kNoNode;
      if (at_op("=")) {
        advance();
        value = at_kw("yield") ? yield_expr() : testlist_star_expr_required();
      }
      const NodeId id = make(NodeKind::AnnAssign, s);
      ast_.node(id).flag = simple;
      set(id, field::kAnnTarget, first);
      set(id, field::kAnnAnnotation, ann);
      set(id, field::kAnnValue, value);
      return id;
    }

    if (is_augassign(cur())) {
      set_context(first, ExprContext::Store, s);
      const NodeKind k = ast_.kind(first);
      if (k != NodeKind::Name && k != NodeKind::Attribute && k != NodeKind::Subscript)
        ast_err("illegal expression for augmented assignment", s);
      const BinOperator op = augassign_operator(advance().text);
      const NodeId value = at_kw("yield") ? yield_expr() : testlist();
      const NodeId id = make(NodeKind::AugAssign, s);
      ast_.node(id).op = static_cast<std::uint8_t>(op);
      set(id, field::kAugTarget, first);
      set(id, field::kAugValue, value);
      return id;
    }

    if (at_op("=")) {
      std::vector<NodeId> targets{first};
      set_context(first, ExprContext::Store, s);
      NodeId value = kNoNode;
      while (at_op("=")) {
        advance();
        const Pos vs = start();
        const NodeId v = at_kw("yield") ? yield_expr() : testlist_star_expr_required();
        if (at_op("=")) {
          set_context(v, ExprContext::Store, vs);
          targets.push_back(v);
        } else {
          value = v;
        }
      }
      const NodeId id = make(NodeKind::Assign, s);
      set(id, field::kAssignTargets, targets);
      set(id, field::kAssignValue, value);
      return id;
    }

    const NodeId id = make(NodeKind::Expr, s);
    set(id, field::kValue, first);
    return id;
  }

  NodeId del_stmt() {
    const Pos s = start();
    advance();
    std::vector<NodeId> targets;
    bool comma = false;
    exprlist(targets, comma, ExprContext::Del);
    const NodeId id = make(NodeKind::Delete, s);
    set(id, field::kTargets, targets);
    return id;
  }

  std::string dotted_name() {
    std::string name(expect_name().text);
    while (at_op(".")) {
      advance();
      name += '.';
      name += expect_name().text;
    }
    return name;
  }

  NodeId import_name() {
    const Pos s = start();
    advance();
    std::vector<NodeId> aliases;
    while (true) {
      const Pos as = start();
      std::string name = dotted_name();
      std::string asname;
      if (at_kw("as")) {
        advance();
        asname = std::string(expect_name().text);
      }
      const NodeId a = make(NodeKind::Alias, as);
      ast_.node(a).ident = std::move(name);
      ast_.node(a).asname = std::move(asname);
      aliases.push_back(a);
      if (!at_op(",")) break;
      advance();
    }
    const NodeId id = make(NodeKind::Import, s);
    set(id, field::kImportNames, aliases);
    return id;
  }

  NodeId import_as_name() {
    const Pos as = start();
    std::string name(expect_name().text);
    std::string asname;
    if (at_kw("as")) {
      advance();
      asname = std::string(expect_name().text);
    }
    const NodeId a = make(NodeKind::Alias, as);
    ast_.node(a).ident = std::move(name);
    ast_.node(a).asname = std::move(asname);
    return a;
  }

  NodeId import_from() {
    const Pos s = start();
    advance();
    int level = 0;
    while (at_op(".") || at_op("...")) level += static_cast<int>(advance().text.size());
    std::string module;
    if (level == 0 || at_name()) module = dotted_name();
    expect_kw("import");
    std::vector<NodeId> aliases;
    if (at_op("*")) {
      const Pos as = start();
      advance();
      const NodeId a = make(NodeKind::Alias, as);
      ast_.node(a).ident = "*";
      aliases.push_back(a);
    } else {
      const bool paren = at_op("(");
      if (paren) advance();
      const Pos names_at = start();
      aliases.push_back(import_as_name());
      bool trailing = false;
      while (at_op(",")) {
        advance();
        trailing = true;
        if (!at_name()) break;
        aliases.push_back(import_as_name());
        trailing = false;
      }
      if (paren) {
        expect_op(")");
      } else if (trailing) {
        ast_err("trailing comma not allowed without surrounding parentheses", names_at);
      }
    }
    const NodeId id = make(NodeKind::ImportFrom, s);
    ast_.node(id).ident = std::move(module);
    ast_.node(id).level = level;
    set(id, field::kImportNames, aliases);
    return id;
  }

  NodeId if_stmt(bool elif) {
    const Pos s = start();
    advance();
    const NodeId cond = namedexpr_test();
    expect_op(":");
    const std::vector<NodeId> body = suite();
    std::vector<NodeId> orelse;
    if (at_kw("elif")) {
      orelse.push_back(if_stmt(true));
    } else if (at_kw("else")) {
      advance();
      expect_op(":");
      orelse = suite();
    }
    (void)elif;
    const NodeId id = make(NodeKind::If, s);
    set(id, field::kTest, cond);
    set(id, field::kIfBody, body);
    set(id, field::kOrelse, orelse);
    return id;
  }

  std::vector<NodeId> else_suite() {
    std::vector<NodeId> orelse;
    if (at_kw("else")) {
      advance();
      expect_op(":");
      orelse = suite();
    }
    return orelse;
  }

  NodeId while_stmt() {
    const Pos s = start();
    advance();
    const NodeId cond = namedexpr_test();
    expect_op(":");
    const std::vector<NodeId> body = suite();
    const std::vector<NodeId> orelse = else_suite();
    const NodeId id = make(NodeKind::While, s);
    set(id, field::kTest, cond);
    set(id, field::kIfBody, body);
    set(id, field::kOrelse, orelse);
    return id;
  }

  // Target list of `for` statements and comprehensions.
  NodeId for_target() {
    const Pos s = start();
    std::vector<NodeId> elts;
    bool comma = false;
    exprlist(elts, comma, ExprContext::Store);
    if (elts.size() == 1 && !comma) return elts.front();
    const NodeId t = make(NodeKind::Tuple, s);
    ast_.node(t).ctx = ExprContext::Store;
    set(t, field::kElts, elts);
    return t;
  }

  NodeId for_stmt(std::optional<Pos> async_at) {
    const Pos s = async_at ? *async_at : start();
    advance();
    const NodeId target = for_target();
    expect_kw("in");
    const NodeId iter = testlist();
    expect_op(":");
    const std::vector<NodeId> body = suite();
    const std::vector<NodeId> orelse = else_suite();
    const NodeId id = make(async_at ? NodeKind::AsyncFor : NodeKind::For, s);
    set(id, field::kForTarget, target);
    set(id, field::kForIter, iter);
    set(id, field::kForBody, body);
    set(id, field::kForOrelse, orelse);
    return id;
  }

  NodeId try_stmt() {
    const Pos s = start();
    advance();
    expect_op(":");
    const std::vector<NodeId> body = suite();
    std::vector<NodeId> handlers, orelse, finalbody;
    if (at_kw("except")) {
      while (at_kw("except")) {
        const Pos hs = start();
        advance();
        NodeId type = kNoNode;
        std::string name;
        if (starts_test()) {
          type = test();
          if (at_kw("as")) {
            advance();
            name = std::string(expect_name().text);
          }
        }
        expect_op(":");
        const std::vector<NodeId> hbody = suite();
        const NodeId h = make(NodeKind::ExceptHandler, hs);
        ast_.node(h).ident = std::move(name);
        set(h, field::kHandlerType, type);
        set(h, field::kHandlerBody, hbody);
        handlers.push_back(h);
      }
      orelse = else_suite();
      if (at_kw("finally")) {
        advance();
        expect_op(":");
        finalbody = suite();
      }
    } else if (at_kw("finally")) {
      advance();
      expect_op(":");
      finalbody = suite();
    } else {
      fail();
    }
    const NodeId id = make(NodeKind::Try, s);
    set(id, field::kTryBody, body);
    set(id, field::kTryHandlers, handlers);
    set(id, field::kTryOrelse, orelse);
    set(id, field::kTryFinalbody, finalbody);
    return id;
  }

  NodeId with_stmt(std::optional<Pos> async_at) {
    const Pos s = async_at ? *async_at : start();
    advance();
    std::vector<NodeId> items;
    while (true) {
      const Pos is = start();
      const NodeId ctx = test();
      NodeId vars = kNoNode;
      if (at_kw("as")) {
        advance();
        vars = expr();
        set_context(vars, ExprContext::Store, is);
      }
      const NodeId item = make(NodeKind::WithItem, is);
      set(item, field::kWithItemExpr, ctx);
      set(item, field::kWithItemVars, vars);
      items.push_back(item);
      if (!at_op(",")) break;
      advance();
    }
    expect_op(":");
    const std::vector<NodeId> body = suite();
    const NodeId id = make(async_at ? NodeKind::AsyncWith : NodeKind::With, s);
    set(id, field::kWithItems, items);
    set(id, field::kWithBody, body);
    return id;
  }

  NodeId async_stmt() {
    const Pos s = start();
    advance();
    if (at_kw("def")) return funcdef(s, {}, s);
    if (at_kw("with")) return with_stmt(s);
    if (at_kw("for")) return for_stmt(s);
    fail();
  }

  NodeId decorator() {
    const Pos s = start();
    advance();
    NodeId e = kNoNode;
    {
      const Token& t = expect_name();
      e = make(NodeKind::Name, s);
      ast_.node(e).ident = std::string(t.text);
    }
    while (at_op(".")) {
      advance();
      const Token& t = expect_name();
      const NodeId a = make(NodeKind::Attribute, {ast_.node(e).span.line, ast_.node(e).span.col});
      ast_.node(a).ident = std::string(t.text);
      set(a, field::kValue, e);
      e = a;
    }
    if (at_op("(")) e = call_trailer(e, pos_of(e), true);
    expect_newline();
    return e;
  }

  NodeId decorated() {
    const Pos s = start();
    std::vector<NodeId> decos;
    while (at_op("@")) decos.push_back(decorator());
    if (at_kw("def")) return funcdef(s, decos, std::nullopt);
    if (at_kw("class")) return classdef(s, decos);
    if (at_kw("async")) {
      const Pos as = start();
      advance();
      if (!at_kw("def")) fail();
      return funcdef(s, decos, as);
    }
    fail();
  }

  NodeId funcdef(Pos outer, std::vector<NodeId> decos, std::optional<Pos> async_at) {
    const Pos def_at = async_at ? *async_at : start();
    if (!at_kw("def")) fail();
    advance();
    const Pos name_at = start();
    const std::string name(expect_name().text);
    forbidden(name, name_at);
    expect_op("(");
    const NodeId args = parameters(true);
    expect_op(")");
    NodeId returns = kNoNode;
    if (at_op("->")) {
      advance();
      returns = test();
    }
    expect_op(":");
    const std::vector<NodeId> body = suite();
    const NodeId id = make(async_at ? NodeKind::AsyncFunctionDef : NodeKind::FunctionDef, outer);
    Node& n = ast_.node(id);
    n.ident = name;
    n.lineno = def_at.line;
    n.col_offset = def_at.col;
    set(id, field::kFnArgs, args);
    set(id, field::kFnBody, body);
    set(id, field::kFnDecorators, decos);
    set(id, field::kFnReturns, returns);
    return id;
  }

  NodeId classdef(Pos outer, std::vector<NodeId> decos) {
    const Pos class_at = start();
    advance();
    const Pos name_at = start();
    const std::string name(expect_name().text);
    forbidden(name, name_at);
    std::vector<NodeId> bases, keywords;
    if (at_op("(")) {
      const Pos open = start();
      advance();
      if (!at_op(")")) arglist(bases, keywords, open, false);
      expect_op(")");
    }
    expect_op(":");
    const std::vector<NodeId> body = suite();
    const NodeId id = make(NodeKind::ClassDef, outer);
    Node& n = ast_.node(id);
    n.ident = name;
    n.lineno = class_at.line;
    n.col_offset = class_at.col;
    set(id, field::kClassBases, bases);
    set(id, field::kClassKeywords, keywords);
    set(id, field::kClassBody, body);
    set(id, field::kClassDecorators, decos);
    return id;
  }

  // typedargslist / varargslist. Stops before the closing ')' or ':'.
  NodeId parameters(bool annotations) {
    const Pos s = start();
    std::vector<NodeId> posonly, args, kwonly, kw_defaults, defaults;
    NodeId vararg = kNoNode, kwarg = kNoNode;
    bool found_default = false;
    bool slash_seen = false;
    bool any = false;

    auto param = [&]() -> NodeId {
      const Pos ps = start();
      const std::string name(expect_name().text);
      forbidden(name, ps);
      NodeId ann = kNoNode;
      if (annotations && at_op(":")) {
        advance();
        ann = test();
      }
      const NodeId a = make(NodeKind::Arg, ps);
      ast_.node(a).ident = name;
      set(a, field::kArgAnnotation, ann);
      return a;
    };
    auto positional = [&]() {
      const std::size_t m = ast_mark();
      const NodeId a = param();
      if (at_op("=")) {
        advance();
        defaults.push_back(test());
        found_default = true;
      } else if (found_default) {
        ast_err_at(m, "non-default argument follows default argument", s);
      }
      args.push_back(a);
    };
    auto double_star = [&]() {
      advance();
      kwarg = param();
      if (at_op(",")) advance();
    };
    auto star = [&]() {
      const Pos star_at = start();
      const std::size_t m = ast_mark();
      advance();
      bool named = false;
      std::optional<Pos> dstar_at;
      if (at_name()) {
        vararg = param();
        named = true;
      }
      while (at_op(",")) {
        advance();
        if (at_name()) {
          const NodeId a = param();
          NodeId d = kNoNode;
          if (at_op("=")) {
            advance();
            d = test();
          }
          kwonly.push_back(a);
          kw_defaults.push_back(d);
          continue;
        }
        if (at_op("**")) {
          dstar_at = start();
          double_star();
        }
        break;
      }
      if (!named && kwonly.empty())
        ast_err_at(m, "named arguments must follow bare *", dstar_at ? *dstar_at : star_at);
    };

    if (at_name()) {
      any = true;
      positional();
      while (at_op(",")) {
        advance();
        if (at_name()) {
          positional();
          continue;
        }
        if (at_op("/") && !slash_seen) {
          advance();
          slash_seen = true;
          posonly = std::move(args);
          args.clear();
          if (!at_op(",")) break;
          advance();
          if (at_name()) {
            positional();
            continue;
          }
          if (at_op("*")) {
            star();
          } else if (at_op("**")) {
            double_star();
          }
          break;
        }
        if (at_op("*")) {
          star();
        } else if (at_op("**")) {
          double_star();
        }
        break;
      }
    } else if (at_op("*")) {
      any = true;
      star();
    } else if (at_op("**")) {
      any = true;
      double_star();
    }

    Node n;
    n.kind = NodeKind::Arguments;
    if (any) {
      const Token& p = prev();
      n.span = {s.line, s.col, p.end_line, p.end_col};
    } else {
      n.span = {s.line, s.col, s.line, s.col};
    }
    const NodeId id = ast_.add(std::move(n));
    set(id, field::kArgsPosonly, posonly);
    set(id, field::kArgsArgs, args);
    set(id, field::kArgsVararg, vararg);
    set(id, field::kArgsKwonly, kwonly);
    set(id, field::kArgsKwDefaults, kw_defaults);
    set(id, field::kArgsKwarg, kwarg);
    set(id, field::kArgsDefaults, defaults);
    return id;
  }

  // ---- expressions ----------------------------------------------------------

  NodeId testlist_star_expr() {
    const Pos s = start();
    std::vector<NodeId> elts;
    elts.push_back(at_op("*") ? star_expr() : test());
    bool comma = false;
    while (at_op(",")) {
      advance();
      comma = true;
      if (!starts_test() && !at_op("*")) break;
      elts.push_back(at_op("*") ? star_expr() : test());
    }
    if (!comma) return elts.front();
    const NodeId t = make(NodeKind::Tuple, s);
    set(t, field::kElts, elts);
    return t;
  }

  NodeId testlist_star_expr_required() {
    if (!starts_test() && !at_op("*")) fail();
    return testlist_star_expr();
  }

  NodeId testlist() {
    const Pos s = start();
    std::vector<NodeId> elts;
    elts.push_back(test());
    bool comma = false;
    while (at_op(",")) {
      advance();
      comma = true;
      if (!starts_test()) break;
      elts.push_back(test());
    }
    if (!comma) return elts.front();
    const NodeId t = make(NodeKind::Tuple, s);
    set(t, field::kElts, elts);
    return t;
  }

  // exprlist: (expr|star_expr) (',' (expr|star_expr))* [','], each element
  // given `ctx` as it is built.
  void exprlist(std::vector<NodeId>& elts, bool& comma, ExprContext ctx) {
    auto one = [&]() {
      const Pos es = start();
      const NodeId e = at_op("*") ? star_expr() : expr();
      set_context(e, ctx, es);
      elts.push_back(e);
    };
    one();
    while (at_op(",")) {
      advance();
      comma = true;
      if (!starts_expr() && !at_op("*")) break;
      one();
    }
  }

  NodeId namedexpr_test() {
    const Pos s = start();
    const NodeId t = test();
    if (!at_op(":=")) return t;
    advance();
    const NodeId v = test();
    if (ast_.kind(t) != NodeKind::Name) {
      ast_err(std::string("cannot use named assignment with ") + expr_name(ast_.node(t)), s);
    } else {
      set_context(t, ExprContext::Store, s);
    }
    const NodeId id = make(NodeKind::NamedExpr, s);
    set(id, field::kNamedTarget, t);
    set(id, field::kNamedValue, v);
    return id;
  }

  NodeId test() {
    DepthGuard guard(*this);
    if (at_kw("lambda")) return lambdef(false);
    const Pos s = start();
    const NodeId body = or_test();
    if (!at_kw("if")) return body;
    advance();
    const NodeId cond = or_test();
    expect_kw("else");
    const NodeId orelse = test();
    const NodeId id = make(NodeKind::IfExp, s);
    set(id, field::kTest, cond);
    set(id, field::kIfBody, body);
    set(id, field::kOrelse, orelse);
    return id;
  }

  NodeId test_nocond() {
    if (at_kw("lambda")) return lambdef(true);
    return or_test();
  }

  NodeId lambdef(bool nocond) {
    DepthGuard guard(*this);
    const Pos s = start();
    advance();
    const NodeId args = parameters(false);
    expect_op(":");
    const NodeId body = nocond ? test_nocond() : test();
    const NodeId id = make(NodeKind::Lambda, s);
    set(id, field::kLambdaArgs, args);
    set(id, field::kLambdaBody, body);
    return id;
  }

  NodeId bool_chain(bool is_or) {
    const Pos s = start();
    const NodeId first = is_or ? bool_chain(false) : not_test();
    const std::string_view kw = is_or ? "or" : "and";
    if (!at_kw(kw)) return first;
    std::vector<NodeId> values{first};
    while (at_kw(kw)) {
      advance();
      values.push_back(is_or ? bool_chain(false) : not_test());
    }
    const NodeId id = make(NodeKind::BoolOp, s);
    ast_.node(id).op = static_cast<std::uint8_t>(is_or ? BoolOperator::Or : BoolOperator::And);
    set(id, field::kBoolValues, values);
    return id;
  }

  NodeId or_test() { return bool_chain(true); }

  NodeId not_test() {
    DepthGuard guard(*this);
    if (at_kw("not")) {
      const Pos s = start();
      advance();
      const NodeId operand = not_test();
      const NodeId id = make(NodeKind::UnaryOp, s);
      ast_.node(id).op = static_cast<std::uint8_t>(UnaryOperator::Not);
      set(id, field::kOperand, operand);
      return id;
    }
    return comparison();
  }

  bool comp_op() {
    const Token& t = cur();
    if (t.kind == TokenKind::Op) {
      if (t.text == "<" || t.text == ">" || t.text == "==" || t.text == ">=" || t.text == "<=" || t.text == "!=") {
        advance();
        return true;
      }
      return false;
    }
    if (at_kw("in")) {
      advance();
      return true;
    }
    if (at_kw("not")) {
      advance();
      expect_kw("in");
      return true;
    }
    if (at_kw("is")) {
      advance();
      if (at_kw("not")) advance();
      return true;
    }
    return false;
  }

  NodeId comparison() {
    const Pos s = start();
    const NodeId left = expr();
    std::vector<NodeId> comparators;
    while (comp_op()) comparators.push_back(expr());
    if (comparators.empty()) return left;
    const NodeId id = make(NodeKind::Compare, s);
    set(id, field::kCompareLeft, left);
    set(id, field::kCompareComparators, comparators);
    return id;
  }

  NodeId star_expr() {
    const Pos s = start();
    advance();
    const NodeId v = expr();
    const NodeId id = make(NodeKind::Starred, s);
    set(id, field::kValue, v);
    return id;
  }

  // Binary operator levels from '|' down to the multiplicative operators.
  NodeId binary(int level) {
    if (level == 6) return factor();
    const Pos s = start();
    NodeId left = binary(level + 1);
    while (true) {
      const Token& t = cur();
      if (t.kind != TokenKind::Op) break;
      std::optional<BinOperator> op;
      const std::string_view o = t.text;
      switch (level) {
        case 0:
          if (o == "|") op = BinOperator::BitOr;
          break;
        case 1:
          if (o == "^") op = BinOperator::BitXor;
          break;
        case 2:
          if (o == "&") op = BinOperator::BitAnd;
          break;
        case 3:
          if (o == "<<") op = BinOperator::LShift;
          if (o == ">>") op = BinOperator::RShift;
          break;
        case 4:
          if (o == "+") op = BinOperator::Add;
          if (o == "-") op = BinOperator::Sub;
          break;
        default:
          if (o == "*") op = BinOperator::Mult;
          if (o == "@") op = BinOperator::MatMult;
          if (o == "/") op = BinOperator::Div;
          if (o == "%") op = BinOperator::Mod;
          if (o == "//") op = BinOperator::FloorDiv;
          break;
      }
      if (!op) break;
      advance();
      const NodeId right = binary(level + 1);
      const NodeId id = make(NodeKind::BinOp, s);
      ast_.node(id).op = static_cast<std::uint8_t>(*op);
      set(id, field::kBinLeft, left);
      set(id, field::kBinRight, right);
      left = id;
    }
    return left;
  }

  NodeId expr() { return binary(0); }

  NodeId factor() {
    DepthGuard guard(*this);
    if (at_op("+") || at_op("-") || at_op("~")) {
      const Pos s = start();
      const std::string_view o = advance().text;
      const NodeId operand = factor();
      const NodeId id = make(NodeKind::UnaryOp, s);
      ast_.node(id).op = static_cast<std::uint8_t>(o == "+"   ? UnaryOperator::UAdd
                                                   : o == "-" ? UnaryOperator::USub
                                                              : UnaryOperator::Invert);
      set(id, field::kOperand, operand);
      return id;
    }
    return power();
  }

  NodeId power() {
    const Pos s = start();
    const NodeId base = atom_expr();
    if (!at_op("**")) return base;
    advance();
    const NodeId exp = factor();
    const NodeId id = make(NodeKind::BinOp, s);
    ast_.node(id).op = static_cast<std::uint8_t>(BinOperator::Pow);
    set(id, field::kBinLeft, base);
    set(id, field::kBinRight, exp);
    return id;
  }

  NodeId atom_expr() {
    const Pos s = start();
    const bool await = at_kw("await");
    if (await) advance();
    const Pos as = start();
    NodeId e = atom();
    while (true) {
      if (at_op("(")) {
        e = call_trailer(e, as, true);
      } else if (at_op("[")) {
        e = subscript_trailer(e, as);
      } else if (at_op(".")) {
        advance();
        const Token& t = expect_name();
        const NodeId a = make(NodeKind::Attribute, as);
        ast_.node(a).ident = std::string(t.text);
        set(a, field::kValue, e);
        e = a;
      } else {
        break;
      }
    }
    if (!await) return e;
    const NodeId id = make(NodeKind::Await, s);
    set(id, field::kValue, e);
    return id;
  }

  struct ArgInfo {
    enum Kind { Positional, Star, DoubleStar, Keyword, Generator, Walrus } kind;
    Pos at;
    std::size_t mark;
    std::string keyword;
  };

  NodeId call_trailer(NodeId func, Pos s, bool allow_genexp) {
    const Pos open = start();
    advance();
    std::vector<NodeId> args, keywords;
    if (!at_op(")")) arglist(args, keywords, open, allow_genexp);
    expect_op(")");
    for (NodeId a : args) {
      Node& n = ast_.node(a);
      if (n.kind == NodeKind::GeneratorExp && n.span.line == open.line && n.span.col == open.col) {
        n.span.end_line = prev().end_line;
        n.span.end_col = prev().end_col;
      }
    }
    const NodeId id = make(NodeKind::Call, s);
    set(id, field::kCallFunc, func);
    set(id, field::kCallArgs, args);
    set(id, field::kCallKeywords, keywords);
    return id;
  }

  void arglist(std::vector<NodeId>& args, std::vector<NodeId>& keywords, Pos open, bool allow_genexp) {
    const std::size_t list_mark = ast_mark();
    std::vector<ArgInfo> infos;
    std::size_t items = 0;
    bool trailing = false;
    while (true) {
      const Pos s = start();
      const std::size_t mark = ast_mark();
      if (at_op("*")) {
        advance();
        const NodeId v = test();
        const NodeId st = make(NodeKind::Starred, s);
        set(st, field::kValue, v);
        args.push_back(st);
        infos.push_back({ArgInfo::Star, s, mark, {}});
      } else if (at_op("**")) {
        advance();
        const NodeId v = test();
        const NodeId kw = make(NodeKind::Keyword, s);
        set(kw, field::kKeywordValue, v);
        keywords.push_back(kw);
        infos.push_back({ArgInfo::DoubleStar, s, mark, {}});
      } else {
        const NodeId t = test();
        if (starts_comp_for()) {
          const std::vector<NodeId> gens = comp_for();
          Node g;
          g.kind = NodeKind::GeneratorExp;
          g.span = {open.line, open.col, prev().end_line, prev().end_col};
          const NodeId id = ast_.add(std::move(g));
          set(id, field::kCompElt, t);
          set(id, field::kCompGenerators, gens);
          args.push_back(id);
          infos.push_back({ArgInfo::Generator, s, mark, {}});
        } else if (at_op(":=")) {
          advance();
          const NodeId v = test();
          if (ast_.kind(t) != NodeKind::Name) {
            ast_err(std::string("cannot use named assignment with ") + expr_name(ast_.node(t)), s);
          } else {
            set_context(t, ExprContext::Store, s);
          }
          const NodeId id = make(NodeKind::NamedExpr, s);
          set(id, field::kNamedTarget, t);
          set(id, field::kNamedValue, v);
          args.push_back(id);
          infos.push_back({ArgInfo::Walrus, s, mark, {}});
        } else if (at_op("=")) {
          advance();
          const Node& tn = ast_.node(t);
          std::string name;
          const bool bare = parenthesized_.count(t) == 0;
          if (bare && tn.kind == NodeKind::Name) {
            name = tn.ident;
          } else if (bare && tn.kind == NodeKind::Constant &&
                     (static_cast<ConstKind>(tn.op) == ConstKind::True ||
                      static_cast<ConstKind>(tn.op) == ConstKind::False ||
                      static_cast<ConstKind>(tn.op) == ConstKind::None)) {
            name = tn.value;
          }
          const NodeId v = test();
          const NodeId kw = make(NodeKind::Keyword, s);
          ast_.node(kw).ident = name;
          set(kw, field::kKeywordValue, v);
          keywords.push_back(kw);
          infos.push_back({ArgInfo::Keyword, s, mark, name});
        } else {
          args.push_back(t);
          infos.push_back({ArgInfo::Positional, s, mark, {}});
        }
      }
      ++items;
      trailing = false;
      if (!at_op(",")) break;
      advance();
      trailing = true;
      if (!starts_test() && !at_op("*") && !at_op("**")) break;
    }

    // Whole-list checks come first in the reference front-end.
    const std::size_t children = items * 2 - 1 + (trailing ? 1 : 0);
    for (const ArgInfo& a : infos) {
      if (a.kind != ArgInfo::Generator) continue;
      if (!allow_genexp) {
        ast_err_at(list_mark, "invalid syntax", a.at);
        return;
      }
      if (children > 1) {
        ast_err_at(list_mark, "Generator expression must be parenthesized", a.at);
        return;
      }
    }

    int nkeywords = 0;
    int ndoublestars = 0;
    std::vector<std::string> seen;
    for (const ArgInfo& a : infos) {
      switch (a.kind) {
        case ArgInfo::Positional:
        case ArgInfo::Walrus:
          if (nkeywords) {
            ast_err_at(a.mark,
                       ndoublestars ? "positional argument follows keyword argument unpacking"
                                    : "positional argument follows keyword argument",
                       a.at);
            return;
          }
          break;
        case ArgInfo::Star:
          if (ndoublestars) {
            ast_err_at(a.mark, "iterable argument unpacking follows keyword argument unpacking", a.at);
            return;
          }
          break;
        case ArgInfo::DoubleStar:
          ++nkeywords;
          ++ndoublestars;
          break;
        case ArgInfo::Generator: break;
        case ArgInfo::Keyword:
          if (a.keyword.empty()) {
            ast_err_at(a.mark, "expression cannot contain assignment, perhaps you meant \"==\"?", a.at);
            return;
          }
          if (a.keyword == "True" || a.keyword == "False" || a.keyword == "None" || a.keyword == "__debug__") {
            ast_err_at(a.mark, "cannot assign to " + a.keyword, a.at);
            return;
          }
          if (std::find(seen.begin(), seen.end(), a.keyword) != seen.end()) {
            ast_err_at(a.mark, "keyword argument repeated", a.at);
            return;
          }
          seen.push_back(a.keyword);
          ++nkeywords;
          break;
      }
    }
  }

  NodeId subscript_trailer(NodeId value, Pos s) {
    advance();
    const Pos ls = start();
    std::vector<NodeId> items;
    items.push_back(subscript());
    bool comma = false;
    while (at_op(",")) {
      advance();
      comma = true;
      if (!starts_test() && !at_op(":")) break;
      items.push_back(subscript());
    }
    NodeId slice = items.front();
    if (comma) {
      slice = make(NodeKind::Tuple, ls);
      set(slice, field::kElts, items);
    }
    expect_op("]");
    const NodeId id = make(NodeKind::Subscript, s);
    set(id, field::kSubValue, value);
    set(id, field::kSubSlice, slice);
    return id;
  }

  NodeId subscript() {
    const Pos s = start();
    NodeId lower = kNoNode, upper = kNoNode, step = kNoNode;
    if (!at_op(":")) {
      lower = test();
      if (!at_op(":")) return lower;
    }
    advance();
    if (starts_test()) upper = test();
    if (at_op(":")) {
      advance();
      if (starts_test()) step = test();
    }
    const NodeId id = make(NodeKind::Slice, s);
    set(id, field::kSliceLower, lower);
    set(id, field::kSliceUpper, upper);
    set(id, field::kSliceStep, step);
    return id;
  }

  std::vector<NodeId> comp_for() {
    std::vector<NodeId> gens;
    while (starts_comp_for()) {
      const Pos s = start();
      bool is_async = false;
      if (at_kw("async")) {
        advance();
        is_async = true;
      }
      expect_kw("for");
      const NodeId target = for_target();
      expect_kw("in");
      const NodeId iter = or_test();
      std::vector<NodeId> ifs;
      while (at_kw("if")) {
        advance();
        ifs.push_back(test_nocond());
      }
      const NodeId c = make(NodeKind::Comprehension, s);
      ast_.node(c).flag = is_async;
      set(c, field::kGenTarget, target);
      set(c, field::kGenIter, iter);
      set(c, field::kGenIfs, ifs);
      gens.push_back(c);
    }
    return gens;
  }

  NodeId yield_expr() {
    const Pos s = start();
    advance();
    if (at_kw("from")) {
      advance();
      const NodeId v = test();
      const NodeId id = make(NodeKind::YieldFrom, s);
      set(id, field::kValue, v);
      return id;
    }
    NodeId v = kNoNode;
    if (starts_test() || at_op("*")) v = testlist_star_expr();
    const NodeId id = make(NodeKind::Yield, s);
    set(id, field::kValue, v);
    return id;
  }

  NodeId atom() {
    DepthGuard guard(*this);
    const Token& t = cur();
    const Pos s = start();
    switch (t.kind) {
      case TokenKind::Name: {
        if (t.text == "None" || t.text == "True" || t.text == "False") {
          advance();
          const NodeId id = make(NodeKind::Constant, s);
          Node& n = ast_.node(id);
          n.op = static_cast<std::uint8_t>(t.text == "None"   ? ConstKind::None
                                           : t.text == "True" ? ConstKind::True
                                                              : ConstKind::False);
          n.value = std::string(t.text);
          return id;
        }
        if (is_keyword(t.text)) fail();
        advance();
        const NodeId id = make(NodeKind::Name, s);
        ast_.node(id).ident = std::string(t.text);
        return id;
      }
      case TokenKind::Number: {
        advance();
        const NodeId id = make(NodeKind::Constant, s);
        Node& n = ast_.node(id);
        n.value = std::string(t.text);
        n.op = static_cast<std::uint8_t>(number_kind(t.text));
        return id;
      }
      case TokenKind::String: return strings();
      case TokenKind::Op:
        if (t.text == "(") return paren_atom();
        if (t.text == "[") return list_atom();
        if (t.text == "{") return dict_atom();
        if (t.text == "...") {
          advance();
          const NodeId id = make(NodeKind::Constant, s);
          ast_.node(id).op = static_cast<std::uint8_t>(ConstKind::Ellipsis);
          ast_.node(id).value = "...";
          return id;
        }
        break;
      default: break;
    }
    fail();
  }

  static ConstKind number_kind(std::string_view text) {
    if (text.size() > 1 && text[0] == '0' && std::isalpha(static_cast<unsigned char>(text[1])) &&
        text[1] != 'e' && text[1] != 'E' && text[1] != 'j' && text[1] != 'J')
      return ConstKind::Int;
    const char last = text.back();
    if (last == 'j' || last == 'J') return ConstKind::Complex;
    if (text.find_first_of(".eE") != std::string_view::npos) return ConstKind::Float;
    return ConstKind::Int;
  }

  NodeId comp_element() { return at_op("*") ? star_expr() : namedexpr_test(); }

  NodeId comprehension_node(NodeKind kind, Pos s, NodeId elt, const std::vector<NodeId>& gens) {
    const NodeId id = make(kind, s);
    set(id, field::kCompElt, elt);
    set(id, field::kCompGenerators, gens);
    return id;
  }

  void check_starred_elt(NodeId elt) {
    if (ast_.kind(elt) == NodeKind::Starred) ast_err("iterable unpacking cannot be used in comprehension", pos_of(elt));
  }

  NodeId paren_atom() {
    const Pos s = start();
    advance();
    if (at_op(")")) {
      advance();
      return make(NodeKind::Tuple, s);
    }
    if (at_kw("yield")) {
      const NodeId y = yield_expr();
      expect_op(")");
      parenthesized_.insert(y);
      return y;
    }
    const NodeId first = comp_element();
    if (starts_comp_for()) {
      check_starred_elt(first);
      const std::vector<NodeId> gens = comp_for();
      expect_op(")");
      return comprehension_node(NodeKind::GeneratorExp, s, first, gens);
    }
    if (at_op(",")) {
      std::vector<NodeId> elts{first};
      while (at_op(",")) {
        advance();
        if (!starts_test() && !at_op("*")) break;
        elts.push_back(comp_element());
      }
      expect_op(")");
      const NodeId t = make(NodeKind::Tuple, s);
      set(t, field::kElts, elts);
      return t;
    }
    expect_op(")");
    parenthesized_.insert(first);
    return first;
  }

  NodeId list_atom() {
    const Pos s = start();
    advance();
    if (at_op("]")) {
      advance();
      return make(NodeKind::List, s);
    }
    const NodeId first = comp_element();
    if (starts_comp_for()) {
      check_starred_elt(first);
      const std::vector<NodeId> gens = comp_for();
      expect_op("]");
      return comprehension_node(NodeKind::ListComp, s, first, gens);
    }
    std::vector<NodeId> elts{first};
    while (at_op(",")) {
      advance();
      if (!starts_test() && !at_op("*")) break;
      elts.push_back(comp_element());
    }
    expect_op("]");
    const NodeId l = make(NodeKind::List, s);
    set(l, field::kElts, elts);
    return l;
  }

  NodeId dict_atom() {
    const Pos s = start();
    const std::size_t mark = ast_mark();
    advance();
    if (at_op("}")) {
      advance();
      return make(NodeKind::Dict, s);
    }
    bool dict_mode = false;
    bool first_unpack = false;
    NodeId key = kNoNode, value = kNoNode, elt = kNoNode;
    if (at_op("**")) {
      advance();
      value = expr();
      dict_mode = true;
      first_unpack = true;
    } else if (at_op("*")) {
      elt = star_expr();
    } else {
      const NodeId k = test();
      if (at_op(":")) {
        advance();
        key = k;
        value = test();
        dict_mode = true;
      } else {
        elt = k;
      }
    }

    if (starts_comp_for()) {
      if (dict_mode) {
        if (first_unpack) ast_err_at(mark, "dict unpacking cannot be used in dict comprehension", s);
        const std::vector<NodeId> gens = comp_for();
        expect_op("}");
        const NodeId id = make(NodeKind::DictComp, s);
        set(id, field::kDictCompKey, key == kNoNode ? value : key);
        set(id, field::kDictCompValue, key == kNoNode ? kNoNode : value);
        set(id, field::kDictCompGenerators, gens);
        return id;
      }
      check_starred_elt(elt);
      const std::vector<NodeId> gens = comp_for();
      expect_op("}");
      return comprehension_node(NodeKind::SetComp, s, elt, gens);
    }

    if (dict_mode) {
      std::vector<NodeId> keys{key}, values{value};
      while (at_op(",")) {
        advance();
        if (at_op("**")) {
          advance();
          keys.push_back(kNoNode);
          values.push_back(expr());
          continue;
        }
        if (!starts_test()) break;
        keys.push_back(test());
        expect_op(":");
        values.push_back(test());
      }
      expect_op("}");
      const NodeId id = make(NodeKind::Dict, s);
      set(id, field::kDictKeys, keys);
      set(id, field::kDictValues, values);
      return id;
    }
    std::vector<NodeId> elts{elt};
    while (at_op(",")) {
      advance();
      if (!starts_test() && !at_op("*")) break;
      elts.push_back(at_op("*") ? star_expr() : test());
    }
    expect_op("}");
    const NodeId id = make(NodeKind::Set, s);
    set(id, field::kElts, elts);
    return id;
  }

  // ---- string literals --------------------------------------------------------

  NodeId strings();
  bool fstring_body(std::string_view body, std::size_t body_offset, bool raw, int lvl, std::size_t& i,
                    std::string& literal, std::vector<NodeId>& values, Pos at);
  NodeId fstring_expression(std::string_view text, std::size_t offset, Pos at, bool& ok);
  Pos buffer_pos(std::size_t offset) const;
  NodeId literal_node(std::string text) {
    const NodeId id = make(NodeKind::Constant, atom_start_);
    Node& n = ast_.node(id);
    n.op = static_cast<std::uint8_t>(ConstKind::Str);
    n.value = std::move(text);
    return id;
  }
  NodeId joined(const std::vector<NodeId>& values) {
    const NodeId id = make(NodeKind::JoinedStr, atom_start_);
    set(id, field::kJoinedValues, values);
    return id;
  }

  const Lexer& lexer_;
  const std::vector<Token>& toks_;
  Ast& ast_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  std::vector<RawError> ast_errors_;
  std::unordered_set<NodeId> parenthesized_;
  Pos atom_start_;
};

Pos Parser::buffer_pos(std::size_t offset) const {
  const std::string_view buf = lexer_.buffer();
  int line = 1;
  std::size_t line_start = 0;
  // Line starts are not exposed; scan back from the offset instead.
  for (std::size_t i = offset; i > 0; --i) {
    if (buf[i - 1] == '\n') {
      line_start = i;
      break;
    }
  }
  line += static_cast<int>(std::count(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(line_start), '\n'));
  return {line, static_cast<int>(offset - line_start)};
}

NodeId Parser::strings() {
  const Pos s = start();
  const std::size_t first = pos_;
  while (cur().kind == TokenKind::String) advance();
  const std::size_t last = pos_;
  const Pos saved_atom = atom_start_;
  atom_start_ = s;

  bool bytes_mode = false;
  bool f_mode = false;
  bool failed = false;
  std::string literal;
  std::string bytes_value;
  std::vector<NodeId> values;
  const char* buf_begin = lexer_.buffer().data();

  for (std::size_t k = first; k < last && !failed; ++k) {
    const Token& t = toks_[k];
    const StringPieces p = split_string_token(t.text);
    if (p.fstring) {
      if (k != first && bytes_mode != p.bytes) {
        ast_err("cannot mix bytes and nonbytes literals", s);
        failed = true;
        break;
      }
      bytes_mode = p.bytes;
      f_mode = true;
      const std::size_t offset = static_cast<std::size_t>(p.body.data() - buf_begin);
      std::size_t i = 0;
      if (!fstring_body(p.body, offset, p.raw, 0, i, literal, values, s)) failed = true;
      continue;
    }
    std::string decoded;
    std::string err;
    if (p.bytes) {
      if (std::any_of(p.body.begin(), p.body.end(), [](char c) { return static_cast<unsigned char>(c) >= 0x80; })) {
        ast_err("bytes can only contain ASCII literal characters.", s);
        failed = true;
        break;
      }
    }
    if (!decode_string_body(p.body, p.raw, p.bytes, decoded, err)) {
      ast_err(err, s);
      failed = true;
      break;
    }
    if (k != first && bytes_mode != p.bytes) {
      ast_err("cannot mix bytes and nonbytes literals", s);
      failed = true;
      break;
    }
    bytes_mode = p.bytes;
    if (bytes_mode) {
      bytes_value += decoded;
    } else {
      literal += decoded;
    }
  }

  NodeId result;
  if (failed) {
    result = literal_node({});
  } else if (bytes_mode) {
    result = make(NodeKind::Constant, s);
    ast_.node(result).op = static_cast<std::uint8_t>(ConstKind::Bytes);
    ast_.node(result).value = std::move(bytes_value);
  } else if (!f_mode) {
    result = literal_node(std::move(literal));
  } else {
    if (!literal.empty()) values.push_back(literal_node(std::move(literal)));
    result = joined(values);
  }
  atom_start_ = saved_atom;
  return result;
}

// Scans an f-string body starting at `i`, appending literal text and
// FormattedValue nodes. At lvl > 0 it stops at the closing '}' of a format
// spec. Returns false once an error has been recorded.
bool Parser::fstring_body(std::string_view body, std::size_t body_offset, bool raw, int lvl, std::size_t& i,
                          std::string& literal, std::vector<NodeId>& values, Pos at) {
  const std::size_t end = body.size();
  auto flush_literal = [&](std::size_t from, std::size_t to) -> bool {
    if (from == to) return true;
    std::string decoded, err;
    if (!decode_string_body(body.substr(from, to - from), raw, false, decoded, err)) {
      ast_err(err, at);
      return false;
    }
    literal += decoded;
    return true;
  };

  while (true) {
    // Literal part.
    const std::size_t lit_start = i;
    bool doubled = false;
    std::size_t s = i;
    while (s < end) {
      char ch = body[s++];
      if (!raw && ch == '\\' && s < end) {
        ch = body[s++];
        if (ch == 'N') {
          if (s < end && body[s++] == '{') {
            while (s < end && body[s++] != '}') {
            }
            continue;
          }
          break;
        }
      }
      if (ch == '{' || ch == '}') {
        if (lvl == 0) {
          if (s < end && body[s] == ch) {
            doubled = true;
            break;
          }
          if (ch == '}') {
            ast_err("f-string: single '}' is not allowed", at);
            return false;
          }
        }
        --s;
        break;
      }
    }
    if (doubled) {
      if (!flush_literal(lit_start, s)) return false;
      i = s + 1;
      continue;
    }
    if (!flush_literal(lit_start, s)) return false;
    i = s;
    if (i >= end || body[i] == '}') break;

    // Expression part, at '{'.
    if (lvl >= 2) {
      ast_err("f-string: expressions nested too deeply", at);
      return false;
    }
    ++i;
    const std::size_t expr_start = i;
    char quote = 0;
    int string_type = 0;
    std::vector<char> parens;
    for (; i < end; ++i) {
      const char ch = body[i];
      if (ch == '\\') {
        ast_err("f-string expression part cannot include a backslash", at);
        return false;
      }
      if (quote) {
        if (ch == quote) {
          if (string_type == 3) {
            if (i + 2 < end && body[i + 1] == ch && body[i + 2] == ch) {
              i += 2;
              string_type = 0;
              quote = 0;
            }
          } else {
            string_type = 0;
            quote = 0;
          }
        }
        continue;
      }
      if (ch == '\'' || ch == '"') {
        if (i + 2 < end && body[i + 1] == ch && body[i + 2] == ch) {
          string_type = 3;
          i += 2;
        } else {
          string_type = 1;
        }
        quote = ch;
      } else if (ch == '[' || ch == '{' || ch == '(') {
        if (parens.size() >= 200) {
          ast_err("f-string: too many nested parenthesis", at);
          return false;
        }
        parens.push_back(ch);
      } else if (ch == '#') {
        ast_err("f-string expression part cannot include '#'", at);
        return false;
      } else if (parens.empty() && (ch == '!' || ch == ':' || ch == '}' || ch == '=' || ch == '>' || ch == '<')) {
        if (i + 1 < end) {
          const char next = body[i + 1];
          if ((ch == '!' && next == '=') || (ch == '=' && next == '=') || (ch == '<' && next == '=') ||
              (ch == '>' && next == '=')) {
            ++i;
            continue;
          }
          if (ch == '>' || ch == '<') continue;
        }
        break;
      } else if (ch == ']' || ch == '}' || ch == ')') {
        if (parens.empty()) {
          ast_err(std::string("f-string: unmatched '") + ch + "'", at);
          return false;
        }
        const char opening = parens.back();
        parens.pop_back();
        if (!((opening == '(' && ch == ')') || (opening == '[' && ch == ']') || (opening == '{' && ch == '}'))) {
          ast_err(std::string("f-string: closing parenthesis '") + ch + "' does not match opening parenthesis '" +
                      opening + "'",
                  at);
          return false;
        }
      }
    }
    const std::size_t expr_end = i;
    if (quote) {
      ast_err("f-string: unterminated string", at);
      return false;
    }
    if (!parens.empty()) {
      ast_err(std::string("f-string: unmatched '") + parens.back() + "'", at);
      return false;
    }
    if (i >= end) {
      ast_err("f-string: expecting '}'", at);
      return false;
    }
    bool ok = true;
    const NodeId value = fstring_expression(body.substr(expr_start, expr_end - expr_start),
                                            body_offset + expr_start, at, ok);
    if (!ok) return false;

    int conversion = 0;
    if (body[i] == '=') {
      ++i;
      while (i < end && std::isspace(static_cast<unsigned char>(body[i]))) ++i;
      std::string text(body.substr(expr_start, i - expr_start));
      literal += text;
      conversion = -1;
    }
    if (i < end && body[i] == '!') {
      ++i;
      if (i >= end) {
        ast_err("f-string: expecting '}'", at);
        return false;
      }
      const char c = body[i++];
      if (c != 's' && c != 'r' && c != 'a') {
        ast_err("f-string: invalid conversion character: expected 's', 'r', or 'a'", at);
        return false;
      }
      conversion = c;
    }
    if (i >= end) {
      ast_err("f-string: expecting '}'", at);
      return false;
    }
    NodeId spec = kNoNode;
    if (body[i] == ':') {
      ++i;
      if (i >= end) {
        ast_err("f-string: expecting '}'", at);
        return false;
      }
      std::string spec_literal;
      std::vector<NodeId> spec_values;
      if (!fstring_body(body, body_offset, raw, lvl + 1, i, spec_literal, spec_values, at)) return false;
      if (!spec_literal.empty()) spec_values.push_back(literal_node(std::move(spec_literal)));
      spec = joined(spec_values);
    }
    if (i >= end || body[i] != '}') {
      ast_err("f-string: expecting '}'", at);
      return false;
    }
    ++i;
    if (conversion == -1) conversion = spec == kNoNode ? 'r' : 0;

    if (!literal.empty()) {
      values.push_back(literal_node(std::move(literal)));
      literal.clear();
    }
    const NodeId fv = make(NodeKind::FormattedValue, atom_start_);
    ast_.node(fv).op = static_cast<std::uint8_t>(conversion);
    set(fv, field::kFvValue, value);
    set(fv, field::kFvFormatSpec, spec);
    values.push_back(fv);
  }
  if (lvl != 0 && (i >= end || body[i] != '}')) {
    ast_err("f-string: expecting '}'", at);
    return false;
  }
  return true;
}

// Compiles an f-string replacement field as the expression "(text)" and
// moves the resulting nodes to their position in the enclosing source.
NodeId Parser::fstring_expression(std::string_view text, std::size_t offset, Pos at, bool& ok) {
  if (std::all_of(text.begin(), text.end(), [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\f'; })) {
    ast_err("f-string: empty expression not allowed", at);
    ok = false;
    return kNoNode;
  }
  std::string wrapped;
  wrapped.reserve(text.size() + 2);
  wrapped.push_back('(');
  wrapped.append(text);
  wrapped.push_back(')');
  const Lexer inner_lexer(wrapped);
  Ast inner;
  Parser inner_parser(inner_lexer, inner);
  inner_parser.depth_ = depth_;
  const Pos origin = buffer_pos(offset);
  auto shift = [&](int& line, int& col) {
    if (line == 1) col += origin.col - 1;
    line += origin.line - 1;
  };
  try {
    inner_parser.eval_input();
  } catch (SyntaxFailure& f) {
    RawError e = std::move(f.err);
    e.has_text = false;
    ast_errors_.push_back(std::move(e));
    ok = false;
    return kNoNode;
  }
  if (!inner_parser.ast_errors().empty()) {
    RawError e = inner_parser.ast_errors().front();
    shift(e.line, e.col);
    ast_errors_.push_back(std::move(e));
    ok = false;
    return kNoNode;
  }
  for (std::size_t k = 0; k < inner.size(); ++k) {
    Node& n = inner.node(static_cast<NodeId>(k));
    shift(n.span.line, n.span.col);
    shift(n.span.end_line, n.span.end_col);
    shift(n.lineno, n.col_offset);
  }
  return ast_.import_subtree(inner, inner.root());
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

// Legacy print/exec statement messages, as produced when a plain
// SyntaxError carries its source line.
bool legacy_statement(std::string_view text, std::size_t start, std::string& msg) {
  while (start < text.size() && is_space(text[start])) ++start;
  if (start == text.size()) return false;
  const std::string_view rest = text.substr(start);
  if (rest.substr(0, 6) == "print ") {
    std::size_t end = text.find(';', start + 6);
    if (end == std::string_view::npos) end = text.size();
    std::string_view data = text.substr(start + 6, end - (start + 6));
    while (!data.empty() && (data.front() == ' ' || data.front() == '\t' || data.front() == '\r' || data.front() == '\n'))
      data.remove_prefix(1);
    while (!data.empty() && (data.back() == ' ' || data.back() == '\t' || data.back() == '\r' || data.back() == '\n'))
      data.remove_suffix(1);
    const char* end_arg = (!data.empty() && data.back() == ',') ? " end=\" \"" : "";
    msg = "Missing parentheses in call to 'print'. Did you mean print(" + std::string(data) + end_arg + ")?";
    return true;
  }
  if (rest.substr(0, 5) == "exec ") {
    msg = "Missing parentheses in call to 'exec'";
    return true;
  }
  return false;
}

void rewrite_legacy(RawError& e, std::string_view line_text) {
  if (!e.has_text || e.cls != ErrorClass::Syntax) return;
  if (line_text.find('(') != std::string_view::npos) return;
  std::string msg;
  if (legacy_statement(line_text, 0, msg)) {
    e.message = std::move(msg);
    return;
  }
  const std::size_t colon = line_text.find(':');
  if (colon != std::string_view::npos && legacy_statement(line_text, colon + 1, msg)) e.message = std::move(msg);
}

}  // namespace

ParseResult parse_module(const SourceText& source) {
  const Lexer lexer(source.view());
  Ast ast;
  std::optional<RawError> err;
  {
    Parser parser(lexer, ast);
    try {
      parser.file_input();
    } catch (SyntaxFailure& f) {
      err = std::move(f.err);
    }
    if (!err && !parser.ast_errors().empty()) err = parser.ast_errors().front();
  }
  if (!err) return ParseResult(std::move(ast));

  rewrite_legacy(*err, lexer.line_text(err->line));
  int last_line = 0, last_col = 0;
  for (const Token& t : lexer.tokens()) {
    if (t.kind == TokenKind::Name || t.kind == TokenKind::Number || t.kind == TokenKind::String ||
        t.kind == TokenKind::Op) {
      last_line = t.line;
      last_col = t.col;
    }
  }
  SyntaxErrorReport report;
  report.line = std::max(1, err->line);
  report.column = std::max(0, err->col);
  report.raw_message = std::move(err->message);
  report.category = category_for_message(report.raw_message);
  if (report.category == AstErrorCategory::InvalidSyntax &&
      (report.line > last_line || (report.line == last_line && report.column >= last_col)))
    report.category = AstErrorCategory::InvalidSyntaxAtEof;
  report.is_eof = is_eof_category(report.category);
  return ParseResult(std::move(report));
}

}  // namespace complint::pyast
