// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace complint::pyast {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = 0xFFFFFFFFu;

/// Source span: 1-based lines, 0-based byte columns, end exclusive.
struct Span {
  int line = 1;
  int col = 0;
  int end_line = 1;
  int end_col = 0;

  friend bool operator==(const Span&, const Span&) = default;
};

inline bool span_contains(const Span& outer, const Span& inner) noexcept {
  const bool starts_after = outer.line < inner.line || (outer.line == inner.line && outer.col <= inner.col);
  const bool ends_before =
      inner.end_line < outer.end_line || (inner.end_line == outer.end_line && inner.end_col <= outer.end_col);
  return starts_after && ends_before;
}

enum class NodeKind : std::uint8_t {
  Module,
  // statements
  FunctionDef,
  AsyncFunctionDef,
  ClassDef,
  Return,
  Delete,
  Assign,
  AugAssign,
  AnnAssign,
  For,
  AsyncFor,
  While,
  If,
  With,
  AsyncWith,
  Raise,
  Try,
  Assert,
  Import,
  ImportFrom,
  Global,
  Nonlocal,
  Expr,
  Pass,
  Break,
  Continue,
  // expressions
  BoolOp,
  NamedExpr,
  BinOp,
  UnaryOp,
  Lambda,
  IfExp,
  Dict,
  Set,
  ListComp,
  SetComp,
  DictComp,
  GeneratorExp,
  Await,
  Yield,
  YieldFrom,
  Compare,
  Call,
  FormattedValue,
  JoinedStr,
  Constant,
  Attribute,
  Subscript,
  Starred,
  Name,
  List,
  Tuple,
  Slice,
  // auxiliary
  Comprehension,
  ExceptHandler,
  Arguments,
  Arg,
  Keyword,
  Alias,
  WithItem,
};

inline constexpr std::size_t kNodeKindCount = static_cast<std::size_t>(NodeKind::WithItem) + 1;

std::string_view node_kind_name(NodeKind kind) noexcept;
bool is_statement(NodeKind kind) noexcept;
bool is_expression(NodeKind kind) noexcept;

enum class ExprContext : std::uint8_t { Load, Store, Del };

enum class ConstKind : std::uint8_t { Str, Bytes, Int, Float, Complex, True, False, None, Ellipsis };

/// Binary/augmented operators, stored in Node::op for BinOp and AugAssign.
enum class BinOperator : std::uint8_t { Add, Sub, Mult, MatMult, Div, Mod, Pow, LShift, RShift, BitOr, BitXor, BitAnd, FloorDiv };
enum class UnaryOperator : std::uint8_t { Invert, Not, UAdd, USub };
enum class BoolOperator : std::uint8_t { And, Or };

/// Child-field slots, in the order of CPython's `_fields` for each kind.
namespace field {
inline constexpr int kBody = 0;  // Module

inline constexpr int kFnArgs = 0, kFnBody = 1, kFnDecorators = 2, kFnReturns = 3;  // (Async)FunctionDef
inline constexpr int kClassBases = 0, kClassKeywords = 1, kClassBody = 2, kClassDecorators = 3;
inline constexpr int kValue = 0;  // Return, Expr, Await, Yield, YieldFrom, Starred, Attribute
inline constexpr int kTargets = 0;  // Delete
inline constexpr int kAssignTargets = 0, kAssignValue = 1;
inline constexpr int kAugTarget = 0, kAugValue = 1;
inline constexpr int kAnnTarget = 0, kAnnAnnotation = 1, kAnnValue = 2;
inline constexpr int kForTarget = 0, kForIter = 1, kForBody = 2, kForOrelse = 3;
inline constexpr int kTest = 0, kIfBody = 1, kOrelse = 2;  // While, If, IfExp
inline constexpr int kWithItems = 0, kWithBody = 1;
inline constexpr int kRaiseExc = 0, kRaiseCause = 1;
inline constexpr int kTryBody = 0, kTryHandlers = 1, kTryOrelse = 2, kTryFinalbody = 3;
inline constexpr int kAssertTest = 0, kAssertMsg = 1;
inline constexpr int kImportNames = 0;  // Import, ImportFrom
inline constexpr int kBoolValues = 0;
inline constexpr int kNamedTarget = 0, kNamedValue = 1;
inline constexpr int kBinLeft = 0, kBinRight = 1;
inline constexpr int kOperand = 0;
inline constexpr int kLambdaArgs = 0, kLambdaBody = 1;
inline constexpr int kDictKeys = 0, kDictValues = 1;
inline constexpr int kElts = 0;  // Set, List, Tuple
inline constexpr int kCompElt = 0, kCompGenerators = 1;  // ListComp, SetComp, GeneratorExp
inline constexpr int kDictCompKey = 0, kDictCompValue = 1, kDictCompGenerators = 2;
inline constexpr int kCompareLeft = 0, kCompareComparators = 1;
inline constexpr int kCallFunc = 0, kCallArgs = 1, kCallKeywords = 2;
inline constexpr int kFvValue = 0, kFvFormatSpec = 1;
inline constexpr int kJoinedValues = 0;
inline constexpr int kSubValue = 0, kSubSlice = 1;
inline constexpr int kSliceLower = 0, kSliceUpper = 1, kSliceStep = 2;
inline constexpr int kGenTarget = 0, kGenIter = 1, kGenIfs = 2;  // Comprehension
inline constexpr int kHandlerType = 0, kHandlerBody = 1;
inline constexpr int kArgsPosonly = 0, kArgsArgs = 1, kArgsVararg = 2, kArgsKwonly = 3, kArgsKwDefaults = 4,
                     kArgsKwarg = 5, kArgsDefaults = 6;
inline constexpr int kArgAnnotation = 0;
inline constexpr int kKeywordValue = 0;
inline constexpr int kWithItemExpr = 0, kWithItemVars = 1;
inline constexpr int kMaxFields = 7;
}  // namespace field

/// Field names per kind (CPython spelling), for generic traversal and dumps.
std::span<const std::string_view> field_names(NodeKind kind) noexcept;

struct FieldRange {
  std::uint32_t begin = 0;
  std::uint32_t count = 0;
};

struct Node {
  NodeKind kind = NodeKind::Module;
  ExprContext ctx = ExprContext::Load;
  /// BinOperator/UnaryOperator/BoolOperator, ConstKind for Constant,
  /// conversion character for FormattedValue (0 if none).
  std::uint8_t op = 0;
  /// Comprehension: is_async. AnnAssign: simple target.
  bool flag = false;
  std::int32_t level = 0;  // ImportFrom
  /// Full extent; decorated definitions include their decorators.
  Span span;
  /// Position CPython reports (lineno/col_offset). Filled from span start by
  /// Ast::add unless set; differs only for decorated definitions.
  int lineno = 0;
  int col_offset = -1;
  NodeId parent = kNoNode;
  /// Name.id, FunctionDef/ClassDef.name, Attribute.attr, Arg.arg, Keyword.arg,
  /// Alias.name, ExceptHandler.name, ImportFrom.module.
  std::string ident;
  std::string asname;  // Alias
  std::string value;   // Constant: decoded str value (UTF-8) or raw literal text
  std::vector<std::string> names;  // Global, Nonlocal
  std::array<FieldRange, field::kMaxFields> fields{};
};

/// Arena-backed syntax tree. Children live in a shared pool; every child
/// records its parent.
class Ast {
 public:
  Ast() = default;

  NodeId root() const noexcept { return root_; }
  void set_root(NodeId id) noexcept { root_ = id; }

  const Node& node(NodeId id) const { return nodes_[id]; }
  Node& node(NodeId id) { return nodes_[id]; }
  std::size_t size() const noexcept { return nodes_.size(); }

  NodeKind kind(NodeId id) const { return nodes_[id].kind; }

  std::span<const NodeId> children(NodeId id, int field_index) const {
    const FieldRange r = nodes_[id].fields[static_cast<std::size_t>(field_index)];
    return std::span<const NodeId>(pool_.data() + r.begin, r.count);
  }

  /// First child of a single-valued field, or kNoNode.
  NodeId child(NodeId id, int field_index) const {
    const auto c = children(id, field_index);
    return c.empty() ? kNoNode : c.front();
  }

  NodeId add(Node n) {
    if (n.lineno == 0) {
      n.lineno = n.span.line;
      n.col_offset = n.span.col;
    }
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  /// Assigns a field. kNoNode entries are kept (Dict keys for `**x`).
  void set_field(NodeId id, int field_index, std::span<const NodeId> kids);
  void set_field(NodeId id, int field_index, NodeId kid) {
    if (kid == kNoNode) {
      set_field(id, field_index, std::span<const NodeId>());
    } else {
      set_field(id, field_index, std::span<const NodeId>(&kid, 1));
    }
  }

  /// Deep-copies the subtree rooted at `other_root` from another tree and
  /// returns the id of the copy. The copy's root has no parent.
  NodeId import_subtree(const Ast& other, NodeId other_root);

  /// Every child in field order (skipping kNoNode).
  template <typename F>
  void for_each_child(NodeId id, F&& fn) const {
    const Node& n = nodes_[id];
    const auto nf = field_names(n.kind).size();
    for (std::size_t f = 0; f < nf; ++f) {
      const FieldRange r = n.fields[f];
      for (std::uint32_t i = 0; i < r.count; ++i) {
        const NodeId c = pool_[r.begin + i];
        if (c != kNoNode) fn(c);
      }
    }
  }

 private:
  std::vector<Node> nodes_;
  std::vector<NodeId> pool_;
  NodeId root_ = kNoNode;
};

/// Indented dump, one node per line: `Kind ident @line:col`. Used by tests
/// and the CLI's debug output.
std::string dump(const Ast& ast, NodeId id = kNoNode);

}  // namespace complint::pyast
