// SPDX-License-Identifier: Apache-2.0
#include "complint/pyast/ast.hpp"

#include <array>
#include <functional>
#include <string>
#include <utility>

namespace complint::pyast {

namespace {

using Names = std::span<const std::string_view>;

constexpr std::string_view kModule[] = {"body"};
constexpr std::string_view kFunctionDef[] = {"args", "body", "decorator_list", "returns"};
constexpr std::string_view kClassDef[] = {"bases", "keywords", "body", "decorator_list"};
constexpr std::string_view kValueOnly[] = {"value"};
constexpr std::string_view kTargetsOnly[] = {"targets"};
constexpr std::string_view kAssign[] = {"targets", "value"};
constexpr std::string_view kAugAssign[] = {"target", "value"};
constexpr std::string_view kAnnAssign[] = {"target", "annotation", "value"};
constexpr std::string_view kFor[] = {"target", "iter", "body", "orelse"};
constexpr std::string_view kTestBodyOrelse[] = {"test", "body", "orelse"};
constexpr std::string_view kWith[] = {"items", "body"};
constexpr std::string_view kRaise[] = {"exc", "cause"};
constexpr std::string_view kTry[] = {"body", "handlers", "orelse", "finalbody"};
constexpr std::string_view kAssert[] = {"test", "msg"};
constexpr std::string_view kNamesOnly[] = {"names"};
constexpr std::string_view kBoolOp[] = {"values"};
constexpr std::string_view kNamedExpr[] = {"target", "value"};
constexpr std::string_view kBinOp[] = {"left", "right"};
constexpr std::string_view kUnaryOp[] = {"operand"};
constexpr std::string_view kLambda[] = {"args", "body"};
constexpr std::string_view kDict[] = {"keys", "values"};
constexpr std::string_view kElts[] = {"elts"};
constexpr std::string_view kComp[] = {"elt", "generators"};
constexpr std::string_view kDictComp[] = {"key", "value", "generators"};
constexpr std::string_view kCompare[] = {"left", "comparators"};
constexpr std::string_view kCall[] = {"func", "args", "keywords"};
constexpr std::string_view kFormattedValue[] = {"value", "format_spec"};
constexpr std::string_view kJoinedStr[] = {"values"};
constexpr std::string_view kSubscript[] = {"value", "slice"};
constexpr std::string_view kSlice[] = {"lower", "upper", "step"};
constexpr std::string_view kComprehension[] = {"target", "iter", "ifs"};
constexpr std::string_view kExceptHandler[] = {"type", "body"};
constexpr std::string_view kArguments[] = {"posonlyargs", "args",     "vararg",  "kwonlyargs",
                                           "kw_defaults", "kwarg",    "defaults"};
constexpr std::string_view kArg[] = {"annotation"};
constexpr std::string_view kWithItem[] = {"context_expr", "optional_vars"};

struct KindInfo {
  std::string_view name;
  Names fields;
};

constexpr std::array<KindInfo, kNodeKindCount> kKinds = {{
    {"Module", kModule},
    {"FunctionDef", kFunctionDef},
    {"AsyncFunctionDef", kFunctionDef},
    {"ClassDef", kClassDef},
    {"Return", kValueOnly},
    {"Delete", kTargetsOnly},
    {"Assign", kAssign},
    {"AugAssign", kAugAssign},
    {"AnnAssign", kAnnAssign},
    {"For", kFor},
    {"AsyncFor", kFor},
    {"While", kTestBodyOrelse},
    {"If", kTestBodyOrelse},
    {"With", kWith},
    {"AsyncWith", kWith},
    {"Raise", kRaise},
    {"Try", kTry},
    {"Assert", kAssert},
    {"Import", kNamesOnly},
    {"ImportFrom", kNamesOnly},
    {"Global", {}},
    {"Nonlocal", {}},
    {"Expr", kValueOnly},
    {"Pass", {}},
    {"Break", {}},
    {"Continue", {}},
    {"BoolOp", kBoolOp},
    {"NamedExpr", kNamedExpr},
    {"BinOp", kBinOp},
    {"UnaryOp", kUnaryOp},
    {"Lambda", kLambda},
    {"IfExp", kTestBodyOrelse},
    {"Dict", kDict},
    {"Set", kElts},
    {"ListComp", kComp},
    {"SetComp", kComp},
    {"DictComp", kDictComp},
    {"GeneratorExp", kComp},
    {"Await", kValueOnly},
    {"Yield", kValueOnly},
    {"YieldFrom", kValueOnly},
    {"Compare", kCompare},
    {"Call", kCall},
    {"FormattedValue", kFormattedValue},
    {"JoinedStr", kJoinedStr},
    {"Constant", {}},
    {"Attribute", kValueOnly},
    {"Subscript", kSubscript},
    {"Starred", kValueOnly},
    {"Name", {}},
    {"List", kElts},
    {"Tuple", kElts},
    {"Slice", kSlice},
    {"Comprehension", kComprehension},
    {"ExceptHandler", kExceptHandler},
    {"Arguments", kArguments},
    {"Arg", kArg},
    {"Keyword", kValueOnly},
    {"Alias", {}},
    {"WithItem", kWithItem},
}};

}  // namespace

std::string_view node_kind_name(NodeKind kind) noexcept { return kKinds[static_cast<std::size_t>(kind)].name; }

std::span<const std::string_view> field_names(NodeKind kind) noexcept {
  return kKinds[static_cast<std::size_t>(kind)].fields;
}

bool is_statement(NodeKind kind) noexcept { return kind >= NodeKind::FunctionDef && kind <= NodeKind::Continue; }

bool is_expression(NodeKind kind) noexcept { return kind >= NodeKind::BoolOp && kind <= NodeKind::Slice; }

void Ast::set_field(NodeId id, int field_index, std::span<const NodeId> kids) {
  FieldRange r;
  r.begin = static_cast<std::uint32_t>(pool_.size());
  r.count = static_cast<std::uint32_t>(kids.size());
  pool_.insert(pool_.end(), kids.begin(), kids.end());
  nodes_[id].fields[static_cast<std::size_t>(field_index)] = r;
  for (NodeId k : kids)
    if (k != kNoNode) nodes_[k].parent = id;
}

NodeId Ast::import_subtree(const Ast& other, NodeId other_root) {
  Node copy = other.node(other_root);
  copy.parent = kNoNode;
  copy.fields = {};
  const NodeId id = add(std::move(copy));
  const auto nf = field_names(other.kind(other_root)).size();
  for (std::size_t f = 0; f < nf; ++f) {
    std::vector<NodeId> kids;
    for (NodeId c : other.children(other_root, static_cast<int>(f)))
      kids.push_back(c == kNoNode ? kNoNode : import_subtree(other, c));
    set_field(id, static_cast<int>(f), kids);
  }
  return id;
}

std::string dump(const Ast& ast, NodeId id) {
  if (id == kNoNode) id = ast.root();
  std::string out;
  std::function<void(NodeId, int)> rec = [&](NodeId n, int depth) {
    const Node& nd = ast.node(n);
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    out += node_kind_name(nd.kind);
    if (!nd.ident.empty()) out += " " + nd.ident;
    if (!nd.asname.empty()) out += " as " + nd.asname;
    for (const auto& g : nd.names) out += " " + g;
    if (nd.kind == NodeKind::Name || nd.kind == NodeKind::Attribute || nd.kind == NodeKind::Subscript ||
        nd.kind == NodeKind::Starred || nd.kind == NodeKind::List || nd.kind == NodeKind::Tuple) {
      if (nd.ctx == ExprContext::Store) out += " [store]";
      if (nd.ctx == ExprContext::Del) out += " [del]";
    }
    out += " @" + std::to_string(nd.span.line) + ":" + std::to_string(nd.span.col);
    out += "\n";
    ast.for_each_child(n, [&](NodeId c) { rec(c, depth + 1); });
  };
  if (id != kNoNode) rec(id, 0);
  return out;
}

}  // namespace complint::pyast
