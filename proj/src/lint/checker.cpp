// SPDX-License-Identifier: Apache-2.0
#include "checker.hpp"

#include <algorithm>
#include <array>

#include "complint/lint/lint.hpp"
#include "complint/pyast/parser.hpp"

namespace complint::lint::detail {

namespace f = pyast::field;
using pyast::ConstKind;
using pyast::ExprContext;
using pyast::NodeKind;

namespace {

constexpr std::uint32_t bit(int field) { return 1u << static_cast<unsigned>(field); }

bool has_elts_or_ctx(NodeKind k) {
  switch (k) {
    case NodeKind::Tuple:
    case NodeKind::List:
    case NodeKind::Set:
    case NodeKind::Name:
    case NodeKind::Attribute:
    case NodeKind::Subscript:
    case NodeKind::Starred:
      return true;
    default:
      return false;
  }
}

bool is_importation(BClass c) {
  return c == BClass::Importation || c == BClass::SubmoduleImportation || c == BClass::ImportationFrom ||
         c == BClass::StarImportation || c == BClass::FutureImportation;
}

bool is_definition(BClass c) {
  return c == BClass::Builtin || is_importation(c) || c == BClass::FunctionDefinition ||
         c == BClass::ClassDefinition;
}

bool is_typing_module(std::string_view m) { return m == "typing" || m == "typing_extensions"; }

bool is_str_constant(const pyast::Node& n) {
  return n.kind == NodeKind::Constant && static_cast<ConstKind>(n.op) == ConstKind::Str;
}

std::string last_segment(const std::string& dotted) {
  const auto pos = dotted.rfind('.');
  return pos == std::string::npos ? dotted : dotted.substr(pos + 1);
}

bool has_alias(const BindingRec& rec) { return last_segment(rec.full_name) != rec.name; }

/// Field visiting order: `iter`, else `generators`, else `value` goes first.
struct FieldOrders {
  std::array<std::array<int, f::kMaxFields>, pyast::kNodeKindCount> order{};
  std::array<int, pyast::kNodeKindCount> count{};

  FieldOrders() {
    for (std::size_t k = 0; k < pyast::kNodeKindCount; ++k) {
      const auto names = pyast::field_names(static_cast<NodeKind>(k));
      const int n = static_cast<int>(names.size());
      std::string_view key;
      for (auto nm : names) {
        if (nm == "iter") key = "iter";
      }
      if (key.empty()) {
        for (auto nm : names) {
          if (nm == "generators") key = "generators";
        }
      }
      if (key.empty()) key = "value";
      int pos = 0;
      for (int i = 0; i < n; ++i) {
        if (names[static_cast<std::size_t>(i)] == key) order[k][static_cast<std::size_t>(pos++)] = i;
      }
      for (int i = 0; i < n; ++i) {
        if (names[static_cast<std::size_t>(i)] != key) order[k][static_cast<std::size_t>(pos++)] = i;
      }
      count[k] = n;
    }
  }
};

const FieldOrders& field_orders() {
  static const FieldOrders orders;
  return orders;
}

}  // namespace

std::vector<std::pair<std::string, int>> NameTable::items() const {
  std::vector<std::tuple<std::uint64_t, std::string, int>> tmp;
  tmp.reserve(map_.size());
  for (const auto& [name, v] : map_) tmp.emplace_back(v.second, name, v.first);
  std::sort(tmp.begin(), tmp.end());
  std::vector<std::pair<std::string, int>> out;
  out.reserve(tmp.size());
  for (auto& [seq, name, id] : tmp) out.emplace_back(std::move(name), id);
  return out;
}

Checker::Checker(const pyast::Ast& ast) : t_(ast), root_(ast.root()) {
  parent_.assign(t_.size(), kNoNode);
  depth_.assign(t_.size(), 0);
  except_handlers_.emplace_back();
}

int Checker::new_binding(BClass cls, std::string name, NodeId source) {
  BindingRec rec;
  rec.cls = cls;
  rec.name = std::move(name);
  rec.source = source;
  b_.push_back(std::move(rec));
  return static_cast<int>(b_.size() - 1);
}

void Checker::push_scope(SKind k, NodeId n) {
  ScopeRec rec;
  rec.kind = k;
  rec.node = n;
  rec.parent = stack_.empty() ? -1 : stack_.back();
  if (k == SKind::Function) {
    rec.globals = {"__tracebackhide__", "__traceback_info__", "__traceback_supplement__"};
  }
  s_.push_back(std::move(rec));
  stack_.push_back(static_cast<int>(s_.size() - 1));
}

void Checker::pop_scope() {
  dead_.push_back(stack_.back());
  stack_.pop_back();
}

void Checker::defer_function(std::function<void()> fn) { deferred_functions_.push_back({std::move(fn), stack_}); }

void Checker::defer_assignment(std::function<void()> fn) {
  deferred_assignments_.push_back({std::move(fn), stack_});
}

void Checker::run_deferred(std::vector<Deferred>& list) {
  // The list grows while it runs; index-based iteration picks up new items.
  for (std::size_t i = 0; i < list.size(); ++i) {
    stack_ = list[i].stack;
    auto fn = list[i].fn;
    fn();
  }
}

void Checker::report(LintCheckKind k, NodeId at, std::string name, std::optional<int> related) {
  const auto& n = node(at);
  messages_.push_back(Message{k, std::move(name), n.lineno, n.col_offset, related, false, {}});
}

void Checker::run() {
  push_scope(SKind::Module, root_);
  auto& module = scope();
  module.names.reserve(256);
  for (auto name : builtin_names()) {
    const int id = new_binding(BClass::Builtin, std::string(name), kNoNode);
    module.names.set(b(id).name, id);
  }
  handle_children(root_);
  in_deferred_ = true;
  run_deferred(deferred_functions_);
  run_deferred(deferred_assignments_);
  stack_.resize(1);
  pop_scope();
  check_dead_scopes();
}

// ---------------------------------------------------------------------------
// traversal

void Checker::handle_node(NodeId n, NodeId parent) {
  if (n == kNoNode) return;
  if (parent_.size() < t_.size()) {
    parent_.resize(t_.size(), kNoNode);
    depth_.resize(t_.size(), 0);
  }
  ++node_depth_;
  depth_[n] = node_depth_;
  parent_[n] = parent;
  dispatch(n);
  --node_depth_;
}

void Checker::handle_children(NodeId n, std::uint32_t omit) {
  const auto& fo = field_orders();
  const auto k = static_cast<std::size_t>(kind(n));
  for (int i = 0; i < fo.count[k]; ++i) {
    const int field = fo.order[k][static_cast<std::size_t>(i)];
    if (omit & bit(field)) continue;
    // Re-fetch each time: string annotations append to the tree.
    for (std::size_t j = 0;; ++j) {
      const auto kids = t_.children(n, field);
      if (j >= kids.size()) break;
      handle_node(kids[j], n);
    }
  }
}

void Checker::dispatch(NodeId n) {
  switch (kind(n)) {
    case NodeKind::FunctionDef:
    case NodeKind::AsyncFunctionDef:
      on_function_def(n);
      break;
    case NodeKind::Lambda:
      on_lambda(n);
      break;
    case NodeKind::ClassDef:
      on_class_def(n);
      break;
    case NodeKind::Return:
    case NodeKind::Await:
    case NodeKind::Yield:
    case NodeKind::YieldFrom:
      if (scope().kind == SKind::Class || scope().kind == SKind::Module) return;
      handle_node(t_.child(n, f::kValue), n);
      break;
    case NodeKind::AugAssign:
      on_aug_assign(n);
      break;
    case NodeKind::AnnAssign:
      on_ann_assign(n);
      break;
    case NodeKind::Try:
      on_try(n);
      break;
    case NodeKind::ExceptHandler:
      on_except_handler(n);
      break;
    case NodeKind::Import:
      on_import(n);
      break;
    case NodeKind::ImportFrom:
      on_import_from(n);
      break;
    case NodeKind::Global:
    case NodeKind::Nonlocal:
      on_global(n);
      break;
    case NodeKind::Name:
      on_name(n);
      break;
    case NodeKind::Call:
      on_call(n);
      break;
    case NodeKind::Subscript:
      on_subscript(n);
      break;
    case NodeKind::JoinedStr:
      on_joined_str(n);
      break;
    case NodeKind::Constant:
      on_constant(n);
      break;
    case NodeKind::ListComp:
    case NodeKind::SetComp:
    case NodeKind::DictComp:
    case NodeKind::GeneratorExp:
      on_generator(n);
      break;
    case NodeKind::Arguments:
      handle_children(n, bit(f::kArgsDefaults) | bit(f::kArgsKwDefaults));
      break;
    case NodeKind::Arg:
      add_binding(n, new_binding(BClass::Argument, node(n).ident, scope_node(n)));
      break;
    case NodeKind::Pass:
    case NodeKind::Break:
    case NodeKind::Continue:
    case NodeKind::Alias:
      break;
    default:
      handle_children(n);
      break;
  }
}

// ---------------------------------------------------------------------------
// tree helpers

NodeId Checker::get_parent(NodeId n) const {
  while (true) {
    n = parent_[n];
    if (n == kNoNode) return kNoNode;
    if (!has_elts_or_ctx(kind(n))) return n;
  }
}

NodeId Checker::common_ancestor(NodeId l, NodeId r, NodeId stop) const {
  while (true) {
    if (l == stop || r == stop) return kNoNode;
    if (parent_[l] == kNoNode || parent_[r] == kNoNode) return kNoNode;
    if (l == r) return l;
    if (depth_[l] > depth_[r]) {
      l = parent_[l];
    } else if (depth_[l] < depth_[r]) {
      r = parent_[r];
    } else {
      l = parent_[l];
      r = parent_[r];
    }
  }
}

bool Checker::descendant_of(NodeId n, const std::vector<NodeId>& ancestors, NodeId stop) const {
  for (NodeId a : ancestors) {
    if (common_ancestor(n, a, stop) != kNoNode) return true;
  }
  return false;
}

bool Checker::different_forks(NodeId l, NodeId r) const {
  const NodeId ancestor = common_ancestor(l, r, root_);
  if (ancestor == kNoNode) return false;
  std::vector<std::vector<NodeId>> parts;
  if (kind(ancestor) == NodeKind::If) {
    const auto body = t_.children(ancestor, f::kIfBody);
    parts.emplace_back(body.begin(), body.end());
  } else if (kind(ancestor) == NodeKind::Try) {
    std::vector<NodeId> first;
    for (NodeId c : t_.children(ancestor, f::kTryBody)) first.push_back(c);
    for (NodeId c : t_.children(ancestor, f::kTryOrelse)) first.push_back(c);
    parts.push_back(std::move(first));
    for (NodeId h : t_.children(ancestor, f::kTryHandlers)) parts.push_back({h});
  } else {
    return false;
  }
  for (const auto& items : parts) {
    if (descendant_of(l, items, ancestor) != descendant_of(r, items, ancestor)) return true;
  }
  return false;
}

NodeId Checker::scope_node(NodeId n) const {
  NodeId p = n;
  while (true) {
    if (p == root_) return kNoNode;
    p = get_parent(p);
    if (p == kNoNode) return kNoNode;
    switch (kind(p)) {
      case NodeKind::Module:
      case NodeKind::ClassDef:
      case NodeKind::FunctionDef:
      case NodeKind::AsyncFunctionDef:
      case NodeKind::Lambda:
      case NodeKind::ListComp:
      case NodeKind::SetComp:
      case NodeKind::GeneratorExp:
      case NodeKind::DictComp:
        return p;
      default:
        break;
    }
  }
}

std::optional<std::string> Checker::node_name(NodeId n) const {
  const auto& nd = node(n);
  if (nd.kind == NodeKind::Name) return nd.ident;
  if ((nd.kind == NodeKind::ExceptHandler || nd.kind == NodeKind::FunctionDef ||
       nd.kind == NodeKind::AsyncFunctionDef || nd.kind == NodeKind::ClassDef) &&
      !nd.ident.empty()) {
    return nd.ident;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// typing helpers

bool Checker::in_postponed_annotation() const {
  return in_annotation_ == AnnState::String || annotations_future_enabled();
}

bool Checker::annotations_future_enabled() const {
  const auto& m = s_[static_cast<std::size_t>(stack_.front())];
  return m.kind == SKind::Module && m.annotations_future;
}

template <typename Match>
bool Checker::typing_helper(NodeId n, Match&& match) const {
  const auto& nd = node(n);
  auto lookup = [&](const std::string& name) -> const BindingRec* {
    for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) {
      const int id = s_[static_cast<std::size_t>(*it)].names.get(name);
      if (id >= 0) return &b_[static_cast<std::size_t>(id)];
    }
    return nullptr;
  };
  if (nd.kind == NodeKind::Name) {
    const BindingRec* rec = lookup(nd.ident);
    if (rec == nullptr) return false;
    return (rec->cls == BClass::ImportationFrom || rec->cls == BClass::FutureImportation) &&
           is_typing_module(rec->module) && match(rec->real_name);
  }
  if (nd.kind == NodeKind::Attribute) {
    const NodeId v = t_.child(n, f::kValue);
    if (v == kNoNode || kind(v) != NodeKind::Name) return false;
    const BindingRec* rec = lookup(node(v).ident);
    if (rec == nullptr) return false;
    return is_importation(rec->cls) && is_typing_module(rec->full_name) && match(nd.ident);
  }
  return false;
}

bool Checker::is_typing(NodeId n, std::string_view attr) const {
  return typing_helper(n, [attr](const std::string& s) { return s == attr; });
}

bool Checker::is_any_typing_member(NodeId n) const {
  return typing_helper(n, [](const std::string&) { return true; });
}

bool Checker::is_name_or_attr(NodeId n, std::string_view name) const {
  const auto& nd = node(n);
  return (nd.kind == NodeKind::Name && nd.ident == name) || (nd.kind == NodeKind::Attribute && nd.ident == name);
}

bool Checker::is_typing_overload(const BindingRec& existing) const {
  if (existing.source == kNoNode) return false;
  const auto k = kind(existing.source);
  if (k != NodeKind::FunctionDef && k != NodeKind::AsyncFunctionDef) return false;
  for (NodeId d : t_.children(existing.source, f::kFnDecorators)) {
    if (is_typing(d, "overload")) return true;
  }
  return false;
}

bool Checker::redefines(const BindingRec& value, const BindingRec& other) const {
  switch (value.cls) {
    case BClass::Annotation:
      return false;
    case BClass::SubmoduleImportation:
      if (is_importation(other.cls)) return value.full_name == other.full_name;
      return is_definition(other.cls) && value.name == other.name;
    case BClass::Importation:
    case BClass::ImportationFrom:
    case BClass::StarImportation:
    case BClass::FutureImportation:
      if (other.cls == BClass::SubmoduleImportation) return value.full_name == other.full_name;
      return is_definition(other.cls) && value.name == other.name;
    default:
      return is_definition(other.cls) && value.name == other.name;
  }
}

// ---------------------------------------------------------------------------
// bindings

void Checker::add_binding(NodeId n, int value_id) {
  const std::string name = b(value_id).name;
  int found = stack_.front();
  for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) {
    if (sc(*it).names.contains(name)) {
      found = *it;
      break;
    }
  }
  const int existing_id = sc(found).names.get(name);
  if (existing_id >= 0 && b(existing_id).cls != BClass::Builtin && !different_forks(n, b(existing_id).source)) {
    const NodeId src = b(value_id).source;
    const NodeId parent_stmt = src == kNoNode ? kNoNode : get_parent(src);
    const bool loop_parent = parent_stmt != kNoNode &&
                             (kind(parent_stmt) == NodeKind::For || kind(parent_stmt) == NodeKind::AsyncFor);
    BindingRec& existing = b(existing_id);
    if (is_importation(existing.cls) && loop_parent) {
      // import shadowed by loop variable: not a tracked check
    } else if (found == scope_id()) {
      if (!existing.used.set && redefines(b(value_id), existing) && (name != "_" || is_importation(existing.cls)) &&
          !is_typing_overload(existing)) {
        report(LintCheckKind::RedefinedWhileUnused, n, name, node(existing.source).lineno);
      }
    } else if (is_importation(existing.cls) && redefines(b(value_id), existing)) {
      existing.redefined.push_back(n);
    }
  }

  auto& cur = scope();
  const int cur_id = cur.names.get(name);
  if (cur_id >= 0) b(value_id).used = b(cur_id).used;
  if (cur_id < 0 || b(value_id).cls != BClass::Annotation) {
    std::size_t pos = stack_.size() - 1;
    while (b(value_id).cls == BClass::NamedExprAssignment && pos > 0 && sc(stack_[pos]).kind == SKind::Generator) {
      --pos;
    }
    sc(stack_[pos]).names.set(name, value_id);
  }
}

void Checker::handle_node_load(NodeId n) {
  const auto name_opt = node_name(n);
  if (!name_opt) return;
  const std::string& name = *name_opt;

  int in_generators = -1;  // unknown / false / true as -1 / 0 / 1
  bool import_starred = false;
  const int current = scope_id();
  for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) {
    auto& s = sc(*it);
    if (s.kind == SKind::Class) {
      if (name == "__class__") return;
      if (in_generators == 0) continue;
    }
    const int id = s.names.get(name);
    if (id >= 0 && b(id).cls == BClass::Annotation && !in_postponed_annotation()) {
      b(id).used = Used{true, -1, kNoNode};
      continue;
    }
    if (id >= 0) {
      b(id).used = Used{true, current, n};
      if (is_importation(b(id).cls) && has_alias(b(id))) {
        const int full = s.names.get(b(id).full_name);
        if (full >= 0) b(full).used = Used{true, current, n};
      }
      return;
    }
    import_starred = import_starred || s.import_starred;
    if (in_generators != 0) in_generators = s.kind == SKind::Generator ? 1 : 0;
  }

  if (import_starred) {
    for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) {
      for (const auto& [nm, id] : sc(*it).names.items()) {
        if (b(id).cls == BClass::StarImportation) b(id).used = Used{true, current, n};
      }
    }
    return;
  }

  if ((name == "__module__" || name == "__qualname__") && scope().kind == SKind::Class) return;

  const auto& handlers = except_handlers_.back();
  if (std::find(handlers.begin(), handlers.end(), "NameError") == handlers.end()) {
    report(LintCheckKind::UndefinedName, n, name);
  }
}

void Checker::handle_node_store(NodeId n) {
  const auto name_opt = node_name(n);
  if (!name_opt) return;
  const std::string name = *name_opt;
  const int current = scope_id();

  if (scope().kind == SKind::Function && !scope().names.contains(name)) {
    for (std::size_t i = 0; i + 1 < stack_.size(); ++i) {
      auto& s = sc(stack_[i]);
      if (s.kind != SKind::Function && s.kind != SKind::Module) continue;
      const int id = s.names.get(name);
      if (id < 0) continue;
      const Used used = b(id).used;
      if (used.set && used.scope == current && scope().globals.count(name) == 0) {
        const auto& rec = b(id);
        if (rec.source == kNoNode) {
          report(LintCheckKind::UndefinedLocal, used.node, name);
          messages_.back().related_builtin = true;
        } else {
          report(LintCheckKind::UndefinedLocal, used.node, name, node(rec.source).lineno);
        }
        break;
      }
    }
  }

  const NodeId parent_stmt = get_parent(n);
  const NodeId direct = parent_[n];
  const NodeKind pk = parent_stmt == kNoNode ? NodeKind::Module : kind(parent_stmt);

  auto literal_tuple_unpacking = [&](NodeId stmt) {
    if (kind(stmt) != NodeKind::Assign) return false;
    for (NodeId t : t_.children(stmt, f::kAssignTargets)) {
      const auto tk = kind(t);
      if (tk != NodeKind::Tuple && tk != NodeKind::List && tk != NodeKind::Set) return false;
    }
    const auto vk = kind(t_.child(stmt, f::kAssignValue));
    return vk == NodeKind::Tuple || vk == NodeKind::List || vk == NodeKind::Set;
  };

  int binding = -1;
  if (pk == NodeKind::AnnAssign && t_.child(parent_stmt, f::kAnnValue) == kNoNode) {
    binding = new_binding(BClass::Annotation, name, n);
  } else if (pk == NodeKind::For || pk == NodeKind::AsyncFor || pk == NodeKind::Comprehension ||
             (parent_stmt != direct && !literal_tuple_unpacking(parent_stmt))) {
    binding = new_binding(BClass::Plain, name, n);
  } else if (name == "__all__" && scope().kind == SKind::Module && direct != kNoNode &&
             (kind(direct) == NodeKind::Assign || kind(direct) == NodeKind::AugAssign ||
              kind(direct) == NodeKind::AnnAssign)) {
    std::vector<std::string> names;
    const int prev = scope().names.get("__all__");
    if (prev >= 0 && kind(direct) == NodeKind::AugAssign) names = b(prev).export_names;
    auto add_names = [&](NodeId container) {
      for (NodeId e : t_.children(container, f::kElts)) {
        if (is_str_constant(node(e))) names.push_back(node(e).value);
      }
    };
    auto is_seq = [&](NodeId x) {
      return x != kNoNode && (kind(x) == NodeKind::List || kind(x) == NodeKind::Tuple);
    };
    const int vf = kind(direct) == NodeKind::AnnAssign ? f::kAnnValue : f::kAssignValue;
    const NodeId value = t_.child(direct, vf);
    if (is_seq(value)) {
      add_names(value);
    } else if (value != kNoNode && kind(value) == NodeKind::BinOp) {
      NodeId cur = value;
      while (is_seq(t_.child(cur, f::kBinRight))) {
        add_names(t_.child(cur, f::kBinRight));
        const NodeId left = t_.child(cur, f::kBinLeft);
        if (kind(left) == NodeKind::BinOp) {
          cur = left;
        } else {
          if (is_seq(left)) add_names(left);
          break;
        }
      }
    }
    binding = new_binding(BClass::ExportBinding, name, direct);
    b(binding).export_names = std::move(names);
  } else if (pk == NodeKind::NamedExpr) {
    binding = new_binding(BClass::NamedExprAssignment, name, n);
  } else {
    binding = new_binding(BClass::Assignment, name, n);
  }
  add_binding(n, binding);
}

void Checker::handle_node_delete(NodeId n) {
  for (NodeId cur = parent_[n]; cur != kNoNode; cur = parent_[cur]) {
    const auto k = kind(cur);
    if (k == NodeKind::If || k == NodeKind::While || k == NodeKind::IfExp) return;
  }
  const auto name_opt = node_name(n);
  if (!name_opt) return;
  const std::string& name = *name_opt;
  auto& s = scope();
  if (s.kind == SKind::Function && s.globals.count(name) != 0) {
    s.globals.erase(name);
  } else if (s.names.pop(name) < 0) {
    report(LintCheckKind::UndefinedName, n, name);
  }
}

// ---------------------------------------------------------------------------
// annotations

void Checker::handle_annotation(NodeId annotation, NodeId n) {
  AnnGuard guard(*this, AnnState::Bare);
  if (annotation != kNoNode && is_str_constant(node(annotation))) {
    const std::string text = node(annotation).value;
    const int line = node(annotation).lineno;
    const int col = node(annotation).col_offset;
    defer_function([this, text, n, line, col] { handle_string_annotation(text, n, line, col); });
  } else if (annotations_future_enabled()) {
    defer_function([this, annotation, n] {
      AnnGuard inner(*this, AnnState::Bare);
      handle_node(annotation, n);
    });
  } else {
    handle_node(annotation, n);
  }
}

void Checker::handle_string_annotation(const std::string& text, NodeId n, int line, int col) {
  AnnGuard guard(*this, AnnState::String);
  const auto parsed = pyast::parse_module(SourceText(text));
  if (!parsed.ok()) return;
  const auto& sub = parsed.ast();
  const auto body = sub.children(sub.root(), f::kBody);
  if (body.size() != 1 || sub.kind(body[0]) != NodeKind::Expr) return;
  const NodeId expr = sub.child(body[0], f::kValue);
  const std::size_t first = t_.size();
  const NodeId copy = t_.import_subtree(sub, expr);
  for (std::size_t id = first; id < t_.size(); ++id) {
    auto& nd = t_.node(static_cast<NodeId>(id));
    nd.lineno = line;
    nd.col_offset = col;
  }
  handle_node(copy, n);
}

// ---------------------------------------------------------------------------
// node handlers

void Checker::on_function_def(NodeId n) {
  for (std::size_t i = 0;; ++i) {
    const auto decos = t_.children(n, f::kFnDecorators);
    if (i >= decos.size()) break;
    handle_node(decos[i], n);
  }
  on_lambda(n);
  add_binding(n, new_binding(BClass::FunctionDefinition, node(n).ident, n));
}

void Checker::on_lambda(NodeId n) {
  const bool is_lambda = kind(n) == NodeKind::Lambda;
  const NodeId args = t_.child(n, is_lambda ? f::kLambdaArgs : f::kFnArgs);
  std::vector<NodeId> annotations;
  std::vector<NodeId> defaults;
  if (args != kNoNode) {
    for (int field : {f::kArgsPosonly, f::kArgsArgs, f::kArgsKwonly}) {
      for (NodeId a : t_.children(args, field)) annotations.push_back(t_.child(a, f::kArgAnnotation));
    }
    for (NodeId d : t_.children(args, f::kArgsDefaults)) defaults.push_back(d);
    for (NodeId d : t_.children(args, f::kArgsKwDefaults)) defaults.push_back(d);
    if (!is_lambda) {
      for (int field : {f::kArgsVararg, f::kArgsKwarg}) {
        const NodeId a = t_.child(args, field);
        if (a != kNoNode) annotations.push_back(t_.child(a, f::kArgAnnotation));
      }
    }
  }
  if (!is_lambda) annotations.push_back(t_.child(n, f::kFnReturns));
  for (NodeId a : annotations) handle_annotation(a, n);
  for (NodeId d : defaults) handle_node(d, n);
  defer_function([this, n] { run_function(n); });
}

void Checker::run_function(NodeId n) {
  push_scope(SKind::Function, n);
  if (kind(n) == NodeKind::Lambda) {
    handle_children(n);
  } else {
    handle_children(n, bit(f::kFnDecorators) | bit(f::kFnReturns));
  }
  const int sid = scope_id();
  defer_assignment([this, sid] { check_unused_assignments(sid); });
  pop_scope();
}

void Checker::check_unused_assignments(int sid) {
  auto& s = sc(sid);
  if (s.uses_locals) return;
  for (const auto& [name, id] : s.names.items()) {
    const auto& rec = b(id);
    if (rec.used.set || name == "_" || s.globals.count(name) != 0) continue;
    if (rec.cls != BClass::Assignment && rec.cls != BClass::NamedExprAssignment) continue;
    report(LintCheckKind::UnusedVariable, rec.source, name);
  }
}

void Checker::on_class_def(NodeId n) {
  for (int field : {f::kClassDecorators, f::kClassBases, f::kClassKeywords}) {
    for (std::size_t i = 0;; ++i) {
      const auto kids = t_.children(n, field);
      if (i >= kids.size()) break;
      handle_node(kids[i], n);
    }
  }
  push_scope(SKind::Class, n);
  for (std::size_t i = 0;; ++i) {
    const auto kids = t_.children(n, f::kClassBody);
    if (i >= kids.size()) break;
    handle_node(kids[i], n);
  }
  pop_scope();
  add_binding(n, new_binding(BClass::ClassDefinition, node(n).ident, n));
}

void Checker::on_aug_assign(NodeId n) {
  const NodeId target = t_.child(n, f::kAugTarget);
  handle_node_load(target);
  handle_node(t_.child(n, f::kAugValue), n);
  handle_node(target, n);
}

void Checker::on_ann_assign(NodeId n) {
  const NodeId annotation = t_.child(n, f::kAnnAnnotation);
  handle_annotation(annotation, n);
  const NodeId value = t_.child(n, f::kAnnValue);
  if (value != kNoNode) {
    if (is_typing(annotation, "TypeAlias")) {
      handle_annotation(value, n);
    } else {
      handle_node(value, n);
    }
  }
  handle_node(t_.child(n, f::kAnnTarget), n);
}

void Checker::on_try(NodeId n) {
  std::vector<std::string> names;
  for (NodeId h : t_.children(n, f::kTryHandlers)) {
    const NodeId type = t_.child(h, f::kHandlerType);
    if (type == kNoNode) continue;
    if (kind(type) == NodeKind::Tuple) {
      for (NodeId e : t_.children(type, f::kElts)) {
        if (auto nm = node_name(e)) names.push_back(*nm);
      }
    } else if (auto nm = node_name(type)) {
      names.push_back(*nm);
    }
  }
  except_handlers_.push_back(std::move(names));
  for (std::size_t i = 0;; ++i) {
    const auto kids = t_.children(n, f::kTryBody);
    if (i >= kids.size()) break;
    handle_node(kids[i], n);
  }
  except_handlers_.pop_back();
  handle_children(n, bit(f::kTryBody));
}

void Checker::on_except_handler(NodeId n) {
  const std::string name = node(n).ident;
  if (name.empty()) {
    handle_children(n);
    return;
  }
  if (scope().names.contains(name)) handle_node_store(n);
  const int prev = scope().names.pop(name);
  handle_node_store(n);
  handle_children(n);
  const int bound = scope().names.pop(name);
  if (bound >= 0 && !b(bound).used.set) report(LintCheckKind::UnusedVariable, n, name);
  if (prev >= 0) scope().names.set(name, prev);
}

void Checker::on_import(NodeId n) {
  for (NodeId a : t_.children(n, f::kImportNames)) {
    const auto& al = node(a);
    int id = -1;
    if (al.ident.find('.') != std::string::npos && al.asname.empty()) {
      id = new_binding(BClass::SubmoduleImportation, al.ident.substr(0, al.ident.find('.')), n);
    } else {
      id = new_binding(BClass::Importation, al.asname.empty() ? al.ident : al.asname, n);
    }
    b(id).full_name = al.ident;
    add_binding(n, id);
  }
}

void Checker::on_import_from(NodeId n) {
  const auto& nd = node(n);
  const std::string module = std::string(static_cast<std::size_t>(std::max(nd.level, 0)), '.') + nd.ident;
  for (NodeId a : t_.children(n, f::kImportNames)) {
    const std::string real = node(a).ident;
    const std::string name = node(a).asname.empty() ? real : node(a).asname;
    int id = -1;
    if (module == "__future__") {
      id = new_binding(BClass::FutureImportation, name, n);
      b(id).used = Used{true, scope_id(), n};
      if (real == "annotations" && scope().kind == SKind::Module) scope().annotations_future = true;
    } else if (real == "*") {
      if (scope().kind != SKind::Module) continue;
      scope().import_starred = true;
      id = new_binding(BClass::StarImportation, module + ".*", n);
      b(id).full_name = module;
      b(id).module = module;
      add_binding(n, id);
      continue;
    } else {
      id = new_binding(BClass::ImportationFrom, name, n);
    }
    auto& rec = b(id);
    rec.module = module;
    rec.real_name = real;
    rec.full_name = (!module.empty() && module.back() == '.') ? module + real : module + "." + real;
    add_binding(n, id);
  }
}

void Checker::on_global(NodeId n) {
  if (scope().kind == SKind::Module) return;
  const int global_scope = stack_.front();
  for (const auto& name : node(n).names) {
    const int id = new_binding(BClass::Assignment, name, n);
    b(id).used = Used{true, global_scope, n};
    std::erase_if(messages_, [&](const Message& m) {
      return m.kind == LintCheckKind::UndefinedName && m.name == name;
    });
    if (!sc(global_scope).names.contains(name)) sc(global_scope).names.set(name, id);
    for (std::size_t i = 1; i < stack_.size(); ++i) sc(stack_[i]).names.set(name, id);
  }
}

void Checker::on_name(NodeId n) {
  switch (node(n).ctx) {
    case ExprContext::Load:
      handle_node_load(n);
      if (node(n).ident == "locals" && scope().kind == SKind::Function && parent_[n] != kNoNode &&
          kind(parent_[n]) == NodeKind::Call) {
        scope().uses_locals = true;
      }
      break;
    case ExprContext::Store:
      handle_node_store(n);
      break;
    case ExprContext::Del:
      handle_node_delete(n);
      break;
  }
}

void Checker::on_call(NodeId n) {
  const NodeId func = t_.child(n, f::kCallFunc);
  const auto args_span = t_.children(n, f::kCallArgs);
  const std::vector<NodeId> args(args_span.begin(), args_span.end());
  const auto kw_span = t_.children(n, f::kCallKeywords);
  const std::vector<NodeId> keywords(kw_span.begin(), kw_span.end());

  std::uint32_t omit = 0;
  std::vector<NodeId> annotated;
  std::vector<std::pair<NodeId, std::uint32_t>> not_annotated;

  if (is_typing(func, "cast") && !args.empty()) {
    AnnGuard guard(*this, AnnState::Bare);
    handle_node(args[0], n);
  } else if (is_typing(func, "TypeVar")) {
    omit |= bit(f::kCallArgs) | bit(f::kCallKeywords);
    for (std::size_t i = 1; i < args.size(); ++i) annotated.push_back(args[i]);
    for (NodeId k : keywords) {
      const bool bound = node(k).ident == "bound";
      if (bound) annotated.push_back(t_.child(k, f::kKeywordValue));
      not_annotated.emplace_back(k, bound ? bit(f::kKeywordValue) : 0u);
    }
  } else if (is_typing(func, "TypedDict")) {
    if (args.size() > 1 && kind(args[1]) == NodeKind::Dict) {
      omit |= bit(f::kCallArgs);
      for (NodeId v : t_.children(args[1], f::kDictValues)) annotated.push_back(v);
      for (std::size_t i = 0; i < args.size(); ++i) {
        not_annotated.emplace_back(args[i], i == 1 ? bit(f::kDictValues) : 0u);
      }
    }
    omit |= bit(f::kCallKeywords);
    for (NodeId k : keywords) {
      annotated.push_back(t_.child(k, f::kKeywordValue));
      not_annotated.emplace_back(k, bit(f::kKeywordValue));
    }
  } else if (is_typing(func, "NamedTuple")) {
    auto is_seq = [&](NodeId x) { return kind(x) == NodeKind::Tuple || kind(x) == NodeKind::List; };
    bool fields_ok = args.size() > 1 && is_seq(args[1]);
    if (fields_ok) {
      for (NodeId e : t_.children(args[1], f::kElts)) {
        if (!is_seq(e) || t_.children(e, f::kElts).size() != 2) fields_ok = false;
      }
    }
    if (fields_ok) {
      omit |= bit(f::kCallArgs);
      const auto elts_span = t_.children(args[1], f::kElts);
      const std::vector<NodeId> elts(elts_span.begin(), elts_span.end());
      for (NodeId e : elts) annotated.push_back(t_.children(e, f::kElts)[1]);
      for (NodeId e : elts) not_annotated.emplace_back(t_.children(e, f::kElts)[0], 0u);
      for (std::size_t i = 0; i < args.size(); ++i) {
        not_annotated.emplace_back(args[i], i == 1 ? bit(f::kElts) : 0u);
      }
      for (NodeId e : elts) not_annotated.emplace_back(e, bit(f::kElts));
    }
    omit |= bit(f::kCallKeywords);
    for (NodeId k : keywords) {
      annotated.push_back(t_.child(k, f::kKeywordValue));
      not_annotated.emplace_back(k, bit(f::kKeywordValue));
    }
  }

  if (omit != 0) {
    {
      AnnGuard guard(*this, AnnState::None);
      for (const auto& [na, mask] : not_annotated) handle_children(na, mask);
      handle_children(n, omit);
    }
    AnnGuard guard(*this, AnnState::Bare);
    for (NodeId a : annotated) handle_node(a, n);
  } else {
    handle_children(n);
  }
}

void Checker::on_subscript(NodeId n) {
  const NodeId value = t_.child(n, f::kSubValue);
  if (is_name_or_attr(value, "Literal")) {
    AnnGuard guard(*this, AnnState::None);
    handle_children(n);
  } else if (is_name_or_attr(value, "Annotated")) {
    handle_node(value, n);
    const NodeId slice = t_.child(n, f::kSubSlice);
    if (kind(slice) == NodeKind::Tuple && t_.children(slice, f::kElts).size() >= 2) {
      const auto span = t_.children(slice, f::kElts);
      const std::vector<NodeId> elts(span.begin(), span.end());
      handle_node(elts[0], n);
      AnnGuard guard(*this, AnnState::None);
      for (std::size_t i = 1; i < elts.size(); ++i) handle_node(elts[i], n);
    } else {
      handle_node(slice, n);
    }
  } else if (is_any_typing_member(value)) {
    AnnGuard guard(*this, AnnState::Bare);
    handle_children(n);
  } else {
    handle_children(n);
  }
}

void Checker::on_joined_str(NodeId n) {
  if (!in_fstring_) {
    bool placeholder = false;
    for (NodeId v : t_.children(n, f::kJoinedValues)) {
      if (kind(v) == NodeKind::FormattedValue) placeholder = true;
    }
    if (!placeholder) report(LintCheckKind::FStringMissingPlaceholders, n, std::string());
  }
  const bool saved = in_fstring_;
  in_fstring_ = true;
  handle_children(n);
  in_fstring_ = saved;
}

void Checker::on_constant(NodeId n) {
  if (in_annotation_ == AnnState::None || !is_str_constant(node(n))) return;
  const std::string text = node(n).value;
  const int line = node(n).lineno;
  const int col = node(n).col_offset;
  if (in_deferred_) {
    handle_string_annotation(text, n, line, col);
  } else {
    defer_function([this, text, n, line, col] { handle_string_annotation(text, n, line, col); });
  }
}

void Checker::on_generator(NodeId n) {
  push_scope(SKind::Generator, n);
  handle_children(n);
  pop_scope();
}

// ---------------------------------------------------------------------------
// end of module

std::string Checker::import_repr(const BindingRec& rec) const {
  switch (rec.cls) {
    case BClass::SubmoduleImportation:
    case BClass::StarImportation:
      return rec.cls == BClass::StarImportation ? rec.module + ".*" : rec.full_name;
    case BClass::Importation:
      return has_alias(rec) ? rec.full_name + " as " + rec.name : rec.full_name;
    case BClass::ImportationFrom:
    case BClass::FutureImportation:
      return rec.real_name != rec.name ? rec.full_name + " as " + rec.name : rec.full_name;
    default:
      return rec.name;
  }
}

void Checker::check_dead_scopes() {
  for (const int sid : dead_) {
    auto& s = sc(sid);
    if (s.kind == SKind::Class) continue;
    std::vector<std::string> all_names;
    const int all_id = s.names.get("__all__");
    if (all_id >= 0 && b(all_id).cls == BClass::ExportBinding) {
      all_names = b(all_id).export_names;
      if (s.import_starred) {
        bool undefined = false;
        for (const auto& nm : all_names) {
          if (!s.names.contains(nm)) undefined = true;
        }
        if (undefined) {
          for (const auto& [nm, id] : s.names.items()) {
            if (b(id).cls == BClass::StarImportation) b(id).used = Used{true, -1, kNoNode};
          }
        }
      }
    }
    for (const auto& [nm, id] : s.names.items()) {
      const auto& rec = b(id);
      if (!is_importation(rec.cls)) continue;
      const bool used =
          rec.used.set || std::find(all_names.begin(), all_names.end(), rec.name) != all_names.end();
      if (!used) {
        // UnusedImport carries the bound name; the message shows the import.
        report(LintCheckKind::UnusedImport, rec.source, rec.name);
        messages_.back().import_repr = import_repr(rec);
      }
      for (NodeId r : rec.redefined) {
        const NodeId p = get_parent(r);
        if (p != kNoNode && (kind(p) == NodeKind::For || kind(p) == NodeKind::AsyncFor)) continue;
        if (used) continue;
        report(LintCheckKind::RedefinedWhileUnused, r, rec.name, node(rec.source).lineno);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// scope tree export

ScopeTree Checker::scope_tree() const {
  ScopeTree tree;
  tree.scopes.reserve(s_.size());
  for (const auto& s : s_) {
    Scope out;
    out.parent = s.parent;
    out.line = s.node == root_ ? 1 : node(s.node).lineno;
    switch (s.kind) {
      case SKind::Module: out.kind = ScopeKind::Module; break;
      case SKind::Class: out.kind = ScopeKind::Class; break;
      case SKind::Generator: out.kind = ScopeKind::Comprehension; break;
      case SKind::Function:
        out.kind = kind(s.node) == NodeKind::Lambda ? ScopeKind::Lambda : ScopeKind::Function;
        break;
    }
    for (const auto& [name, id] : s.names.items()) {
      const auto& rec = b_[static_cast<std::size_t>(id)];
      if (rec.cls == BClass::Builtin) continue;
      Binding bind;
      bind.name = name;
      bind.used = rec.used.set;
      bind.def_line = rec.source == kNoNode ? 1 : node(rec.source).lineno;
      const NodeKind sk = rec.source == kNoNode ? NodeKind::Module : kind(rec.source);
      const NodeId direct = rec.source == kNoNode ? kNoNode : parent_[rec.source];
      const NodeKind dk = direct == kNoNode ? NodeKind::Module : kind(direct);
      const NodeId stmt = rec.source == kNoNode ? kNoNode : get_parent(rec.source);
      const NodeKind stk = stmt == kNoNode ? NodeKind::Module : kind(stmt);
      switch (rec.cls) {
        case BClass::Argument: bind.kind = BindingKind::Parameter; break;
        case BClass::FunctionDefinition: bind.kind = BindingKind::FunctionDef; break;
        case BClass::ClassDefinition: bind.kind = BindingKind::ClassDef; break;
        case BClass::Importation:
        case BClass::SubmoduleImportation: bind.kind = BindingKind::Import; break;
        case BClass::ImportationFrom:
        case BClass::FutureImportation: bind.kind = BindingKind::ImportFrom; break;
        case BClass::StarImportation: bind.kind = BindingKind::StarImport; break;
        default:
          if (sk == NodeKind::Global) {
            bind.kind = BindingKind::GlobalDecl;
          } else if (sk == NodeKind::Nonlocal) {
            bind.kind = BindingKind::NonlocalDecl;
          } else if (sk == NodeKind::ExceptHandler) {
            bind.kind = BindingKind::ExceptHandler;
          } else if (stk == NodeKind::For || stk == NodeKind::AsyncFor) {
            bind.kind = BindingKind::ForTarget;
          } else if (stk == NodeKind::Comprehension) {
            bind.kind = BindingKind::ComprehensionTarget;
          } else if (stk == NodeKind::WithItem || stk == NodeKind::With || stk == NodeKind::AsyncWith) {
            bind.kind = BindingKind::WithTarget;
          } else if (dk == NodeKind::AugAssign || sk == NodeKind::AugAssign) {
            bind.kind = BindingKind::AugmentedAssignment;
          } else {
            bind.kind = BindingKind::Assignment;
          }
          break;
      }
      out.bindings.push_back(std::move(bind));
    }
    tree.scopes.push_back(std::move(out));
  }
  return tree;
}

}  // namespace complint::lint::detail
