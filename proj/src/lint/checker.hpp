// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "complint/lint/diagnostic.hpp"
#include "complint/lint/scope.hpp"
#include "complint/pyast/ast.hpp"

namespace complint::lint::detail {

using pyast::NodeId;
using pyast::kNoNode;

enum class BClass : std::uint8_t {
  Builtin,
  Plain,
  Argument,
  Assignment,
  NamedExprAssignment,
  Annotation,
  FunctionDefinition,
  ClassDefinition,
  Importation,
  SubmoduleImportation,
  ImportationFrom,
  StarImportation,
  FutureImportation,
  ExportBinding,
};

/// `used` is either unset, a bare flag, or (scope, node) of the first read.
struct Used {
  bool set = false;
  int scope = -1;
  NodeId node = kNoNode;
};

struct BindingRec {
  BClass cls = BClass::Plain;
  std::string name;
  NodeId source = kNoNode;
  Used used;
  std::string full_name;  // importations
  std::string module;     // ImportationFrom, FutureImportation, StarImportation
  std::string real_name;  // ImportationFrom
  std::vector<NodeId> redefined;
  std::vector<std::string> export_names;
};

enum class SKind : std::uint8_t { Module, Class, Function, Generator };

/// Name table that remembers insertion order like a Python dict.
class NameTable {
 public:
  bool contains(const std::string& name) const { return map_.count(name) != 0; }
  int get(const std::string& name) const {
    auto it = map_.find(name);
    return it == map_.end() ? -1 : it->second.first;
  }
  void set(const std::string& name, int binding) {
    auto it = map_.find(name);
    if (it == map_.end()) {
      map_.emplace(name, std::make_pair(binding, next_++));
    } else {
      it->second.first = binding;
    }
  }
  int pop(const std::string& name) {
    auto it = map_.find(name);
    if (it == map_.end()) return -1;
    const int b = it->second.first;
    map_.erase(it);
    return b;
  }
  std::vector<std::pair<std::string, int>> items() const;
  void reserve(std::size_t n) { map_.reserve(n); }

 private:
  std::unordered_map<std::string, std::pair<int, std::uint64_t>> map_;
  std::uint64_t next_ = 0;
};

struct ScopeRec {
  SKind kind = SKind::Module;
  NodeId node = kNoNode;
  int parent = -1;
  NameTable names;
  bool import_starred = false;
  bool uses_locals = false;
  bool annotations_future = false;
  std::unordered_set<std::string> globals;  // function scopes only
};

struct Message {
  LintCheckKind kind;
  std::string name;
  int line;
  int col;
  std::optional<int> related_line;
  bool related_builtin = false;
  std::string import_repr;  // UnusedImport
};

class Checker {
 public:
  explicit Checker(const pyast::Ast& ast);

  void run();

  const std::vector<Message>& messages() const { return messages_; }
  ScopeTree scope_tree() const;

 private:
  enum class AnnState : std::uint8_t { None, String, Bare };

  struct Deferred {
    std::function<void()> fn;
    std::vector<int> stack;
  };

  class AnnGuard {
   public:
    AnnGuard(Checker& c, AnnState s) : c_(c), saved_(c.in_annotation_) { c.in_annotation_ = s; }
    ~AnnGuard() { c_.in_annotation_ = saved_; }
    AnnGuard(const AnnGuard&) = delete;
    AnnGuard& operator=(const AnnGuard&) = delete;

   private:
    Checker& c_;
    AnnState saved_;
  };

  pyast::NodeKind kind(NodeId n) const { return t_.kind(n); }
  const pyast::Node& node(NodeId n) const { return t_.node(n); }
  ScopeRec& scope() { return s_[static_cast<std::size_t>(stack_.back())]; }
  int scope_id() const { return stack_.back(); }
  ScopeRec& sc(int id) { return s_[static_cast<std::size_t>(id)]; }
  BindingRec& b(int id) { return b_[static_cast<std::size_t>(id)]; }

  int new_binding(BClass cls, std::string name, NodeId source);
  void push_scope(SKind kind, NodeId n);
  void pop_scope();
  void defer_function(std::function<void()> fn);
  void defer_assignment(std::function<void()> fn);
  void run_deferred(std::vector<Deferred>& list);
  void report(LintCheckKind kind, NodeId at, std::string name, std::optional<int> related = std::nullopt);

  void handle_node(NodeId n, NodeId parent);
  void handle_children(NodeId n, std::uint32_t omit = 0);
  void dispatch(NodeId n);

  NodeId get_parent(NodeId n) const;
  NodeId common_ancestor(NodeId l, NodeId r, NodeId stop) const;
  bool descendant_of(NodeId n, const std::vector<NodeId>& ancestors, NodeId stop) const;
  bool different_forks(NodeId l, NodeId r) const;
  NodeId scope_node(NodeId n) const;
  std::optional<std::string> node_name(NodeId n) const;

  bool in_postponed_annotation() const;
  bool annotations_future_enabled() const;
  bool redefines(const BindingRec& value, const BindingRec& other) const;
  bool is_typing_overload(const BindingRec& existing) const;
  template <typename Match>
  bool typing_helper(NodeId n, Match&& match) const;
  bool is_typing(NodeId n, std::string_view attr) const;
  bool is_any_typing_member(NodeId n) const;
  bool is_name_or_attr(NodeId n, std::string_view name) const;

  void add_binding(NodeId n, int value);
  void handle_node_load(NodeId n);
  void handle_node_store(NodeId n);
  void handle_node_delete(NodeId n);
  void handle_annotation(NodeId annotation, NodeId n);
  void handle_string_annotation(const std::string& text, NodeId n, int line, int col);
  void check_unused_assignments(int scope);
  void check_dead_scopes();
  std::string import_repr(const BindingRec& rec) const;

  void on_function_def(NodeId n);
  void on_lambda(NodeId n);
  void run_function(NodeId n);
  void on_class_def(NodeId n);
  void on_aug_assign(NodeId n);
  void on_ann_assign(NodeId n);
  void on_try(NodeId n);
  void on_except_handler(NodeId n);
  void on_import(NodeId n);
  void on_import_from(NodeId n);
  void on_global(NodeId n);
  void on_name(NodeId n);
  void on_call(NodeId n);
  void on_subscript(NodeId n);
  void on_joined_str(NodeId n);
  void on_constant(NodeId n);
  void on_generator(NodeId n);

  pyast::Ast t_;
  NodeId root_;
  std::vector<NodeId> parent_;
  std::vector<int> depth_;
  std::vector<BindingRec> b_;
  std::vector<ScopeRec> s_;
  std::vector<int> stack_;
  std::vector<int> dead_;
  std::vector<Deferred> deferred_functions_;
  std::vector<Deferred> deferred_assignments_;
  std::vector<std::vector<std::string>> except_handlers_;
  std::vector<Message> messages_;
  int node_depth_ = 0;
  AnnState in_annotation_ = AnnState::None;
  bool in_deferred_ = false;
  bool in_fstring_ = false;
};

}  // namespace complint::lint::detail
