/* Copyright 2026 The Demandlyzer Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef DEMAND_KERNEL_HPP
#define DEMAND_KERNEL_HPP

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace demand {

struct SourceSpan {
  int line = 0;
  int col = 0;
};

// ---------------------------------------------------------------------------
// Types

struct Type;
using TypePtr = std::shared_ptr<const Type>;

struct Type {
  enum class Kind { Var, Con, Fun };
  Kind kind = Kind::Con;
  std::string name;  // variable name or type constructor ("Nat", "[]", "(,)")
  std::vector<TypePtr> args;  // for Fun: argument types followed by result

  static TypePtr var(std::string n);
  static TypePtr con(std::string n, std::vector<TypePtr> a = {});
  static TypePtr fun(std::vector<TypePtr> params, TypePtr result);
  static TypePtr list(TypePtr elem);
  static TypePtr tuple(std::vector<TypePtr> elems);
};

std::string to_string(const TypePtr& t);
bool type_equal(const TypePtr& a, const TypePtr& b);
bool type_has_vars(const TypePtr& t);
TypePtr subst_type(const TypePtr& t, const std::map<std::string, TypePtr>& s);
// Replaces every type variable by `fill`.
TypePtr ground_type(const TypePtr& t, const TypePtr& fill);

// Name of the built-in tuple constructor of the given arity ("()", "(,)", ...).
std::string tuple_name(int arity);
// Arity of a tuple constructor name, or -1.
int tuple_arity(std::string_view name);

// ---------------------------------------------------------------------------
// Expressions and patterns

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  // VarApp is an application headed by a variable (a predicate parameter);
  // it is accepted by the parser but outside the first-order fragment.
  enum class Kind { Var, Ctor, App, VarApp };
  Kind kind = Kind::Var;
  std::string name;
  std::vector<ExprPtr> args;
  SourceSpan span;
};

ExprPtr mk_var(std::string name, SourceSpan span = {});
ExprPtr mk_ctor(std::string name, std::vector<ExprPtr> args = {},
                SourceSpan span = {});
ExprPtr mk_app(std::string name, std::vector<ExprPtr> args,
               SourceSpan span = {});

bool expr_equal(const ExprPtr& a, const ExprPtr& b);
bool is_ground(const ExprPtr& e);
// Constructor term over variables.
bool is_pattern(const ExprPtr& e);
void collect_vars(const ExprPtr& e, std::vector<std::string>& out);
std::set<std::string> var_set(const ExprPtr& e);
ExprPtr subst_expr(const ExprPtr& e, const std::map<std::string, ExprPtr>& s);

using Position = std::vector<int>;

struct InvalidPosition : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string position_string(const Position& p);
ExprPtr subterm_at(const ExprPtr& t, const Position& p);
ExprPtr replace_at(const ExprPtr& t, const Position& p, ExprPtr s);
std::string root(const ExprPtr& t);
// All valid positions of t in pre-order.
std::vector<Position> positions(const ExprPtr& t);

// ---------------------------------------------------------------------------
// Declarations

struct Rule {
  std::string fn;
  std::vector<ExprPtr> lhs;
  ExprPtr guard;  // may be null
  ExprPtr rhs;
  SourceSpan span;
  int index = 0;  // 1-based position among the rules of fn
  std::map<std::string, TypePtr> var_types;
};

struct CtorDecl {
  std::string name;
  std::vector<TypePtr> args;
};

struct DataDecl {
  std::string name;
  std::vector<std::string> params;
  std::vector<CtorDecl> ctors;
  bool builtin = false;
  SourceSpan span;
};

struct CtorInfo {
  std::string type;
  int data_index = -1;
  int index = -1;  // declaration order within the type
  int arity = 0;
};

struct FunctionDef {
  std::string name;
  int arity = 0;
  std::vector<Rule> rules;
  std::vector<TypePtr> arg_types;
  TypePtr result_type;
  TypePtr declared;  // optional signature as written
  bool builtin = false;
  bool is_operator = false;
  // Set by normalize: this function is the lub of the listed single-rule
  // functions and its rules merely delegate to them.
  std::vector<std::string> join_of;
};

struct Diagnostic {
  std::string code;
  std::string message;
  SourceSpan span;
  std::string rule;  // "rule 2 of merge", empty when not rule-specific
};

std::string to_string(const Diagnostic& d);

class Program {
 public:
  std::vector<DataDecl> data;
  std::vector<std::string> fn_order;
  std::map<std::string, FunctionDef> fns;
  std::map<std::string, CtorInfo> ctors;
  std::vector<Diagnostic> type_diagnostics;

  const DataDecl* find_type(const std::string& name) const;
  const CtorInfo* find_ctor(const std::string& name) const;
  const FunctionDef* find_fn(const std::string& name) const;
  FunctionDef* find_fn(const std::string& name);
  const CtorDecl& ctor_decl(const std::string& name) const;
  // Constructor argument types instantiated for a concrete data type.
  std::vector<TypePtr> ctor_arg_types(const std::string& ctor,
                                      const TypePtr& data_type) const;
  TypePtr ctor_result_type(const std::string& ctor) const;
  std::vector<std::string> user_functions() const;
  void add_function(FunctionDef f);
};

struct ParseResult {
  std::optional<Program> program;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return program.has_value() && diagnostics.empty(); }
};

ParseResult parse_program(std::string_view text);
// Parses and throws std::runtime_error on any diagnostic.
Program parse_program_or_throw(std::string_view text);

// An expression parsed against an existing program; unknown lower-case
// names become free variables whose types are inferred.
struct GoalExpr {
  ExprPtr expr;
  std::map<std::string, TypePtr> var_types;
  std::vector<std::string> vars;  // in order of first occurrence
  TypePtr type;
};
GoalExpr parse_expr(const Program& p, std::string_view text);

std::vector<Diagnostic> check_wellformed(const Program& p);

std::string print_expr(const Program& p, const ExprPtr& e);
std::string print_rule(const Program& p, const Rule& r);
std::string print_program(const Program& p);
std::string program_to_json(const Program& p);
bool program_equal(const Program& a, const Program& b);

// Infers types of all functions; fills arg/result types and per-rule
// variable types. Returns type errors.
std::vector<Diagnostic> infer_types(Program& p);
// Type of an expression with the given variable environment; free
// variables not in env get fresh types that are written back into env.
TypePtr infer_expr_type(const Program& p, const ExprPtr& e,
                        std::map<std::string, TypePtr>& env);

Program normalize(const Program& p);

}  // namespace demand

#endif  // DEMAND_KERNEL_HPP
