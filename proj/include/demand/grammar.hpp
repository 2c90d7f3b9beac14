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

#ifndef DEMAND_GRAMMAR_HPP
#define DEMAND_GRAMMAR_HPP

#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "demand/oracle.hpp"

namespace demand {

struct CtorSymbol {
  std::string name;
  int arity = 0;
};

class Signature {
 public:
  int intern(const std::string& name, int arity);
  int find(const std::string& name) const;
  const CtorSymbol& at(int id) const { return ctors_[id]; }
  size_t size() const { return ctors_.size(); }

 private:
  std::vector<CtorSymbol> ctors_;
  std::map<std::string, int> index_;
};

struct Production {
  int ctor = -1;
  std::vector<int> args;
};

struct Nonterminal {
  std::string label;
  bool any = false;  // generates every tree, bottom included
  bool bot = false;  // has the production N -> _|_
  std::vector<Production> prods;
};

struct InclusionResult {
  bool holds = true;
  PTermPtr witness;  // in the left language but not the right one
};

// Regular tree grammar over partial constructor trees. Nonterminals are
// never removed; operations append fresh ones.
class Grammar {
 public:
  static constexpr int kAny = 0;
  static constexpr int kNothing = 1;

  Grammar();

  Signature& sig() { return sig_; }
  const Signature& sig() const { return sig_; }

  int add_nt(std::string label = "", bool bot = false);
  void add_prod(int nt, int ctor, std::vector<int> args);
  void add_prod(int nt, const std::string& ctor, std::vector<int> args);
  void set_bot(int nt, bool bot) { nts_.at(nt).bot = bot; }
  void set_any(int nt);
  void set_label(int nt, std::string label) { nts_.at(nt).label = std::move(label); }
  const Nonterminal& nt(int id) const { return nts_.at(id); }
  size_t size() const { return nts_.size(); }

  bool is_any(int nt) const { return nts_.at(nt).any; }
  bool nullable(int nt) const { return nts_.at(nt).any || nts_.at(nt).bot; }

  bool member(int nt, const PTermPtr& t) const;
  int intersect(int a, int b);
  int unite(int a, int b);
  int inv_proj(int ctor, int k, int nt);  // k is 1-based
  int inv_proj(const std::string& ctor, int k, int nt);
  bool is_empty(int nt) const;
  InclusionResult included(int a, int b) const;
  bool equivalent(int a, int b) const;

  std::vector<int> reachable(int root) const;
  // Trimmed copy without unproductive parts, duplicate nonterminals or
  // productions subsumed by a sibling production.
  int minimize(int root);
  // Copy of the grammar below root with one production removed; prod == -1
  // removes the bottom production of nt.
  int mutate(int root, int nt, int prod);
  // Copy of the grammar below root with one extra production on nt.
  int extend(int root, int nt, int ctor, std::vector<int> args);

  std::string dump(int root) const;
  std::string dump_json(int root) const;
  // Short inline description, e.g. "Succ(N1) | Zero".
  std::string ctor_text(int ctor, const std::vector<std::string>& args) const;

 private:
  int clone(int root, int skip_nt, int skip_prod, int extra_nt, const Production* extra);

  Signature sig_;
  std::vector<Nonterminal> nts_;
  std::map<std::pair<int, int>, int> inter_memo_;
  std::map<std::pair<int, int>, int> union_memo_;
  std::map<std::tuple<int, int, int>, int> proj_memo_;
};

}  // namespace demand

#endif  // DEMAND_GRAMMAR_HPP
