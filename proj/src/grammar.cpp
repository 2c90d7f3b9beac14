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

#include "demand/grammar.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

#include "json.hpp"

namespace demand {

int Signature::intern(const std::string& name, int arity) {
  auto it = index_.find(name);
  if (it != index_.end()) {
    if (ctors_[it->second].arity != arity)
      throw std::runtime_error("constructor " + name + " used with two arities");
    return it->second;
  }
  int id = static_cast<int>(ctors_.size());
  ctors_.push_back({name, arity});
  index_[name] = id;
  return id;
}

int Signature::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

Grammar::Grammar() {
  Nonterminal any;
  any.label = "Any";
  any.any = true;
  any.bot = true;
  nts_.push_back(any);
  Nonterminal nothing;
  nothing.label = "Nothing";
  nts_.push_back(nothing);
}

int Grammar::add_nt(std::string label, bool bot) {
  Nonterminal n;
  n.label = std::move(label);
  n.bot = bot;
  nts_.push_back(n);
  return static_cast<int>(nts_.size()) - 1;
}

void Grammar::add_prod(int nt, int ctor, std::vector<int> args) {
  if (nt == kAny || nt == kNothing)
    throw std::runtime_error("cannot extend Any or Nothing");
  if (static_cast<int>(args.size()) != sig_.at(ctor).arity)
    throw std::runtime_error("arity mismatch for " + sig_.at(ctor).name);
  nts_.at(nt).prods.push_back({ctor, std::move(args)});
}

void Grammar::add_prod(int nt, const std::string& ctor, std::vector<int> args) {
  int c = sig_.intern(ctor, static_cast<int>(args.size()));
  add_prod(nt, c, std::move(args));
}

void Grammar::set_any(int nt) {
  nts_.at(nt).any = true;
  nts_.at(nt).bot = true;
  nts_.at(nt).prods.clear();
}

bool Grammar::member(int nt, const PTermPtr& t) const {
  const Nonterminal& n = nts_.at(nt);
  if (n.any) return true;
  if (t->bot) return n.bot;
  int c = sig_.find(t->ctor);
  if (c < 0) return false;
  for (auto& p : n.prods) {
    if (p.ctor != c) continue;
    bool ok = true;
    for (size_t k = 0; k < p.args.size() && ok; ++k) ok = member(p.args[k], t->args[k]);
    if (ok) return true;
  }
  return false;
}

int Grammar::intersect(int a, int b) {
  if (a == b) return a;
  if (nts_[a].any) return b;
  if (nts_[b].any) return a;
  if (a == kNothing || b == kNothing) return kNothing;
  auto key = std::minmax(a, b);
  auto it = inter_memo_.find(key);
  if (it != inter_memo_.end()) return it->second;
  int r = add_nt();
  inter_memo_[key] = r;
  nts_[r].bot = nts_[a].bot && nts_[b].bot;
  std::vector<Production> pa = nts_[a].prods, pb = nts_[b].prods;
  for (auto& x : pa) {
    for (auto& y : pb) {
      if (x.ctor != y.ctor) continue;
      std::vector<int> args;
      for (size_t k = 0; k < x.args.size(); ++k)
        args.push_back(intersect(x.args[k], y.args[k]));
      nts_[r].prods.push_back({x.ctor, args});
    }
  }
  return r;
}

int Grammar::unite(int a, int b) {
  if (a == b) return a;
  if (nts_[a].any || nts_[b].any) return kAny;
  if (a == kNothing) return b;
  if (b == kNothing) return a;
  auto key = std::minmax(a, b);
  auto it = union_memo_.find(key);
  if (it != union_memo_.end()) return it->second;
  int r = add_nt();
  union_memo_[key] = r;
  nts_[r].bot = nts_[a].bot || nts_[b].bot;
  std::vector<Production> ps = nts_[a].prods;
  for (auto& p : nts_[b].prods) ps.push_back(p);
  nts_[r].prods = ps;
  return r;
}

int Grammar::inv_proj(int ctor, int k, int nt) {
  if (nts_.at(nt).any) return kAny;
  if (k < 1 || k > sig_.at(ctor).arity)
    throw std::runtime_error("projection index out of range");
  auto key = std::make_tuple(ctor, k, nt);
  auto it = proj_memo_.find(key);
  if (it != proj_memo_.end()) return it->second;
  int acc = kNothing;
  std::vector<Production> ps = nts_[nt].prods;
  for (auto& p : ps) {
    if (p.ctor != ctor) continue;
    bool others = true;
    for (size_t i = 0; i < p.args.size() && others; ++i)
      if (static_cast<int>(i) != k - 1 && is_empty(p.args[i])) others = false;
    if (!others) continue;
    acc = unite(acc, p.args[k - 1]);
  }
  proj_memo_[key] = acc;
  return acc;
}

int Grammar::inv_proj(const std::string& ctor, int k, int nt) {
  int c = sig_.find(ctor);
  if (c < 0) return nts_.at(nt).any ? kAny : kNothing;
  return inv_proj(c, k, nt);
}

std::vector<int> Grammar::reachable(int root) const {
  std::vector<int> out;
  std::set<int> seen{root};
  std::deque<int> q{root};
  while (!q.empty()) {
    int x = q.front();
    q.pop_front();
    out.push_back(x);
    for (auto& p : nts_[x].prods)
      for (int c : p.args)
        if (seen.insert(c).second) q.push_back(c);
  }
  return out;
}

bool Grammar::is_empty(int nt) const {
  std::vector<int> r = reachable(nt);
  std::set<int> prod;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int x : r) {
      if (prod.count(x)) continue;
      const Nonterminal& n = nts_[x];
      bool ok = n.any || n.bot;
      for (size_t i = 0; i < n.prods.size() && !ok; ++i) {
        ok = true;
        for (int c : n.prods[i].args)
          if (!prod.count(c)) {
            ok = false;
            break;
          }
      }
      if (ok) {
        prod.insert(x);
        changed = true;
      }
    }
  }
  return !prod.count(nt);
}

InclusionResult Grammar::included(int a, int b) const {
  if (a == b || nts_[b].any || a == kNothing) return {};
  std::vector<int> A = reachable(a);
  std::vector<int> B = reachable(b);
  std::map<int, int> bidx;
  for (size_t i = 0; i < B.size(); ++i) bidx[B[i]] = static_cast<int>(i);
  int broot = bidx[b];
  using Set = std::vector<char>;
  struct Found {
    Set s;
    PTermPtr w;
  };
  std::map<int, std::vector<Found>> found;
  std::map<int, std::set<Set>> seen;

  auto bot_set = [&]() {
    Set s(B.size(), 0);
    for (size_t i = 0; i < B.size(); ++i) s[i] = nts_[B[i]].any || nts_[B[i]].bot;
    return s;
  };
  auto ctor_set = [&](int ctor, const std::vector<const Set*>& kids) {
    Set s(B.size(), 0);
    for (size_t i = 0; i < B.size(); ++i) {
      const Nonterminal& y = nts_[B[i]];
      if (y.any) {
        s[i] = 1;
        continue;
      }
      if (ctor < 0) continue;
      for (auto& p : y.prods) {
        if (p.ctor != ctor) continue;
        bool ok = true;
        for (size_t k = 0; k < p.args.size() && ok; ++k) {
          auto it = bidx.find(p.args[k]);
          ok = it != bidx.end() && (*kids[k])[it->second];
        }
        if (ok) {
          s[i] = 1;
          break;
        }
      }
    }
    return s;
  };

  InclusionResult res;
  auto add = [&](int x, Set s, PTermPtr w) {
    if (!seen[x].insert(s).second) return false;
    if (x == a && !s[broot] && res.holds) {
      res.holds = false;
      res.witness = w;
    }
    found[x].push_back({std::move(s), std::move(w)});
    return true;
  };

  // Productions of the left side; Any expands to every known constructor
  // plus one constructor unknown to the right side.
  struct LProd {
    int ctor;
    std::vector<int> args;
  };
  std::map<int, std::vector<LProd>> lprods;
  for (int x : A) {
    const Nonterminal& n = nts_[x];
    if (n.any) {
      for (size_t c = 0; c < sig_.size(); ++c)
        lprods[x].push_back({static_cast<int>(c), std::vector<int>(sig_.at(c).arity, x)});
      lprods[x].push_back({-1, {}});
    } else {
      for (auto& p : n.prods) lprods[x].push_back({p.ctor, p.args});
    }
    if (n.any || n.bot) add(x, bot_set(), PTerm::bottom());
  }
  bool changed = true;
  while (changed && res.holds) {
    changed = false;
    for (int x : A) {
      for (auto& lp : lprods[x]) {
        size_t n = lp.args.size();
        bool ready = true;
        for (int c : lp.args)
          if (found[c].empty()) ready = false;
        if (!ready) continue;
        std::vector<size_t> idx(n, 0);
        while (true) {
          std::vector<const Set*> kids;
          std::vector<PTermPtr> ws;
          for (size_t k = 0; k < n; ++k) {
            kids.push_back(&found[lp.args[k]][idx[k]].s);
            ws.push_back(found[lp.args[k]][idx[k]].w);
          }
          Set s = ctor_set(lp.ctor, kids);
          PTermPtr w = PTerm::node(lp.ctor < 0 ? "<other>" : sig_.at(lp.ctor).name, ws);
          if (add(x, s, w)) changed = true;
          if (!res.holds) return res;
          int k = static_cast<int>(n) - 1;
          while (k >= 0 && ++idx[k] == found[lp.args[k]].size()) idx[k--] = 0;
          if (k < 0) break;
        }
      }
    }
  }
  return res;
}

bool Grammar::equivalent(int a, int b) const {
  return included(a, b).holds && included(b, a).holds;
}

int Grammar::clone(int root, int skip_nt, int skip_prod, int extra_nt,
                   const Production* extra) {
  if (root == kAny || root == kNothing) {
    if (root == extra_nt || root == skip_nt)
      throw std::runtime_error("cannot modify Any or Nothing");
    return root;
  }
  std::vector<int> r = reachable(root);
  std::map<int, int> m{{kAny, kAny}, {kNothing, kNothing}};
  for (int x : r)
    if (!m.count(x)) m[x] = add_nt(nts_[x].label, nts_[x].bot);
  for (int x : r) {
    if (x == kAny || x == kNothing) continue;
    Nonterminal src = nts_[x];
    Nonterminal& dst = nts_[m[x]];
    dst.bot = src.bot && !(x == skip_nt && skip_prod == -1);
    for (size_t i = 0; i < src.prods.size(); ++i) {
      if (x == skip_nt && static_cast<int>(i) == skip_prod) continue;
      Production p = src.prods[i];
      for (auto& c : p.args) c = m.count(c) ? m[c] : c;
      nts_[m[x]].prods.push_back(p);
    }
    (void)dst;
    if (x == extra_nt && extra) {
      Production p = *extra;
      nts_[m[x]].prods.push_back(p);
    }
  }
  return m[root];
}

int Grammar::mutate(int root, int nt, int prod) { return clone(root, nt, prod, -1, nullptr); }

int Grammar::extend(int root, int nt, int ctor, std::vector<int> args) {
  Production p{ctor, std::move(args)};
  return clone(root, -1, -2, nt, &p);
}

int Grammar::minimize(int root) {
  std::vector<int> r = reachable(root);
  // Productive nonterminals.
  std::set<int> prod;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int x : r) {
      if (prod.count(x)) continue;
      const Nonterminal& n = nts_[x];
      bool ok = n.any || n.bot;
      for (auto& p : n.prods) {
        if (ok) break;
        ok = std::all_of(p.args.begin(), p.args.end(),
                         [&](int c) { return prod.count(c) > 0; });
      }
      if (ok) {
        prod.insert(x);
        changed = true;
      }
    }
  }
  if (!prod.count(root)) return kNothing;
  if (nts_[root].any) return kAny;
  auto live = [&](const Production& p) {
    return std::all_of(p.args.begin(), p.args.end(),
                       [&](int c) { return prod.count(c) > 0; });
  };
  // Partition refinement into classes of identically shaped nonterminals.
  std::vector<int> live_nts;
  for (int x : r)
    if (prod.count(x)) live_nts.push_back(x);
  std::map<int, int> cls;
  for (int x : live_nts) cls[x] = nts_[x].any ? 0 : 1 + (nts_[x].bot ? 1 : 0);
  while (true) {
    std::map<std::pair<int, std::set<std::vector<int>>>, int> keys;
    std::map<int, int> next;
    for (int x : live_nts) {
      std::set<std::vector<int>> shape;
      if (!nts_[x].any) {
        for (auto& p : nts_[x].prods) {
          if (!live(p)) continue;
          std::vector<int> v{p.ctor};
          for (int c : p.args) v.push_back(cls[c]);
          shape.insert(v);
        }
      }
      auto key = std::make_pair(cls[x], shape);
      auto it = keys.find(key);
      if (it == keys.end()) it = keys.emplace(key, static_cast<int>(keys.size())).first;
      next[x] = it->second;
    }
    bool stable = std::set<int>([&] {
                    std::set<int> s;
                    for (auto& [k, v] : next) s.insert(v);
                    return s;
                  }()).size() ==
                  std::set<int>([&] {
                    std::set<int> s;
                    for (auto& [k, v] : cls) s.insert(v);
                    return s;
                  }()).size();
    cls = next;
    if (stable) break;
  }
  std::map<int, int> rep;  // class -> new nonterminal
  std::map<int, int> first;  // class -> representative old nonterminal
  for (int x : live_nts) {
    if (first.count(cls[x])) continue;
    first[cls[x]] = x;
    rep[cls[x]] = nts_[x].any ? kAny : add_nt(nts_[x].label, nts_[x].bot);
  }
  for (auto& [c, x] : first) {
    int nx = rep[c];
    if (nx == kAny) continue;
    std::set<std::vector<int>> done;
    std::vector<Production> ps;
    for (auto& p : nts_[x].prods) {
      if (!live(p)) continue;
      Production q{p.ctor, {}};
      for (int a : p.args) q.args.push_back(rep[cls[a]]);
      std::vector<int> key{q.ctor};
      key.insert(key.end(), q.args.begin(), q.args.end());
      if (done.insert(key).second) ps.push_back(q);
    }
    nts_[nx].prods = ps;
  }
  // Drop productions subsumed by a sibling.
  for (auto& [c, x] : first) {
    int nx = rep[c];
    if (nx == kAny) continue;
    std::vector<Production> ps = nts_[nx].prods;
    std::vector<bool> drop(ps.size(), false);
    for (size_t i = 0; i < ps.size(); ++i) {
      for (size_t j = 0; j < ps.size() && !drop[i]; ++j) {
        if (i == j || drop[j] || ps[i].ctor != ps[j].ctor) continue;
        bool sub = true;
        for (size_t k = 0; k < ps[i].args.size() && sub; ++k)
          sub = included(ps[i].args[k], ps[j].args[k]).holds;
        if (sub) drop[i] = true;
      }
    }
    std::vector<Production> kept;
    for (size_t i = 0; i < ps.size(); ++i)
      if (!drop[i]) kept.push_back(ps[i]);
    nts_[nx].prods = kept;
  }
  return rep[cls[root]];
}

std::string Grammar::ctor_text(int ctor, const std::vector<std::string>& args) const {
  const std::string& n = sig_.at(ctor).name;
  std::ostringstream os;
  if (tuple_arity(n) >= 0) {
    os << "(";
    for (size_t i = 0; i < args.size(); ++i) os << (i ? ", " : "") << args[i];
    os << ")";
  } else if (n == ":" && args.size() == 2) {
    os << "(" << args[0] << " : " << args[1] << ")";
  } else if (args.empty()) {
    os << n;
  } else {
    os << n << "(";
    for (size_t i = 0; i < args.size(); ++i) os << (i ? ", " : "") << args[i];
    os << ")";
  }
  return os.str();
}

namespace {

std::map<int, std::string> dump_names(const Grammar& g, const std::vector<int>& r) {
  std::map<int, std::string> names{{Grammar::kAny, "Any"}, {Grammar::kNothing, "Nothing"}};
  int k = 0;
  for (int x : r)
    if (!names.count(x)) names[x] = g.nt(x).any ? "Any" : "N" + std::to_string(k++);
  return names;
}

}  // namespace

std::string Grammar::dump(int root) const {
  std::vector<int> r = reachable(root);
  auto names = dump_names(*this, r);
  std::ostringstream os;
  if (root == kAny || root == kNothing || nts_[root].any) {
    os << names[root] << "\n";
    return os.str();
  }
  for (int x : r) {
    if (x == kAny || x == kNothing || nts_[x].any) continue;
    os << names[x] << " ->";
    const Nonterminal& n = nts_[x];
    if (n.prods.empty() && !n.bot) {
      os << " {}\n";
      continue;
    }
    bool first = true;
    for (auto& p : n.prods) {
      std::vector<std::string> as;
      for (int c : p.args) as.push_back(names[c]);
      os << (first ? " " : " | ") << ctor_text(p.ctor, as);
      first = false;
    }
    if (n.bot) os << (first ? " " : " | ") << "_|_";
    os << "\n";
  }
  return os.str();
}

std::string Grammar::dump_json(int root) const {
  std::vector<int> r = reachable(root);
  auto names = dump_names(*this, r);
  nlohmann::json j;
  j["root"] = names[root];
  j["nonterminals"] = nlohmann::json::array();
  for (int x : r) {
    if (x == kAny || x == kNothing || nts_[x].any) continue;
    nlohmann::json nj;
    nj["name"] = names[x];
    nj["bottom"] = nts_[x].bot;
    nj["productions"] = nlohmann::json::array();
    for (auto& p : nts_[x].prods) {
      nlohmann::json pj;
      pj["ctor"] = sig_.at(p.ctor).name;
      pj["args"] = nlohmann::json::array();
      for (int c : p.args) pj["args"].push_back(names[c]);
      nj["productions"].push_back(pj);
    }
    j["nonterminals"].push_back(nj);
  }
  return j.dump();
}

}  // namespace demand
