#pragma once

// Session state: the table of function variables, the table of functions
// (built-ins, plain definitions, choice and quantifier definitions, and their
// instances), the table of instances of second-order functions keyed by
// (function, canonical instantiation), and the table of theorems.
//
// A name lives in at most one table; witness functions occupy the function
// table, rewrite-rule names are reserved but carry no record of their own.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "softk/error.hpp"
#include "softk/term.hpp"

namespace softk {

enum class FunKind { Builtin, Plain, Choice, Quantifier, Witness };

inline const char* fun_kind_name(FunKind k) {
  switch (k) {
    case FunKind::Builtin: return "builtin";
    case FunKind::Plain: return "plain";
    case FunKind::Choice: return "choice";
    case FunKind::Quantifier: return "quantifier";
    case FunKind::Witness: return "witness";
  }
  return "?";
}

constexpr int kVariadic = -1;

struct FunctionRec {
  std::string name;
  FunKind kind = FunKind::Plain;
  int arity = 0;                       // kVariadic for and/or/list
  std::vector<std::string> fparams;    // empty for first-order functions
  std::vector<std::string> params;
  TermPtr body;                        // quantifier: the matrix; builtins/witnesses: null
  TermPtr guard;                       // constant t unless declared
  TermPtr measure;                     // only for recursive plain functions
  bool recursive = false;
  QuantKind quant = QuantKind::Forall; // quantifier kind
  std::vector<std::string> bound;      // choice/quantifier bound variables
  std::string witness_name;            // quantifier kind
  std::string rule_name;               // quantifier kind: <name>-necc / <name>-suff
  bool rewrite_direct = false;

  bool second_order() const { return !fparams.empty(); }
};

struct TheoremRec {
  std::string name;
  TermPtr formula;
  std::set<std::string> funvars;   // cached dependency set
  std::string rule_classes;        // recorded verbatim, no semantics here
};

// Instantiations are canonical by construction: std::map orders keys.
using Instantiation = std::map<std::string, std::string>;

inline std::string print_instantiation(const Instantiation& sigma) {
  std::string out = "(";
  bool first = true;
  for (const auto& [k, v] : sigma) {
    if (!first) out.push_back(' ');
    first = false;
    out += "(" + k + " . " + v + ")";
  }
  out.push_back(')');
  return out;
}

using InstanceKey = std::pair<std::string, Instantiation>;

namespace detail {

inline bool opt_term_equal(const TermPtr& a, const TermPtr& b) {
  if (!a || !b) return !a && !b;
  return term_equal(a, b);
}

}  // namespace detail

inline bool function_rec_equal(const FunctionRec& a, const FunctionRec& b) {
  return a.name == b.name && a.kind == b.kind && a.arity == b.arity &&
         a.fparams == b.fparams && a.params == b.params &&
         detail::opt_term_equal(a.body, b.body) && detail::opt_term_equal(a.guard, b.guard) &&
         detail::opt_term_equal(a.measure, b.measure) && a.recursive == b.recursive &&
         a.quant == b.quant && a.bound == b.bound && a.witness_name == b.witness_name &&
         a.rule_name == b.rule_name && a.rewrite_direct == b.rewrite_direct;
}

inline bool theorem_rec_equal(const TheoremRec& a, const TheoremRec& b) {
  return a.name == b.name && term_equal(a.formula, b.formula) && a.funvars == b.funvars &&
         a.rule_classes == b.rule_classes;
}

class Registry {
 public:
  Registry() { seed_builtins(); }

  // -- queries ---------------------------------------------------------------

  bool is_funvar(const std::string& name) const { return funvars_.count(name) != 0; }

  const FunctionRec* find_function(const std::string& name) const {
    auto it = functions_.find(name);
    return it == functions_.end() ? nullptr : &it->second;
  }

  const FunctionRec& function(const std::string& name) const {
    const FunctionRec* rec = find_function(name);
    if (!rec) fail(ErrorCode::UnknownFunction, "no function named " + name);
    return *rec;
  }

  const TheoremRec* find_theorem(const std::string& name) const {
    auto it = theorems_.find(name);
    return it == theorems_.end() ? nullptr : &it->second;
  }

  const TheoremRec& theorem(const std::string& name) const {
    const TheoremRec* rec = find_theorem(name);
    if (!rec) fail(ErrorCode::UnknownName, "no theorem named " + name);
    return *rec;
  }

  int funvar_arity(const std::string& name) const {
    auto it = funvars_.find(name);
    if (it == funvars_.end()) fail(ErrorCode::UnknownFunction, "no function variable named " + name);
    return it->second;
  }

  // Arity of any applicable name: function variable or function.
  int arity_of(const std::string& name) const {
    auto fv = funvars_.find(name);
    if (fv != funvars_.end()) return fv->second;
    return function(name).arity;
  }

  bool name_known(const std::string& name) const {
    return funvars_.count(name) || functions_.count(name) || theorems_.count(name) ||
           reserved_.count(name);
  }

  // The recorded instance of `sofun` under sigma restricted to its function
  // parameters; absence is a value, not an error.
  std::optional<std::string> lookup_instance(const std::string& sofun,
                                             const Instantiation& sigma) const {
    const FunctionRec& rec = function(sofun);
    Instantiation restricted;
    for (const auto& fp : rec.fparams) {
      auto it = sigma.find(fp);
      if (it != sigma.end()) restricted.insert(*it);
    }
    auto it = instances_.find(InstanceKey{sofun, restricted});
    if (it == instances_.end()) return std::nullopt;
    return it->second;
  }

  const std::map<InstanceKey, std::string>& instances() const { return instances_; }
  const std::map<std::string, int>& funvar_table() const { return funvars_; }
  const std::vector<std::string>& dump_order() const { return order_; }

  // -- dependency computation ------------------------------------------------

  // Function variables a term depends on: those applied in the term plus the
  // declared function parameters of every second-order function applied in
  // the term.  Does not descend into the bodies of referenced functions.
  std::set<std::string> funvars_of(const TermPtr& t) const {
    std::set<std::string> out;
    funvars_rec(t, out);
    return out;
  }

  std::set<std::string> funvars_of_opt(const TermPtr& t) const {
    return t ? funvars_of(t) : std::set<std::string>{};
  }

  // ok iff every application's argument count matches the registered arity.
  void check_arities(const TermPtr& t) const {
    switch (t->kind) {
      case Term::Kind::Var:
      case Term::Kind::Const:
        return;
      case Term::Kind::App: {
        int expected = arity_of(t->name);
        if (expected != kVariadic && static_cast<size_t>(expected) != t->args.size())
          fail(ErrorCode::Arity, t->name + " expects " + std::to_string(expected) +
                                     " arguments, got " + std::to_string(t->args.size()));
        for (const auto& a : t->args) check_arities(a);
        return;
      }
      case Term::Kind::Cond:
        for (const auto& [test, result] : t->clauses) {
          check_arities(test);
          check_arities(result);
        }
        return;
      case Term::Kind::Quant:
        check_arities(t->matrix);
        return;
    }
  }

  // -- registration ----------------------------------------------------------
  // Each register_* returns false when the record is identical to one already
  // present (a redundant re-registration) and true when the table grew.

  bool register_funvar(const std::string& name, int arity) {
    auto it = funvars_.find(name);
    if (it != funvars_.end()) {
      if (it->second == arity) return false;
      fail(ErrorCode::NameClash, name + " is a function variable of arity " +
                                     std::to_string(it->second));
    }
    require_unused(name);
    funvars_.emplace(name, arity);
    order_.push_back("funvar " + name);
    return true;
  }

  bool register_function(const FunctionRec& rec) {
    auto it = functions_.find(rec.name);
    if (it != functions_.end()) {
      if (function_rec_equal(it->second, rec)) return false;
      fail(ErrorCode::NameClash, rec.name + " is already a function");
    }
    require_unused(rec.name);
    // Validate against a stub entry so a recursive body resolves its own
    // name; the self-occurrence contributes nothing to the dependency set.
    FunctionRec stub;
    stub.name = rec.name;
    stub.kind = FunKind::Builtin;
    stub.arity = rec.arity;
    auto [slot, inserted] = functions_.emplace(rec.name, std::move(stub));
    try {
      validate_function(rec);
    } catch (...) {
      functions_.erase(slot);
      throw;
    }
    slot->second = rec;
    order_.push_back("function " + rec.name);
    return true;
  }

  bool register_instance(const std::string& sofun, const Instantiation& sigma,
                         const std::string& instance) {
    const FunctionRec& rec = function(sofun);
    if (!rec.second_order())
      fail(ErrorCode::Invariant, sofun + " is not second-order");
    for (const auto& [k, v] : sigma) {
      bool is_fparam = false;
      for (const auto& fp : rec.fparams)
        if (fp == k) is_fparam = true;
      if (!is_fparam)
        fail(ErrorCode::Invariant, k + " is not a function parameter of " + sofun);
    }
    InstanceKey key{sofun, sigma};
    auto it = instances_.find(key);
    if (it != instances_.end()) {
      if (it->second == instance) return false;
      fail(ErrorCode::NameClash, sofun + " already has the instance " + it->second +
                                     " under " + print_instantiation(sigma));
    }
    instances_.emplace(std::move(key), instance);
    order_.push_back("instance " + instance);
    return true;
  }

  bool register_theorem(const TheoremRec& rec) {
    auto it = theorems_.find(rec.name);
    if (it != theorems_.end()) {
      if (theorem_rec_equal(it->second, rec)) return false;
      fail(ErrorCode::NameClash, rec.name + " is already a theorem");
    }
    require_unused(rec.name);
    theorems_.emplace(rec.name, rec);
    order_.push_back("theorem " + rec.name);
    return true;
  }

  bool reserve_name(const std::string& name) {
    if (reserved_.count(name)) return false;
    require_unused(name);
    reserved_.insert(name);
    return true;
  }

  // -- whole-registry comparison (event redundancy, replay determinism) ------

  bool equal(const Registry& other) const {
    if (funvars_ != other.funvars_ || instances_ != other.instances_ ||
        reserved_ != other.reserved_ || order_ != other.order_)
      return false;
    if (functions_.size() != other.functions_.size()) return false;
    for (const auto& [name, rec] : functions_) {
      auto it = other.functions_.find(name);
      if (it == other.functions_.end() || !function_rec_equal(rec, it->second)) return false;
    }
    if (theorems_.size() != other.theorems_.size()) return false;
    for (const auto& [name, rec] : theorems_) {
      auto it = other.theorems_.find(name);
      if (it == other.theorems_.end() || !theorem_rec_equal(rec, it->second)) return false;
    }
    return true;
  }

  // One record per line, in registration order.
  std::string dump() const {
    std::string out;
    for (const auto& entry : order_) {
      auto space = entry.find(' ');
      std::string table = entry.substr(0, space);
      std::string name = entry.substr(space + 1);
      if (table == "funvar") {
        out += "funvar " + name + " arity=" + std::to_string(funvars_.at(name)) + "\n";
      } else if (table == "function") {
        const FunctionRec& rec = functions_.at(name);
        out += "function " + name + " kind=" + fun_kind_name(rec.kind) +
               " fparams=" + name_list(rec.fparams) + " params=" + name_list(rec.params);
        std::set<std::string> deps = funvars_of_opt(rec.body);
        for (const auto& s : funvars_of_opt(rec.guard)) deps.insert(s);
        for (const auto& s : funvars_of_opt(rec.measure)) deps.insert(s);
        for (const auto& fp : rec.fparams) deps.insert(fp);
        out += " deps=" + name_list({deps.begin(), deps.end()});
        if (rec.recursive) out += " recursive";
        out.push_back('\n');
      } else if (table == "instance") {
        for (const auto& [key, inst] : instances_) {
          if (inst != name) continue;
          out += "instance " + inst + " of=" + key.first +
                 " sigma=" + print_instantiation(key.second) + "\n";
        }
      } else if (table == "theorem") {
        const TheoremRec& rec = theorems_.at(name);
        out += "theorem " + name +
               " funvars=" + name_list({rec.funvars.begin(), rec.funvars.end()}) + "\n";
      }
    }
    return out;
  }

 private:
  std::map<std::string, int> funvars_;
  std::map<std::string, FunctionRec> functions_;
  std::map<InstanceKey, std::string> instances_;
  std::map<std::string, TheoremRec> theorems_;
  std::set<std::string> reserved_;
  std::vector<std::string> order_;

  static std::string name_list(const std::vector<std::string>& names) {
    std::string out = "(";
    for (size_t i = 0; i < names.size(); ++i) {
      if (i > 0) out.push_back(' ');
      out += names[i];
    }
    out.push_back(')');
    return out;
  }

  void require_unused(const std::string& name) {
    if (name_known(name)) fail(ErrorCode::NameClash, name + " is already in use");
  }

  void funvars_rec(const TermPtr& t, std::set<std::string>& out) const {
    switch (t->kind) {
      case Term::Kind::Var:
      case Term::Kind::Const:
        return;
      case Term::Kind::App: {
        if (is_funvar(t->name)) {
          out.insert(t->name);
        } else {
          const FunctionRec* rec = find_function(t->name);
          if (!rec) fail(ErrorCode::UnknownFunction, "no function named " + t->name);
          for (const auto& fp : rec->fparams) out.insert(fp);
        }
        for (const auto& a : t->args) funvars_rec(a, out);
        return;
      }
      case Term::Kind::Cond:
        for (const auto& [test, result] : t->clauses) {
          funvars_rec(test, out);
          funvars_rec(result, out);
        }
        return;
      case Term::Kind::Quant:
        funvars_rec(t->matrix, out);
        return;
    }
  }

  void validate_function(const FunctionRec& rec) {
    if (rec.kind == FunKind::Builtin || rec.kind == FunKind::Witness) return;
    if (rec.arity != static_cast<int>(rec.params.size()))
      fail(ErrorCode::Invariant, rec.name + ": arity differs from parameter count");

    std::set<std::string> fps;
    for (const auto& fp : rec.fparams) {
      if (!is_funvar(fp))
        fail(ErrorCode::Invariant, rec.name + ": " + fp + " is not a function variable");
      if (!fps.insert(fp).second)
        fail(ErrorCode::Invariant, rec.name + ": duplicate function parameter " + fp);
    }

    if (!rec.body) fail(ErrorCode::Invariant, rec.name + ": missing body");
    std::set<std::string> deps = funvars_of(rec.body);
    if (rec.kind != FunKind::Choice)
      for (const auto& s : funvars_of_opt(rec.guard)) deps.insert(s);
    if (rec.kind == FunKind::Plain)
      for (const auto& s : funvars_of_opt(rec.measure)) deps.insert(s);
    if (deps != fps) {
      std::string missing, extra;
      for (const auto& fp : fps)
        if (!deps.count(fp)) missing += (missing.empty() ? "" : " ") + fp;
      for (const auto& d : deps)
        if (!fps.count(d)) extra += (extra.empty() ? "" : " ") + d;
      fail(ErrorCode::FunvarMismatch,
           rec.name + ": function parameters must be exactly the function variables the " +
               "definition depends on (missing {" + missing + "}, extra {" + extra + "})");
    }

    bool self = applies_name(rec.body, rec.name);
    if (self != rec.recursive)
      fail(ErrorCode::Invariant, rec.name + (self ? ": body is recursive but not flagged so"
                                                  : ": flagged recursive but body has no self-call"));
    if (rec.measure && !rec.recursive)
      fail(ErrorCode::Invariant, rec.name + ": measure supplied for a non-recursive definition");

    if (rec.kind == FunKind::Choice || rec.kind == FunKind::Quantifier) {
      if (rec.bound.empty())
        fail(ErrorCode::Invariant, rec.name + ": no bound variables");
      std::set<std::string> bvs;
      for (const auto& b : rec.bound) {
        if (!bvs.insert(b).second)
          fail(ErrorCode::Invariant, rec.name + ": duplicate bound variable " + b);
        for (const auto& p : rec.params)
          if (p == b)
            fail(ErrorCode::Invariant,
                 rec.name + ": bound variable " + b + " collides with a parameter");
      }
    }
    if (rec.kind == FunKind::Quantifier) {
      if (rec.witness_name.empty() || rec.rule_name.empty())
        fail(ErrorCode::Invariant, rec.name + ": missing witness or rule name");
    }
  }

  void add_builtin(const std::string& name, int arity) {
    FunctionRec rec;
    rec.name = name;
    rec.kind = FunKind::Builtin;
    rec.arity = arity;
    functions_.emplace(name, std::move(rec));
  }

  void seed_builtins() {
    add_builtin("cons", 2);
    add_builtin("car", 1);
    add_builtin("cdr", 1);
    add_builtin("atom", 1);
    add_builtin("consp", 1);
    add_builtin("endp", 1);
    add_builtin("null", 1);
    add_builtin("equal", 2);
    add_builtin("iff", 2);
    add_builtin("not", 1);
    add_builtin("implies", 2);
    add_builtin("member", 2);
    add_builtin("append", 2);
    add_builtin("len", 1);
    add_builtin("natp", 1);
    add_builtin("fix", 1);
    add_builtin("nfix", 1);
    add_builtin("binary-+", 2);
    add_builtin("*", 2);
    add_builtin("<", 2);
    add_builtin("code-char", 1);
    add_builtin("true-listp", 1);
    add_builtin("mv-nth", 2);
    add_builtin("list", kVariadic);
    add_builtin("and", kVariadic);
    add_builtin("or", kVariadic);
    add_builtin("if", 3);
  }
};

}  // namespace softk
