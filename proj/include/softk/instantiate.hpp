#pragma once

// Application of instantiations to terms, the pair closure needed to
// instantiate a theorem, and the constraint obligations that closure incurs.
//
// Applying an instantiation replaces explicit applications of its keys and,
// through the instance table, implicit occurrences as function parameters of
// second-order functions.  Instantiating a theorem additionally requires a
// replacement pair for every second-order function the theorem reaches
// through definition bodies that depends on a key; each such pair obliges the
// replacement's recorded constraints to equal the instantiated constraints of
// the replaced function, which holds by construction for table-built
// instances.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "softk/registry.hpp"
#include "softk/term.hpp"

namespace softk {

inline Instantiation restrict_to(const Instantiation& sigma,
                                 const std::vector<std::string>& fparams) {
  Instantiation out;
  for (const auto& fp : fparams) {
    auto it = sigma.find(fp);
    if (it != sigma.end()) out.insert(*it);
  }
  return out;
}

inline bool intersects(const std::vector<std::string>& fparams, const Instantiation& sigma) {
  for (const auto& fp : fparams)
    if (sigma.count(fp)) return true;
  return false;
}

// Keys must be distinct registered function variables; each value must be a
// registered function variable or function of the same arity.
inline void validate_instantiation(const Instantiation& sigma, const Registry& reg) {
  for (const auto& [key, value] : sigma) {
    if (!reg.is_funvar(key))
      fail(ErrorCode::Invariant, key + " is not a function variable");
    int key_arity = reg.funvar_arity(key);
    int value_arity;
    if (reg.is_funvar(value)) {
      value_arity = reg.funvar_arity(value);
    } else {
      const FunctionRec* rec = reg.find_function(value);
      if (!rec) fail(ErrorCode::UnknownFunction, "no function named " + value);
      if (rec->kind == FunKind::Witness)
        fail(ErrorCode::Invariant, value + " is a witness function");
      value_arity = rec->arity;
    }
    if (value_arity != key_arity)
      fail(ErrorCode::Arity, value + " has arity " + std::to_string(value_arity) +
                                 " but " + key + " has arity " + std::to_string(key_arity));
  }
}

// One not-yet-registered instance, visible during its own construction so a
// recursive definition's self-reference resolves to the new name.
struct PendingInstance {
  std::string sofun;
  Instantiation sigma;
  std::string name;
};

inline TermPtr apply_instantiation(const TermPtr& t, const Instantiation& sigma,
                                   const Registry& reg,
                                   const PendingInstance* pending = nullptr) {
  if (sigma.empty()) return t;
  switch (t->kind) {
    case Term::Kind::Var:
    case Term::Kind::Const:
      return t;
    case Term::Kind::App: {
      std::vector<TermPtr> args;
      args.reserve(t->args.size());
      for (const auto& a : t->args) args.push_back(apply_instantiation(a, sigma, reg, pending));
      auto hit = sigma.find(t->name);
      if (hit != sigma.end()) return t_app(hit->second, std::move(args));
      const FunctionRec* rec = reg.find_function(t->name);
      if (rec && rec->second_order() && intersects(rec->fparams, sigma)) {
        Instantiation restricted = restrict_to(sigma, rec->fparams);
        if (pending && pending->sofun == t->name && pending->sigma == restricted)
          return t_app(pending->name, std::move(args));
        auto inst = reg.lookup_instance(t->name, restricted);
        if (!inst)
          fail(ErrorCode::MissingInstance,
               "no recorded instance of " + t->name + " under " +
                   print_instantiation(restricted) + "; introduce one via (defun-inst ... (" +
                   t->name + " ...)) and re-try");
        return t_app(*inst, std::move(args));
      }
      return t_app(t->name, std::move(args));
    }
    case Term::Kind::Cond: {
      std::vector<std::pair<TermPtr, TermPtr>> clauses;
      clauses.reserve(t->clauses.size());
      for (const auto& [test, result] : t->clauses)
        clauses.emplace_back(apply_instantiation(test, sigma, reg, pending),
                             apply_instantiation(result, sigma, reg, pending));
      return t_cond(std::move(clauses));
    }
    case Term::Kind::Quant:
      return t_quant(t->quant, t->bound, apply_instantiation(t->matrix, sigma, reg, pending));
  }
  return t;
}

// Plain functional substitution of applied names; no table consultation.
inline TermPtr apply_pairs(const TermPtr& t, const std::map<std::string, std::string>& names) {
  switch (t->kind) {
    case Term::Kind::Var:
    case Term::Kind::Const:
      return t;
    case Term::Kind::App: {
      std::vector<TermPtr> args;
      args.reserve(t->args.size());
      for (const auto& a : t->args) args.push_back(apply_pairs(a, names));
      auto hit = names.find(t->name);
      return t_app(hit == names.end() ? t->name : hit->second, std::move(args));
    }
    case Term::Kind::Cond: {
      std::vector<std::pair<TermPtr, TermPtr>> clauses;
      clauses.reserve(t->clauses.size());
      for (const auto& [test, result] : t->clauses)
        clauses.emplace_back(apply_pairs(test, names), apply_pairs(result, names));
      return t_cond(std::move(clauses));
    }
    case Term::Kind::Quant:
      return t_quant(t->quant, t->bound, apply_pairs(t->matrix, names));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Pair closure

enum class PairRole { FunVar, SoFun, Witness };

struct ClosurePair {
  std::string replaced;
  std::string replacement;
  PairRole role = PairRole::SoFun;
};

using PairClosure = std::vector<ClosurePair>;

namespace detail {

inline std::vector<std::string> second_order_refs(const TermPtr& t, const Registry& reg) {
  std::vector<std::string> out;
  for (const auto& name : applied_names(t)) {
    const FunctionRec* rec = reg.find_function(name);
    if (rec && rec->second_order() && rec->kind != FunKind::Witness) out.push_back(name);
  }
  return out;
}

}  // namespace detail

// All replacement pairs a functional instantiation of `thm` under `sigma`
// needs: the sigma pairs themselves, then a pair for every second-order
// function reachable from the formula through definition bodies that depends
// on a key of sigma (breadth-first, each level in name order), then witness
// pairs for the quantifier functions among those.
inline PairClosure compute_more_pairs(const TheoremRec& thm, const Instantiation& sigma,
                                      const Registry& reg) {
  PairClosure funvar_pairs, sofun_pairs, witness_pairs;
  for (const auto& [key, value] : sigma)
    funvar_pairs.push_back({key, value, PairRole::FunVar});

  std::set<std::string> visited;
  std::vector<std::string> level;
  for (const auto& name : detail::second_order_refs(thm.formula, reg))
    if (visited.insert(name).second) level.push_back(name);
  std::sort(level.begin(), level.end());

  while (!level.empty()) {
    std::vector<std::string> next;
    for (const auto& sof : level) {
      const FunctionRec& rec = reg.function(sof);
      if (intersects(rec.fparams, sigma)) {
        Instantiation restricted = restrict_to(sigma, rec.fparams);
        auto inst = reg.lookup_instance(sof, restricted);
        if (!inst)
          fail(ErrorCode::MissingInstance,
               "no recorded instance of " + sof + " under " + print_instantiation(restricted) +
                   "; introduce one via (defun-inst ... (" + sof + " ...)) and re-try");
        sofun_pairs.push_back({sof, *inst, PairRole::SoFun});
        if (rec.kind == FunKind::Quantifier) {
          const FunctionRec& inst_rec = reg.function(*inst);
          witness_pairs.push_back({rec.witness_name, inst_rec.witness_name, PairRole::Witness});
        }
      }
      if (rec.body)
        for (const auto& name : detail::second_order_refs(rec.body, reg))
          if (visited.insert(name).second) next.push_back(name);
    }
    std::sort(next.begin(), next.end());
    level = std::move(next);
  }

  PairClosure out = std::move(funvar_pairs);
  out.insert(out.end(), sofun_pairs.begin(), sofun_pairs.end());
  out.insert(out.end(), witness_pairs.begin(), witness_pairs.end());
  return out;
}

// ---------------------------------------------------------------------------
// Constraints and their discharge

enum class ObligationKind { Definition, ChoiceAxiom, RewriteRule };

inline const char* obligation_kind_name(ObligationKind k) {
  switch (k) {
    case ObligationKind::Definition: return "definition";
    case ObligationKind::ChoiceAxiom: return "choice-axiom";
    case ObligationKind::RewriteRule: return "rewrite-rule";
  }
  return "?";
}

struct Constraint {
  ObligationKind kind;
  TermPtr term;
};

namespace detail {

inline TermPtr self_application(const FunctionRec& rec) {
  std::vector<TermPtr> args;
  for (const auto& p : rec.params) args.push_back(t_var(p));
  return t_app(rec.name, std::move(args));
}

// The i-th component of a (possibly multi-valued) chosen tuple.
inline TermPtr tuple_component(const TermPtr& tuple, size_t i, size_t width) {
  if (width == 1) return tuple;
  return t_app("mv-nth", {t_const(v_int(static_cast<long long>(i))), tuple});
}

inline std::map<std::string, TermPtr> bound_to_tuple(const FunctionRec& rec,
                                                     const TermPtr& tuple) {
  std::map<std::string, TermPtr> sub;
  for (size_t i = 0; i < rec.bound.size(); ++i)
    sub.emplace(rec.bound[i], tuple_component(tuple, i, rec.bound.size()));
  return sub;
}

}  // namespace detail

// The logical constraints a replacement must satisfy: the definition for a
// plain function, the constraining axiom for a choice function, the
// definition plus the rewrite rule for a quantifier function.
inline std::vector<Constraint> constraints_of(const FunctionRec& rec, const Registry& reg) {
  (void)reg;
  TermPtr self = detail::self_application(rec);
  switch (rec.kind) {
    case FunKind::Plain:
      return {{ObligationKind::Definition, t_app("equal", {self, rec.body})}};
    case FunKind::Choice: {
      TermPtr chosen = subst_vars(rec.body, detail::bound_to_tuple(rec, self));
      return {{ObligationKind::ChoiceAxiom, t_app("implies", {rec.body, chosen})}};
    }
    case FunKind::Quantifier: {
      std::vector<TermPtr> args;
      for (const auto& p : rec.params) args.push_back(t_var(p));
      TermPtr witness_app = t_app(rec.witness_name, std::move(args));
      TermPtr definition =
          t_app("equal", {self, subst_vars(rec.body, detail::bound_to_tuple(rec, witness_app))});
      TermPtr rule = rec.quant == QuantKind::Forall ? t_app("implies", {self, rec.body})
                                                    : t_app("implies", {rec.body, self});
      return {{ObligationKind::Definition, definition}, {ObligationKind::RewriteRule, rule}};
    }
    case FunKind::Builtin:
    case FunKind::Witness:
      return {};
  }
  return {};
}

inline std::vector<Constraint> constraints_of(const std::string& name, const Registry& reg) {
  return constraints_of(reg.function(name), reg);
}

struct Obligation {
  std::string replaced;
  std::string replacement;
  ObligationKind kind;
  TermPtr expected;  // instantiated constraint of the replaced function
  TermPtr actual;    // recorded constraint of the replacement
  bool discharged = false;
};

// Function-variable and witness pairs oblige nothing; every second-order pair
// obliges each constraint of the replaced function, instantiated through the
// whole closure, to equal the replacement's recorded constraint.
inline std::vector<Obligation> discharge_obligations(const PairClosure& pairs,
                                                     const Instantiation& sigma,
                                                     const Registry& reg) {
  (void)sigma;
  std::map<std::string, std::string> names;
  for (const auto& p : pairs) names.emplace(p.replaced, p.replacement);

  std::vector<Obligation> out;
  for (const auto& p : pairs) {
    if (p.role != PairRole::SoFun) continue;
    auto replaced_cs = constraints_of(p.replaced, reg);
    auto replacement_cs = constraints_of(p.replacement, reg);
    for (size_t i = 0; i < replaced_cs.size(); ++i) {
      Obligation ob;
      ob.replaced = p.replaced;
      ob.replacement = p.replacement;
      ob.kind = replaced_cs[i].kind;
      ob.expected = apply_pairs(replaced_cs[i].term, names);
      ob.actual = i < replacement_cs.size() ? replacement_cs[i].term : nullptr;
      ob.discharged = ob.actual && alpha_equal(ob.expected, ob.actual);
      out.push_back(std::move(ob));
    }
  }
  return out;
}

}  // namespace softk
