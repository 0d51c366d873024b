#pragma once

// Refinement chains: an ordered sequence of predicates over the target
// function variables, from the requirements predicate down to one that pins
// every target to an executable definition, together with the step theorems
// (implies (spec_j) (spec_j-1)) that justify each strengthening.
//
// Composing a chain checks every step's implication shape and records the
// end-to-end theorem.  Verifying a chain's implementation checks the
// instantiated requirements predicate over a finite universe.
//
// A target function variable may be introduced mid-chain; it then occurs
// only on the hypothesis side of its step theorem, where its implicit
// universal quantification over the implication amounts to an existential
// one over the hypothesis.  No bookkeeping beyond the dependency sets is
// needed for such additions.

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "softk/eval.hpp"
#include "softk/instantiate.hpp"
#include "softk/registry.hpp"

namespace softk {

struct RefinementChain {
  std::string name;
  std::vector<std::string> specs;  // requirements predicate first
  std::vector<std::string> steps;  // steps[j] proves specs[j+1] => specs[j]
  Instantiation impl;              // target funvar -> executable function
};

inline bool chain_equal(const RefinementChain& a, const RefinementChain& b) {
  return a.name == b.name && a.specs == b.specs && a.steps == b.steps && a.impl == b.impl;
}

namespace detail {

inline void flatten_and(const TermPtr& t, std::vector<TermPtr>& out) {
  if (t->kind == Term::Kind::App && t->name == "and") {
    for (const auto& a : t->args) flatten_and(a, out);
    return;
  }
  out.push_back(t);
}

inline std::vector<TermPtr> flatten_and(const TermPtr& t) {
  std::vector<TermPtr> out;
  flatten_and(t, out);
  return out;
}

// Whether `t` asserts `spec`: its direct application, or a conjunction with
// the same conjuncts as the spec's body in any order.
inline bool matches_spec(const TermPtr& t, const FunctionRec& spec) {
  if (t->kind == Term::Kind::App && t->name == spec.name) return true;
  if (spec.kind != FunKind::Plain || !spec.body) return false;
  auto lhs = flatten_and(t);
  auto rhs = flatten_and(spec.body);
  if (lhs.size() != rhs.size()) return false;
  std::vector<std::string> ls, rs;
  for (const auto& x : lhs) ls.push_back(print_term(x));
  for (const auto& x : rhs) rs.push_back(print_term(x));
  std::sort(ls.begin(), ls.end());
  std::sort(rs.begin(), rs.end());
  return ls == rs;
}

inline TermPtr spec_application(const FunctionRec& spec) {
  if (spec.arity != 0)
    fail(ErrorCode::ChainShape, spec.name + " must be a nullary predicate");
  return t_app(spec.name, {});
}

}  // namespace detail

// Checks each step theorem's (implies (spec_j) (spec_j-1)) shape, registers
// the end-to-end theorem under the chain's name, and returns it.
inline TheoremRec compose_chain(const RefinementChain& chain, Registry& reg) {
  if (chain.specs.empty())
    fail(ErrorCode::ChainShape, "chain has no specification predicates");
  if (chain.steps.size() + 1 != chain.specs.size())
    fail(ErrorCode::ChainShape, "chain needs exactly one step theorem per refinement");
  if (chain.steps.empty())
    fail(ErrorCode::ChainShape, "chain has no steps to compose");

  for (size_t j = 0; j < chain.steps.size(); ++j) {
    const TheoremRec& step = reg.theorem(chain.steps[j]);
    const FunctionRec& hyp_spec = reg.function(chain.specs[j + 1]);
    const FunctionRec& concl_spec = reg.function(chain.specs[j]);
    const TermPtr& f = step.formula;
    if (f->kind != Term::Kind::App || f->name != "implies" || f->args.size() != 2)
      fail(ErrorCode::ChainShape,
           "step " + std::to_string(j + 1) + " (" + step.name + ") is not an implication");
    if (!detail::matches_spec(f->args[0], hyp_spec))
      fail(ErrorCode::ChainShape, "step " + std::to_string(j + 1) + " (" + step.name +
                                      "): hypothesis does not assert " + hyp_spec.name);
    if (!detail::matches_spec(f->args[1], concl_spec))
      fail(ErrorCode::ChainShape, "step " + std::to_string(j + 1) + " (" + step.name +
                                      "): conclusion does not assert " + concl_spec.name);
  }

  TheoremRec rec;
  rec.name = chain.name;
  rec.formula = t_app("implies", {detail::spec_application(reg.function(chain.specs.back())),
                                  detail::spec_application(reg.function(chain.specs.front()))});
  rec.funvars = reg.funvars_of(rec.formula);
  reg.register_theorem(rec);
  return rec;
}

// Reads the implementation off the final predicate: each conjunct that is a
// quantifier predicate with matrix (equal (fv args) (fn args)) contributes
// the pair fv -> fn.
inline Instantiation extract_implementation(const RefinementChain& chain, const Registry& reg) {
  Instantiation impl;
  if (chain.specs.empty())
    fail(ErrorCode::ChainShape, "chain has no specification predicates");
  const FunctionRec& last = reg.function(chain.specs.back());
  std::vector<TermPtr> conjuncts;
  if (last.kind == FunKind::Plain && last.body) {
    conjuncts = detail::flatten_and(last.body);
  } else {
    conjuncts.push_back(detail::spec_application(last));
  }
  for (const auto& c : conjuncts) {
    if (c->kind != Term::Kind::App) continue;
    const FunctionRec* q = reg.find_function(c->name);
    if (!q || q->kind != FunKind::Quantifier || !q->body) continue;
    const TermPtr& m = q->body;
    if (m->kind != Term::Kind::App || m->name != "equal" || m->args.size() != 2) continue;
    const TermPtr& lhs = m->args[0];
    const TermPtr& rhs = m->args[1];
    if (lhs->kind != Term::Kind::App || rhs->kind != Term::Kind::App) continue;
    if (!reg.is_funvar(lhs->name) || reg.is_funvar(rhs->name)) continue;
    if (lhs->args.size() != rhs->args.size()) continue;
    bool vars_match = true;
    for (size_t i = 0; i < lhs->args.size(); ++i) {
      if (lhs->args[i]->kind != Term::Kind::Var || !term_equal(lhs->args[i], rhs->args[i]))
        vars_match = false;
    }
    if (vars_match) impl[lhs->name] = rhs->name;
  }
  return impl;
}

// Bounded check of the instantiated requirements predicate.  The chain's
// implementation must cover the requirement predicate's function parameters
// with executable functions, and the instance must already be recorded.
inline Verdict verify_implementation(const RefinementChain& chain, const Universe& universe,
                                     const Registry& reg, EvalLimits limits = {}) {
  if (chain.specs.empty())
    fail(ErrorCode::ChainShape, "chain has no specification predicates");
  const FunctionRec& spec0 = reg.function(chain.specs.front());

  Instantiation sigma = restrict_to(chain.impl, spec0.fparams);
  for (const auto& fp : spec0.fparams)
    if (!sigma.count(fp))
      fail(ErrorCode::Invariant,
           "implementation provides no function for " + fp + " of " + spec0.name);

  for (const auto& [fv, fn] : chain.impl) {
    const FunctionRec& rec = reg.function(fn);
    if (rec.kind != FunKind::Plain && rec.kind != FunKind::Builtin) {
      Verdict v;
      v.status = Verdict::Status::Unknown;
      v.reason = fn + " is not an executable plain function";
      return v;
    }
  }

  auto inst = reg.lookup_instance(spec0.name, sigma);
  if (!inst)
    fail(ErrorCode::MissingInstance,
         "no recorded instance of " + spec0.name + " under " + print_instantiation(sigma) +
             "; introduce one via (defun-inst ... (" + spec0.name + " ...)) and re-try");

  // Check the instance's defining quantified body rather than its 0-ary
  // application, so a failure carries a concrete assignment.
  const FunctionRec& inst_rec = reg.function(*inst);
  TermPtr formula;
  if (inst_rec.kind == FunKind::Quantifier && inst_rec.quant == QuantKind::Forall) {
    formula = t_quant(inst_rec.quant, inst_rec.bound, inst_rec.body);
  } else if (inst_rec.kind == FunKind::Plain && inst_rec.arity == 0) {
    formula = inst_rec.body;
  } else {
    std::vector<TermPtr> args;
    for (const auto& p : inst_rec.params) args.push_back(t_var(p));
    formula = t_app(*inst, std::move(args));
  }
  return check_bounded(formula, universe, reg, limits);
}

}  // namespace softk
