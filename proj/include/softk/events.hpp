#pragma once

// Interpretation of top-level event forms: defunvar, defun/defun2,
// defchoose/defchoose2, defun-sk/defun-sk2, defun-inst, defthm, defthm-inst.
//
// Every event is processed against a copy of the registry and committed only
// on success, so a rejected event leaves the session untouched.  An event
// whose processing changes nothing (an exact re-submission) reports as
// redundant.  The first-order forms are the second-order processors with an
// empty function-parameter list.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "softk/eval.hpp"
#include "softk/instantiate.hpp"
#include "softk/kernel.hpp"
#include "softk/registry.hpp"
#include "softk/sexpr.hpp"

namespace softk {

struct EventOutcome {
  enum class Status { Admitted, Redundant, Rejected };

  std::string kind;
  std::string name;
  Status status = Status::Rejected;
  std::string detail;
  std::vector<std::string> notes;
  PairClosure pairs;                  // defthm-inst
  std::vector<Obligation> obligations;
  std::optional<Verdict> verdict;     // bounded check, when enabled

  bool admitted() const { return status != Status::Rejected; }
};

inline const char* status_name(EventOutcome::Status s) {
  switch (s) {
    case EventOutcome::Status::Admitted: return "admitted";
    case EventOutcome::Status::Redundant: return "redundant";
    case EventOutcome::Status::Rejected: return "rejected";
  }
  return "?";
}

// Controls the optional semantic check run by defthm/defthm-inst.
struct CheckConfig {
  bool check_theorems = false;
  const Universe* universe = nullptr;
  EvalLimits limits;
};

namespace detail {

inline const std::string& expect_symbol(const Form& f, const std::string& what) {
  if (!f.is_symbol())
    fail(ErrorCode::Malformed, "expected " + what, f.pos.line, f.pos.col);
  return f.text;
}

inline const Form& expect_list(const Form& f, const std::string& what) {
  if (!f.is_proper_list())
    fail(ErrorCode::Malformed, "expected " + what, f.pos.line, f.pos.col);
  return f;
}

inline std::vector<std::string> symbol_list(const Form& f, const std::string& what) {
  expect_list(f, what);
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& item : f.items) {
    expect_symbol(item, "a symbol in " + what);
    if (item.text == "t" || item.text == "nil")
      fail(ErrorCode::Malformed, item.text + " cannot be used in " + what, item.pos.line,
           item.pos.col);
    if (!seen.insert(item.text).second)
      fail(ErrorCode::Malformed, "duplicate " + item.text + " in " + what, item.pos.line,
           item.pos.col);
    out.push_back(item.text);
  }
  return out;
}

inline std::map<std::string, Form> keyed_options(const Form& event, size_t start) {
  std::map<std::string, Form> out;
  for (size_t i = start; i < event.items.size(); i += 2) {
    const Form& key = event.items[i];
    if (!key.is_keyword())
      fail(ErrorCode::Malformed, "expected a keyword option", key.pos.line, key.pos.col);
    if (i + 1 >= event.items.size())
      fail(ErrorCode::Malformed, "option " + key.text + " lacks a value", key.pos.line,
           key.pos.col);
    if (!out.emplace(key.text, event.items[i + 1]).second)
      fail(ErrorCode::Malformed, "duplicate option " + key.text, key.pos.line, key.pos.col);
  }
  return out;
}

// Splits "doc-string* declare* body" and extracts :guard/:measure from
// (declare (xargs ...)) forms.  Other declarations are accepted and ignored.
struct DefunTail {
  const Form* body = nullptr;
  const Form* guard = nullptr;
  const Form* measure = nullptr;
};

inline DefunTail split_defun_tail(const Form& event, size_t start) {
  if (event.items.size() <= start)
    fail(ErrorCode::Malformed, "missing body", event.pos.line, event.pos.col);
  DefunTail tail;
  tail.body = &event.items.back();
  for (size_t i = start; i + 1 < event.items.size(); ++i) {
    const Form& item = event.items[i];
    if (item.is_string()) continue;  // documentation
    if (item.is_proper_list() && !item.items.empty() && item.items[0].is_symbol("declare")) {
      for (size_t d = 1; d < item.items.size(); ++d) {
        const Form& decl = item.items[d];
        if (!decl.is_proper_list() || decl.items.empty() || !decl.items[0].is_symbol("xargs"))
          continue;
        for (size_t k = 1; k + 1 < decl.items.size(); k += 2) {
          if (decl.items[k].is_symbol(":guard")) tail.guard = &decl.items[k + 1];
          else if (decl.items[k].is_symbol(":measure")) tail.measure = &decl.items[k + 1];
        }
      }
      continue;
    }
    fail(ErrorCode::Malformed, "unexpected form before body", item.pos.line, item.pos.col);
  }
  return tail;
}

// (sof (fv . fn) ...) -> target name and instantiation
inline std::pair<std::string, Instantiation> parse_sigma_form(const Form& f) {
  expect_list(f, "(sof (fv . fn) ...)");
  if (f.items.empty())
    fail(ErrorCode::Malformed, "empty instantiation form", f.pos.line, f.pos.col);
  std::string target = expect_symbol(f.items[0], "a function or theorem name");
  Instantiation sigma;
  for (size_t i = 1; i < f.items.size(); ++i) {
    const Form& p = f.items[i];
    if (!p.is_pair() || !p.items[0].is_symbol() || !p.items[1].is_symbol())
      fail(ErrorCode::Malformed, "expected a (funvar . function) pair", p.pos.line, p.pos.col);
    if (!sigma.emplace(p.items[0].text, p.items[1].text).second)
      fail(ErrorCode::Malformed, "duplicate key " + p.items[0].text, p.pos.line, p.pos.col);
  }
  return {target, sigma};
}

// car/cdr nest around a variable, at least one level deep
inline bool is_cardr_nest(const TermPtr& t) {
  if (t->kind != Term::Kind::App || t->args.size() != 1) return false;
  if (t->name != "car" && t->name != "cdr") return false;
  const TermPtr& inner = t->args[0];
  return inner->kind == Term::Kind::Var || is_cardr_nest(inner);
}

inline void collect_self_calls(const TermPtr& t, const std::string& name,
                               std::vector<const Term*>& out) {
  switch (t->kind) {
    case Term::Kind::Var:
    case Term::Kind::Const:
      return;
    case Term::Kind::App:
      if (t->name == name) out.push_back(t.get());
      for (const auto& a : t->args) collect_self_calls(a, name, out);
      return;
    case Term::Kind::Cond:
      for (const auto& [test, result] : t->clauses) {
        collect_self_calls(test, name, out);
        collect_self_calls(result, name, out);
      }
      return;
    case Term::Kind::Quant:
      collect_self_calls(t->matrix, name, out);
      return;
  }
}

// every self-call shrinks some argument by car/cdr
inline bool structurally_recursive(const TermPtr& body, const std::string& name) {
  std::vector<const Term*> calls;
  collect_self_calls(body, name, calls);
  for (const Term* call : calls) {
    bool shrinks = false;
    for (const auto& a : call->args)
      if (is_cardr_nest(a)) shrinks = true;
    if (!shrinks) return false;
  }
  return true;
}

inline void run_theorem_check(const TermPtr& formula, const CheckConfig& cfg,
                              const Registry& reg, EventOutcome& out) {
  if (!cfg.check_theorems) return;
  if (!cfg.universe) {
    out.notes.push_back("no universe configured; semantic check skipped");
    return;
  }
  Verdict v = check_bounded(formula, *cfg.universe, reg, cfg.limits);
  out.verdict = v;
  if (v.failed())
    fail(ErrorCode::BoundedCheckFailed,
         "counterexample over universe " + cfg.universe->name + ": " + v.describe());
}

// -- the event processors ----------------------------------------------------

inline void ev_defunvar(Registry& reg, const Form& event, EventOutcome& out) {
  if (event.items.size() != 5)
    fail(ErrorCode::Malformed, "expected (defunvar name (* ...) => *)", event.pos.line,
         event.pos.col);
  std::string name = expect_symbol(event.items[1], "a function variable name");
  const Form& stars = expect_list(event.items[2], "a list of *s");
  if (stars.items.empty())
    fail(ErrorCode::Malformed, "arity must be one or more *s", stars.pos.line, stars.pos.col);
  for (const auto& s : stars.items)
    if (!s.is_symbol("*"))
      fail(ErrorCode::Malformed, "expected *", s.pos.line, s.pos.col);
  if (!event.items[3].is_symbol("=>") || !event.items[4].is_symbol("*"))
    fail(ErrorCode::Malformed, "expected => *", event.items[3].pos.line, event.items[3].pos.col);
  reg.register_funvar(name, static_cast<int>(stars.items.size()));
  out.detail = "arity " + std::to_string(stars.items.size());
}

inline void ev_defun(Registry& reg, const Form& event, EventOutcome& out, bool second_order) {
  size_t base = second_order ? 3 : 2;
  if (event.items.size() < base + 2)
    fail(ErrorCode::Malformed, "too few items", event.pos.line, event.pos.col);
  std::string name = expect_symbol(event.items[1], "a function name");

  FunctionRec rec;
  rec.name = name;
  rec.kind = FunKind::Plain;
  if (second_order) {
    rec.fparams = symbol_list(event.items[2], "function parameters");
    if (rec.fparams.empty())
      fail(ErrorCode::Malformed, "function parameter list must be non-empty", event.pos.line,
           event.pos.col);
  }
  rec.params = symbol_list(event.items[base], "parameters");
  rec.arity = static_cast<int>(rec.params.size());

  DefunTail tail = split_defun_tail(event, base + 1);
  std::map<std::string, int> pending{{name, rec.arity}};
  rec.body = form_to_term(*tail.body, reg, &pending);
  rec.guard = tail.guard ? form_to_term(*tail.guard, reg, &pending) : t_const(v_t());
  rec.recursive = applies_name(rec.body, name);
  if (tail.measure) {
    if (!rec.recursive)
      fail(ErrorCode::Invariant, name + ": measure supplied for a non-recursive definition");
    rec.measure = form_to_term(*tail.measure, reg, &pending);
  }
  if (rec.recursive && !rec.measure && !structurally_recursive(rec.body, name))
    out.notes.push_back("recursion is not structural and no measure was supplied; "
                        "termination is only enforced by the evaluator depth limit");

  reg.register_function(rec);
  out.detail = rec.recursive ? "plain, recursive" : "plain";
}

inline void ev_defchoose(Registry& reg, const Form& event, EventOutcome& out,
                         bool second_order) {
  size_t params_at = second_order ? 4 : 3;
  if (event.items.size() < params_at + 2)
    fail(ErrorCode::Malformed, "too few items", event.pos.line, event.pos.col);
  std::string name = expect_symbol(event.items[1], "a function name");

  FunctionRec rec;
  rec.name = name;
  rec.kind = FunKind::Choice;
  rec.bound = bound_var_list(event.items[2]);
  if (second_order) {
    rec.fparams = symbol_list(event.items[3], "function parameters");
    if (rec.fparams.empty())
      fail(ErrorCode::Malformed, "function parameter list must be non-empty", event.pos.line,
           event.pos.col);
  }
  rec.params = symbol_list(event.items[params_at], "parameters");
  rec.arity = static_cast<int>(rec.params.size());
  for (const auto& b : rec.bound)
    for (const auto& p : rec.params)
      if (b == p)
        fail(ErrorCode::Malformed, "bound variable " + b + " collides with a parameter",
             event.pos.line, event.pos.col);

  rec.body = form_to_term(event.items[params_at + 1], reg);
  rec.guard = t_const(v_t());
  keyed_options(event, params_at + 2);  // accepted, no semantics here

  reg.register_function(rec);
  out.detail = "choice";
}

inline void ev_defun_sk(Registry& reg, const Form& event, EventOutcome& out,
                        bool second_order) {
  size_t body_at = second_order ? 4 : 3;
  if (event.items.size() < body_at + 1)
    fail(ErrorCode::Malformed, "too few items", event.pos.line, event.pos.col);
  std::string name = expect_symbol(event.items[1], "a function name");

  FunctionRec rec;
  rec.name = name;
  rec.kind = FunKind::Quantifier;
  if (second_order) {
    rec.fparams = symbol_list(event.items[2], "function parameters");
    if (rec.fparams.empty())
      fail(ErrorCode::Malformed, "function parameter list must be non-empty", event.pos.line,
           event.pos.col);
  }
  rec.params = symbol_list(event.items[second_order ? 3 : 2], "parameters");
  rec.arity = static_cast<int>(rec.params.size());

  const Form& body = event.items[body_at];
  if (!body.is_proper_list() || body.items.empty() ||
      !(body.items[0].is_symbol("forall") || body.items[0].is_symbol("exists")))
    fail(ErrorCode::Malformed, "body must be (forall ...) or (exists ...)", body.pos.line,
         body.pos.col);
  TermPtr quant_term = form_to_term(body, reg);
  rec.quant = quant_term->quant;
  rec.bound = quant_term->bound;
  rec.body = quant_term->matrix;
  for (const auto& b : rec.bound)
    for (const auto& p : rec.params)
      if (b == p)
        fail(ErrorCode::Malformed, "bound variable " + b + " collides with a parameter",
             body.pos.line, body.pos.col);

  auto opts = keyed_options(event, body_at + 1);
  rec.guard = t_const(v_t());
  if (auto it = opts.find(":witness-dcls"); it != opts.end()) {
    const Form& dcls = expect_list(it->second, "a list of declare forms");
    for (const auto& d : dcls.items) {
      if (!d.is_proper_list() || d.items.empty() || !d.items[0].is_symbol("declare")) continue;
      for (size_t i = 1; i < d.items.size(); ++i) {
        const Form& x = d.items[i];
        if (!x.is_proper_list() || x.items.empty() || !x.items[0].is_symbol("xargs")) continue;
        for (size_t k = 1; k + 1 < x.items.size(); k += 2)
          if (x.items[k].is_symbol(":guard")) rec.guard = form_to_term(x.items[k + 1], reg);
      }
    }
  }
  if (auto it = opts.find(":rewrite"); it != opts.end()) {
    if (it->second.is_symbol(":direct")) rec.rewrite_direct = true;
    else if (!it->second.is_symbol(":default"))
      fail(ErrorCode::Malformed, "unsupported :rewrite value", it->second.pos.line,
           it->second.pos.col);
  }

  rec.witness_name = name + "-witness";
  rec.rule_name = name + (rec.quant == QuantKind::Forall ? "-necc" : "-suff");

  FunctionRec witness;
  witness.name = rec.witness_name;
  witness.kind = FunKind::Witness;
  witness.arity = rec.arity;
  witness.params = rec.params;
  witness.fparams = rec.fparams;

  reg.register_function(rec);
  reg.register_function(witness);
  reg.reserve_name(rec.rule_name);
  out.detail = std::string(rec.quant == QuantKind::Forall ? "forall" : "exists") +
               " quantifier; rule " + rec.rule_name;
}

inline void ev_defun_inst(Registry& reg, const Form& event, EventOutcome& out) {
  if (event.items.size() < 3)
    fail(ErrorCode::Malformed, "expected (defun-inst f [fparams] (sof ...))", event.pos.line,
         event.pos.col);
  std::string name = expect_symbol(event.items[1], "a function name");

  // items[2] is the target application unless it is a function-parameter list
  size_t target_at = 2;
  std::vector<std::string> declared_fparams;
  {
    const Form& f2 = expect_list(event.items[2], "a list");
    bool is_target = !f2.items.empty() && f2.items[0].is_symbol() &&
                     reg.find_function(f2.items[0].text) != nullptr;
    if (!is_target) {
      declared_fparams = symbol_list(f2, "function parameters");
      target_at = 3;
      if (event.items.size() < 4)
        fail(ErrorCode::Malformed, "missing target", event.pos.line, event.pos.col);
    }
  }
  auto [target, sigma] = parse_sigma_form(event.items[target_at]);
  if (!keyed_options(event, target_at + 1).empty())
    fail(ErrorCode::Malformed, "defun-inst accepts no option overrides", event.pos.line,
         event.pos.col);

  const FunctionRec* sof = reg.find_function(target);
  if (!sof || !sof->second_order() || !sof->body)
    fail(ErrorCode::Malformed, target + " is not an instantiable second-order function",
         event.pos.line, event.pos.col);
  for (const auto& [k, v] : sigma) {
    bool is_fparam = false;
    for (const auto& fp : sof->fparams)
      if (fp == k) is_fparam = true;
    if (!is_fparam)
      fail(ErrorCode::Invariant, k + " is not a function parameter of " + target);
  }
  validate_instantiation(sigma, reg);

  PendingInstance pending{target, sigma, name};
  FunctionRec rec;
  rec.name = name;
  rec.kind = sof->kind;
  rec.fparams = declared_fparams;
  rec.params = sof->params;
  rec.arity = sof->arity;
  rec.bound = sof->bound;
  rec.quant = sof->quant;
  rec.recursive = sof->recursive;
  rec.rewrite_direct = sof->rewrite_direct;
  rec.body = apply_instantiation(sof->body, sigma, reg, &pending);
  rec.guard = sof->guard ? apply_instantiation(sof->guard, sigma, reg, &pending) : t_const(v_t());
  if (sof->measure) rec.measure = apply_instantiation(sof->measure, sigma, reg, &pending);
  if (rec.kind == FunKind::Quantifier) {
    rec.witness_name = name + "-witness";
    rec.rule_name = name + (rec.quant == QuantKind::Forall ? "-necc" : "-suff");
  } else {
    rec.witness_name.clear();
    rec.rule_name.clear();
  }

  reg.register_function(rec);
  if (rec.kind == FunKind::Quantifier) {
    FunctionRec witness;
    witness.name = rec.witness_name;
    witness.kind = FunKind::Witness;
    witness.arity = rec.arity;
    witness.params = rec.params;
    witness.fparams = rec.fparams;
    reg.register_function(witness);
    reg.reserve_name(rec.rule_name);
  }
  reg.register_instance(target, sigma, name);
  out.detail = std::string(fun_kind_name(rec.kind)) + " instance of " + target + " under " +
               print_instantiation(sigma);
}

inline void ev_defthm(Registry& reg, const Form& event, EventOutcome& out,
                      const CheckConfig& cfg) {
  if (event.items.size() < 3)
    fail(ErrorCode::Malformed, "expected (defthm name formula ...)", event.pos.line,
         event.pos.col);
  TheoremRec rec;
  rec.name = expect_symbol(event.items[1], "a theorem name");
  rec.formula = form_to_term(event.items[2], reg);
  rec.funvars = reg.funvars_of(rec.formula);
  auto opts = keyed_options(event, 3);
  if (auto it = opts.find(":rule-classes"); it != opts.end())
    rec.rule_classes = write_form(it->second);

  run_theorem_check(rec.formula, cfg, reg, out);
  reg.register_theorem(rec);
  std::string fvs;
  for (const auto& fv : rec.funvars) fvs += (fvs.empty() ? "" : " ") + fv;
  out.detail = "funvars (" + fvs + ")";
}

inline void ev_defthm_inst(Registry& reg, const Form& event, EventOutcome& out,
                           const CheckConfig& cfg) {
  if (event.items.size() < 3)
    fail(ErrorCode::Malformed, "expected (defthm-inst thm (sothm ...) ...)", event.pos.line,
         event.pos.col);
  std::string name = expect_symbol(event.items[1], "a theorem name");
  auto [target, sigma] = parse_sigma_form(event.items[2]);

  const TheoremRec* sothm = reg.find_theorem(target);
  if (!sothm)
    fail(ErrorCode::Malformed, target + " is not a recorded theorem", event.pos.line,
         event.pos.col);
  validate_instantiation(sigma, reg);
  for (const auto& [k, v] : sigma)
    if (!sothm->funvars.count(k))
      fail(ErrorCode::Invariant, target + " does not depend on " + k);

  out.pairs = compute_more_pairs(*sothm, sigma, reg);
  out.obligations = discharge_obligations(out.pairs, sigma, reg);
  for (const auto& ob : out.obligations)
    if (!ob.discharged)
      fail(ErrorCode::ObligationFailed,
           std::string(obligation_kind_name(ob.kind)) + " constraint of " + ob.replaced +
               " is not satisfied by " + ob.replacement);

  TheoremRec rec;
  rec.name = name;
  rec.formula = apply_instantiation(sothm->formula, sigma, reg);
  rec.funvars = reg.funvars_of(rec.formula);
  auto opts = keyed_options(event, 3);
  if (auto it = opts.find(":rule-classes"); it != opts.end())
    rec.rule_classes = write_form(it->second);

  run_theorem_check(rec.formula, cfg, reg, out);
  reg.register_theorem(rec);
  out.detail = "instance of " + target + " under " + print_instantiation(sigma) + "; " +
               std::to_string(out.obligations.size()) + " obligations discharged";
}

}  // namespace detail

inline bool is_event_head(const std::string& head) {
  return head == "defunvar" || head == "defun" || head == "defun2" || head == "defchoose" ||
         head == "defchoose2" || head == "defun-sk" || head == "defun-sk2" ||
         head == "defun-inst" || head == "defthm" || head == "defthm-inst";
}

// Runs one event against the registry; commits only when admitted.
inline EventOutcome process_event(Registry& reg, const Form& event,
                                  const CheckConfig& cfg = {}) {
  EventOutcome out;
  if (!event.is_proper_list() || event.items.empty() || !event.items[0].is_symbol())
    fail(ErrorCode::Malformed, "expected an event form", event.pos.line, event.pos.col);
  out.kind = event.items[0].text;
  if (event.items.size() > 1 && event.items[1].is_symbol()) out.name = event.items[1].text;
  if (!is_event_head(out.kind))
    fail(ErrorCode::Malformed, "unknown event " + out.kind, event.pos.line, event.pos.col);

  Registry staged = reg;
  try {
    if (out.kind == "defunvar") detail::ev_defunvar(staged, event, out);
    else if (out.kind == "defun") detail::ev_defun(staged, event, out, false);
    else if (out.kind == "defun2") detail::ev_defun(staged, event, out, true);
    else if (out.kind == "defchoose") detail::ev_defchoose(staged, event, out, false);
    else if (out.kind == "defchoose2") detail::ev_defchoose(staged, event, out, true);
    else if (out.kind == "defun-sk") detail::ev_defun_sk(staged, event, out, false);
    else if (out.kind == "defun-sk2") detail::ev_defun_sk(staged, event, out, true);
    else if (out.kind == "defun-inst") detail::ev_defun_inst(staged, event, out);
    else if (out.kind == "defthm") detail::ev_defthm(staged, event, out, cfg);
    else if (out.kind == "defthm-inst") detail::ev_defthm_inst(staged, event, out, cfg);
  } catch (const Error& e) {
    out.status = EventOutcome::Status::Rejected;
    out.detail = e.what();
    return out;
  }

  if (staged.equal(reg)) {
    out.status = EventOutcome::Status::Redundant;
  } else {
    out.status = EventOutcome::Status::Admitted;
    reg = std::move(staged);
  }
  return out;
}

}  // namespace softk
