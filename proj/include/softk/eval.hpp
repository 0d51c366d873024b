#pragma once

// Call-by-value evaluation of executable terms, and exhaustive checking of
// quantified formulas over finite universes.
//
// Plain functions unfold by definition; and/or/if/cond short-circuit.  Choice
// functions and witnesses never execute.  Function variables execute only
// under an interpretation mapping them to executable functions.  Quantifier
// functions and forall/exists terms are decidable only when a universe is
// supplied: bound variables then range over it exhaustively.
//
// Exceeding the recursion depth or the assignment budget aborts with an
// error; check_bounded converts any such abort into an Unknown verdict, so a
// limit can never produce a wrong Pass or Fail.

#include <map>
#include <string>
#include <vector>

#include "softk/registry.hpp"
#include "softk/term.hpp"

namespace softk {

struct Universe {
  std::string name;
  std::vector<ValuePtr> values;
};

struct EvalLimits {
  long long depth_limit = 10000;
  long long enum_budget = 1000000;
  bool check_guards = false;  // assert each plain function's guard at call time
};

// Interpretation of function variables by executable function names.
using Interp = std::map<std::string, std::string>;

using Env = std::map<std::string, ValuePtr>;

struct Verdict {
  enum class Status { Pass, Fail, Unknown };

  Status status = Status::Unknown;
  std::vector<std::pair<std::string, ValuePtr>> binding;  // Fail: falsifying assignment
  std::string reason;                                     // Unknown

  bool pass() const { return status == Status::Pass; }
  bool failed() const { return status == Status::Fail; }
  bool unknown() const { return status == Status::Unknown; }

  std::string describe() const {
    switch (status) {
      case Status::Pass:
        return "pass";
      case Status::Fail: {
        std::string out = "fail";
        if (!binding.empty()) {
          out += " (";
          bool first = true;
          for (const auto& [name, value] : binding) {
            if (!first) out += ", ";
            first = false;
            out += name + " = " + print_value(value);
          }
          out += ")";
        }
        return out;
      }
      case Status::Unknown:
        return "unknown: " + reason;
    }
    return "?";
  }
};

class Evaluator {
 public:
  explicit Evaluator(const Registry& reg, EvalLimits limits = {},
                     const Universe* universe = nullptr, const Interp* interp = nullptr)
      : reg_(reg), limits_(limits), universe_(universe), interp_(interp) {}

  ValuePtr eval(const TermPtr& t, Env& env, long long depth = 0) {
    switch (t->kind) {
      case Term::Kind::Var: {
        auto it = env.find(t->name);
        if (it == env.end())
          fail(ErrorCode::UnboundVariable, "unbound variable " + t->name);
        return it->second;
      }
      case Term::Kind::Const:
        return t->constant;
      case Term::Kind::Cond: {
        for (const auto& [test, result] : t->clauses)
          if (truthy(eval(test, env, depth))) return eval(result, env, depth);
        return v_nil();
      }
      case Term::Kind::Quant:
        return enumerate(t->quant, t->bound, t->matrix, env, depth);
      case Term::Kind::App:
        return eval_app(t, env, depth);
    }
    return v_nil();
  }

  void tick_budget() {
    if (++assignments_ > limits_.enum_budget)
      fail(ErrorCode::BudgetExceeded,
           "enumeration budget of " + std::to_string(limits_.enum_budget) + " exceeded");
  }

  long long assignments_used() const { return assignments_; }

 private:
  const Registry& reg_;
  EvalLimits limits_;
  const Universe* universe_;
  const Interp* interp_;
  long long assignments_ = 0;

  ValuePtr eval_app(const TermPtr& t, Env& env, long long depth) {
    const std::string& name = t->name;

    if (name == "if") {
      return truthy(eval(t->args[0], env, depth)) ? eval(t->args[1], env, depth)
                                                  : eval(t->args[2], env, depth);
    }
    if (name == "and") {
      ValuePtr last = v_t();
      for (const auto& a : t->args) {
        last = eval(a, env, depth);
        if (!truthy(last)) return v_nil();
      }
      return last;
    }
    if (name == "or") {
      for (const auto& a : t->args) {
        ValuePtr v = eval(a, env, depth);
        if (truthy(v)) return v;
      }
      return v_nil();
    }

    std::vector<ValuePtr> args;
    args.reserve(t->args.size());
    for (const auto& a : t->args) args.push_back(eval(a, env, depth));
    return apply_named(name, args, depth);
  }

  ValuePtr apply_named(const std::string& name, const std::vector<ValuePtr>& args,
                       long long depth) {
    if (reg_.is_funvar(name)) {
      if (interp_) {
        auto it = interp_->find(name);
        if (it != interp_->end()) return apply_named(it->second, args, depth);
      }
      fail(ErrorCode::NonExecutable, name + " is an uninterpreted function variable");
    }

    const FunctionRec& rec = reg_.function(name);
    switch (rec.kind) {
      case FunKind::Builtin:
        return apply_builtin(name, args);
      case FunKind::Plain: {
        if (depth + 1 > limits_.depth_limit)
          fail(ErrorCode::DepthExceeded,
               "recursion depth limit of " + std::to_string(limits_.depth_limit) +
                   " exceeded while unfolding " + name);
        Env frame;
        for (size_t i = 0; i < rec.params.size(); ++i) frame.emplace(rec.params[i], args[i]);
        if (limits_.check_guards && rec.guard && !truthy(eval(rec.guard, frame, depth + 1)))
          fail(ErrorCode::GuardViolation,
               "guard " + print_term(rec.guard) + " of " + name + " is violated");
        return eval(rec.body, frame, depth + 1);
      }
      case FunKind::Quantifier: {
        if (!universe_)
          fail(ErrorCode::NonExecutable, name + " is a quantifier function");
        Env frame;
        for (size_t i = 0; i < rec.params.size(); ++i) frame.emplace(rec.params[i], args[i]);
        return enumerate(rec.quant, rec.bound, rec.body, frame, depth);
      }
      case FunKind::Choice:
        fail(ErrorCode::NonExecutable, name + " is a choice function");
      case FunKind::Witness:
        fail(ErrorCode::NonExecutable, name + " is a witness function");
    }
    fail(ErrorCode::NonExecutable, name);
  }

  ValuePtr enumerate(QuantKind quant, const std::vector<std::string>& bound,
                     const TermPtr& matrix, Env& env, long long depth) {
    if (!universe_) fail(ErrorCode::NonExecutable, "quantifier without a universe");
    const auto& values = universe_->values;
    if (values.empty()) fail(ErrorCode::NonExecutable, "empty universe");

    std::vector<size_t> idx(bound.size(), 0);
    std::vector<ValuePtr> saved;
    std::vector<bool> had;
    for (const auto& b : bound) {
      auto it = env.find(b);
      had.push_back(it != env.end());
      saved.push_back(it != env.end() ? it->second : nullptr);
    }

    bool result = quant == QuantKind::Forall;
    for (;;) {
      tick_budget();
      for (size_t i = 0; i < bound.size(); ++i) env[bound[i]] = values[idx[i]];
      bool holds = truthy(eval(matrix, env, depth));
      if (quant == QuantKind::Forall && !holds) {
        result = false;
        break;
      }
      if (quant == QuantKind::Exists && holds) {
        result = true;
        break;
      }
      // odometer, last variable fastest
      size_t j = bound.size();
      while (j > 0) {
        --j;
        if (++idx[j] < values.size()) break;
        idx[j] = 0;
        if (j == 0) {
          j = SIZE_MAX;
          break;
        }
      }
      if (j == SIZE_MAX || bound.empty()) break;
    }

    for (size_t i = 0; i < bound.size(); ++i) {
      if (had[i]) env[bound[i]] = saved[i];
      else env.erase(bound[i]);
    }
    return v_bool(result);
  }

  static long long int_of(const ValuePtr& v) {
    return v->kind == Value::Kind::Int ? v->num : 0;
  }

  ValuePtr apply_builtin(const std::string& name, const std::vector<ValuePtr>& a) {
    if (name == "cons") return v_cons(a[0], a[1]);
    if (name == "car") return is_cons(a[0]) ? a[0]->car : v_nil();
    if (name == "cdr") return is_cons(a[0]) ? a[0]->cdr : v_nil();
    if (name == "atom") return v_bool(!is_cons(a[0]));
    if (name == "consp") return v_bool(is_cons(a[0]));
    if (name == "endp") return v_bool(!is_cons(a[0]));
    if (name == "null") return v_bool(is_nil(a[0]));
    if (name == "equal") return v_bool(value_equal(a[0], a[1]));
    if (name == "iff") return v_bool(truthy(a[0]) == truthy(a[1]));
    if (name == "not") return v_bool(!truthy(a[0]));
    if (name == "implies") return v_bool(!truthy(a[0]) || truthy(a[1]));
    if (name == "member") {
      ValuePtr tail = a[1];
      while (is_cons(tail)) {
        if (value_equal(a[0], tail->car)) return tail;
        tail = tail->cdr;
      }
      return v_nil();
    }
    if (name == "append") {
      std::vector<ValuePtr> front;
      ValuePtr tail = a[0];
      while (is_cons(tail)) {
        front.push_back(tail->car);
        tail = tail->cdr;
      }
      ValuePtr out = a[1];
      for (auto it = front.rbegin(); it != front.rend(); ++it) out = v_cons(*it, out);
      return out;
    }
    if (name == "len") {
      long long n = 0;
      ValuePtr tail = a[0];
      while (is_cons(tail)) {
        ++n;
        tail = tail->cdr;
      }
      return v_int(n);
    }
    if (name == "natp") return v_bool(a[0]->kind == Value::Kind::Int && a[0]->num >= 0);
    if (name == "fix") return a[0]->kind == Value::Kind::Int ? a[0] : v_int(0);
    if (name == "nfix")
      return a[0]->kind == Value::Kind::Int && a[0]->num >= 0 ? a[0] : v_int(0);
    if (name == "binary-+") return v_int(int_of(a[0]) + int_of(a[1]));
    if (name == "*") return v_int(int_of(a[0]) * int_of(a[1]));
    if (name == "<") return v_bool(int_of(a[0]) < int_of(a[1]));
    if (name == "code-char") {
      long long code = int_of(a[0]);
      if (code < 0 || code > 255) code = 0;
      return v_char(static_cast<char32_t>(code));
    }
    if (name == "true-listp") {
      ValuePtr tail = a[0];
      while (is_cons(tail)) tail = tail->cdr;
      return v_bool(is_nil(tail));
    }
    if (name == "mv-nth") {
      long long n = int_of(a[0]);
      ValuePtr tail = a[1];
      while (n > 0 && is_cons(tail)) {
        tail = tail->cdr;
        --n;
      }
      return is_cons(tail) ? tail->car : v_nil();
    }
    if (name == "list") return v_list(a);
    fail(ErrorCode::NonExecutable, "unimplemented builtin " + name);
  }
};

inline ValuePtr eval_term(const TermPtr& t, Env env, const Registry& reg,
                          EvalLimits limits = {}, const Interp* interp = nullptr) {
  Evaluator ev(reg, limits, nullptr, interp);
  return ev.eval(t, env);
}

// Exhaustively checks `formula` over `universe`.  Free individual variables
// and outermost universal quantifiers sweep the universe (first variable
// slowest); the verdict carries the first falsifying assignment found.
inline Verdict check_bounded(const TermPtr& formula, const Universe& universe,
                             const Registry& reg, EvalLimits limits = {},
                             const Interp* interp = nullptr) {
  std::vector<std::string> sweep = free_vars(formula);
  TermPtr matrix = formula;
  for (;;) {
    if (matrix->kind != Term::Kind::Quant || matrix->quant != QuantKind::Forall) break;
    bool clash = false;
    for (const auto& b : matrix->bound)
      for (const auto& s : sweep)
        if (s == b) clash = true;
    if (clash) break;
    for (const auto& b : matrix->bound) sweep.push_back(b);
    matrix = matrix->matrix;
  }

  if (universe.values.empty()) {
    Verdict v;
    v.status = Verdict::Status::Unknown;
    v.reason = "empty universe";
    return v;
  }

  Evaluator ev(reg, limits, &universe, interp);
  Env env;
  std::vector<size_t> idx(sweep.size(), 0);
  try {
    for (;;) {
      ev.tick_budget();
      for (size_t i = 0; i < sweep.size(); ++i) env[sweep[i]] = universe.values[idx[i]];
      if (!truthy(ev.eval(matrix, env))) {
        Verdict v;
        v.status = Verdict::Status::Fail;
        for (const auto& name : sweep) v.binding.emplace_back(name, env[name]);
        return v;
      }
      if (sweep.empty()) break;
      size_t j = sweep.size();
      bool done = false;
      while (j > 0) {
        --j;
        if (++idx[j] < universe.values.size()) break;
        idx[j] = 0;
        if (j == 0) done = true;
      }
      if (done) break;
    }
  } catch (const Error& e) {
    Verdict v;
    v.status = Verdict::Status::Unknown;
    v.reason = e.what();
    return v;
  }
  Verdict v;
  v.status = Verdict::Status::Pass;
  return v;
}

}  // namespace softk
