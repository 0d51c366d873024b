#pragma once

// Values and terms of the first-order language.
//
// Values are the ground data the evaluator computes with: integers,
// characters, symbols (with nil doubling as the empty list and the false
// boolean, t as the true boolean), and cons pairs.
//
// Terms are immutable expression trees: variables, constants, applications,
// cond forms, and quantified formulas.  Applications cover both ordinary
// functions and function variables; cond and forall/exists carry structure
// an application cannot (clause lists, bound variables).

#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "softk/error.hpp"
#include "softk/sexpr.hpp"

namespace softk {

// ---------------------------------------------------------------------------
// Values

struct Value;
using ValuePtr = std::shared_ptr<const Value>;

struct Value {
  enum class Kind { Int, Char, Sym, Cons };

  Kind kind = Kind::Sym;
  long long num = 0;
  char32_t chr = 0;
  std::string sym;
  ValuePtr car, cdr;
};

inline ValuePtr v_int(long long n) {
  auto v = std::make_shared<Value>();
  v->kind = Value::Kind::Int;
  v->num = n;
  return v;
}

inline ValuePtr v_char(char32_t c) {
  auto v = std::make_shared<Value>();
  v->kind = Value::Kind::Char;
  v->chr = c;
  return v;
}

inline ValuePtr v_sym(std::string s) {
  auto v = std::make_shared<Value>();
  v->kind = Value::Kind::Sym;
  v->sym = std::move(s);
  return v;
}

inline const ValuePtr& v_nil() {
  static const ValuePtr nil = v_sym("nil");
  return nil;
}

inline const ValuePtr& v_t() {
  static const ValuePtr t = v_sym("t");
  return t;
}

inline ValuePtr v_bool(bool b) { return b ? v_t() : v_nil(); }

inline ValuePtr v_cons(ValuePtr a, ValuePtr d) {
  auto v = std::make_shared<Value>();
  v->kind = Value::Kind::Cons;
  v->car = std::move(a);
  v->cdr = std::move(d);
  return v;
}

inline ValuePtr v_list(const std::vector<ValuePtr>& xs) {
  ValuePtr out = v_nil();
  for (auto it = xs.rbegin(); it != xs.rend(); ++it) out = v_cons(*it, out);
  return out;
}

inline bool is_nil(const ValuePtr& v) {
  return v->kind == Value::Kind::Sym && v->sym == "nil";
}

inline bool truthy(const ValuePtr& v) { return !is_nil(v); }

inline bool is_cons(const ValuePtr& v) { return v->kind == Value::Kind::Cons; }

inline bool value_equal(const ValuePtr& a, const ValuePtr& b) {
  if (a.get() == b.get()) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Value::Kind::Int: return a->num == b->num;
    case Value::Kind::Char: return a->chr == b->chr;
    case Value::Kind::Sym: return a->sym == b->sym;
    case Value::Kind::Cons:
      return value_equal(a->car, b->car) && value_equal(a->cdr, b->cdr);
  }
  return false;
}

inline void print_value(std::string& out, const ValuePtr& v) {
  switch (v->kind) {
    case Value::Kind::Int:
      out += std::to_string(v->num);
      return;
    case Value::Kind::Char:
      detail::write_character(out, v->chr);
      return;
    case Value::Kind::Sym:
      out += v->sym;
      return;
    case Value::Kind::Cons: {
      out.push_back('(');
      const Value* p = v.get();
      bool first = true;
      for (;;) {
        if (!first) out.push_back(' ');
        print_value(out, p->car);
        first = false;
        if (p->cdr->kind == Value::Kind::Cons) {
          p = p->cdr.get();
          continue;
        }
        if (!is_nil(p->cdr)) {
          out += " . ";
          print_value(out, p->cdr);
        }
        break;
      }
      out.push_back(')');
      return;
    }
  }
}

inline std::string print_value(const ValuePtr& v) {
  std::string out;
  print_value(out, v);
  return out;
}

// ---------------------------------------------------------------------------
// Terms

enum class QuantKind { Forall, Exists };

inline const char* quant_name(QuantKind q) {
  return q == QuantKind::Forall ? "forall" : "exists";
}

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
  enum class Kind { Var, Const, App, Cond, Quant };

  Kind kind = Kind::Var;
  std::string name;                                   // Var | App
  ValuePtr constant;                                  // Const
  std::vector<TermPtr> args;                          // App
  std::vector<std::pair<TermPtr, TermPtr>> clauses;   // Cond
  QuantKind quant = QuantKind::Forall;                // Quant
  std::vector<std::string> bound;                     // Quant
  TermPtr matrix;                                     // Quant
};

inline TermPtr t_var(std::string name) {
  auto t = std::make_shared<Term>();
  t->kind = Term::Kind::Var;
  t->name = std::move(name);
  return t;
}

inline TermPtr t_const(ValuePtr v) {
  auto t = std::make_shared<Term>();
  t->kind = Term::Kind::Const;
  t->constant = std::move(v);
  return t;
}

inline TermPtr t_app(std::string fn, std::vector<TermPtr> args) {
  auto t = std::make_shared<Term>();
  t->kind = Term::Kind::App;
  t->name = std::move(fn);
  t->args = std::move(args);
  return t;
}

inline TermPtr t_cond(std::vector<std::pair<TermPtr, TermPtr>> clauses) {
  auto t = std::make_shared<Term>();
  t->kind = Term::Kind::Cond;
  t->clauses = std::move(clauses);
  return t;
}

inline TermPtr t_quant(QuantKind q, std::vector<std::string> bound, TermPtr matrix) {
  auto t = std::make_shared<Term>();
  t->kind = Term::Kind::Quant;
  t->quant = q;
  t->bound = std::move(bound);
  t->matrix = std::move(matrix);
  return t;
}

inline bool term_equal(const TermPtr& a, const TermPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Term::Kind::Var:
      return a->name == b->name;
    case Term::Kind::Const:
      return value_equal(a->constant, b->constant);
    case Term::Kind::App: {
      if (a->name != b->name || a->args.size() != b->args.size()) return false;
      for (size_t i = 0; i < a->args.size(); ++i)
        if (!term_equal(a->args[i], b->args[i])) return false;
      return true;
    }
    case Term::Kind::Cond: {
      if (a->clauses.size() != b->clauses.size()) return false;
      for (size_t i = 0; i < a->clauses.size(); ++i)
        if (!term_equal(a->clauses[i].first, b->clauses[i].first) ||
            !term_equal(a->clauses[i].second, b->clauses[i].second))
          return false;
      return true;
    }
    case Term::Kind::Quant:
      return a->quant == b->quant && a->bound == b->bound && term_equal(a->matrix, b->matrix);
  }
  return false;
}

namespace detail {

// Bound-variable scopes for alpha comparison: parallel stacks of names.
inline bool alpha_equal_rec(const TermPtr& a, const TermPtr& b,
                            std::vector<std::pair<std::string, std::string>>& scopes) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Term::Kind::Var: {
      for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
        bool hit_a = it->first == a->name;
        bool hit_b = it->second == b->name;
        if (hit_a || hit_b) return hit_a && hit_b;
      }
      return a->name == b->name;
    }
    case Term::Kind::Const:
      return value_equal(a->constant, b->constant);
    case Term::Kind::App: {
      if (a->name != b->name || a->args.size() != b->args.size()) return false;
      for (size_t i = 0; i < a->args.size(); ++i)
        if (!alpha_equal_rec(a->args[i], b->args[i], scopes)) return false;
      return true;
    }
    case Term::Kind::Cond: {
      if (a->clauses.size() != b->clauses.size()) return false;
      for (size_t i = 0; i < a->clauses.size(); ++i)
        if (!alpha_equal_rec(a->clauses[i].first, b->clauses[i].first, scopes) ||
            !alpha_equal_rec(a->clauses[i].second, b->clauses[i].second, scopes))
          return false;
      return true;
    }
    case Term::Kind::Quant: {
      if (a->quant != b->quant || a->bound.size() != b->bound.size()) return false;
      for (size_t i = 0; i < a->bound.size(); ++i)
        scopes.emplace_back(a->bound[i], b->bound[i]);
      bool ok = alpha_equal_rec(a->matrix, b->matrix, scopes);
      scopes.resize(scopes.size() - a->bound.size());
      return ok;
    }
  }
  return false;
}

}  // namespace detail

// Structural equality up to renaming of quantifier-bound variables.
inline bool alpha_equal(const TermPtr& a, const TermPtr& b) {
  std::vector<std::pair<std::string, std::string>> scopes;
  return detail::alpha_equal_rec(a, b, scopes);
}

inline void print_term(std::string& out, const TermPtr& t) {
  switch (t->kind) {
    case Term::Kind::Var:
      out += t->name;
      return;
    case Term::Kind::Const: {
      const ValuePtr& v = t->constant;
      bool self_evaluating = v->kind == Value::Kind::Int || v->kind == Value::Kind::Char ||
                             (v->kind == Value::Kind::Sym && (v->sym == "t" || v->sym == "nil"));
      if (self_evaluating) {
        print_value(out, v);
      } else {
        out += "(quote ";
        print_value(out, v);
        out.push_back(')');
      }
      return;
    }
    case Term::Kind::App: {
      out.push_back('(');
      out += t->name;
      for (const auto& a : t->args) {
        out.push_back(' ');
        print_term(out, a);
      }
      out.push_back(')');
      return;
    }
    case Term::Kind::Cond: {
      out += "(cond";
      for (const auto& [test, result] : t->clauses) {
        out += " (";
        print_term(out, test);
        out.push_back(' ');
        print_term(out, result);
        out.push_back(')');
      }
      out.push_back(')');
      return;
    }
    case Term::Kind::Quant: {
      out.push_back('(');
      out += quant_name(t->quant);
      out.push_back(' ');
      if (t->bound.size() == 1) {
        out += t->bound.front();
      } else {
        out.push_back('(');
        for (size_t i = 0; i < t->bound.size(); ++i) {
          if (i > 0) out.push_back(' ');
          out += t->bound[i];
        }
        out.push_back(')');
      }
      out.push_back(' ');
      print_term(out, t->matrix);
      out.push_back(')');
      return;
    }
  }
}

inline std::string print_term(const TermPtr& t) {
  std::string out;
  print_term(out, t);
  return out;
}

namespace detail {

inline void free_vars_rec(const TermPtr& t, std::set<std::string>& bound,
                          std::vector<std::string>& order, std::set<std::string>& seen) {
  switch (t->kind) {
    case Term::Kind::Var:
      if (!bound.count(t->name) && seen.insert(t->name).second) order.push_back(t->name);
      return;
    case Term::Kind::Const:
      return;
    case Term::Kind::App:
      for (const auto& a : t->args) free_vars_rec(a, bound, order, seen);
      return;
    case Term::Kind::Cond:
      for (const auto& [test, result] : t->clauses) {
        free_vars_rec(test, bound, order, seen);
        free_vars_rec(result, bound, order, seen);
      }
      return;
    case Term::Kind::Quant: {
      std::vector<std::string> added;
      for (const auto& b : t->bound)
        if (bound.insert(b).second) added.push_back(b);
      free_vars_rec(t->matrix, bound, order, seen);
      for (const auto& b : added) bound.erase(b);
      return;
    }
  }
}

}  // namespace detail

// Free individual variables, in first-appearance order.
inline std::vector<std::string> free_vars(const TermPtr& t) {
  std::set<std::string> bound, seen;
  std::vector<std::string> order;
  detail::free_vars_rec(t, bound, order, seen);
  return order;
}

// Every function name applied anywhere in the term, in first-appearance order.
inline void applied_names(const TermPtr& t, std::vector<std::string>& order,
                          std::set<std::string>& seen) {
  switch (t->kind) {
    case Term::Kind::Var:
    case Term::Kind::Const:
      return;
    case Term::Kind::App:
      if (seen.insert(t->name).second) order.push_back(t->name);
      for (const auto& a : t->args) applied_names(a, order, seen);
      return;
    case Term::Kind::Cond:
      for (const auto& [test, result] : t->clauses) {
        applied_names(test, order, seen);
        applied_names(result, order, seen);
      }
      return;
    case Term::Kind::Quant:
      applied_names(t->matrix, order, seen);
      return;
  }
}

inline std::vector<std::string> applied_names(const TermPtr& t) {
  std::vector<std::string> order;
  std::set<std::string> seen;
  applied_names(t, order, seen);
  return order;
}

inline bool applies_name(const TermPtr& t, const std::string& name) {
  for (const auto& n : applied_names(t))
    if (n == name) return true;
  return false;
}

namespace detail {

inline std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  for (int i = 1;; ++i) {
    std::string cand = base + "_" + std::to_string(i);
    if (!avoid.count(cand)) return cand;
  }
}

}  // namespace detail

// Capture-avoiding substitution of individual variables.
inline TermPtr subst_vars(const TermPtr& t, const std::map<std::string, TermPtr>& sub) {
  if (sub.empty()) return t;
  switch (t->kind) {
    case Term::Kind::Var: {
      auto it = sub.find(t->name);
      return it == sub.end() ? t : it->second;
    }
    case Term::Kind::Const:
      return t;
    case Term::Kind::App: {
      std::vector<TermPtr> args;
      args.reserve(t->args.size());
      for (const auto& a : t->args) args.push_back(subst_vars(a, sub));
      return t_app(t->name, std::move(args));
    }
    case Term::Kind::Cond: {
      std::vector<std::pair<TermPtr, TermPtr>> clauses;
      clauses.reserve(t->clauses.size());
      for (const auto& [test, result] : t->clauses)
        clauses.emplace_back(subst_vars(test, sub), subst_vars(result, sub));
      return t_cond(std::move(clauses));
    }
    case Term::Kind::Quant: {
      // drop shadowed keys; rename bound variables that would capture
      std::map<std::string, TermPtr> inner;
      std::set<std::string> value_frees;
      for (const auto& [k, v] : sub) {
        bool shadowed = false;
        for (const auto& b : t->bound)
          if (b == k) shadowed = true;
        if (shadowed) continue;
        inner.emplace(k, v);
        for (const auto& fv : free_vars(v)) value_frees.insert(fv);
      }
      if (inner.empty()) return t;
      std::vector<std::string> bound = t->bound;
      TermPtr matrix = t->matrix;
      std::map<std::string, TermPtr> renames;
      std::set<std::string> avoid = value_frees;
      for (const auto& fv : free_vars(matrix)) avoid.insert(fv);
      for (auto& b : bound) {
        if (value_frees.count(b)) {
          std::string nb = detail::fresh_name(b, avoid);
          avoid.insert(nb);
          renames.emplace(b, t_var(nb));
          b = nb;
        }
      }
      if (!renames.empty()) matrix = subst_vars(matrix, renames);
      return t_quant(t->quant, std::move(bound), subst_vars(matrix, inner));
    }
  }
  return t;
}

}  // namespace softk
