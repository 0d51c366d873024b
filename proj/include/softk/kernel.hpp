#pragma once

// Bridge between surface forms and checked terms.
//
// Conversion resolves each symbol against the registry: t/nil and literals
// become constants, known applications are arity-checked as they are built,
// quote/cond/forall/exists get their structured representations.  A pending
// name->arity map lets a definition's body reference the function being
// defined before it is registered.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "softk/registry.hpp"
#include "softk/sexpr.hpp"
#include "softk/term.hpp"

namespace softk {

inline std::set<std::string> funvars_of_term(const TermPtr& t, const Registry& reg) {
  return reg.funvars_of(t);
}

inline void check_arities(const TermPtr& t, const Registry& reg) { reg.check_arities(t); }

// Literal datum: numbers, characters, symbols, and list structure.
inline ValuePtr form_to_value(const Form& f) {
  if (f.is_number()) return v_int(f.num);
  if (f.is_character()) return v_char(f.chr);
  if (f.is_symbol()) return v_sym(f.text);
  if (f.is_string())
    fail(ErrorCode::Syntax, "string is not a value", f.pos.line, f.pos.col);
  ValuePtr tail = v_nil();
  size_t n = f.items.size();
  if (f.dotted) {
    tail = form_to_value(f.items.back());
    --n;
  }
  for (size_t i = n; i > 0; --i) tail = v_cons(form_to_value(f.items[i - 1]), tail);
  return tail;
}

namespace detail {

struct ConvCtx {
  const Registry* reg = nullptr;
  // names usable before registration, e.g. a recursive definition's own name
  const std::map<std::string, int>* pending = nullptr;

  int arity_of(const std::string& name, const SourcePos& pos) const {
    if (pending) {
      auto it = pending->find(name);
      if (it != pending->end()) return it->second;
    }
    if (reg->is_funvar(name)) return reg->funvar_arity(name);
    const FunctionRec* rec = reg->find_function(name);
    if (!rec)
      fail(ErrorCode::UnknownFunction, "no function named " + name, pos.line, pos.col);
    return rec->arity;
  }
};

inline std::vector<std::string> bound_var_list(const Form& f) {
  std::vector<std::string> out;
  if (f.is_symbol()) {
    if (f.text == "t" || f.text == "nil")
      fail(ErrorCode::Syntax, f.text + " cannot be a variable", f.pos.line, f.pos.col);
    out.push_back(f.text);
    return out;
  }
  if (!f.is_proper_list() || f.items.empty())
    fail(ErrorCode::Syntax, "expected a variable or variable list", f.pos.line, f.pos.col);
  std::set<std::string> seen;
  for (const auto& item : f.items) {
    if (!item.is_symbol() || item.text == "t" || item.text == "nil")
      fail(ErrorCode::Syntax, "expected a variable", item.pos.line, item.pos.col);
    if (!seen.insert(item.text).second)
      fail(ErrorCode::Syntax, "duplicate variable " + item.text, item.pos.line, item.pos.col);
    out.push_back(item.text);
  }
  return out;
}

inline TermPtr form_to_term_rec(const Form& f, const ConvCtx& ctx) {
  if (f.is_symbol()) {
    if (f.text == "t" || f.text == "nil") return t_const(v_sym(f.text));
    return t_var(f.text);
  }
  if (f.is_number()) return t_const(v_int(f.num));
  if (f.is_character()) return t_const(v_char(f.chr));
  if (f.is_string())
    fail(ErrorCode::Syntax, "string literal in term", f.pos.line, f.pos.col);

  if (!f.is_proper_list() || f.items.empty() || !f.items[0].is_symbol())
    fail(ErrorCode::Syntax, "expected an application", f.pos.line, f.pos.col);
  const std::string& head = f.items[0].text;

  if (head == "quote") {
    if (f.items.size() != 2)
      fail(ErrorCode::Syntax, "quote takes one argument", f.pos.line, f.pos.col);
    return t_const(form_to_value(f.items[1]));
  }

  if (head == "cond") {
    std::vector<std::pair<TermPtr, TermPtr>> clauses;
    for (size_t i = 1; i < f.items.size(); ++i) {
      const Form& c = f.items[i];
      if (!c.is_proper_list() || c.items.size() != 2)
        fail(ErrorCode::Syntax, "cond clause must be (test result)", c.pos.line, c.pos.col);
      clauses.emplace_back(form_to_term_rec(c.items[0], ctx), form_to_term_rec(c.items[1], ctx));
    }
    return t_cond(std::move(clauses));
  }

  if (head == "forall" || head == "exists") {
    if (f.items.size() != 3)
      fail(ErrorCode::Syntax, head + " takes a variable list and a matrix", f.pos.line,
           f.pos.col);
    auto bound = bound_var_list(f.items[1]);
    return t_quant(head == "forall" ? QuantKind::Forall : QuantKind::Exists, std::move(bound),
                   form_to_term_rec(f.items[2], ctx));
  }

  int expected = ctx.arity_of(head, f.items[0].pos);
  size_t actual = f.items.size() - 1;
  if (expected != kVariadic && static_cast<size_t>(expected) != actual)
    fail(ErrorCode::Arity,
         head + " expects " + std::to_string(expected) + " arguments, got " +
             std::to_string(actual),
         f.pos.line, f.pos.col);
  std::vector<TermPtr> args;
  args.reserve(actual);
  for (size_t i = 1; i < f.items.size(); ++i) args.push_back(form_to_term_rec(f.items[i], ctx));
  return t_app(head, std::move(args));
}

}  // namespace detail

inline TermPtr form_to_term(const Form& f, const Registry& reg,
                            const std::map<std::string, int>* pending = nullptr) {
  detail::ConvCtx ctx{&reg, pending};
  return detail::form_to_term_rec(f, ctx);
}

inline TermPtr parse_term(std::string_view text, const Registry& reg) {
  return form_to_term(read_one_form(text), reg);
}

}  // namespace softk
