#pragma once

// Batch script processing: events update the registry, tool directives
// declare universes, run bounded checks, declare and verify refinement
// chains, and evaluate ground terms.
//
// Directives:
//   (universe <name> <value> ...)
//   (universe <name> :atoms (<atom> ...) :depth <n>)     all binary trees
//   (universe <name> :lists (<atom> ...) :max-len <n>)   all proper lists
//   (check-bounded <theorem-or-formula> :universe <name>)
//   (chain <name> :specs (...) :steps (...) [:impl ((fv . fn) ...)])
//   (verify-implementation <chain> :universe <name>)
//   (eval <term>)

#include <chrono>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "softk/events.hpp"
#include "softk/refine.hpp"

namespace softk {

struct RunOptions {
  bool check_theorems = false;
  std::string default_universe;
  EvalLimits limits;
  bool keep_going = false;
};

struct RunEntry {
  EventOutcome outcome;
  double millis = 0;
};

struct RunReport {
  std::vector<RunEntry> entries;
  int exit_code = 0;
  std::string fatal;  // set when the script could not be processed at all

  int count(EventOutcome::Status s) const {
    int n = 0;
    for (const auto& e : entries)
      if (e.outcome.status == s) ++n;
    return n;
  }

  // Stable line-oriented record of the run; excludes timing.
  std::string summary_text() const {
    std::string out;
    for (const auto& e : entries) {
      const EventOutcome& o = e.outcome;
      out += "event=" + (o.name.empty() ? std::string("?") : o.name) + " kind=" + o.kind +
             " status=" + status_name(o.status);
      if (o.verdict) out += " verdict=" + o.verdict->describe();
      if (!o.detail.empty()) out += " detail=" + o.detail;
      out.push_back('\n');
      for (const auto& p : o.pairs) {
        const char* role = p.role == PairRole::FunVar ? "funvar"
                           : p.role == PairRole::SoFun ? "sofun"
                                                       : "witness";
        out += "pair=" + o.name + " replaced=" + p.replaced + " replacement=" + p.replacement +
               " role=" + role + "\n";
      }
      for (const auto& ob : o.obligations) {
        out += "obligation=" + o.name + " pair=(" + ob.replaced + " " + ob.replacement +
               ") kind=" + obligation_kind_name(ob.kind) +
               " result=" + (ob.discharged ? "DISCHARGED" : "FAILED") + "\n";
      }
    }
    return out;
  }
};

class Session {
 public:
  explicit Session(RunOptions opts = {}) : opts_(std::move(opts)) {}

  const Registry& registry() const { return reg_; }
  const RunOptions& options() const { return opts_; }

  const Universe* find_universe(const std::string& name) const {
    auto it = universes_.find(name);
    return it == universes_.end() ? nullptr : &it->second;
  }

  const RefinementChain* find_chain(const std::string& name) const {
    auto it = chains_.find(name);
    return it == chains_.end() ? nullptr : &it->second;
  }

  EventOutcome process_form(const Form& form) {
    try {
      if (!form.is_proper_list() || form.items.empty() || !form.items[0].is_symbol())
        fail(ErrorCode::Malformed, "expected an event or directive form", form.pos.line,
             form.pos.col);
      const std::string& head = form.items[0].text;
      if (is_event_head(head)) return process_event(reg_, form, check_config());
      if (head == "universe") return d_universe(form);
      if (head == "check-bounded") return d_check_bounded(form);
      if (head == "chain") return d_chain(form);
      if (head == "verify-implementation") return d_verify(form);
      if (head == "eval") return d_eval(form);
      fail(ErrorCode::Malformed, "unknown form " + head, form.pos.line, form.pos.col);
    } catch (const Error& e) {
      EventOutcome out;
      if (form.is_proper_list() && !form.items.empty() && form.items[0].is_symbol())
        out.kind = form.items[0].text;
      if (form.is_proper_list() && form.items.size() > 1 && form.items[1].is_symbol())
        out.name = form.items[1].text;
      out.status = EventOutcome::Status::Rejected;
      out.detail = e.what();
      return out;
    }
  }

  RunReport run_forms(const std::vector<Form>& forms) {
    RunReport report;
    for (const auto& form : forms) {
      auto start = std::chrono::steady_clock::now();
      RunEntry entry;
      entry.outcome = process_form(form);
      entry.millis =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
              .count();
      bool rejected = entry.outcome.status == EventOutcome::Status::Rejected;
      report.entries.push_back(std::move(entry));
      if (rejected) {
        report.exit_code = 1;
        if (!opts_.keep_going) break;
      }
    }
    return report;
  }

  RunReport run_text(std::string_view text) {
    try {
      return run_forms(read_forms(text));
    } catch (const Error& e) {
      RunReport report;
      report.fatal = e.what();
      report.exit_code = 1;
      return report;
    }
  }

  RunReport run_script(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      RunReport report;
      report.fatal = "cannot open " + path;
      report.exit_code = 2;
      return report;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return run_text(buf.str());
  }

 private:
  Registry reg_;
  std::map<std::string, Universe> universes_;
  std::map<std::string, RefinementChain> chains_;
  RunOptions opts_;

  CheckConfig check_config() const {
    CheckConfig cfg;
    cfg.check_theorems = opts_.check_theorems;
    cfg.limits = opts_.limits;
    if (!opts_.default_universe.empty()) {
      auto it = universes_.find(opts_.default_universe);
      if (it != universes_.end()) cfg.universe = &it->second;
    }
    return cfg;
  }

  const Universe& required_universe(const std::map<std::string, Form>& opts,
                                    const SourcePos& pos) const {
    std::string name = opts_.default_universe;
    if (auto it = opts.find(":universe"); it != opts.end())
      name = detail::expect_symbol(it->second, "a universe name");
    if (name.empty())
      fail(ErrorCode::Malformed, "no universe named and no default set", pos.line, pos.col);
    const Universe* u = find_universe(name);
    if (!u) fail(ErrorCode::UnknownName, "no universe named " + name, pos.line, pos.col);
    return *u;
  }

  static void push_unique(std::vector<ValuePtr>& values, ValuePtr v, const SourcePos& pos) {
    for (const auto& existing : values)
      if (value_equal(existing, v))
        fail(ErrorCode::Invariant, "duplicate universe value " + print_value(v), pos.line,
             pos.col);
    values.push_back(std::move(v));
  }

  EventOutcome d_universe(const Form& form) {
    EventOutcome out;
    out.kind = "universe";
    if (form.items.size() < 2)
      fail(ErrorCode::Malformed, "expected (universe name ...)", form.pos.line, form.pos.col);
    Universe u;
    u.name = detail::expect_symbol(form.items[1], "a universe name");
    out.name = u.name;

    bool keyed = form.items.size() > 2 && form.items[2].is_keyword();
    if (keyed) {
      auto opts = detail::keyed_options(form, 2);
      std::vector<ValuePtr> atoms;
      const Form* atom_form = nullptr;
      if (auto it = opts.find(":atoms"); it != opts.end()) atom_form = &it->second;
      if (auto it = opts.find(":lists"); it != opts.end()) atom_form = &it->second;
      if (!atom_form)
        fail(ErrorCode::Malformed, "expected :atoms or :lists", form.pos.line, form.pos.col);
      for (const auto& item : detail::expect_list(*atom_form, "a value list").items)
        push_unique(atoms, form_to_value(item), item.pos);
      if (atoms.empty())
        fail(ErrorCode::Malformed, "no atoms given", form.pos.line, form.pos.col);

      if (opts.count(":atoms")) {
        auto it = opts.find(":depth");
        if (it == opts.end() || !it->second.is_number())
          fail(ErrorCode::Malformed, ":atoms requires :depth <n>", form.pos.line, form.pos.col);
        u.values = generate_trees(atoms, it->second.num, form.pos);
      } else {
        auto it = opts.find(":max-len");
        if (it == opts.end() || !it->second.is_number())
          fail(ErrorCode::Malformed, ":lists requires :max-len <n>", form.pos.line, form.pos.col);
        u.values = generate_lists(atoms, it->second.num, form.pos);
      }
    } else {
      for (size_t i = 2; i < form.items.size(); ++i)
        push_unique(u.values, form_to_value(form.items[i]), form.items[i].pos);
      if (u.values.empty())
        fail(ErrorCode::Malformed, "universe must be non-empty", form.pos.line, form.pos.col);
    }

    auto it = universes_.find(u.name);
    if (it != universes_.end()) {
      bool same = it->second.values.size() == u.values.size();
      for (size_t i = 0; same && i < u.values.size(); ++i)
        same = value_equal(it->second.values[i], u.values[i]);
      if (!same)
        fail(ErrorCode::NameClash, u.name + " is already a different universe", form.pos.line,
             form.pos.col);
      out.status = EventOutcome::Status::Redundant;
    } else {
      out.status = EventOutcome::Status::Admitted;
      universes_.emplace(u.name, std::move(u));
    }
    out.detail = std::to_string(universes_.at(out.name).values.size()) + " values";
    return out;
  }

  static std::vector<ValuePtr> generate_trees(const std::vector<ValuePtr>& atoms,
                                              long long depth, const SourcePos& pos) {
    constexpr size_t kMaxUniverse = 1000000;
    std::vector<ValuePtr> cur = atoms;
    for (long long d = 0; d < depth; ++d) {
      size_t grown = atoms.size() + cur.size() * cur.size();
      if (grown > kMaxUniverse)
        fail(ErrorCode::Malformed, "tree universe exceeds the size cap", pos.line, pos.col);
      std::vector<ValuePtr> next = atoms;
      next.reserve(grown);
      for (const auto& a : cur)
        for (const auto& b : cur) next.push_back(v_cons(a, b));
      cur = std::move(next);
    }
    return cur;
  }

  static std::vector<ValuePtr> generate_lists(const std::vector<ValuePtr>& atoms,
                                              long long max_len, const SourcePos& pos) {
    constexpr size_t kMaxUniverse = 1000000;
    std::vector<ValuePtr> out{v_nil()};
    std::vector<ValuePtr> level{v_nil()};
    for (long long n = 0; n < max_len; ++n) {
      std::vector<ValuePtr> next;
      next.reserve(level.size() * atoms.size());
      for (const auto& a : atoms)
        for (const auto& tail : level) next.push_back(v_cons(a, tail));
      if (out.size() + next.size() > kMaxUniverse)
        fail(ErrorCode::Malformed, "list universe exceeds the size cap", pos.line, pos.col);
      out.insert(out.end(), next.begin(), next.end());
      level = std::move(next);
    }
    return out;
  }

  EventOutcome d_check_bounded(const Form& form) {
    EventOutcome out;
    out.kind = "check-bounded";
    if (form.items.size() < 2)
      fail(ErrorCode::Malformed, "expected (check-bounded target ...)", form.pos.line,
           form.pos.col);
    const Form& target = form.items[1];
    auto opts = detail::keyed_options(form, 2);
    const Universe& u = required_universe(opts, form.pos);

    TermPtr formula;
    if (target.is_symbol()) {
      out.name = target.text;
      formula = reg_.theorem(target.text).formula;  // UnknownName when absent
    } else {
      out.name = write_form(target);
      formula = form_to_term(target, reg_);
    }

    Verdict v = check_bounded(formula, u, reg_, opts_.limits);
    out.verdict = v;
    out.detail = "universe " + u.name;
    out.status = v.failed() ? EventOutcome::Status::Rejected : EventOutcome::Status::Admitted;
    return out;
  }

  EventOutcome d_chain(const Form& form) {
    EventOutcome out;
    out.kind = "chain";
    if (form.items.size() < 2)
      fail(ErrorCode::Malformed, "expected (chain name :specs (...) :steps (...))",
           form.pos.line, form.pos.col);
    RefinementChain chain;
    chain.name = detail::expect_symbol(form.items[1], "a chain name");
    out.name = chain.name;

    auto opts = detail::keyed_options(form, 2);
    auto specs_it = opts.find(":specs");
    if (specs_it == opts.end())
      fail(ErrorCode::Malformed, "chain requires :specs", form.pos.line, form.pos.col);
    chain.specs = detail::symbol_list(specs_it->second, ":specs");
    if (chain.specs.empty())
      fail(ErrorCode::Malformed, "chain requires at least one specification predicate",
           form.pos.line, form.pos.col);
    if (auto it = opts.find(":steps"); it != opts.end())
      chain.steps = detail::symbol_list(it->second, ":steps");
    if (auto it = opts.find(":impl"); it != opts.end()) {
      for (const auto& p : detail::expect_list(it->second, ":impl pairs").items) {
        if (!p.is_pair() || !p.items[0].is_symbol() || !p.items[1].is_symbol())
          fail(ErrorCode::Malformed, "expected a (funvar . function) pair", p.pos.line,
               p.pos.col);
        chain.impl[p.items[0].text] = p.items[1].text;
      }
    }

    for (const auto& s : chain.specs)
      if (!reg_.find_function(s))
        fail(ErrorCode::UnknownFunction, "no predicate named " + s, form.pos.line, form.pos.col);

    Registry staged = reg_;
    if (!chain.steps.empty()) compose_chain(chain, staged);
    if (chain.impl.empty()) chain.impl = extract_implementation(chain, staged);

    auto it = chains_.find(chain.name);
    if (it != chains_.end()) {
      if (!chain_equal(it->second, chain))
        fail(ErrorCode::NameClash, chain.name + " is already a different chain", form.pos.line,
             form.pos.col);
      out.status = staged.equal(reg_) ? EventOutcome::Status::Redundant
                                      : EventOutcome::Status::Admitted;
    } else {
      out.status = EventOutcome::Status::Admitted;
    }
    out.detail = std::to_string(chain.specs.size()) + " specs, " +
                 std::to_string(chain.steps.size()) + " steps, implementation " +
                 print_instantiation(chain.impl);
    if (!staged.equal(reg_)) reg_ = std::move(staged);
    chains_[chain.name] = std::move(chain);
    return out;
  }

  EventOutcome d_verify(const Form& form) {
    EventOutcome out;
    out.kind = "verify-implementation";
    if (form.items.size() < 2)
      fail(ErrorCode::Malformed, "expected (verify-implementation chain ...)", form.pos.line,
           form.pos.col);
    out.name = detail::expect_symbol(form.items[1], "a chain name");
    const RefinementChain* chain = find_chain(out.name);
    if (!chain)
      fail(ErrorCode::UnknownName, "no chain named " + out.name, form.pos.line, form.pos.col);
    auto opts = detail::keyed_options(form, 2);
    const Universe& u = required_universe(opts, form.pos);

    Verdict v = verify_implementation(*chain, u, reg_, opts_.limits);
    out.verdict = v;
    out.detail = "universe " + u.name;
    out.status = v.failed() ? EventOutcome::Status::Rejected : EventOutcome::Status::Admitted;
    return out;
  }

  EventOutcome d_eval(const Form& form) {
    EventOutcome out;
    out.kind = "eval";
    if (form.items.size() != 2)
      fail(ErrorCode::Malformed, "expected (eval term)", form.pos.line, form.pos.col);
    out.name = write_form(form.items[1]);
    TermPtr term = form_to_term(form.items[1], reg_);
    ValuePtr value = eval_term(term, {}, reg_, opts_.limits);
    out.detail = print_value(value);
    out.status = EventOutcome::Status::Admitted;
    return out;
  }
};

}  // namespace softk
