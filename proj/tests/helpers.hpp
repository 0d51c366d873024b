#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "softk/softk.hpp"

namespace testutil {

inline std::string scripts_dir() { return SOFTK_SCRIPTS_DIR; }

inline std::string corpus_path() { return scripts_dir() + "/soft-corpus.lisp"; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline softk::Session corpus_session() {
  softk::Session session;
  softk::RunReport report = session.run_script(corpus_path());
  if (report.exit_code != 0)
    throw std::runtime_error("corpus script failed: " +
                             (report.fatal.empty() ? report.summary_text() : report.fatal));
  return session;
}

inline softk::Registry corpus_registry() { return corpus_session().registry(); }

inline softk::EventOutcome run_event(softk::Registry& reg, const std::string& text,
                                     const softk::CheckConfig& cfg = {}) {
  return softk::process_event(reg, softk::read_one_form(text), cfg);
}

// Processes each form as an event, throwing on the first rejection.
inline void run_events(softk::Registry& reg, const std::string& text) {
  for (const auto& form : softk::read_forms(text)) {
    softk::EventOutcome out = softk::process_event(reg, form);
    if (out.status == softk::EventOutcome::Status::Rejected)
      throw std::runtime_error(out.kind + " " + out.name + ": " + out.detail);
  }
}

inline softk::Registry registry_from(const std::string& text) {
  softk::Registry reg;
  run_events(reg, text);
  return reg;
}

inline softk::Universe make_universe(std::string name, std::vector<softk::ValuePtr> values) {
  softk::Universe u;
  u.name = std::move(name);
  u.values = std::move(values);
  return u;
}

// All binary trees of the given depth bound over the atoms.
inline softk::Universe tree_universe(std::string name,
                                     const std::vector<softk::ValuePtr>& atoms, int depth) {
  std::vector<softk::ValuePtr> cur = atoms;
  for (int d = 0; d < depth; ++d) {
    std::vector<softk::ValuePtr> next = atoms;
    for (const auto& a : cur)
      for (const auto& b : cur) next.push_back(softk::v_cons(a, b));
    cur = std::move(next);
  }
  return make_universe(std::move(name), std::move(cur));
}

// All proper lists up to the given length over the atoms.
inline softk::Universe list_universe(std::string name,
                                     const std::vector<softk::ValuePtr>& atoms, int max_len) {
  std::vector<softk::ValuePtr> out{softk::v_nil()};
  std::vector<softk::ValuePtr> level{softk::v_nil()};
  for (int n = 0; n < max_len; ++n) {
    std::vector<softk::ValuePtr> next;
    for (const auto& a : atoms)
      for (const auto& tail : level) next.push_back(softk::v_cons(a, tail));
    out.insert(out.end(), next.begin(), next.end());
    level = std::move(next);
  }
  return make_universe(std::move(name), std::move(out));
}

}  // namespace testutil
