// softk: run event scripts and evaluate terms.
//
//   softk run <script> [--check-bounded] [--universe-default NAME]
//                      [--depth-limit N] [--enum-budget N] [--keep-going]
//                      [--dump-registry PATH] [--summary PATH]
//   softk eval <expr> [--load <script>] [--depth-limit N]
//
// Exit codes: 0 all events admitted and all enabled checks passed,
// 1 a rejection or a failed check, 2 usage or I/O error.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "softk/softk.hpp"

namespace {

void print_report(const softk::RunReport& report) {
  using softk::EventOutcome;
  for (const auto& entry : report.entries) {
    const EventOutcome& o = entry.outcome;
    std::cout << o.kind << " " << o.name << ": " << softk::status_name(o.status);
    if (o.verdict) std::cout << " [" << o.verdict->describe() << "]";
    if (!o.detail.empty()) std::cout << " -- " << o.detail;
    std::cout << "\n";
    for (const auto& note : o.notes) std::cout << "  note: " << note << "\n";
    for (const auto& p : o.pairs) {
      const char* role = p.role == softk::PairRole::FunVar    ? "funvar"
                         : p.role == softk::PairRole::Witness ? "witness"
                                                              : "function";
      std::cout << "  pair (" << p.replaced << " " << p.replacement << ") " << role << "\n";
    }
    for (const auto& ob : o.obligations) {
      std::cout << "  " << softk::obligation_kind_name(ob.kind) << " of " << ob.replaced
                << " vs " << ob.replacement << ": "
                << (ob.discharged ? "DISCHARGED" : "FAILED") << "\n";
    }
  }
  double total = 0;
  for (const auto& entry : report.entries) total += entry.millis;
  std::cout << report.count(EventOutcome::Status::Admitted) << " admitted, "
            << report.count(EventOutcome::Status::Redundant) << " redundant, "
            << report.count(EventOutcome::Status::Rejected) << " rejected ("
            << static_cast<long>(total) << " ms)\n";
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "cannot write " << path << "\n";
    return false;
  }
  out << text;
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"definitional kernel for second-order functions and theorems"};
  app.require_subcommand(1);

  std::string script;
  std::string summary_path;
  std::string dump_path;
  softk::RunOptions opts;

  CLI::App* run = app.add_subcommand("run", "process an event script");
  run->add_option("script", script, "script file")->required();
  run->add_flag("--check-bounded", opts.check_theorems,
                "semantically check defthm/defthm-inst over the default universe");
  run->add_option("--universe-default", opts.default_universe,
                  "universe used when a directive names none");
  run->add_option("--depth-limit", opts.limits.depth_limit, "evaluator recursion depth limit");
  run->add_option("--enum-budget", opts.limits.enum_budget, "bounded-check assignment budget");
  run->add_flag("--check-guards", opts.limits.check_guards,
                "assert function guards while evaluating");
  run->add_flag("--keep-going", opts.keep_going, "continue past the first rejected event");
  run->add_option("--dump-registry", dump_path, "write the registry dump to this file");
  run->add_option("--summary", summary_path, "write the structured summary to this file");

  std::string expr;
  std::string load_script;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a ground term");
  eval_cmd->add_option("expr", expr, "term to evaluate")->required();
  eval_cmd->add_option("--load", load_script, "script to process first");
  eval_cmd->add_option("--depth-limit", opts.limits.depth_limit,
                       "evaluator recursion depth limit");
  eval_cmd->add_flag("--check-guards", opts.limits.check_guards,
                     "assert function guards while evaluating");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      softk::Session session(opts);
      softk::RunReport report = session.run_script(script);
      if (!report.fatal.empty()) {
        std::cerr << report.fatal << "\n";
        return report.exit_code;
      }
      print_report(report);
      if (!summary_path.empty() && !write_file(summary_path, report.summary_text())) return 2;
      if (!dump_path.empty() && !write_file(dump_path, session.registry().dump())) return 2;
      return report.exit_code;
    }

    softk::Session session(opts);
    if (!load_script.empty()) {
      softk::RunReport report = session.run_script(load_script);
      if (!report.fatal.empty()) {
        std::cerr << report.fatal << "\n";
        return report.exit_code;
      }
      if (report.exit_code != 0) {
        print_report(report);
        return report.exit_code;
      }
    }
    softk::Form form = softk::read_one_form(expr);
    softk::TermPtr term = softk::form_to_term(form, session.registry());
    softk::ValuePtr value =
        softk::eval_term(term, {}, session.registry(), session.options().limits);
    std::cout << softk::print_value(value) << "\n";
    return 0;
  } catch (const softk::Error& e) {
    std::cerr << e.what() << "\n";
    return e.code == softk::ErrorCode::Io || e.code == softk::ErrorCode::Usage ? 2 : 1;
  }
}
