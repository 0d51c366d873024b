#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "softk/softk.hpp"

using namespace softk;
using testutil::corpus_registry;
using testutil::make_universe;
using testutil::registry_from;
using testutil::run_event;
using testutil::run_events;

namespace {

void expect_rejected(Registry& reg, const std::string& text, ErrorCode code) {
  std::string before = reg.dump();
  EventOutcome out = run_event(reg, text);
  INFO(text << " -> " << out.detail);
  CHECK(out.status == EventOutcome::Status::Rejected);
  CHECK(out.detail.find(error_code_name(code)) != std::string::npos);
  CHECK(reg.dump() == before);  // rejection leaves every table untouched
}

}  // namespace

TEST_CASE("defunvar admits arities of one or more") {
  Registry reg;
  EventOutcome one = run_event(reg, "(defunvar ?p (*) => *)");
  CHECK(one.status == EventOutcome::Status::Admitted);
  CHECK(reg.funvar_arity("?p") == 1);

  EventOutcome two = run_event(reg, "(defunvar ?g (* *) => *)");
  CHECK(two.status == EventOutcome::Status::Admitted);
  CHECK(reg.funvar_arity("?g") == 2);

  expect_rejected(reg, "(defunvar ?z () => *)", ErrorCode::Malformed);
  expect_rejected(reg, "(defunvar ?bad (*) => * extra)", ErrorCode::Malformed);
  expect_rejected(reg, "(defunvar ?p (* *) => *)", ErrorCode::NameClash);
}

TEST_CASE("redundant events succeed silently") {
  Registry reg;
  run_event(reg, "(defunvar ?io (* *) => *)");
  EventOutcome again = run_event(reg, "(defunvar ?io (* *) => *)");
  CHECK(again.status == EventOutcome::Status::Redundant);

  run_event(reg, "(defun wrap (x) (list x))");
  CHECK(run_event(reg, "(defun wrap (x) (list x))").status ==
        EventOutcome::Status::Redundant);
  expect_rejected(reg, "(defun wrap (x) (cons x nil))", ErrorCode::NameClash);
}

TEST_CASE("defun2 checks the exactness condition") {
  Registry reg = registry_from(
      "(defunvar ?f (*) => *)"
      "(defunvar ?p (*) => *)");

  CHECK(run_event(reg, "(defun2 quad[?f] (?f) (x) (?f (?f (?f (?f x)))))").status ==
        EventOutcome::Status::Admitted);
  CHECK_FALSE(reg.function("quad[?f]").recursive);

  // ?p appears only in the guard, and the guard counts
  run_events(reg,
             "(defun2 all[?p] (?p) (l)"
             "  (cond ((atom l) (null l)) (t (and (?p (car l)) (all[?p] (cdr l))))))");
  EventOutcome map_ev = run_event(reg,
                                  "(defun2 map[?f_?p] (?f ?p) (l)"
                                  "  (declare (xargs :guard (all[?p] l)))"
                                  "  (cond ((endp l) nil)"
                                  "        (t (cons (?f (car l)) (map[?f_?p] (cdr l))))))");
  CHECK(map_ev.status == EventOutcome::Status::Admitted);
  CHECK(reg.function("map[?f_?p]").recursive);

  expect_rejected(reg, "(defun2 bad (?f ?p) (x) (?f x))", ErrorCode::FunvarMismatch);
  expect_rejected(reg, "(defun2 bad () (x) x)", ErrorCode::Malformed);
  expect_rejected(reg, "(defun first-order-dep (x) (?f x))", ErrorCode::FunvarMismatch);
  expect_rejected(reg, "(defun shadowing (t) t)", ErrorCode::Malformed);
}

TEST_CASE("termination bookkeeping") {
  Registry reg;
  expect_rejected(reg, "(defun too-eager (x) (declare (xargs :measure (len x))) (list x))",
                  ErrorCode::Invariant);

  EventOutcome structural =
      run_event(reg, "(defun down (l) (cond ((atom l) nil) (t (down (cdr l)))))");
  CHECK(structural.status == EventOutcome::Status::Admitted);
  CHECK(structural.notes.empty());

  EventOutcome spinning = run_event(reg, "(defun spin (x) (if (equal x 0) 0 (spin x)))");
  CHECK(spinning.status == EventOutcome::Status::Admitted);
  REQUIRE_FALSE(spinning.notes.empty());  // admitted, but flagged

  EventOutcome measured = run_event(
      reg, "(defun counted (x) (declare (xargs :measure (nfix x)))"
           " (if (equal x 0) 0 (counted (binary-+ x -1))))");
  CHECK(measured.status == EventOutcome::Status::Admitted);
  CHECK(measured.notes.empty());
  REQUIRE(reg.function("counted").measure);
  CHECK(print_term(reg.function("counted").measure) == "(nfix x)");
}

TEST_CASE("defchoose2 requires funvars(body) to equal the parameters exactly") {
  Registry reg = registry_from(
      "(defunvar ?f (*) => *)"
      "(defunvar ?g (* *) => *)");
  CHECK(run_event(reg, "(defchoose2 fixpoint[?f] x (?f) () (equal (?f x) x))").status ==
        EventOutcome::Status::Admitted);
  CHECK(reg.function("fixpoint[?f]").kind == FunKind::Choice);

  expect_rejected(reg, "(defchoose2 bad x (?f ?g) () (equal (?f x) x))",
                  ErrorCode::FunvarMismatch);
  expect_rejected(reg, "(defchoose2 bad2 x (?f) (x) (equal (?f x) x))", ErrorCode::Malformed);
}

TEST_CASE("first-order choice and quantifier forms") {
  Registry reg;
  run_events(reg, "(defchoose some-nat x () (natp x))");
  const FunctionRec& pick = reg.function("some-nat");
  CHECK(pick.kind == FunKind::Choice);
  CHECK(pick.fparams.empty());
  auto cs = constraints_of(pick, reg);
  REQUIRE(cs.size() == 1);
  CHECK(print_term(cs[0].term) == "(implies (natp x) (natp (some-nat)))");

  run_events(reg,
             "(defun-sk has-member (y l) (exists e (and (member e l) (equal e y)))"
             "  :witness-dcls ((declare (xargs :guard (true-listp l)))))");
  const FunctionRec& has = reg.function("has-member");
  CHECK(has.quant == QuantKind::Exists);
  CHECK(has.rule_name == "has-member-suff");
  CHECK(print_term(has.guard) == "(true-listp l)");
}

TEST_CASE("defun-sk2 names its witness and rule by quantifier kind") {
  Registry reg = registry_from("(defunvar ?f (*) => *)");

  run_events(reg,
             "(defun-sk2 injective[?f] (?f) ()"
             "  (forall (x y) (implies (equal (?f x) (?f y)) (equal x y))))");
  CHECK(reg.function("injective[?f]").rule_name == "injective[?f]-necc");

  run_events(reg, "(defun-sk2 hits[?f] (?f) (y) (exists x (equal (?f x) y)))");
  const FunctionRec& hits = reg.function("hits[?f]");
  CHECK(hits.rule_name == "hits[?f]-suff");
  CHECK(hits.witness_name == "hits[?f]-witness");
  CHECK(reg.function("hits[?f]-witness").arity == 1);

  expect_rejected(reg, "(defun-sk2 bad (?f) () (equal (?f x) x))", ErrorCode::Malformed);
  expect_rejected(reg, "(defun-sk2 bad (?f) (x) (forall x (equal (?f x) x)))",
                  ErrorCode::Malformed);
  expect_rejected(reg, "(defun-sk2 bad (?f) () (forall x (equal x x)))",
                  ErrorCode::FunvarMismatch);
}

TEST_CASE("a three-variable quantifier models a tuple-valued witness") {
  Registry reg = registry_from(
      "(defunvar ?g (* *) => *)"
      "(defunvar ?io (* *) => *)"
      "(defun-sk2 consp-io[?g_?io] (?g ?io) ()"
      "  (forall (x y1 y2)"
      "          (implies (and (consp x) (?io (car x) y1) (?io (cdr x) y2))"
      "                   (?io x (?g y1 y2))))"
      "  :rewrite :direct)");
  const FunctionRec& rec = reg.function("consp-io[?g_?io]");
  CHECK(rec.bound == std::vector<std::string>{"x", "y1", "y2"});
  CHECK(rec.rewrite_direct);
  auto cs = constraints_of(rec, reg);
  CHECK(print_term(cs[0].term).find("(mv-nth 2 (consp-io[?g_?io]-witness))") !=
        std::string::npos);
}

TEST_CASE("defun-inst builds instances by substitution") {
  Registry reg = registry_from(
      "(defunvar ?f (*) => *)"
      "(defunvar ?p (*) => *)"
      "(defun2 quad[?f] (?f) (x) (?f (?f (?f (?f x)))))"
      "(defun2 all[?p] (?p) (l)"
      "  (cond ((atom l) (null l)) (t (and (?p (car l)) (all[?p] (cdr l))))))"
      "(defun2 map[?f_?p] (?f ?p) (l)"
      "  (declare (xargs :guard (all[?p] l)))"
      "  (cond ((endp l) nil)"
      "        (t (cons (?f (car l)) (map[?f_?p] (cdr l))))))"
      "(defun-sk2 injective[?f] (?f) ()"
      "  (forall (x y) (implies (equal (?f x) (?f y)) (equal x y))))"
      "(defun wrap (x) (list x))"
      "(defun octetp (x) (and (natp x) (< x 256)))");

  SECTION("a plain first-order instance") {
    run_events(reg, "(defun-inst quad[wrap] (quad[?f] (?f . wrap)))");
    const FunctionRec& rec = reg.function("quad[wrap]");
    CHECK(print_term(rec.body) == "(wrap (wrap (wrap (wrap x))))");
    CHECK(rec.fparams.empty());
    CHECK(reg.lookup_instance("quad[?f]", {{"?f", "wrap"}}) == "quad[wrap]");
  }

  SECTION("a recursive instance rewrites its self-reference") {
    run_events(reg, "(defun-inst all[octetp] (all[?p] (?p . octetp)))");
    const FunctionRec& rec = reg.function("all[octetp]");
    CHECK(rec.recursive);
    CHECK(print_term(rec.body) ==
          "(cond ((atom l) (null l)) (t (and (octetp (car l)) (all[octetp] (cdr l)))))");
  }

  SECTION("a second-order quantifier instance") {
    run_events(reg, "(defun-inst injective[quad[?f]] (?f) (injective[?f] (?f . quad[?f])))");
    const FunctionRec& rec = reg.function("injective[quad[?f]]");
    CHECK(rec.kind == FunKind::Quantifier);
    CHECK(rec.fparams == std::vector<std::string>{"?f"});
    CHECK(rec.witness_name == "injective[quad[?f]]-witness");
    CHECK(print_term(rec.body) ==
          "(implies (equal (quad[?f] x) (quad[?f] y)) (equal x y))");
  }

  SECTION("the guard instance requires its own table entry first") {
    expect_rejected(reg,
                    "(defun-inst map[code-char] (map[?f_?p] (?f . code-char) (?p . octetp)))",
                    ErrorCode::MissingInstance);
    run_events(reg, "(defun-inst all[octetp] (all[?p] (?p . octetp)))");
    run_events(reg, "(defun-inst map[code-char] (map[?f_?p] (?f . code-char) (?p . octetp)))");
    CHECK(print_term(reg.function("map[code-char]").guard) == "(all[octetp] l)");
  }

  SECTION("function parameters missing from the instantiation stay in place") {
    run_events(reg,
               "(defun-inst all[octetp] (all[?p] (?p . octetp)))"
               "(defun-inst map[?f_octetp] (?f) (map[?f_?p] (?p . octetp)))");
    const FunctionRec& rec = reg.function("map[?f_octetp]");
    CHECK(rec.second_order());
    CHECK(rec.recursive);
    CHECK(print_term(rec.body) ==
          "(cond ((endp l) nil) (t (cons (?f (car l)) (map[?f_octetp] (cdr l)))))");
    CHECK(print_term(rec.guard) == "(all[octetp] l)");
    CHECK(reg.lookup_instance("map[?f_?p]", {{"?p", "octetp"}}) == "map[?f_octetp]");

    // the partial instance can be instantiated further
    run_events(reg, "(defun-inst map[cc_octetp] (map[?f_octetp] (?f . code-char)))");
    CHECK(print_term(reg.function("map[cc_octetp]").body) ==
          "(cond ((endp l) nil) (t (cons (code-char (car l)) (map[cc_octetp] (cdr l)))))");
  }

  SECTION("a partial choice instance keeps its constraint shape") {
    run_events(reg,
               "(defunvar ?g (* *) => *)"
               "(defchoose2 agreeing[?f_?g] x (?f ?g) () (equal (?f x) (?g x x)))"
               "(defun-inst agreeing[wrap_?g] (?g) (agreeing[?f_?g] (?f . wrap)))");
    const FunctionRec& rec = reg.function("agreeing[wrap_?g]");
    CHECK(rec.kind == FunKind::Choice);
    CHECK(rec.fparams == std::vector<std::string>{"?g"});
    CHECK(print_term(rec.body) == "(equal (wrap x) (?g x x))");
    auto cs = constraints_of(rec, reg);
    REQUIRE(cs.size() == 1);
    CHECK(print_term(cs[0].term) ==
          "(implies (equal (wrap x) (?g x x)) "
          "(equal (wrap (agreeing[wrap_?g])) (?g (agreeing[wrap_?g]) (agreeing[wrap_?g]))))");
  }

  SECTION("malformed and mismatched instances are rejected") {
    expect_rejected(reg, "(defun-inst bad (wrap (?f . wrap)))", ErrorCode::Malformed);
    expect_rejected(reg, "(defun-inst bad (quad[?f] (?p . octetp)))", ErrorCode::Invariant);
    expect_rejected(reg, "(defun-inst bad (quad[?f] (?f . append)))", ErrorCode::Arity);
    // a second-order value leaves funvars behind that must be declared
    expect_rejected(reg, "(defun-inst bad (quad[?f] (?f . map[?f_?p])))",
                    ErrorCode::FunvarMismatch);
    expect_rejected(reg, "(defun-inst bad (?f) (quad[?f] (?f . wrap)))",
                    ErrorCode::FunvarMismatch);
    expect_rejected(reg, "(defun-inst bad (quad[?f] (?f . wrap)) :guard t)",
                    ErrorCode::Malformed);
    expect_rejected(reg, "(defun-inst bad (injective[?f]-witness (?f . wrap)))",
                    ErrorCode::Malformed);
  }
}

TEST_CASE("a measure may be the only funvar dependency and instantiates too") {
  Registry reg = registry_from(
      "(defunvar ?m (*) => *)"
      "(defun2 shrink[?m] (?m) (l)"
      "  (declare (xargs :measure (len (?m l))))"
      "  (cond ((atom l) nil) (t (shrink[?m] (cdr l)))))");
  const FunctionRec& shrink = reg.function("shrink[?m]");
  REQUIRE(shrink.measure);
  CHECK(print_term(shrink.measure) == "(len (?m l))");

  run_events(reg, "(defun-inst shrink[fix] (shrink[?m] (?m . fix)))");
  const FunctionRec& inst = reg.function("shrink[fix]");
  CHECK(inst.recursive);
  REQUIRE(inst.measure);
  CHECK(print_term(inst.measure) == "(len (fix l))");
  CHECK(print_term(inst.body) == "(cond ((atom l) nil) (t (shrink[fix] (cdr l))))");

  // the stored measure is the instantiation of the target's measure
  CHECK(print_term(apply_instantiation(shrink.measure, {{"?m", "fix"}}, reg)) ==
        print_term(inst.measure));
}

TEST_CASE("defthm records formulas and their dependencies") {
  Registry reg = corpus_registry();
  const TheoremRec& lom = reg.theorem("len-of-map[?f_?p]");
  CHECK(lom.funvars == std::set<std::string>{"?f", "?p"});
  CHECK(print_term(lom.formula) == "(equal (len (map[?f_?p] l)) (len l))");

  const TheoremRec& step1 = reg.theorem("step1");
  CHECK(step1.funvars == std::set<std::string>{"?h", "?f", "?g"});

  expect_rejected(reg, "(defthm broken (equal (len l)))", ErrorCode::Arity);
}

TEST_CASE("defthm can be checked against a universe") {
  Registry reg;
  Universe u = make_universe("u", {v_int(0), v_int(1)});
  CheckConfig cfg;
  cfg.check_theorems = true;
  cfg.universe = &u;

  EventOutcome good = run_event(reg, "(defthm plus-commutes (equal (binary-+ x y) (binary-+ y x)))", cfg);
  CHECK(good.status == EventOutcome::Status::Admitted);
  REQUIRE(good.verdict);
  CHECK(good.verdict->pass());

  EventOutcome bad = run_event(reg, "(defthm zero-is-one (equal 0 1))", cfg);
  CHECK(bad.status == EventOutcome::Status::Rejected);
  CHECK(bad.detail.find("BoundedCheckFailed") != std::string::npos);
  CHECK(reg.find_theorem("zero-is-one") == nullptr);

  // formulas over uninterpreted funvars check as unknown but are admitted
  run_event(reg, "(defunvar ?f (*) => *)", cfg);
  EventOutcome open_thm = run_event(reg, "(defthm open (equal (?f x) (?f x)))", cfg);
  CHECK(open_thm.status == EventOutcome::Status::Admitted);
  REQUIRE(open_thm.verdict);
  CHECK(open_thm.verdict->unknown());
}

TEST_CASE("defthm-inst instantiates formulas and discharges the closure") {
  Registry reg = corpus_registry();

  EventOutcome out = run_event(
      reg, "(defthm-inst len-of-map[cc] (len-of-map[?f_?p] (?f . code-char) (?p . octetp)))");
  CHECK(out.status == EventOutcome::Status::Admitted);
  CHECK(print_term(reg.theorem("len-of-map[cc]").formula) ==
        "(equal (len (map[code-char] l)) (len l))");
  CHECK(out.pairs.size() == 3);
  CHECK(out.obligations.size() == 1);
  CHECK(out.obligations[0].discharged);

  SECTION("missing prerequisite instances are named precisely") {
    Registry fresh = registry_from(
        "(defunvar ?f (*) => *)"
        "(defunvar ?p (*) => *)"
        "(defun octetp (x) (and (natp x) (< x 256)))"
        "(defun2 all[?p] (?p) (l)"
        "  (cond ((atom l) (null l)) (t (and (?p (car l)) (all[?p] (cdr l))))))"
        "(defun2 map[?f_?p] (?f ?p) (l)"
        "  (declare (xargs :guard (all[?p] l)))"
        "  (cond ((endp l) nil)"
        "        (t (cons (?f (car l)) (map[?f_?p] (cdr l))))))"
        "(defthm len-of-map[?f_?p] (equal (len (map[?f_?p] l)) (len l)))");
    EventOutcome missing = run_event(
        fresh, "(defthm-inst lom (len-of-map[?f_?p] (?f . code-char) (?p . octetp)))");
    CHECK(missing.status == EventOutcome::Status::Rejected);
    CHECK(missing.detail.find("MissingInstance") != std::string::npos);
    CHECK(missing.detail.find("map[?f_?p]") != std::string::npos);
    CHECK(missing.detail.find("(?f . code-char)") != std::string::npos);
    CHECK(missing.detail.find("(?p . octetp)") != std::string::npos);
  }

  SECTION("keys must be funvars the theorem depends on") {
    expect_rejected(reg, "(defthm-inst bad (len-of-map[?f_?p] (?io . io)))",
                    ErrorCode::Invariant);
  }
  SECTION("the target must be a recorded theorem") {
    expect_rejected(reg, "(defthm-inst bad (no-such-theorem (?f . wrap)))",
                    ErrorCode::Malformed);
  }
}

TEST_CASE("rejected events change nothing even mid-way") {
  Registry reg = corpus_registry();
  std::string before = reg.dump();
  // the instantiated body would need (quad[?f] . fix) which is not recorded
  EventOutcome out =
      run_event(reg, "(defun-inst injective[quad-fix] (injective[quad[?f]] (?f . fix)))");
  CHECK(out.status == EventOutcome::Status::Rejected);
  CHECK(reg.dump() == before);
}

TEST_CASE("corpus replay is deterministic") {
  Registry a = corpus_registry();
  Registry b = corpus_registry();
  CHECK(a.equal(b));
  CHECK(a.dump() == b.dump());
}
