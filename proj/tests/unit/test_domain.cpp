#include <doctest.h>

#include "taaco/domain.hpp"
#include "taaco/rng.hpp"
#include "test_util.hpp"

using namespace taaco;
using taaco::testing::make_task;

namespace {

StateSpace space8() {
  return StateSpace{{"weekend", "user is asleep", "user is close by", "guests are present",
                     "user is in a rush", "adverse weather", "daytime", "house is tidy"}};
}

}  // namespace

TEST_CASE("validate_task normalizes whitespace and deduplicates lists") {
  auto t = validate_task(make_task("t1", "Watering  plants", "Maintaining house plants",
                                   {"Water jug", "House plants"}, {"Living Room"}));
  CHECK(t.action == "Watering plants");
  CHECK(t.activity == "Maintaining house plants");
  CHECK(t.objects == std::vector<std::string>{"Water jug", "House plants"});
  CHECK(t.locations == std::vector<std::string>{"Living Room"});
}

TEST_CASE("validate_task rejects empty action and activity") {
  CHECK_THROWS_AS(validate_task(make_task("t", "", "cleaning", {}, {})), Error);
  try {
    validate_task(make_task("t", "  ", "cleaning", {}, {}));
    FAIL("expected EmptyAction");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyAction);
  }
  try {
    validate_task(make_task("t", "dusting", " ", {}, {}));
    FAIL("expected EmptyActivity");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyActivity);
  }
}

TEST_CASE("validate_task flags case-insensitive duplicates") {
  try {
    validate_task(make_task("t", "cooking", "meal prep", {"pan", "Pan"}, {}));
    FAIL("expected DuplicateComponent");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DuplicateComponent);
    CHECK(std::string(e.what()).find("pan") != std::string::npos);
  }
}

TEST_CASE("normalization is idempotent") {
  Rng rng(11);
  const char* raw[] = {" A  b ", "Mixed   CASE thing", "x", " trailing ", "a b c d"};
  for (const char* action : raw) {
    auto t1 = validate_task(make_task("t", action, "Act  ivity", {" obj  1 ", "obj 2"}, {"room"}));
    auto t2 = validate_task(t1);
    CHECK(t1.action == t2.action);
    CHECK(t1.activity == t2.activity);
    CHECK(t1.objects == t2.objects);
    CHECK(t1.locations == t2.locations);
  }
}

TEST_CASE("adaptation labels parse case-insensitively") {
  CHECK(parse_adaptation_label("do_now") == AdaptationLabel::DoNow);
  CHECK(parse_adaptation_label("No_Action") == AdaptationLabel::NoAction);
  CHECK(parse_adaptation_label(" REMIND ") == AdaptationLabel::Remind);
  try {
    parse_adaptation_label("maybe");
    FAIL("expected UnknownLabel");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownLabel);
  }
}

TEST_CASE("state_satisfies matches bindings") {
  StateSpace space = space8();
  StateVector s;
  s.values.assign(space.size(), false);
  s.values[0] = true;  // weekend

  StateConstraint c_true;
  c_true.bindings["weekend"] = true;
  CHECK(state_satisfies(space, s, c_true));

  StateConstraint c_false;
  c_false.bindings["weekend"] = false;
  CHECK_FALSE(state_satisfies(space, s, c_false));

  CHECK(state_satisfies(space, s, StateConstraint{}));

  StateConstraint unknown;
  unknown.bindings["lunar phase"] = true;
  CHECK_THROWS_AS(state_satisfies(space, s, unknown), Error);
}

TEST_CASE("a constraint and its one-flip negation never both hold") {
  StateSpace space = space8();
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    StateVector s;
    s.values.resize(space.size());
    for (size_t i = 0; i < space.size(); ++i) s.values[i] = rng.coin();
    StateConstraint c;
    int bindings = 1 + static_cast<int>(rng.uniform_int(3));
    for (int b = 0; b < bindings; ++b) {
      c.bindings[space.variables[rng.uniform_int(space.size())]] = rng.coin();
    }
    StateConstraint flipped = c;
    auto it = flipped.bindings.begin();
    std::advance(it, static_cast<long>(rng.uniform_int(flipped.bindings.size())));
    it->second = !it->second;
    CHECK_FALSE((state_satisfies(space, s, c) && state_satisfies(space, s, flipped)));
  }
}

TEST_CASE("explanation items validate against their task") {
  StateSpace space = space8();
  FeedbackSample sample;
  sample.task = validate_task(make_task("t", "turning on the stove", "Preparing a Meal",
                                        {"Stove", "Stove knobs"}, {"Kitchen"}));
  sample.adaptation = AdaptationLabel::NoAction;
  sample.explanation = {{ExplanationItem::for_component("stove", ComponentType::Object,
                                                        "involves an open flame")}};
  CHECK_NOTHROW(validate_feedback(sample, space));

  sample.explanation = {{ExplanationItem::for_component("blender", ComponentType::Object,
                                                        "involves an open flame")}};
  try {
    validate_feedback(sample, space);
    FAIL("expected DanglingExplanation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DanglingExplanation);
  }

  sample.explanation = {{ExplanationItem::for_state("lunar phase")}};
  CHECK_THROWS_AS(validate_feedback(sample, space), Error);
}

TEST_CASE("explanation rendering follows the standard phrasings") {
  auto item = ExplanationItem::for_component("electric drill", ComponentType::Object,
                                             "can easily hurt someone without intending to");
  CHECK(render_explanation(item) ==
        "electric drill is an object which can easily hurt someone without intending to");
  auto bare = ExplanationItem::for_component("electric drill", ComponentType::Object, "");
  CHECK(render_explanation(bare) == "Object electric drill is involved");
  CHECK(render_explanation(ExplanationItem::for_state("user is asleep")) == "user is asleep");
}
