#include <doctest.h>

#include "taaco/scoring.hpp"
#include "test_util.hpp"

using namespace taaco;
using taaco::testing::make_task;

namespace {

ConceptVocabulary small_vocab() {
  ConceptVocabulary vocab;
  for (int i = 0; i < 6; ++i) {
    vocab.add(ComponentType::Action, "action concept " + std::to_string(i));
  }
  for (int i = 0; i < 5; ++i) {
    vocab.add(ComponentType::Activity, "activity concept " + std::to_string(i));
  }
  for (int i = 0; i < 7; ++i) {
    vocab.add(ComponentType::Object, "object concept " + std::to_string(i));
  }
  for (int i = 0; i < 4; ++i) {
    vocab.add(ComponentType::Location, "location concept " + std::to_string(i));
  }
  return vocab;
}

}  // namespace

TEST_CASE("rescale_score maps 1..10 onto [0,1]") {
  CHECK(rescale_score(1) == doctest::Approx(0.0));
  CHECK(rescale_score(10) == doctest::Approx(1.0));
  CHECK(rescale_score(5) == doctest::Approx(4.0 / 9.0));
  // clamping policy
  CHECK(rescale_score(0) == doctest::Approx(0.0));
  CHECK(rescale_score(14) == doctest::Approx(1.0));
  double prev = -1.0;
  for (int raw = 1; raw <= 10; ++raw) {
    double m = rescale_score(raw);
    CHECK(m > prev);
    prev = m;
  }
}

TEST_CASE("score_pair prefers cache over the client") {
  ScoreCache cache;
  cache.put({"oracle-v1", ComponentType::Object, "electric drill",
             "can easily hurt someone without intending to", 9});
  ScriptedClient client("oracle-v1", std::vector<std::string>{"3"});
  Concept concept_def{"can easily hurt someone without intending to", ComponentType::Object, false};
  int raw = score_pair("Electric  Drill", ComponentType::Object, concept_def, client, cache);
  CHECK(raw == 9);
  CHECK(client.calls() == 0);
}

TEST_CASE("score_pair parses the first integer and caches it") {
  ScoreCache cache;
  ScriptedClient client("m1", std::vector<std::string>{"Score: 7"});
  Concept concept_def{"involves an open flame", ComponentType::Object, false};
  CHECK(score_pair("stove", ComponentType::Object, concept_def, client, cache) == 7);
  CHECK(client.calls() == 1);
  CHECK(cache.lookup("m1", ComponentType::Object, "stove", "involves an open flame") == 7);
  // second call is served from the cache
  CHECK(score_pair("stove", ComponentType::Object, concept_def, client, cache) == 7);
  CHECK(client.calls() == 1);
}

TEST_CASE("unparseable responses retry once then default to 1") {
  ScoreCache cache;
  ScriptedClient client("m1", std::vector<std::string>{"I cannot judge", "still no idea"});
  Concept concept_def{"is fragile", ComponentType::Object, false};
  CHECK(score_pair("rock", ComponentType::Object, concept_def, client, cache) == 1);
  CHECK(client.calls() == 2);
  CHECK(cache.lookup("m1", ComponentType::Object, "rock", "is fragile") == 1);
}

TEST_CASE("transport errors surface in strict mode and degrade in lenient mode") {
  ScoreCache cache;
  ReplayClient replay("m1");
  Concept concept_def{"is fragile", ComponentType::Object, false};
  CHECK_THROWS_AS(score_pair("rock", ComponentType::Object, concept_def, replay, cache), Error);
  CHECK(score_pair("rock", ComponentType::Object, concept_def, replay, cache, ScoreMode::Lenient) ==
        1);
  // lenient transport failures are not recorded
  CHECK(cache.size() == 0);
}

TEST_CASE("score_pair rejects a type/concept mismatch") {
  ScoreCache cache;
  ScriptedClient client("m1", std::vector<std::string>{"5"});
  Concept concept_def{"is fragile", ComponentType::Object, false};
  CHECK_THROWS_AS(score_pair("kitchen", ComponentType::Location, concept_def, client, cache), Error);
}

TEST_CASE("build_representation enumerates instances x same-type concepts in order") {
  auto vocab = small_vocab();
  auto task = validate_task(make_task("t", "mixing batter", "baking",
                                      {"bowl", "spoon", "whisk"}, {"kitchen"}));
  ScriptedClient client("m1", [](const std::string&) { return std::string("4"); });
  ScoreCache cache;
  auto rep = build_representation(task, vocab, client, cache);
  // 6 + 5 + 3*7 + 4
  CHECK(rep.entries.size() == 36);
  CHECK(rep.entries[0].type == ComponentType::Action);
  CHECK(rep.entries[0].component == "mixing batter");
  CHECK(rep.entries[0].concept_text == "action concept 0");
  CHECK(rep.entries[6].type == ComponentType::Activity);
  CHECK(rep.entries[11].type == ComponentType::Object);
  CHECK(rep.entries[11].component == "bowl");
  CHECK(rep.entries.back().type == ComponentType::Location);
  CHECK(rep.entries.back().concept_text == "location concept 3");
  for (const auto& e : rep.entries) CHECK(e.match == doctest::Approx(3.0 / 9.0));

  // warm cache: a second pass issues zero client calls and is identical
  int calls_before = client.calls();
  auto rep2 = build_representation(task, vocab, client, cache);
  CHECK(client.calls() == calls_before);
  REQUIRE(rep2.entries.size() == rep.entries.size());
  for (size_t i = 0; i < rep.entries.size(); ++i) {
    CHECK(rep.entries[i].component == rep2.entries[i].component);
    CHECK(rep.entries[i].concept_text == rep2.entries[i].concept_text);
    CHECK(rep.entries[i].match == rep2.entries[i].match);
  }
}

TEST_CASE("empty object list contributes no object entries") {
  auto vocab = small_vocab();
  auto task = validate_task(make_task("t", "a", "b", {}, {"kitchen"}));
  ScriptedClient client("m1", [](const std::string&) { return std::string("2"); });
  ScoreCache cache;
  auto rep = build_representation(task, vocab, client, cache);
  CHECK(rep.entries.size() == 6 + 5 + 0 + 4);
}

TEST_CASE("apply_oracle maximizes cited entries and nothing else") {
  auto vocab = small_vocab();
  ScoredRepresentation rep;
  rep.entries = {{"electric drill", ComponentType::Object, "object concept 2", 0.3},
                 {"electric drill", ComponentType::Object, "object concept 3", 0.5}};
  auto item = ExplanationItem::for_component("Electric Drill", ComponentType::Object,
                                             "object concept 2");
  auto out = apply_oracle(rep, {item}, vocab);
  CHECK(out.entries[0].match == doctest::Approx(1.0));
  CHECK(out.entries[1].match == doctest::Approx(0.5));

  // no items: identity
  auto same = apply_oracle(rep, {}, vocab);
  CHECK(same.entries[0].match == doctest::Approx(0.3));

  // never decreases
  for (size_t i = 0; i < rep.entries.size(); ++i) {
    CHECK(out.entries[i].match >= rep.entries[i].match);
  }

  // unknown concept
  auto missing = ExplanationItem::for_component("electric drill", ComponentType::Object,
                                                "not a known concept");
  try {
    apply_oracle(rep, {missing}, vocab);
    FAIL("expected MissingConcept");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingConcept);
  }

  // state items are ignored
  auto state_item = ExplanationItem::for_state("weekend");
  auto untouched = apply_oracle(rep, {state_item}, vocab);
  CHECK(untouched.entries[0].match == doctest::Approx(0.3));
}

TEST_CASE("extend_vocabulary appends unseen concepts once") {
  auto vocab = small_vocab();
  size_t before = vocab.total();

  FeedbackSample sample;
  sample.task = validate_task(
      make_task("t", "arranging pots and pans", "organizing the kitchen", {"pots"}, {"kitchen"}));
  sample.adaptation = AdaptationLabel::DoLater;
  sample.explanation = {
      {ExplanationItem::for_component("arranging pots and pans", ComponentType::Action,
                                      "makes a lot of noise")}};

  auto added = extend_vocabulary(vocab, {sample, sample});
  CHECK(added.size() == 1);
  CHECK(added[0].text == "makes a lot of noise");
  CHECK(added[0].user_added);
  CHECK(vocab.total() == before + 1);
  CHECK(vocab.of_type(ComponentType::Action).back().text == "makes a lot of noise");

  // already present: no-op
  auto again = extend_vocabulary(vocab, {sample});
  CHECK(again.empty());
  CHECK(vocab.total() == before + 1);
}

TEST_CASE("score cache round-trips through its file") {
  taaco::testing::TempDir dir("score-cache");
  std::string path = dir.file("cache.jsonl");
  {
    ScoreCache cache = ScoreCache::open(path);
    cache.put({"m1", ComponentType::Action, "Mixing  Batter", "Is Tiring", 6});
    cache.put({"m1", ComponentType::Object, "bowl", "is fragile", 2});
    cache.put({"m1", ComponentType::Object, "bowl", "is fragile", 9});  // dup keeps first
  }
  ScoreCache loaded = ScoreCache::open(path);
  CHECK(loaded.size() == 2);
  CHECK(loaded.lookup("m1", ComponentType::Action, "mixing batter", "is tiring") == 6);
  CHECK(loaded.lookup("m1", ComponentType::Object, "bowl", "is fragile") == 2);
  CHECK_FALSE(loaded.lookup("m2", ComponentType::Object, "bowl", "is fragile"));
}
