// Copyright 2026 The goalq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>

#include "worked_scene.h"
#include "brute_force_oracle.h"
#include "doctest.h"
#include "goalq/dataset.h"
#include "goalq/oracle.h"
#include "test_util.h"

namespace goalq {
namespace {

using testing::WorkedExample;
using testing::BruteForceOracle;
using testing::MakeObject;
using testing::MakeScene;

QuestionAst Q(std::string_view text, const AttributeSpace& space =
                                         AttributeSpace::Ask4()) {
  return Parse(SplitTokens(text), space);
}

TEST_CASE("attribute and relational matching") {
  Scene s = MakeScene({MakeObject(0, "cube", "red", 2.0, 0.0),
                       MakeObject(1, "sphere", "blue", 1.0, 0.0)});
  CHECK(Matches(s.objects[0], Q("is it a red cube ?"), s));
  CHECK_FALSE(Matches(s.objects[1], Q("is it a red cube ?"), s));
  CHECK(Matches(s.objects[1], Q("is it to the left of a red cube ?"), s));
  // The only red cube cannot be left of itself.
  CHECK_FALSE(Matches(s.objects[0], Q("is it to the left of a red cube ?"), s));
  CHECK(Matches(s.objects[0], Q("is it to the right of a blue thing ?"), s));
}

TEST_CASE("answers follow the goal object") {
  Scene s = MakeScene({MakeObject(0, "sphere", "red", 0.0, 0.0, "large", "metal"),
                       MakeObject(1, "cube", "red", 1.5, 0.0),
                       MakeObject(2, "cube", "blue", -1.5, 0.0)});
  GameInstance g0{&s, 0}, g1{&s, 1}, g2{&s, 2};
  CHECK(AnswerQuestion(Q("is it a sphere ?"), g0) == Answer::kYes);
  CHECK(AnswerQuestion(Q("is it a sphere ?"), g1) == Answer::kNo);
  CHECK(AnswerQuestion(Q("is it to the left of a red cube ?"), g0) == Answer::kYes);
  CHECK(AnswerQuestion(Q("is it to the left of a red cube ?"), g2) == Answer::kYes);
  CHECK(AnswerQuestion(Q("is it to the left of a red cube ?"), g1) == Answer::kNo);
  CHECK(AnswerQuestion(std::optional<QuestionAst>{}, g0) == Answer::kNo);
}

TEST_CASE("matched sets") {
  Scene s = MakeScene({MakeObject(0, "cube", "red", -1.0, 0.0),
                       MakeObject(1, "cube", "blue", 0.0, 1.0),
                       MakeObject(2, "sphere", "red", 1.0, 0.0)});
  CHECK(MatchedSet(Q("is it a cube ?"), Answer::kYes, s) == IdSet{0, 1});
  CHECK(MatchedSet(Q("is it a cube ?"), Answer::kNo, s) == IdSet{2});
  CHECK(MatchedSet(std::optional<QuestionAst>{}, Answer::kNo, s).empty());

  WorkedExample ex;
  CHECK(MatchedSet(Q("is it a cylinder ?"), Answer::kYes, ex.scene) ==
        IdSet{ex.green_cylinder, ex.red_cylinder});
}

TEST_CASE("candidate sets narrow monotonically and keep the goal") {
  Scene s = MakeScene({MakeObject(0, "cube", "red", -2.0, 0.0),
                       MakeObject(1, "cube", "blue", -1.0, 1.0),
                       MakeObject(2, "sphere", "red", 1.0, 0.5),
                       MakeObject(3, "cube", "red", 2.0, -1.0),
                       MakeObject(4, "cylinder", "green", 0.0, -2.0)});
  CHECK(CandidateSet({}, s) == IdSet{0, 1, 2, 3, 4});
  GameInstance game{&s, 3};
  std::vector<QaPair> dialogue;
  auto ask = [&](std::string_view q) {
    QuestionAst ast = Q(q);
    dialogue.push_back({ast, AnswerQuestion(ast, game)});
  };
  ask("is it a cube ?");
  CHECK(CandidateSet(dialogue, s) == IdSet{0, 1, 3});
  ask("is it to the right of a sphere ?");
  CHECK(CandidateSet(dialogue, s) == IdSet{3});
  // Brute-force intersection.
  IdSet expected;
  for (int id = 0; id < s.size(); ++id) {
    bool all = true;
    for (const auto& qa : dialogue) {
      BruteForceOracle bf(Realize(*qa.question));
      all &= bf.Holds(s.objects[id], s) == (qa.answer == Answer::kYes);
    }
    if (all) expected.insert(id);
  }
  CHECK(CandidateSet(dialogue, s) == expected);
  // Unparsed turns carry no information.
  dialogue.push_back({std::nullopt, Answer::kNo});
  CHECK(CandidateSet(dialogue, s) == IdSet{3});
}

TEST_CASE("address verdicts on the worked scene") {
  WorkedExample ex;
  auto verdict = [&](std::string_view q) {
    return ClassifyAddress(ex.grouping, Q(q), ex.scene);
  };
  CHECK(verdict("is it in front of a green sphere ?") == AddressVerdict::kPerfect);
  CHECK(verdict("is it to the left of a green sphere ?") == AddressVerdict::kCorrect);
  CHECK(verdict("is it a cylinder ?") == AddressVerdict::kCorrect);
  CHECK(verdict("is it a green cylinder ?") == AddressVerdict::kPerfect);
  CHECK(verdict("is it a green thing ?") == AddressVerdict::kNeither);
  // Distracter-side questions are judged by the complement.
  CHECK(verdict("is it a sphere ?") == AddressVerdict::kCorrect);
  CHECK(verdict("is it a red thing ?") == AddressVerdict::kNeither);

  Grouping empty = ex.grouping;
  empty.targets.clear();
  CHECK_THROWS_AS(ClassifyAddress(empty, Q("is it a cube ?"), ex.scene),
                  std::invalid_argument);
}

TEST_CASE("address verdicts are symmetric under negation") {
  DatasetConfig c = DatasetConfig::ForName("ask3");
  c.min_objects = 3;
  c.max_objects = 6;
  c.duplicate_pressure = 0.5;
  auto bank = QuestionBank::Build(c.space);
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Scene s = GenerateScene(c, rng);
    Grouping g;
    std::uniform_int_distribution<int> role(0, 2);
    for (const auto& o : s.objects) {
      int r = role(rng);
      (r == 0 ? g.targets : r == 1 ? g.distracters : g.masked).insert(o.id);
    }
    if (g.targets.empty()) {
      g.targets.insert(0);
      g.distracters.erase(0);
      g.masked.erase(0);
    }
    for (size_t i = 0; i < bank.asts.size(); i += 7) {
      const QuestionAst& ast = bank.asts[i];
      AddressVerdict v = ClassifyAddress(g, ast, s);
      IdSet yes = MatchedSet(ast, Answer::kYes, s);
      IdSet no = MatchedSet(ast, Answer::kNo, s);
      // Partition.
      CHECK(yes.size() + no.size() == static_cast<size_t>(s.size()));
      for (int id : yes) CHECK(no.count(id) == 0);
      // Re-judging with the complemented match set gives the same verdict:
      // the target side is whichever set holds the targets.
      bool sep_yes = std::includes(yes.begin(), yes.end(), g.targets.begin(),
                                   g.targets.end()) &&
                     std::includes(no.begin(), no.end(), g.distracters.begin(),
                                   g.distracters.end());
      bool sep_no = std::includes(no.begin(), no.end(), g.targets.begin(),
                                  g.targets.end()) &&
                    std::includes(yes.begin(), yes.end(), g.distracters.begin(),
                                  g.distracters.end());
      if (!sep_yes && !sep_no) {
        CHECK(v == AddressVerdict::kNeither);
        continue;
      }
      const IdSet& side = sep_yes ? yes : no;
      bool clean = true;
      for (int m : g.masked) clean &= side.count(m) == 0;
      CHECK(v == (clean ? AddressVerdict::kPerfect : AddressVerdict::kCorrect));
    }
  }
}

TEST_CASE("ground-truth questions split the candidates") {
  auto bank = QuestionBank::Build(AttributeSpace::Ask3());
  Scene s = MakeScene({MakeObject(0, "cube", "red", -1.0, 0.0),
                       MakeObject(1, "cube", "blue", 1.0, 0.5),
                       MakeObject(2, "sphere", "green", 0.0, -1.0)});
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    GtQuestion gt = SampleGtQuestion(bank, s, {0, 1}, rng);
    IdSet match = MatchSet(gt.ast, s);
    CHECK(match.count(0) != match.count(1));
    CHECK(gt.ast != QuestionAst::Attribute({std::nullopt, std::nullopt,
                                            std::nullopt, "cube"}));
    CHECK(gt.grouping.masked == IdSet{2});
    CHECK(gt.grouping.targets.size() == 1);
    CHECK(gt.grouping.distracters.size() == 1);
    gt.grouping.Validate(s);
  }
  CHECK_THROWS_AS(SampleGtQuestion(bank, s, {0}, rng), std::invalid_argument);
}

TEST_CASE("identical objects can only be split by relations") {
  auto bank = QuestionBank::Build(AttributeSpace::Ask3());
  Scene s = MakeScene({MakeObject(0, "cube", "red", -1.0, 0.0),
                       MakeObject(1, "cube", "red", 1.0, 0.5),
                       MakeObject(2, "sphere", "green", 0.0, -1.0)});
  auto informative = InformativeQuestions(bank, s, {0, 1});
  CHECK_FALSE(informative.empty());
  for (const auto* ast : informative) CHECK(ast->kind == QuestionKind::kRelational);
  // Agrees with brute-force enumeration.
  size_t expected = 0;
  for (const auto& ast : bank.asts) {
    BruteForceOracle bf(Realize(ast));
    expected += bf.Holds(s.objects[0], s) != bf.Holds(s.objects[1], s);
  }
  CHECK(informative.size() == expected);

  GrammarOptions no_rel{.allow_relations = false};
  auto flat = QuestionBank::Build(AttributeSpace::Ask3(), no_rel);
  Rng rng(2);
  CHECK_THROWS_AS(SampleGtQuestion(flat, s, {0, 1}, rng), NoInformativeQuestion);
}

TEST_CASE("oracle agrees with the brute-force evaluator") {
  DatasetConfig c = DatasetConfig::ForName("ask4");
  c.min_objects = 3;
  c.max_objects = 5;
  c.duplicate_pressure = 0.6;
  auto bank = QuestionBank::Build(c.space);
  Rng rng(17);
  int mismatches = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Scene s = GenerateScene(c, rng);
    for (const auto& ast : bank.asts) {
      BruteForceOracle bf(Realize(ast));
      for (const auto& o : s.objects) {
        mismatches += Matches(o, ast, s) != bf.Holds(o, s);
        GameInstance g{&s, o.id};
        mismatches += (AnswerQuestion(ast, g) == Answer::kYes) != bf.Holds(o, s);
      }
      mismatches += MatchedSet(ast, Answer::kYes, s) != bf.Matched(s, true);
      mismatches += MatchedSet(ast, Answer::kNo, s) != bf.Matched(s, false);
    }
  }
  CHECK(mismatches == 0);
}

}  // namespace
}  // namespace goalq
