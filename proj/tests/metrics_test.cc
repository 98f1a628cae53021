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

#include "worked_scene.h"
#include "doctest.h"
#include "goalq/metrics.h"
#include "test_util.h"

namespace goalq {
namespace {

using testing::WorkedExample;

TEST_CASE("f1") {
  CHECK(F1Score({1, 2}, {2, 3}) == doctest::Approx(0.5));
  CHECK(F1Score({1, 4, 6}, {1, 4, 6}) == 1.0);
  CHECK(F1Score({}, {1}) == 0.0);
  CHECK(F1Score({1}, {}) == 0.0);
  CHECK(F1Score({}, {}) == 1.0);
}

TEST_CASE("address ratios") {
  using V = AddressVerdict;
  std::vector<V> all_perfect(4, V::kPerfect);
  auto r = ComputeAddressRatios(all_perfect);
  CHECK(r.perfect == 1.0);
  CHECK(r.correct == 1.0);

  WorkedExample ex;
  QuestionAst q = Parse(SplitTokens("is it a cylinder ?"), AttributeSpace::Ask3());
  std::vector<V> ex3 = {ClassifyAddress(ex.grouping, q, ex.scene)};
  r = ComputeAddressRatios(ex3);
  CHECK(r.perfect == 0.0);
  CHECK(r.correct == 1.0);

  std::vector<V> none(3, V::kNeither);
  r = ComputeAddressRatios(none);
  CHECK(r.perfect == 0.0);
  CHECK(r.correct == 0.0);

  std::vector<V> mixed = {V::kPerfect, V::kCorrect, V::kNeither, V::kCorrect};
  r = ComputeAddressRatios(mixed);
  CHECK(r.perfect == 0.25);
  CHECK(r.correct == 0.75);
  CHECK(r.samples == 4);
  CHECK(ComputeAddressRatios({}).samples == 0);
}

Transcript Episode(int goal, std::optional<int> prediction, int questions) {
  Transcript t;
  t.scene_id = "s";
  t.goal_id = goal;
  t.prediction = prediction;
  for (int i = 0; i < questions; ++i) {
    t.turns.push_back({"is it a cube ?", Answer::kYes, {}, {}});
  }
  return t;
}

TEST_CASE("task success and question counts") {
  std::vector<Transcript> ts = {Episode(0, 0, 2), Episode(1, 1, 4),
                                Episode(2, 2, 3), Episode(0, 1, 1),
                                Episode(1, std::nullopt, 4)};
  CHECK(TaskSuccess(ts) == doctest::Approx(0.6));
  CHECK(MeanQuestions(ts) == doctest::Approx(3.0));
  std::vector<Transcript> none = {Episode(0, std::nullopt, 4)};
  CHECK(TaskSuccess(none) == 0.0);
  std::vector<Transcript> good = {Episode(0, 0, 1), Episode(2, 2, 1)};
  CHECK(TaskSuccess(good) == 1.0);
}

TEST_CASE("vocabulary metrics") {
  auto vocab = Vocabulary::Build(AttributeSpace::Ask3());
  std::vector<std::vector<Tokens>> d = {
      {SplitTokens("is it a sphere ?"), SplitTokens("is it a red sphere ?")}};
  auto m = ComputeVocabMetrics(d, vocab);
  CHECK(m.question_mean == doctest::Approx(1.5));
  CHECK(m.dialogue_mean == doctest::Approx(1.0));

  d = {{SplitTokens("is it a cube ?")}};
  CHECK(ComputeVocabMetrics(d, vocab).question_mean == doctest::Approx(1.0));

  // Disjoint questions: the union beats either alone.
  d = {{SplitTokens("is it a red cube ?"),
        SplitTokens("is it to the left of a large sphere ?")}};
  m = ComputeVocabMetrics(d, vocab);
  CHECK(m.dialogue_mean * 2 == doctest::Approx(5.0));
  CHECK(m.dialogue_mean * 2 > 3.0);

  // Function words never count; empty dialogues are skipped.
  d = {{SplitTokens("is it a thing ?")}, {}};
  CHECK(ComputeVocabMetrics(d, vocab).question_mean == 0.0);
}

TEST_CASE("transcripts round trip") {
  Transcript t = Episode(2, 1, 2);
  t.turns[0].group_vector = {1, 2, 0};
  t.turns[0].prob = {0.25, 0.5, 0.25};
  t.turns[1].answer = Answer::kNo;
  t.reward = 0.84;
  testing::TempDir dir;
  std::vector<Transcript> ts = {t, Episode(0, std::nullopt, 0)};
  SaveTranscripts(ts, (dir.path() / "t.jsonl").string());
  auto back = LoadTranscripts((dir.path() / "t.jsonl").string());
  REQUIRE(back.size() == 2);
  CHECK(back[0].ToJson() == t.ToJson());
  CHECK(back[0].turns[0].group_vector == t.turns[0].group_vector);
  CHECK_FALSE(back[1].prediction.has_value());
  auto j = t.ToJson();
  CHECK(j["turns"][1]["answer"] == "no");
  CHECK(j["turns"][0].contains("P_o"));
}

TEST_CASE("transcript verdicts recompute from the scene") {
  WorkedExample ex;
  Transcript t;
  t.scene_id = ex.scene.scene_id;
  t.turns.push_back({"is it in front of a green sphere ?", Answer::kYes, {1, 0, 2}, {}});
  t.turns.push_back({"is it a cylinder ?", Answer::kYes, {1, 0, 2}, {}});
  t.turns.push_back({"cube cube", Answer::kNo, {1, 0, 2}, {}});
  t.turns.push_back({"is it a cube ?", Answer::kNo, {}, {}});
  t.turns.push_back({"is it a cube ?", Answer::kNo, {0, 0, 2}, {}});
  std::vector<Transcript> ts = {t};
  std::map<std::string, const Scene*> scenes = {{ex.scene.scene_id, &ex.scene}};
  auto v = TranscriptVerdicts(ts, scenes, AttributeSpace::Ask3());
  REQUIRE(v.size() == 3);
  CHECK(v[0] == AddressVerdict::kPerfect);
  CHECK(v[1] == AddressVerdict::kCorrect);
  CHECK(v[2] == AddressVerdict::kNeither);

  std::vector<int> gv = {1, 0, 2, 1};
  CHECK(GroupingFromVector(gv, ex.scene) == ex.grouping);
}

}  // namespace
}  // namespace goalq
