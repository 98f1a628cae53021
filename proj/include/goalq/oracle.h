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

#ifndef GOALQ_ORACLE_H_
#define GOALQ_ORACLE_H_

#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <vector>

#include "goalq/language.h"
#include "goalq/scene.h"

namespace goalq {

using IdSet = std::set<int>;

enum class Answer { kNo, kYes };

// One dialogue turn. `question` is empty when the emitted tokens did not
// parse; such a turn is answered NO and carries no information.
struct QaPair {
  std::optional<QuestionAst> question;
  Answer answer = Answer::kNo;
};

bool SatisfiesDescriptor(const SceneObject& obj, const Descriptor& d);

// Relational questions hold when some *other* object satisfying the
// descriptor stands in the relation to `obj`.
bool Matches(const SceneObject& obj, const QuestionAst& ast,
             const Scene& scene);

Answer AnswerQuestion(const QuestionAst& ast, const GameInstance& game);
Answer AnswerQuestion(const std::optional<QuestionAst>& ast,
                      const GameInstance& game);

// {o : Matches(o, ast)}.
IdSet MatchSet(const QuestionAst& ast, const Scene& scene);
// Objects consistent with (ast, answer): the match set for YES, its
// complement for NO.
IdSet MatchedSet(const QuestionAst& ast, Answer answer, const Scene& scene);
IdSet MatchedSet(const std::optional<QuestionAst>& ast, Answer answer,
                 const Scene& scene);

// Intersection of matched sets over all parsed turns; unparsed turns are
// skipped so the goal is never eliminated.
IdSet CandidateSet(std::span<const QaPair> dialogue, const Scene& scene);

IdSet AllIds(const Scene& scene);

struct Grouping {
  IdSet targets;
  IdSet distracters;
  IdSet masked;

  // Throws std::invalid_argument unless the sets partition the scene ids.
  void Validate(const Scene& scene) const;
  bool operator==(const Grouping&) const = default;
};

enum class AddressVerdict { kPerfect, kCorrect, kNeither };
std::string_view VerdictName(AddressVerdict verdict);

// Whether `ast` separates targets from distracters, and whether the target
// side stays clear of masked objects. Throws std::invalid_argument when
// there are no targets.
AddressVerdict ClassifyAddress(const Grouping& grouping, const QuestionAst& ast,
                               const Scene& scene);

// The enumerated question inventory for one grammar.
struct QuestionBank {
  AttributeSpace space;
  GrammarOptions options;
  std::vector<QuestionAst> asts;

  static QuestionBank Build(const AttributeSpace& space,
                            const GrammarOptions& options = {});
};

class NoInformativeQuestion : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Questions whose match set splits `candidates` into two non-empty parts.
std::vector<const QuestionAst*> InformativeQuestions(const QuestionBank& bank,
                                                     const Scene& scene,
                                                     const IdSet& candidates);

struct GtQuestion {
  QuestionAst ast;
  Grouping grouping;
};

// Uniform draw among the informative questions. Targets are the candidates
// inside the match set, distracters the remaining candidates, masked all
// non-candidates.
GtQuestion SampleGtQuestion(const QuestionBank& bank, const Scene& scene,
                            const IdSet& candidates, Rng& rng);

}  // namespace goalq

#endif  // GOALQ_ORACLE_H_
