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

#include "goalq/oracle.h"

#include <algorithm>

namespace goalq {
namespace {

bool InRelation(const SceneObject& subject, const SceneObject& referent,
                Relation relation) {
  switch (relation) {
    case Relation::kLeft: return subject.position.x < referent.position.x;
    case Relation::kRight: return subject.position.x > referent.position.x;
    case Relation::kFront: return subject.position.y > referent.position.y;
    case Relation::kBehind: return subject.position.y < referent.position.y;
  }
  return false;
}

bool Subset(const IdSet& a, const IdSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

bool Disjoint(const IdSet& a, const IdSet& b) {
  for (int x : a) {
    if (b.count(x)) return false;
  }
  return true;
}

}  // namespace

bool SatisfiesDescriptor(const SceneObject& obj, const Descriptor& d) {
  if (!d.is_wildcard_shape() && obj.shape != d.shape) return false;
  if (d.color && obj.color != *d.color) return false;
  if (d.size && obj.size != *d.size) return false;
  if (d.material && obj.material != *d.material) return false;
  return true;
}

bool Matches(const SceneObject& obj, const QuestionAst& ast,
             const Scene& scene) {
  if (ast.kind == QuestionKind::kAttribute) {
    return SatisfiesDescriptor(obj, ast.descriptor);
  }
  for (const auto& referent : scene.objects) {
    if (referent.id == obj.id) continue;
    if (SatisfiesDescriptor(referent, ast.descriptor) &&
        InRelation(obj, referent, *ast.relation)) {
      return true;
    }
  }
  return false;
}

Answer AnswerQuestion(const QuestionAst& ast, const GameInstance& game) {
  const Scene& scene = *game.scene;
  return Matches(scene.objects.at(game.goal_id), ast, scene) ? Answer::kYes
                                                             : Answer::kNo;
}

Answer AnswerQuestion(const std::optional<QuestionAst>& ast,
                      const GameInstance& game) {
  return ast ? AnswerQuestion(*ast, game) : Answer::kNo;
}

IdSet MatchSet(const QuestionAst& ast, const Scene& scene) {
  IdSet out;
  for (const auto& o : scene.objects) {
    if (Matches(o, ast, scene)) out.insert(o.id);
  }
  return out;
}

IdSet MatchedSet(const QuestionAst& ast, Answer answer, const Scene& scene) {
  IdSet out;
  for (const auto& o : scene.objects) {
    if (Matches(o, ast, scene) == (answer == Answer::kYes)) out.insert(o.id);
  }
  return out;
}

IdSet MatchedSet(const std::optional<QuestionAst>& ast, Answer answer,
                 const Scene& scene) {
  if (!ast) return {};
  return MatchedSet(*ast, answer, scene);
}

IdSet AllIds(const Scene& scene) {
  IdSet out;
  for (const auto& o : scene.objects) out.insert(o.id);
  return out;
}

IdSet CandidateSet(std::span<const QaPair> dialogue, const Scene& scene) {
  IdSet candidates = AllIds(scene);
  for (const auto& qa : dialogue) {
    if (!qa.question) continue;
    IdSet matched = MatchedSet(*qa.question, qa.answer, scene);
    IdSet next;
    std::set_intersection(candidates.begin(), candidates.end(),
                          matched.begin(), matched.end(),
                          std::inserter(next, next.end()));
    candidates = std::move(next);
  }
  return candidates;
}

void Grouping::Validate(const Scene& scene) const {
  IdSet all;
  size_t total = targets.size() + distracters.size() + masked.size();
  for (const IdSet* s : {&targets, &distracters, &masked}) {
    all.insert(s->begin(), s->end());
  }
  if (all.size() != total || all != AllIds(scene)) {
    throw std::invalid_argument(
        "grouping must partition the scene's object ids");
  }
}

std::string_view VerdictName(AddressVerdict verdict) {
  switch (verdict) {
    case AddressVerdict::kPerfect: return "perfect";
    case AddressVerdict::kCorrect: return "correct";
    case AddressVerdict::kNeither: return "neither";
  }
  return "?";
}

AddressVerdict ClassifyAddress(const Grouping& grouping, const QuestionAst& ast,
                               const Scene& scene) {
  if (grouping.targets.empty()) {
    throw std::invalid_argument("address classification needs targets");
  }
  IdSet match = MatchSet(ast, scene);
  IdSet target_side;
  if (Subset(grouping.targets, match) && Disjoint(grouping.distracters, match)) {
    target_side = std::move(match);
  } else if (Disjoint(grouping.targets, match) &&
             Subset(grouping.distracters, match)) {
    for (const auto& o : scene.objects) {
      if (!match.count(o.id)) target_side.insert(o.id);
    }
  } else {
    return AddressVerdict::kNeither;
  }
  return Disjoint(target_side, grouping.masked) ? AddressVerdict::kPerfect
                                                : AddressVerdict::kCorrect;
}

QuestionBank QuestionBank::Build(const AttributeSpace& space,
                                 const GrammarOptions& options) {
  return {space, options, EnumerateAsts(space, options)};
}

std::vector<const QuestionAst*> InformativeQuestions(const QuestionBank& bank,
                                                     const Scene& scene,
                                                     const IdSet& candidates) {
  std::vector<const QuestionAst*> out;
  for (const auto& ast : bank.asts) {
    size_t inside = 0;
    for (int id : candidates) {
      inside += Matches(scene.objects.at(id), ast, scene) ? 1 : 0;
    }
    if (inside > 0 && inside < candidates.size()) out.push_back(&ast);
  }
  return out;
}

GtQuestion SampleGtQuestion(const QuestionBank& bank, const Scene& scene,
                            const IdSet& candidates, Rng& rng) {
  if (candidates.size() < 2) {
    throw std::invalid_argument("need at least two candidates to split");
  }
  auto informative = InformativeQuestions(bank, scene, candidates);
  if (informative.empty()) {
    throw NoInformativeQuestion("no question splits the candidates of scene " +
                                scene.scene_id);
  }
  std::uniform_int_distribution<size_t> pick(0, informative.size() - 1);
  GtQuestion gt{*informative[pick(rng)], {}};
  IdSet match = MatchSet(gt.ast, scene);
  for (const auto& o : scene.objects) {
    if (!candidates.count(o.id)) {
      gt.grouping.masked.insert(o.id);
    } else if (match.count(o.id)) {
      gt.grouping.targets.insert(o.id);
    } else {
      gt.grouping.distracters.insert(o.id);
    }
  }
  return gt;
}

}  // namespace goalq
