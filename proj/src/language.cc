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

#include "goalq/language.h"

#include <algorithm>
#include <set>
#include <sstream>

namespace goalq {
namespace {

std::vector<std::string> RelationWords(Relation r) {
  switch (r) {
    case Relation::kLeft: return {"to", "the", "left", "of", "a"};
    case Relation::kRight: return {"to", "the", "right", "of", "a"};
    case Relation::kFront: return {"in", "front", "of", "a"};
    case Relation::kBehind: return {"behind", "a"};
  }
  return {};
}

const std::vector<std::string> kFunctionWords = {"?",  "a",  "in",  "is",
                                                 "it", "of", "the", "to"};
const std::vector<std::string> kRelationLexicon = {"behind", "front", "left",
                                                   "right"};

class Parser {
 public:
  Parser(std::span<const std::string> tokens, const AttributeSpace& space,
         const GrammarOptions& options)
      : tokens_(tokens), space_(space), options_(options) {}

  QuestionAst Run() {
    Expect("is");
    Expect("it");
    QuestionAst ast;
    if (Peek() == "a") {
      ++pos_;
      ast.kind = QuestionKind::kAttribute;
    } else {
      if (!options_.allow_relations) Fail();
      ast.kind = QuestionKind::kRelational;
      ast.relation = ParseRelation();
    }
    ast.descriptor = ParseDescriptor();
    Expect("?");
    if (pos_ < tokens_.size() && tokens_[pos_] == kEos) ++pos_;
    if (pos_ != tokens_.size()) Fail();
    return ast;
  }

 private:
  std::string_view Peek() const {
    return pos_ < tokens_.size() ? std::string_view(tokens_[pos_])
                                 : std::string_view();
  }
  [[noreturn]] void Fail() const {
    throw Unparseable(Tokens(tokens_.begin(), tokens_.end()), pos_);
  }
  void Expect(std::string_view word) {
    if (Peek() != word) Fail();
    ++pos_;
  }

  Relation ParseRelation() {
    Relation r;
    if (Peek() == "to") {
      if (pos_ + 2 >= tokens_.size() || tokens_[pos_ + 1] != "the") {
        pos_ = std::min(pos_ + 1, tokens_.size());
        Fail();
      }
      r = tokens_[pos_ + 2] == "left" ? Relation::kLeft : Relation::kRight;
    } else if (Peek() == "in") {
      r = Relation::kFront;
    } else if (Peek() == "behind") {
      r = Relation::kBehind;
    } else {
      Fail();
    }
    for (const auto& w : RelationWords(r)) Expect(w);
    return r;
  }

  Descriptor ParseDescriptor() {
    Descriptor d;
    bool has_noun = false;
    size_t start = pos_;
    while (pos_ < tokens_.size() && tokens_[pos_] != "?") {
      const std::string& word = tokens_[pos_];
      if (word == kThing && options_.allow_thing) {
        if (has_noun) Fail();
        has_noun = true;
        d.shape = std::string(kThing);
      } else if (auto attr = Classify(word)) {
        switch (*attr) {
          case Attribute::kShape:
            if (has_noun) Fail();
            has_noun = true;
            d.shape = word;
            break;
          case Attribute::kColor:
            if (d.color) Fail();
            d.color = word;
            break;
          case Attribute::kSize:
            if (d.size) Fail();
            d.size = word;
            break;
          case Attribute::kMaterial:
            if (d.material) Fail();
            d.material = word;
            break;
        }
      } else {
        Fail();
      }
      ++pos_;
    }
    if (!has_noun || d.specificity() == 0) {
      pos_ = std::max(start, pos_);
      Fail();
    }
    return d;
  }

  std::optional<Attribute> Classify(const std::string& word) const {
    for (Attribute a : space_.active) {
      if (space_.IndexOf(a, word) >= 0) return a;
    }
    return std::nullopt;
  }

  std::span<const std::string> tokens_;
  const AttributeSpace& space_;
  const GrammarOptions& options_;
  size_t pos_ = 0;
};

std::vector<std::optional<std::string>> OptionalValues(
    const AttributeSpace& space, Attribute a) {
  std::vector<std::optional<std::string>> out = {std::nullopt};
  if (space.is_active(a)) {
    for (const auto& v : space.values(a)) out.emplace_back(v);
  }
  return out;
}

}  // namespace

int Descriptor::specificity() const {
  return static_cast<int>(size.has_value()) + color.has_value() +
         material.has_value() + !is_wildcard_shape();
}

Unparseable::Unparseable(Tokens tokens, size_t position)
    : std::runtime_error("unparseable question at token " +
                         std::to_string(position) + ": \"" +
                         JoinTokens(tokens) + "\""),
      tokens_(std::move(tokens)),
      position_(position) {}

Tokens Realize(const QuestionAst& ast) {
  Tokens out = {"is", "it"};
  if (ast.kind == QuestionKind::kRelational) {
    for (auto& w : RelationWords(*ast.relation)) out.push_back(std::move(w));
  } else {
    out.emplace_back("a");
  }
  const Descriptor& d = ast.descriptor;
  if (d.size) out.push_back(*d.size);
  if (d.color) out.push_back(*d.color);
  if (d.material) out.push_back(*d.material);
  out.push_back(d.shape);
  out.emplace_back("?");
  out.emplace_back(kEos);
  return out;
}

QuestionAst Parse(std::span<const std::string> tokens,
                  const AttributeSpace& space, const GrammarOptions& options) {
  return Parser(tokens, space, options).Run();
}

std::optional<QuestionAst> TryParse(std::span<const std::string> tokens,
                                    const AttributeSpace& space,
                                    const GrammarOptions& options) {
  try {
    return Parse(tokens, space, options);
  } catch (const Unparseable&) {
    return std::nullopt;
  }
}

std::vector<Descriptor> EnumerateDescriptors(const AttributeSpace& space,
                                             const GrammarOptions& options) {
  std::vector<std::string> nouns;
  if (space.is_active(Attribute::kShape)) nouns = space.shapes;
  if (options.allow_thing || nouns.empty()) nouns.emplace_back(kThing);
  std::vector<Descriptor> out;
  for (const auto& size : OptionalValues(space, Attribute::kSize)) {
    for (const auto& color : OptionalValues(space, Attribute::kColor)) {
      for (const auto& material : OptionalValues(space, Attribute::kMaterial)) {
        for (const auto& noun : nouns) {
          Descriptor d{size, color, material, noun};
          if (d.specificity() > 0) out.push_back(std::move(d));
        }
      }
    }
  }
  return out;
}

std::vector<QuestionAst> EnumerateAsts(const AttributeSpace& space,
                                       const GrammarOptions& options) {
  std::vector<QuestionAst> out;
  for (const auto& d : EnumerateDescriptors(space, options)) {
    out.push_back(QuestionAst::Attribute(d));
    if (!options.allow_relations) continue;
    for (Relation r : kAllRelations) out.push_back(QuestionAst::Relational(r, d));
  }
  return out;
}

int MaxQuestionLength(const AttributeSpace& space,
                      const GrammarOptions& options) {
  size_t longest = 0;
  for (const auto& ast : EnumerateAsts(space, options)) {
    longest = std::max(longest, Realize(ast).size());
  }
  return static_cast<int>(longest);
}

std::string JoinTokens(std::span<const std::string> tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

Tokens SplitTokens(std::string_view text) {
  Tokens out;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) out.push_back(word);
  return out;
}

Vocabulary Vocabulary::Build(const AttributeSpace& space) {
  Vocabulary v;
  const std::string_view specials[] = {kPad, kCls, kBos, kEos,
                                       kEod, kYes, kNo};
  for (auto s : specials) v.tokens_.emplace_back(s);

  std::set<std::string> words(kFunctionWords.begin(), kFunctionWords.end());
  std::set<std::string> content(kRelationLexicon.begin(),
                                kRelationLexicon.end());
  for (Attribute a : space.active) {
    content.insert(space.values(a).begin(), space.values(a).end());
  }
  words.insert(content.begin(), content.end());
  words.emplace(kThing);
  for (const auto& w : words) v.tokens_.push_back(w);

  v.content_.assign(v.tokens_.size(), false);
  for (size_t i = 0; i < v.tokens_.size(); ++i) {
    v.ids_.emplace(v.tokens_[i], static_cast<int>(i));
    v.content_[i] = content.count(v.tokens_[i]) > 0;
  }
  v.pad_ = v.Id(kPad);
  v.cls_ = v.Id(kCls);
  v.bos_ = v.Id(kBos);
  v.eos_ = v.Id(kEos);
  v.eod_ = v.Id(kEod);
  v.yes_ = v.Id(kYes);
  v.no_ = v.Id(kNo);
  return v;
}

int Vocabulary::Id(std::string_view token) const {
  auto it = ids_.find(token);
  if (it == ids_.end()) {
    throw std::out_of_range("token \"" + std::string(token) +
                            "\" is not in the vocabulary");
  }
  return it->second;
}

std::optional<int> Vocabulary::Find(std::string_view token) const {
  auto it = ids_.find(token);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

bool Vocabulary::IsContent(std::string_view token) const {
  auto id = Find(token);
  return id && content_[*id];
}

std::vector<int> Vocabulary::Encode(std::span<const std::string> tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(Id(t));
  return ids;
}

Tokens Vocabulary::Decode(std::span<const int> ids) const {
  Tokens out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(Token(id));
  return out;
}

uint64_t Vocabulary::Hash() const { return Fnv1a(JoinTokens(tokens_)); }

}  // namespace goalq
