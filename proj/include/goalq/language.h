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

#ifndef GOALQ_LANGUAGE_H_
#define GOALQ_LANGUAGE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "goalq/scene.h"

namespace goalq {

inline constexpr std::string_view kPad = "[PAD]";
inline constexpr std::string_view kCls = "[CLS]";
inline constexpr std::string_view kBos = "[BOS]";
inline constexpr std::string_view kEos = "[EOS]";
inline constexpr std::string_view kEod = "[EOD]";
inline constexpr std::string_view kYes = "[YES]";
inline constexpr std::string_view kNo = "[NO]";
inline constexpr std::string_view kThing = "thing";

using Tokens = std::vector<std::string>;

// Referring expression: optional adjectives plus a shape noun or "thing".
struct Descriptor {
  std::optional<std::string> size;
  std::optional<std::string> color;
  std::optional<std::string> material;
  std::string shape = std::string(kThing);

  bool is_wildcard_shape() const { return shape == kThing; }
  // Number of non-wildcard fields.
  int specificity() const;
  bool operator==(const Descriptor&) const = default;
};

enum class Relation { kLeft, kRight, kFront, kBehind };
inline constexpr Relation kAllRelations[] = {Relation::kLeft, Relation::kRight,
                                             Relation::kFront,
                                             Relation::kBehind};

enum class QuestionKind { kAttribute, kRelational };

struct QuestionAst {
  QuestionKind kind = QuestionKind::kAttribute;
  Descriptor descriptor;
  std::optional<Relation> relation;

  static QuestionAst Attribute(Descriptor d) {
    return {QuestionKind::kAttribute, std::move(d), std::nullopt};
  }
  static QuestionAst Relational(Relation r, Descriptor d) {
    return {QuestionKind::kRelational, std::move(d), r};
  }
  bool operator==(const QuestionAst&) const = default;
};

struct GrammarOptions {
  bool allow_thing = true;
  bool allow_relations = true;
  bool operator==(const GrammarOptions&) const = default;
};

class Unparseable : public std::runtime_error {
 public:
  Unparseable(Tokens tokens, size_t position);
  const Tokens& tokens() const { return tokens_; }
  size_t position() const { return position_; }

 private:
  Tokens tokens_;
  size_t position_;
};

// Canonical surface form, terminated by [EOS].
Tokens Realize(const QuestionAst& ast);

// Inverse of Realize. Adjectives may come in any order; a trailing [EOS] is
// optional. Throws Unparseable.
QuestionAst Parse(std::span<const std::string> tokens,
                  const AttributeSpace& space,
                  const GrammarOptions& options = {});
// Nullopt instead of throwing.
std::optional<QuestionAst> TryParse(std::span<const std::string> tokens,
                                    const AttributeSpace& space,
                                    const GrammarOptions& options = {});

// All valid descriptors over the active attributes, in a fixed order.
std::vector<Descriptor> EnumerateDescriptors(const AttributeSpace& space,
                                             const GrammarOptions& options = {});
// Every valid question: one attribute form plus one per relation for each
// descriptor. Duplicate free, fixed order.
std::vector<QuestionAst> EnumerateAsts(const AttributeSpace& space,
                                       const GrammarOptions& options = {});

// Longest Realize output (including [EOS]) over the grammar.
int MaxQuestionLength(const AttributeSpace& space,
                      const GrammarOptions& options = {});

std::string JoinTokens(std::span<const std::string> tokens);
Tokens SplitTokens(std::string_view text);

class Vocabulary {
 public:
  static Vocabulary Build(const AttributeSpace& space);

  int size() const { return static_cast<int>(tokens_.size()); }
  // Throws std::out_of_range for tokens outside the vocabulary.
  int Id(std::string_view token) const;
  std::optional<int> Find(std::string_view token) const;
  const std::string& Token(int id) const { return tokens_.at(id); }
  bool IsContent(int id) const { return content_.at(id); }
  bool IsContent(std::string_view token) const;
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::vector<int> Encode(std::span<const std::string> tokens) const;
  Tokens Decode(std::span<const int> ids) const;
  uint64_t Hash() const;

  int pad() const { return pad_; }
  int cls() const { return cls_; }
  int bos() const { return bos_; }
  int eos() const { return eos_; }
  int eod() const { return eod_; }
  int yes() const { return yes_; }
  int no() const { return no_; }

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int, std::less<>> ids_;
  std::vector<bool> content_;
  int pad_ = 0, cls_ = 0, bos_ = 0, eos_ = 0, eod_ = 0, yes_ = 0, no_ = 0;
};

}  // namespace goalq

#endif  // GOALQ_LANGUAGE_H_
