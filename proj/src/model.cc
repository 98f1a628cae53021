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

#include "goalq/model.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "goalq/baseline.h"
#include "goalq/losses.h"
#include "goalq/targeting.h"

namespace goalq {

namespace nn = torch::nn;

namespace {

torch::ScalarType ParamType(nn::Module& m) {
  for (const auto& p : m.parameters()) return p.scalar_type();
  return torch::kFloat;
}

std::string StateKey(const Scene& scene, std::span<const int64_t> ids) {
  std::string key = scene.scene_id;
  key += '|';
  for (int64_t id : ids) {
    key += std::to_string(id);
    key += ',';
  }
  return key;
}

Tokens StripEos(std::span<const int64_t> ids, const Vocabulary& vocab) {
  Tokens words;
  for (int64_t id : ids) {
    if (id == vocab.eos()) break;
    words.push_back(vocab.Token(static_cast<int>(id)));
  }
  return words;
}

torch::Tensor GroupTensor(std::span<const std::vector<int>> groups) {
  int n = groups.empty() ? 0 : static_cast<int>(groups[0].size());
  auto t = torch::zeros({static_cast<int64_t>(groups.size()), n}, torch::kLong);
  auto acc = t.accessor<int64_t, 2>();
  for (size_t b = 0; b < groups.size(); ++b) {
    for (int i = 0; i < n; ++i) acc[b][i] = groups[b][i];
  }
  return t;
}

}  // namespace

// ---------------------------------------------------------------------------
// Features and batching.

FeatureTable::FeatureTable(const ModelConfig& config)
    : featurizer_(AttributeSpace::ByName(config.space), config.d_v,
                  config.feature_seed),
      n_max_(config.n_max),
      k_(config.k),
      d_v_(config.d_v) {}

torch::Tensor FeatureTable::Objects(const Scene& scene) const {
  if (scene.size() > n_max_) {
    throw std::invalid_argument("scene " + scene.scene_id + " has " +
                                std::to_string(scene.size()) +
                                " objects, above N_max");
  }
  auto t = torch::zeros({n_max_, object_width()});
  auto acc = t.accessor<float, 2>();
  std::vector<int> all(scene.size());
  std::iota(all.begin(), all.end(), 0);
  for (int i = 0; i < scene.size(); ++i) {
    auto v = featurizer_(scene.objects[i]);
    for (int d = 0; d < d_v_; ++d) acc[i][d] = v[d];
    auto g = GeometricVector(i, all, scene, n_max_);
    for (size_t d = 0; d < g.size(); ++d) {
      acc[i][d_v_ + d] = static_cast<float>(g[d]);
    }
  }
  return t;
}

torch::Tensor FeatureTable::OtmRows(const Scene& scene,
                                    std::span<const int> top_k,
                                    std::span<const double> prob) const {
  auto t = torch::zeros({k_, otm_row_width()});
  auto acc = t.accessor<float, 2>();
  size_t rows = std::min<size_t>(top_k.size(), k_);
  for (size_t j = 0; j < rows; ++j) {
    int i = top_k[j];
    auto v = featurizer_(scene.objects.at(i));
    for (int d = 0; d < d_v_; ++d) acc[j][d] = v[d];
    auto g = GeometricVector(i, top_k.subspan(0, rows), scene, k_);
    for (size_t d = 0; d < g.size(); ++d) {
      acc[j][d_v_ + d] = static_cast<float>(g[d]);
    }
    acc[j][otm_row_width() - 1] = static_cast<float>(prob[i]);
  }
  return t;
}

torch::Tensor FeatureTable::MeanVisual(const Scene& scene) const {
  auto t = torch::zeros({d_v_});
  auto acc = t.accessor<float, 1>();
  for (const auto& o : scene.objects) {
    auto v = featurizer_(o);
    for (int d = 0; d < d_v_; ++d) acc[d] += v[d] / scene.size();
  }
  return t;
}

std::vector<int64_t> DialogueIds(std::span<const Tokens> questions,
                                 std::span<const Answer> answers,
                                 const Vocabulary& vocab) {
  if (questions.size() != answers.size()) {
    throw std::invalid_argument("every question needs an answer");
  }
  std::vector<int64_t> ids;
  for (size_t t = 0; t < questions.size(); ++t) {
    for (const auto& w : questions[t]) ids.push_back(vocab.Id(w));
    ids.push_back(answers[t] == Answer::kYes ? vocab.yes() : vocab.no());
  }
  return ids;
}

EncoderBatch MakeEncoderBatch(std::span<const Scene* const> scenes,
                              std::span<const std::vector<int64_t>> dialogues,
                              const FeatureTable& features,
                              const ModelConfig& config, int pad_id) {
  const int64_t b = static_cast<int64_t>(scenes.size());
  size_t max_len = 0;
  for (const auto& d : dialogues) max_len = std::max(max_len, d.size());
  if (max_len > static_cast<size_t>(config.max_dialogue_tokens())) {
    throw std::invalid_argument("dialogue of " + std::to_string(max_len) +
                                " tokens exceeds the encoder bound");
  }
  const int64_t l = static_cast<int64_t>(max_len);
  EncoderBatch batch;
  std::vector<torch::Tensor> objects;
  batch.object_pad = torch::ones({b, config.n_max}, torch::kBool);
  batch.tokens = torch::full({b, l}, pad_id, torch::kLong);
  batch.token_pad = torch::ones({b, l}, torch::kBool);
  auto opad = batch.object_pad.accessor<bool, 2>();
  auto tok = batch.tokens.accessor<int64_t, 2>();
  auto tpad = batch.token_pad.accessor<bool, 2>();
  for (int64_t i = 0; i < b; ++i) {
    objects.push_back(features.Objects(*scenes[i]));
    for (int s = 0; s < scenes[i]->size(); ++s) opad[i][s] = false;
    for (size_t t = 0; t < dialogues[i].size(); ++t) {
      tok[i][t] = dialogues[i][t];
      tpad[i][t] = false;
    }
  }
  batch.objects = torch::stack(objects);
  return batch;
}

torch::Tensor MaskedSigma(const torch::Tensor& scores,
                          const torch::Tensor& pad) {
  return torch::sigmoid(scores).masked_fill(pad, 0.0);
}

torch::Tensor GoalProbabilities(const torch::Tensor& sigma,
                                const torch::Tensor& pad) {
  return torch::softmax(
      sigma.masked_fill(pad, -std::numeric_limits<double>::infinity()), -1);
}

// ---------------------------------------------------------------------------
// Encoders.

ObjectEncoderTransformer::ObjectEncoderTransformer(const ModelConfig& config,
                                                   int vocab_size,
                                                   int object_width, int cls_id)
    : n_max_(config.n_max), cls_id_(cls_id) {
  const int d = config.d_model;
  object_in_ = register_module("object_in", nn::Linear(object_width, d));
  token_ = register_module("token", nn::Embedding(vocab_size, d));
  segment_ = register_module("segment", nn::Embedding(3, d));
  position_ = register_module(
      "position", nn::Embedding(config.max_dialogue_tokens() + 2, d));
  auto layer = nn::TransformerEncoderLayer(
      nn::TransformerEncoderLayerOptions(d, config.n_head)
          .dim_feedforward(config.dim_feedforward)
          .dropout(config.dropout));
  encoder_ = register_module(
      "encoder", nn::TransformerEncoder(
                     nn::TransformerEncoderOptions(layer, config.n_layers)));
  embed_norm_ = register_module(
      "embed_norm", nn::LayerNorm(nn::LayerNormOptions({d})));
  f_o_ = register_module("f_o", nn::Linear(d, d));
  f_c_ = register_module("f_c", nn::Linear(d, d));
}

std::pair<torch::Tensor, torch::Tensor> ObjectEncoderTransformer::Embed(
    const EncoderBatch& batch) {
  const int64_t b = batch.objects.size(0);
  const int64_t l = batch.tokens.size(1);
  auto long_opts = torch::TensorOptions().dtype(torch::kLong);
  auto seg_obj = torch::where(batch.object_pad, 2, 0).to(torch::kLong);
  auto x_obj = torch::relu(object_in_(batch.objects)) + segment_(seg_obj) +
               position_(torch::zeros({b, n_max_}, long_opts));
  auto x_cls = token_(torch::full({b, 1}, cls_id_, long_opts)) +
               segment_(torch::ones({b, 1}, long_opts)) +
               position_(torch::ones({b, 1}, long_opts));
  auto seg_tok = torch::where(batch.token_pad, 2, 1).to(torch::kLong);
  auto pos_tok = torch::arange(2, l + 2, long_opts).unsqueeze(0).expand({b, l});
  auto x_tok = token_(batch.tokens) + segment_(seg_tok) + position_(pos_tok);
  auto x = embed_norm_(torch::cat({x_obj, x_cls, x_tok}, 1)).transpose(0, 1);
  auto mask = torch::cat(
      {batch.object_pad, torch::zeros({b, 1}, torch::kBool), batch.token_pad},
      1);
  return {x, mask};
}

EncoderOutput ObjectEncoderTransformer::Encode(const EncoderBatch& batch) {
  auto [x, mask] = Embed(batch);
  auto h = encoder_(x, torch::Tensor(), mask).transpose(0, 1);
  EncoderOutput out;
  out.objects = h.slice(1, 0, n_max_);
  out.cls = h.select(1, n_max_);
  out.scores = (f_o_(out.objects) * f_c_(out.cls).unsqueeze(1)).sum(-1);
  out.sigma = MaskedSigma(out.scores, batch.object_pad);
  out.prob = GoalProbabilities(out.sigma, batch.object_pad);
  return out;
}

torch::Tensor SummarizeDialogue(nn::Embedding& embed, nn::LSTM& lstm,
                                const EncoderBatch& batch, int cls_id) {
  const int64_t b = batch.tokens.size(0);
  auto cls = torch::full({b, 1}, cls_id, torch::kLong);
  auto seq = torch::cat({cls, batch.tokens}, 1);
  auto lengths = 1 + (~batch.token_pad).sum(1).to(torch::kLong);
  auto packed = nn::utils::rnn::pack_padded_sequence(embed(seq), lengths,
                                                     /*batch_first=*/true,
                                                     /*enforce_sorted=*/false);
  auto result = lstm->forward_with_packed_input(packed);
  auto h_n = std::get<0>(std::get<1>(result));
  return h_n.select(0, h_n.size(0) - 1);
}

RecurrentObjectEncoder::RecurrentObjectEncoder(const ModelConfig& config,
                                               int vocab_size,
                                               int object_width, int cls_id)
    : cls_id_(cls_id) {
  const int d = config.d_model;
  const int half = std::max(1, d / 2);
  object_in_ = register_module("object_in", nn::Linear(object_width, d));
  gru_ = register_module(
      "gru", nn::GRU(nn::GRUOptions(d, half).bidirectional(true).batch_first(
                 true)));
  object_out_ = register_module("object_out", nn::Linear(2 * half, d));
  token_ = register_module("token", nn::Embedding(vocab_size, d));
  dialogue_ = register_module(
      "dialogue", nn::LSTM(nn::LSTMOptions(d, d).batch_first(true)));
  dialogue_out_ = register_module("dialogue_out", nn::Linear(d, d));
}

EncoderOutput RecurrentObjectEncoder::Encode(const EncoderBatch& batch) {
  const int64_t n_max = batch.objects.size(1);
  auto x = torch::relu(object_in_(batch.objects));
  auto lengths = (~batch.object_pad).sum(1).to(torch::kLong);
  auto packed = nn::utils::rnn::pack_padded_sequence(x, lengths, true, false);
  auto result = gru_->forward_with_packed_input(packed);
  auto padded = std::get<0>(nn::utils::rnn::pad_packed_sequence(
      std::get<0>(result), true, 0.0, n_max));
  auto summary = SummarizeDialogue(token_, dialogue_, batch, cls_id_);
  EncoderOutput out;
  out.objects = object_out_(padded) + dialogue_out_(summary).unsqueeze(1);
  out.cls = summary;
  return out;
}

MlpGuesser::MlpGuesser(const ModelConfig& config, int vocab_size,
                       int object_width, int cls_id)
    : cls_id_(cls_id) {
  const int d = config.d_model;
  object_in_ = register_module("object_in", nn::Linear(object_width, d));
  token_ = register_module("token", nn::Embedding(vocab_size, d));
  dialogue_ = register_module(
      "dialogue", nn::LSTM(nn::LSTMOptions(d, d).batch_first(true)));
  score_ = register_module(
      "score", nn::Sequential(nn::Linear(2 * d, d), nn::ReLU(),
                              nn::Linear(d, 1)));
}

EncoderOutput MlpGuesser::Encode(const EncoderBatch& batch) {
  auto x_v = torch::relu(object_in_(batch.objects));
  auto h = SummarizeDialogue(token_, dialogue_, batch, cls_id_);
  auto joined = torch::cat({x_v, h.unsqueeze(1).expand_as(x_v)}, -1);
  EncoderOutput out;
  out.cls = h;
  out.scores = score_->forward(joined).squeeze(-1);
  out.sigma = MaskedSigma(out.scores, batch.object_pad);
  out.prob = GoalProbabilities(out.sigma, batch.object_pad);
  return out;
}

// ---------------------------------------------------------------------------
// Decoders.

std::vector<std::vector<int64_t>> DecoderBase::Generate(
    const torch::Tensor& memory, const torch::Tensor& memory_pad, int bos,
    int eos, int max_len) {
  const int64_t b = memory.size(0);
  std::vector<std::vector<int64_t>> out(b);
  std::vector<bool> finished(b, false);
  auto ids = torch::full({b, 1}, bos, torch::kLong);
  for (int step = 0; step < max_len; ++step) {
    auto logits = Logits(memory, memory_pad, ids);
    auto next = logits.select(1, logits.size(1) - 1).argmax(-1);
    auto acc = next.accessor<int64_t, 1>();
    bool all_done = true;
    for (int64_t i = 0; i < b; ++i) {
      if (finished[i]) continue;
      out[i].push_back(acc[i]);
      if (acc[i] == eos) {
        finished[i] = true;
      } else {
        all_done = false;
      }
    }
    if (all_done) break;
    ids = torch::cat({ids, next.unsqueeze(1)}, 1);
  }
  return out;
}

QuestionDecoderTransformer::QuestionDecoderTransformer(
    const ModelConfig& config, int vocab_size) {
  const int d = config.d_model;
  group_ = register_module("group", nn::Embedding(3, d));
  token_ = register_module("token", nn::Embedding(vocab_size, d));
  position_ =
      register_module("position", nn::Embedding(config.max_decode_len + 1, d));
  auto layer = nn::TransformerDecoderLayer(
      nn::TransformerDecoderLayerOptions(d, config.n_head)
          .dim_feedforward(config.dim_feedforward)
          .dropout(config.dropout));
  decoder_ = register_module(
      "decoder", nn::TransformerDecoder(
                     nn::TransformerDecoderOptions(layer, config.n_layers)));
  out_ = register_module("out", nn::Linear(d, vocab_size));
}

torch::Tensor QuestionDecoderTransformer::Memory(const torch::Tensor& objects,
                                                 const torch::Tensor& groups) {
  return objects + group_(groups);
}

torch::Tensor QuestionDecoderTransformer::Logits(
    const torch::Tensor& memory, const torch::Tensor& memory_pad,
    const torch::Tensor& inputs) {
  const int64_t l = inputs.size(1);
  if (l > position_->weight.size(0)) {
    throw std::invalid_argument("decoder input longer than max_decode_len");
  }
  auto pos = torch::arange(l, torch::kLong).unsqueeze(0).expand_as(inputs);
  auto x = (token_(inputs) + position_(pos)).transpose(0, 1);
  auto causal =
      torch::full({l, l}, -std::numeric_limits<double>::infinity(),
                  torch::TensorOptions().dtype(memory.scalar_type()))
          .triu(1);
  auto h = decoder_(x, memory.transpose(0, 1), causal, torch::Tensor(),
                      torch::Tensor(), memory_pad);
  return out_(h.transpose(0, 1));
}

AttentionLstmDecoder::AttentionLstmDecoder(const ModelConfig& config,
                                           int vocab_size) {
  const int d = config.d_model;
  group_ = register_module("group", nn::Embedding(3, d));
  token_ = register_module("token", nn::Embedding(vocab_size, d));
  cell_ = register_module("cell", nn::LSTMCell(2 * d, d));
  out_ = register_module("out", nn::Linear(2 * d, vocab_size));
}

torch::Tensor AttentionLstmDecoder::Memory(const torch::Tensor& objects,
                                           const torch::Tensor& groups) {
  return objects + group_(groups);
}

torch::Tensor AttentionLstmDecoder::Logits(const torch::Tensor& memory,
                                           const torch::Tensor& memory_pad,
                                           const torch::Tensor& inputs) {
  const int64_t b = inputs.size(0);
  const int64_t d = memory.size(2);
  auto opts = torch::TensorOptions().dtype(memory.scalar_type());
  auto h = torch::zeros({b, d}, opts);
  auto c = torch::zeros({b, d}, opts);
  auto context = torch::zeros({b, d}, opts);
  auto emb = token_(inputs);
  std::vector<torch::Tensor> steps;
  for (int64_t l = 0; l < inputs.size(1); ++l) {
    std::tie(h, c) = cell_(torch::cat({emb.select(1, l), context}, -1),
                           std::make_tuple(h, c));
    auto scores = torch::bmm(memory, h.unsqueeze(2)).squeeze(2).masked_fill(
        memory_pad, -std::numeric_limits<double>::infinity());
    auto attn = torch::softmax(scores, -1);
    context = torch::bmm(attn.unsqueeze(1), memory).squeeze(1);
    steps.push_back(out_(torch::cat({h, context}, -1)));
  }
  return torch::stack(steps, 1);
}

// ---------------------------------------------------------------------------
// Targeting.

TargetingModuleImpl::TargetingModuleImpl(const ModelConfig& config)
    : d_v_(config.d_v), geo_width_(GeometricWidth(config.k)) {
  const int h = config.otm_hidden;
  f_a_ = register_module("f_a", nn::Linear(d_v_, h));
  f_b_ = register_module("f_b", nn::Linear(geo_width_, h));
  f_c_ = register_module("f_c", nn::Linear(1, h));
  gru_ = register_module(
      "gru", nn::GRU(nn::GRUOptions(3 * h, h).num_layers(2).bidirectional(true)
                         .batch_first(true)));
  f_l_ = register_module(
      "f_l", nn::Sequential(nn::Linear(config.k * 2 * h, h), nn::ReLU(),
                            nn::Linear(h, ActionCount(config.k))));
}

torch::Tensor TargetingModuleImpl::forward(const torch::Tensor& rows) {
  auto v = rows.slice(2, 0, d_v_);
  auto g = rows.slice(2, d_v_, d_v_ + geo_width_);
  auto p = rows.slice(2, d_v_ + geo_width_, d_v_ + geo_width_ + 1);
  auto x = torch::cat({f_a_(v), f_b_(g), f_c_(p)}, -1);
  auto h = std::get<0>(gru_(x));
  return f_l_->forward(h.flatten(1));
}

int64_t DrawAction(const torch::Tensor& logits, PolicyMode mode, Rng& rng) {
  const int64_t n = logits.size(0);
  if (mode == PolicyMode::kRandom) {
    return std::uniform_int_distribution<int64_t>(0, n - 1)(rng);
  }
  auto p = torch::softmax(logits.to(torch::kDouble), -1).contiguous();
  std::span<const double> prob(p.data_ptr<double>(), n);
  if (mode == PolicyMode::kGreedy) return ArgMax(prob);
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  for (int64_t a = 0; a < n; ++a) {
    acc += prob[a];
    if (u < acc) return a;
  }
  return n - 1;
}

int ArgMax(std::span<const double> values) {
  int best = 0;
  for (size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = static_cast<int>(i);
  }
  return best;
}

uint64_t ParameterHash(std::span<const torch::Tensor> params) {
  std::string bytes;
  for (const auto& p : params) {
    auto c = p.detach().contiguous().cpu();
    bytes.append(static_cast<const char*>(c.data_ptr()), c.nbytes());
  }
  return Fnv1a(bytes);
}

// ---------------------------------------------------------------------------
// Agent.

UniqerAgent::UniqerAgent(const ModelConfig& config, const Vocabulary& vocab)
    : config_(config), vocab_(vocab), features_(config) {
  config_.Validate();
  torch::manual_seed(config_.seed);
  net_ = std::make_shared<nn::Module>("UniqerAgent");
  const int v = vocab_.size();
  const int w = features_.object_width();
  const int cls = vocab_.cls();
  auto oet = [&](const std::string& name) {
    return net_->register_module(
        name, std::make_shared<ObjectEncoderTransformer>(config_, v, w, cls));
  };
  auto mlp = [&]() {
    return net_->register_module(
        "guesser_mlp", std::make_shared<MlpGuesser>(config_, v, w, cls));
  };
  auto qdt = [&]() {
    return net_->register_module(
        "qdt", std::make_shared<QuestionDecoderTransformer>(config_, v));
  };
  switch (config_.variant) {
    case Variant::kUniqer:
      guesser_ = qgen_encoder_ = oet("oet");
      decoder_ = qdt();
      break;
    case Variant::kNotUnified:
      guesser_ = oet("guesser_oet");
      qgen_encoder_ = oet("qgen_oet");
      decoder_ = qdt();
      break;
    case Variant::kNotUnifiedMlpGuesser:
      guesser_ = mlp();
      qgen_encoder_ = oet("qgen_oet");
      decoder_ = qdt();
      break;
    case Variant::kVanilla:
      guesser_ = mlp();
      qgen_encoder_ = net_->register_module(
          "qgen_gru",
          std::make_shared<RecurrentObjectEncoder>(config_, v, w, cls));
      decoder_ = net_->register_module(
          "qgen_lstm", std::make_shared<AttentionLstmDecoder>(config_, v));
      break;
    case Variant::kBaseline:
      throw std::invalid_argument("baseline is not a transformer variant");
  }
  otm_ = net_->register_module("otm", TargetingModule(config_));
}

EncoderBatch UniqerAgent::Batch(
    std::span<const Scene* const> scenes,
    std::span<const std::vector<int64_t>> dialogues) const {
  return MakeEncoderBatch(scenes, dialogues, features_, config_, vocab_.pad());
}

UniqerAgent::Encoded UniqerAgent::Encode(const EncoderBatch& in) {
  EncoderBatch batch = in;
  batch.objects = batch.objects.to(ParamType(*net_));
  Encoded e;
  e.object_pad = batch.object_pad;
  e.guess = guesser_->Encode(batch);
  e.qgen = qgen_encoder_ == guesser_ ? e.guess : qgen_encoder_->Encode(batch);
  return e;
}

SupervisedLosses UniqerAgent::Losses(std::span<const SlSample> samples) {
  const int64_t b = static_cast<int64_t>(samples.size());
  std::vector<const Scene*> scenes;
  std::vector<std::vector<int64_t>> dialogues;
  for (const auto& s : samples) {
    scenes.push_back(s.scene);
    dialogues.push_back(DialogueIds(s.questions, s.answers, vocab_));
  }
  Encoded e = Encode(Batch(scenes, dialogues));
  auto type = e.guess.scores.scalar_type();

  auto labels = torch::zeros({b, config_.n_max}, torch::kDouble);
  auto lab = labels.accessor<double, 2>();
  for (int64_t i = 0; i < b; ++i) {
    for (int id : samples[i].candidates) lab[i][id] = 1.0;
  }
  SupervisedLosses out;
  out.pred = ObjectPredictionLossFromScores(e.guess.scores, labels,
                                            ~e.object_pad) /
             static_cast<double>(b);

  std::vector<int64_t> with_target;
  std::vector<std::vector<int>> groups;
  size_t longest = 0;
  for (int64_t i = 0; i < b; ++i) {
    if (!samples[i].target) continue;
    if (samples[i].target->size() > static_cast<size_t>(config_.max_decode_len)) {
      throw std::invalid_argument("target question longer than max_decode_len");
    }
    with_target.push_back(i);
    groups.push_back(samples[i].group_vector);
    longest = std::max(longest, samples[i].target->size());
  }
  if (with_target.empty()) {
    out.gen = torch::zeros({}, type);
    return out;
  }
  const int64_t q = static_cast<int64_t>(with_target.size());
  const int64_t l = static_cast<int64_t>(longest);
  std::vector<int64_t> in(q * l, vocab_.pad()), tgt(q * l, kIgnoreToken);
  for (int64_t j = 0; j < q; ++j) {
    std::vector<int> ids = vocab_.Encode(*samples[with_target[j]].target);
    for (size_t t = 0; t < ids.size(); ++t) {
      in[j * l + t] = t == 0 ? vocab_.bos() : ids[t - 1];
      tgt[j * l + t] = ids[t];
    }
  }
  auto inputs = torch::tensor(in, torch::kLong).reshape({q, l});
  auto targets = torch::tensor(tgt, torch::kLong).reshape({q, l});
  auto idx = torch::tensor(with_target, torch::kLong);
  auto memory = decoder_->Memory(e.qgen.objects.index_select(0, idx),
                                 GroupTensor(groups));
  auto logits =
      decoder_->Logits(memory, e.object_pad.index_select(0, idx), inputs);
  auto nll = QuestionGenerationLoss(logits, targets);
  out.gen = nll / static_cast<double>(q);
  return out;
}

std::vector<SlOutput> UniqerAgent::Infer(std::span<const SlSample> samples) {
  torch::NoGradGuard no_grad;
  std::vector<const Scene*> scenes;
  std::vector<std::vector<int64_t>> dialogues;
  for (const auto& s : samples) {
    scenes.push_back(s.scene);
    dialogues.push_back(DialogueIds(s.questions, s.answers, vocab_));
  }
  Encoded e = Encode(Batch(scenes, dialogues));
  auto sigma = e.guess.sigma.to(torch::kDouble).contiguous();
  std::vector<SlOutput> out(samples.size());
  std::vector<int64_t> with_target;
  std::vector<std::vector<int>> groups;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double* row = sigma[i].data_ptr<double>();
    out[i].sigma.assign(row, row + samples[i].scene->size());
    if (samples[i].target) {
      with_target.push_back(static_cast<int64_t>(i));
      groups.push_back(samples[i].group_vector);
    }
  }
  if (!with_target.empty()) {
    auto idx = torch::tensor(with_target, torch::kLong);
    auto memory = decoder_->Memory(e.qgen.objects.index_select(0, idx),
                                   GroupTensor(groups));
    auto ids = decoder_->Generate(memory, e.object_pad.index_select(0, idx),
                                  vocab_.bos(), vocab_.eos(),
                                  config_.max_decode_len);
    for (size_t j = 0; j < with_target.size(); ++j) {
      out[with_target[j]].question = StripEos(ids[j], vocab_);
    }
  }
  return out;
}

std::vector<Decision> UniqerAgent::Decide(std::span<Episode* const> live,
                                          PolicyMode mode) {
  torch::NoGradGuard no_grad;
  const size_t n = live.size();
  std::vector<Decision> out(n);
  if (n == 0) return out;

  // Encoder pass, memoized per dialogue state when enabled.
  std::vector<std::string> keys(n);
  std::vector<CachedState> states(n);
  std::vector<size_t> misses;
  for (size_t i = 0; i < n; ++i) {
    auto ids = DialogueIds(live[i]->questions, live[i]->answers, vocab_);
    keys[i] = StateKey(*live[i]->scene, ids);
    auto it = cache_enabled_ ? state_cache_.find(keys[i]) : state_cache_.end();
    if (it != state_cache_.end()) {
      states[i] = it->second;
    } else {
      misses.push_back(i);
    }
  }
  if (!misses.empty()) {
    std::vector<const Scene*> scenes;
    std::vector<std::vector<int64_t>> dialogues;
    for (size_t i : misses) {
      scenes.push_back(live[i]->scene);
      dialogues.push_back(
          DialogueIds(live[i]->questions, live[i]->answers, vocab_));
    }
    Encoded e = Encode(Batch(scenes, dialogues));
    auto prob = e.guess.prob.to(torch::kDouble).contiguous();
    for (size_t j = 0; j < misses.size(); ++j) {
      size_t i = misses[j];
      CachedState s;
      const double* row = prob[j].data_ptr<double>();
      s.prob.assign(row, row + live[i]->scene->size());
      s.memory_objects = e.qgen.objects[j];
      s.object_pad = e.object_pad[j];
      if (cache_enabled_) {
        if (state_cache_.size() > 50000) state_cache_.clear();
        state_cache_[keys[i]] = s;
      }
      states[i] = std::move(s);
    }
  }

  // Targeting.
  std::vector<torch::Tensor> rows;
  std::vector<std::vector<int>> top_k(n);
  for (size_t i = 0; i < n; ++i) {
    top_k[i] = TopKSelect(states[i].prob, live[i]->scene->size(), config_.k);
    rows.push_back(features_.OtmRows(*live[i]->scene, top_k[i], states[i].prob));
  }
  auto stacked = torch::stack(rows);
  auto logits = otm_(stacked.to(ParamType(*net_))).to(torch::kDouble);
  std::vector<size_t> asking;
  for (size_t i = 0; i < n; ++i) {
    Decision& d = out[i];
    int64_t action = DrawAction(logits[i], mode, live[i]->rng);
    d.prob = states[i].prob;
    d.prediction = ArgMax(d.prob);
    d.group_vector =
        ActionToGroupVector(action, config_.k, top_k[i], config_.n_max);
    d.submit = IsSubmission(action, config_.k);
    d.context = rows[i];
    d.actions = {action};
    if (!d.submit) asking.push_back(i);
  }

  // Question generation for the non-submitting episodes.
  std::vector<std::string> qkeys(n);
  std::vector<size_t> to_generate;
  for (size_t i : asking) {
    qkeys[i] = keys[i] + "|g";
    for (int g : out[i].group_vector) qkeys[i] += static_cast<char>('0' + g);
    auto it = cache_enabled_ ? question_cache_.find(qkeys[i])
                             : question_cache_.end();
    if (it != question_cache_.end()) {
      out[i].question = StripEos(it->second, vocab_);
    } else {
      to_generate.push_back(i);
    }
  }
  if (!to_generate.empty()) {
    std::vector<torch::Tensor> objects, pads;
    std::vector<std::vector<int>> groups;
    for (size_t i : to_generate) {
      objects.push_back(states[i].memory_objects);
      pads.push_back(states[i].object_pad);
      groups.push_back(out[i].group_vector);
    }
    auto memory = decoder_->Memory(torch::stack(objects), GroupTensor(groups));
    auto ids = decoder_->Generate(memory, torch::stack(pads), vocab_.bos(),
                                  vocab_.eos(), config_.max_decode_len);
    for (size_t j = 0; j < to_generate.size(); ++j) {
      size_t i = to_generate[j];
      out[i].question = StripEos(ids[j], vocab_);
      if (ids[j].empty() || ids[j].back() != vocab_.eos()) {
        spdlog::debug("question truncated at {} tokens", ids[j].size());
      }
      if (cache_enabled_) {
        if (question_cache_.size() > 100000) question_cache_.clear();
        question_cache_[qkeys[i]] = std::move(ids[j]);
      }
    }
  }
  return out;
}

torch::Tensor UniqerAgent::LogProbs(
    std::span<const Decision* const> decisions) {
  std::vector<torch::Tensor> rows;
  std::vector<int64_t> actions;
  for (const Decision* d : decisions) {
    rows.push_back(d->context);
    actions.push_back(d->actions.at(0));
  }
  auto logits = otm_(torch::stack(rows).to(ParamType(*net_)));
  auto idx = torch::tensor(actions, torch::kLong).unsqueeze(1);
  return torch::log_softmax(logits, -1).gather(1, idx).squeeze(1);
}

std::vector<torch::Tensor> UniqerAgent::PolicyParameters() {
  return otm_->parameters();
}

std::vector<torch::Tensor> UniqerAgent::FrozenParameters() {
  std::vector<torch::Tensor> out;
  for (const auto& item : net_->named_parameters()) {
    if (item.key().rfind("otm.", 0) != 0) out.push_back(item.value());
  }
  return out;
}

void UniqerAgent::SetInferenceCache(bool enabled) {
  cache_enabled_ = enabled;
  state_cache_.clear();
  question_cache_.clear();
}

// ---------------------------------------------------------------------------
// Construction and persistence.

std::unique_ptr<Agent> BuildAgent(const ModelConfig& config,
                                  const Vocabulary& vocab) {
  config.Validate();
  if (config.variant == Variant::kBaseline) {
    return std::make_unique<BaselineAgent>(config, vocab);
  }
  return std::make_unique<UniqerAgent>(config, vocab);
}

nlohmann::json CheckpointInfo::ToJson() const {
  return {{"config", config.ToJson()},
          {"variant", std::string(VariantName(config.variant))},
          {"vocab_hash", vocab_hash},
          {"stage", stage},
          {"seed", seed},
          {"epoch", epoch},
          {"metrics", metrics}};
}

CheckpointInfo CheckpointInfo::FromJson(const nlohmann::json& j) {
  CheckpointInfo info;
  info.config = ModelConfig::FromJson(j.at("config"));
  info.vocab_hash = j.at("vocab_hash").get<uint64_t>();
  info.stage = j.at("stage").get<std::string>();
  info.seed = j.value("seed", uint64_t{0});
  info.epoch = j.value("epoch", 0);
  info.metrics = j.value("metrics", nlohmann::json::object());
  return info;
}

namespace {

std::filesystem::path WithSuffix(const std::filesystem::path& stem,
                                 const char* suffix) {
  return std::filesystem::path(stem.string() + suffix);
}

}  // namespace

void SaveCheckpoint(const std::filesystem::path& stem, Agent& agent,
                    const CheckpointInfo& info) {
  if (stem.has_parent_path()) {
    std::filesystem::create_directories(stem.parent_path());
  }
  auto weights = WithSuffix(stem, ".pt");
  auto manifest = WithSuffix(stem, ".json");
  auto tmp_weights = WithSuffix(stem, ".pt.tmp");
  auto tmp_manifest = WithSuffix(stem, ".json.tmp");
  torch::serialize::OutputArchive archive;
  agent.net().save(archive);
  archive.save_to(tmp_weights.string());
  {
    std::ofstream out(tmp_manifest);
    out << info.ToJson().dump(2) << "\n";
    if (!out) throw std::runtime_error("cannot write " + manifest.string());
  }
  std::filesystem::rename(tmp_weights, weights);
  std::filesystem::rename(tmp_manifest, manifest);
}

CheckpointInfo ReadCheckpointInfo(const std::filesystem::path& stem) {
  auto manifest = WithSuffix(stem, ".json");
  std::ifstream in(manifest);
  if (!in) throw std::runtime_error("missing checkpoint " + manifest.string());
  return CheckpointInfo::FromJson(nlohmann::json::parse(in));
}

std::unique_ptr<Agent> LoadAgent(const std::filesystem::path& stem,
                                 const Vocabulary& vocab,
                                 CheckpointInfo* info_out) {
  CheckpointInfo info = ReadCheckpointInfo(stem);
  if (info.vocab_hash != vocab.Hash()) {
    throw std::runtime_error("checkpoint " + stem.string() +
                             " was trained with a different vocabulary");
  }
  auto weights = WithSuffix(stem, ".pt");
  if (!std::filesystem::exists(weights)) {
    throw std::runtime_error("missing checkpoint " + weights.string());
  }
  auto agent = BuildAgent(info.config, vocab);
  torch::serialize::InputArchive archive;
  archive.load_from(weights.string());
  agent->net().load(archive);
  if (info_out) *info_out = info;
  return agent;
}

}  // namespace goalq
