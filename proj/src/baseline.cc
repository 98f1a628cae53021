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

#include "goalq/baseline.h"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "goalq/losses.h"
#include "goalq/targeting.h"

namespace goalq {

namespace nn = torch::nn;

namespace {

torch::ScalarType ParamType(nn::Module& m) {
  for (const auto& p : m.parameters()) return p.scalar_type();
  return torch::kFloat;
}

// Words before the first [EOS] or [EOD].
Tokens Words(std::span<const int64_t> ids, const Vocabulary& vocab) {
  Tokens words;
  for (int64_t id : ids) {
    if (id == vocab.eos() || id == vocab.eod()) break;
    words.push_back(vocab.Token(static_cast<int>(id)));
  }
  return words;
}

}  // namespace

BaselineAgent::BaselineAgent(const ModelConfig& config, const Vocabulary& vocab)
    : config_(config),
      vocab_(vocab),
      features_(config),
      hidden_(config.d_model) {
  config_.Validate();
  torch::manual_seed(config_.seed);
  net_ = std::make_shared<nn::Module>("BaselineAgent");
  const int v = vocab_.size();
  const int h = hidden_;
  object_in_ = net_->register_module(
      "object_in", nn::Linear(features_.object_width(), h));
  qae_embed_ = net_->register_module("qae_embed", nn::Embedding(v, h));
  qae_ = net_->register_module(
      "qae", nn::LSTM(nn::LSTMOptions(h, h).batch_first(true)));
  dse_ = net_->register_module("dse", nn::LSTMCell(h, h));
  f1_ = net_->register_module("f1", nn::Linear(h, h));
  f2_ = net_->register_module("f2", nn::Linear(h, h));
  qgen_embed_ = net_->register_module("qgen_embed", nn::Embedding(v, h));
  qgen_ = net_->register_module(
      "qgen", nn::LSTM(nn::LSTMOptions(2 * h + config_.d_v, h).batch_first(
                  true)));
  qgen_init_ = net_->register_module(
      "qgen_init", nn::Linear(config_.k * features_.otm_row_width(), h));
  qgen_out_ = net_->register_module("qgen_out", nn::Linear(h, v));
}

int BaselineAgent::context_width() const {
  return hidden_ + config_.d_v + config_.k * features_.otm_row_width();
}

torch::Tensor BaselineAgent::EncodeQa(std::span<const int64_t> question,
                                      int answer_id) {
  std::vector<int64_t> seq(question.begin(), question.end());
  seq.push_back(answer_id);
  auto ids = torch::tensor(seq, torch::kLong).unsqueeze(0);
  auto result = qae_(qae_embed_(ids));
  auto h_n = std::get<0>(std::get<1>(result));
  return h_n.select(0, h_n.size(0) - 1);
}

DialogueState BaselineAgent::FreshState(int64_t batch) {
  auto opts = torch::TensorOptions().dtype(ParamType(*net_));
  return {torch::zeros({batch, hidden_}, opts),
          torch::zeros({batch, hidden_}, opts), 0};
}

DialogueState BaselineAgent::Update(const DialogueState& state,
                                    const torch::Tensor& qa) {
  auto [h, c] = dse_(qa, std::make_tuple(state.h, state.c));
  return {h, c, state.steps + 1};
}

torch::Tensor BaselineAgent::DialogueVectors(
    std::span<const std::vector<Tokens>* const> questions,
    std::span<const std::vector<Answer>* const> answers) {
  const int64_t b = static_cast<int64_t>(questions.size());
  std::vector<std::vector<int64_t>> seqs;
  std::vector<int64_t> owner, turn;
  int max_turns = 0;
  for (int64_t i = 0; i < b; ++i) {
    const auto& q = *questions[i];
    max_turns = std::max(max_turns, static_cast<int>(q.size()));
    for (size_t t = 0; t < q.size(); ++t) {
      std::vector<int64_t> seq;
      for (const auto& w : q[t]) seq.push_back(vocab_.Id(w));
      seq.push_back((*answers[i])[t] == Answer::kYes ? vocab_.yes()
                                                     : vocab_.no());
      seqs.push_back(std::move(seq));
      owner.push_back(i);
      turn.push_back(static_cast<int64_t>(t));
    }
  }
  DialogueState state = FreshState(b);
  if (seqs.empty()) return state.h;

  size_t longest = 0;
  for (const auto& s : seqs) longest = std::max(longest, s.size());
  const int64_t n = static_cast<int64_t>(seqs.size());
  std::vector<int64_t> flat(n * longest, vocab_.pad());
  std::vector<int64_t> lengths(n);
  for (int64_t j = 0; j < n; ++j) {
    std::copy(seqs[j].begin(), seqs[j].end(), flat.begin() + j * longest);
    lengths[j] = static_cast<int64_t>(seqs[j].size());
  }
  auto ids = torch::tensor(flat, torch::kLong)
                 .reshape({n, static_cast<int64_t>(longest)});
  auto packed = nn::utils::rnn::pack_padded_sequence(
      qae_embed_(ids), torch::tensor(lengths, torch::kLong), true, false);
  auto h_n = std::get<0>(std::get<1>(qae_->forward_with_packed_input(packed)));
  auto qa = h_n.select(0, h_n.size(0) - 1);

  for (int t = 0; t < max_turns; ++t) {
    std::vector<int64_t> rows, src;
    for (int64_t j = 0; j < n; ++j) {
      if (turn[j] == t) {
        rows.push_back(owner[j]);
        src.push_back(j);
      }
    }
    auto row_idx = torch::tensor(rows, torch::kLong);
    auto input = torch::zeros_like(state.h).index_copy(
        0, row_idx, qa.index_select(0, torch::tensor(src, torch::kLong)));
    auto mask = torch::zeros({b, 1}, torch::kBool).index_fill(0, row_idx, true);
    DialogueState next = Update(state, input);
    state.h = torch::where(mask, next.h, state.h);
    state.c = torch::where(mask, next.c, state.c);
  }
  return state.h;
}

torch::Tensor BaselineAgent::DialogueVectors(
    std::span<const SlSample> dialogues) {
  std::vector<const std::vector<Tokens>*> q;
  std::vector<const std::vector<Answer>*> a;
  for (const auto& s : dialogues) {
    q.push_back(&s.questions);
    a.push_back(&s.answers);
  }
  return DialogueVectors(q, a);
}

torch::Tensor BaselineAgent::GuesserProbabilities(const EncoderBatch& batch,
                                                  const torch::Tensor& x_d,
                                                  torch::Tensor* sigma_out,
                                                  torch::Tensor* scores_out) {
  auto x_v = torch::relu(object_in_(batch.objects.to(ParamType(*net_))));
  auto scores = (f1_(x_v) * f2_(x_d).unsqueeze(1)).sum(-1);
  auto sigma = MaskedSigma(scores, batch.object_pad);
  if (sigma_out) *sigma_out = sigma;
  if (scores_out) *scores_out = scores;
  return GoalProbabilities(sigma, batch.object_pad);
}

torch::Tensor BaselineAgent::Contexts(std::span<const Scene* const> scenes,
                                      const torch::Tensor& x_d,
                                      const torch::Tensor& prob) {
  auto p = prob.detach().to(torch::kDouble).contiguous();
  std::vector<torch::Tensor> rows;
  for (size_t i = 0; i < scenes.size(); ++i) {
    const double* row = p[i].data_ptr<double>();
    std::vector<double> pr(row, row + scenes[i]->size());
    auto top_k = TopKSelect(pr, scenes[i]->size(), config_.k);
    rows.push_back(torch::cat({features_.MeanVisual(*scenes[i]),
                               features_.OtmRows(*scenes[i], top_k, pr)
                                   .flatten()}));
  }
  return torch::cat({x_d.detach(), torch::stack(rows).to(x_d.scalar_type())},
                    1);
}

torch::Tensor BaselineAgent::QgenLogits(const torch::Tensor& context,
                                        const torch::Tensor& inputs) {
  const int64_t l = inputs.size(1);
  auto x_d = context.slice(1, 0, hidden_);
  auto x_v = context.slice(1, hidden_, hidden_ + config_.d_v);
  auto rows = context.slice(1, hidden_ + config_.d_v, context_width());
  auto h0 = torch::tanh(qgen_init_(rows)).unsqueeze(0);
  auto c0 = torch::zeros_like(h0);
  auto cond = torch::cat({x_d, x_v}, 1).unsqueeze(1).expand(
      {inputs.size(0), l, hidden_ + config_.d_v});
  auto x = torch::cat({qgen_embed_(inputs), cond}, 2);
  auto out = std::get<0>(qgen_(x, std::make_tuple(h0, c0)));
  return qgen_out_(out);
}

std::vector<std::vector<int64_t>> BaselineAgent::Generate(
    const torch::Tensor& context, PolicyMode mode, std::span<Rng*> rngs) {
  const int64_t n = context.size(0);
  auto x_d = context.slice(1, 0, hidden_);
  auto x_v = context.slice(1, hidden_, hidden_ + config_.d_v);
  auto rows = context.slice(1, hidden_ + config_.d_v, context_width());
  auto h = torch::tanh(qgen_init_(rows)).unsqueeze(0);
  auto c = torch::zeros_like(h);
  auto cond = torch::cat({x_d, x_v}, 1);
  std::vector<std::vector<int64_t>> out(n);
  std::vector<bool> finished(n, false);
  std::vector<int64_t> prev(n, vocab_.bos());
  PolicyMode draw = mode == PolicyMode::kGreedy ? PolicyMode::kGreedy
                                                : PolicyMode::kSample;
  for (int step = 0; step < config_.max_decode_len; ++step) {
    auto x = torch::cat({qgen_embed_(torch::tensor(prev, torch::kLong)), cond},
                        1)
                 .unsqueeze(1);
    auto result = qgen_(x, std::make_tuple(h, c));
    std::tie(h, c) = std::get<1>(result);
    auto logits = qgen_out_(std::get<0>(result).squeeze(1)).to(torch::kDouble);
    bool all_done = true;
    for (int64_t i = 0; i < n; ++i) {
      if (finished[i]) continue;
      int64_t token = DrawAction(logits[i], draw, *rngs[i]);
      out[i].push_back(token);
      prev[i] = token;
      if (token == vocab_.eos() || token == vocab_.eod()) {
        finished[i] = true;
      } else {
        all_done = false;
      }
    }
    if (all_done) break;
  }
  return out;
}

SupervisedLosses BaselineAgent::Losses(std::span<const SlSample> samples) {
  const int64_t b = static_cast<int64_t>(samples.size());
  std::vector<const Scene*> scenes;
  for (const auto& s : samples) scenes.push_back(s.scene);
  std::vector<std::vector<int64_t>> no_tokens(b);
  auto batch =
      MakeEncoderBatch(scenes, no_tokens, features_, config_, vocab_.pad());
  auto x_d = DialogueVectors(samples);
  torch::Tensor sigma, scores;
  auto prob = GuesserProbabilities(batch, x_d, &sigma, &scores);
  auto type = scores.scalar_type();

  auto labels = torch::zeros({b, config_.n_max}, torch::kDouble);
  auto lab = labels.accessor<double, 2>();
  for (int64_t i = 0; i < b; ++i) {
    for (int id : samples[i].candidates) lab[i][id] = 1.0;
  }
  SupervisedLosses out;
  out.pred = ObjectPredictionLossFromScores(scores, labels, ~batch.object_pad) /
             static_cast<double>(b);

  std::vector<int64_t> sel;
  std::vector<std::vector<int>> targets;
  for (int64_t i = 0; i < b; ++i) {
    if (samples[i].end_of_dialogue) {
      targets.push_back({vocab_.eod()});
    } else if (samples[i].target) {
      if (samples[i].target->size() >
          static_cast<size_t>(config_.max_decode_len)) {
        throw std::invalid_argument(
            "target question longer than max_decode_len");
      }
      targets.push_back(vocab_.Encode(*samples[i].target));
    } else {
      continue;
    }
    sel.push_back(i);
  }
  if (sel.empty()) {
    out.gen = torch::zeros({}, type);
    return out;
  }
  const int64_t q = static_cast<int64_t>(sel.size());
  size_t longest = 0;
  for (const auto& t : targets) longest = std::max(longest, t.size());
  const int64_t l = static_cast<int64_t>(longest);
  std::vector<int64_t> in(q * l, vocab_.pad()), tgt(q * l, kIgnoreToken);
  std::vector<const Scene*> sel_scenes;
  for (int64_t j = 0; j < q; ++j) {
    for (size_t t = 0; t < targets[j].size(); ++t) {
      in[j * l + t] = t == 0 ? vocab_.bos() : targets[j][t - 1];
      tgt[j * l + t] = targets[j][t];
    }
    sel_scenes.push_back(scenes[sel[j]]);
  }
  auto idx = torch::tensor(sel, torch::kLong);
  auto context =
      Contexts(sel_scenes, x_d.index_select(0, idx), prob.index_select(0, idx));
  auto logits =
      QgenLogits(context, torch::tensor(in, torch::kLong).reshape({q, l}));
  auto nll = QuestionGenerationLoss(
      logits, torch::tensor(tgt, torch::kLong).reshape({q, l}));
  out.gen = nll / static_cast<double>(q);
  return out;
}

std::vector<SlOutput> BaselineAgent::Infer(std::span<const SlSample> samples) {
  torch::NoGradGuard no_grad;
  const int64_t b = static_cast<int64_t>(samples.size());
  std::vector<const Scene*> scenes;
  for (const auto& s : samples) scenes.push_back(s.scene);
  std::vector<std::vector<int64_t>> no_tokens(b);
  auto batch =
      MakeEncoderBatch(scenes, no_tokens, features_, config_, vocab_.pad());
  auto x_d = DialogueVectors(samples);
  torch::Tensor sigma;
  auto prob = GuesserProbabilities(batch, x_d, &sigma);
  auto sig = sigma.to(torch::kDouble).contiguous();
  auto context = Contexts(scenes, x_d, prob);
  std::vector<Rng> rngs(b);
  std::vector<Rng*> rng_ptrs;
  for (auto& r : rngs) rng_ptrs.push_back(&r);
  auto ids = Generate(context, PolicyMode::kGreedy, rng_ptrs);
  std::vector<SlOutput> out(b);
  for (int64_t i = 0; i < b; ++i) {
    const double* row = sig[i].data_ptr<double>();
    out[i].sigma.assign(row, row + scenes[i]->size());
    if (samples[i].target) out[i].question = Words(ids[i], vocab_);
  }
  return out;
}

std::vector<Decision> BaselineAgent::Decide(std::span<Episode* const> live,
                                            PolicyMode mode) {
  torch::NoGradGuard no_grad;
  const int64_t n = static_cast<int64_t>(live.size());
  std::vector<Decision> out(n);
  if (n == 0) return out;
  std::vector<const Scene*> scenes;
  std::vector<const std::vector<Tokens>*> q;
  std::vector<const std::vector<Answer>*> a;
  std::vector<Rng*> rngs;
  for (Episode* e : live) {
    scenes.push_back(e->scene);
    q.push_back(&e->questions);
    a.push_back(&e->answers);
    rngs.push_back(&e->rng);
  }
  std::vector<std::vector<int64_t>> no_tokens(n);
  auto batch =
      MakeEncoderBatch(scenes, no_tokens, features_, config_, vocab_.pad());
  auto x_d = DialogueVectors(q, a);
  auto prob = GuesserProbabilities(batch, x_d);
  auto p = prob.to(torch::kDouble).contiguous();
  auto context = Contexts(scenes, x_d, prob);
  auto ids = Generate(context, mode, rngs);
  for (int64_t i = 0; i < n; ++i) {
    Decision& d = out[i];
    const double* row = p[i].data_ptr<double>();
    d.prob.assign(row, row + scenes[i]->size());
    d.prediction = ArgMax(d.prob);
    d.submit = std::find(ids[i].begin(), ids[i].end(), vocab_.eod()) !=
               ids[i].end();
    if (!d.submit) d.question = Words(ids[i], vocab_);
    d.context = context[i].to(torch::kFloat);
    d.actions = ids[i];
  }
  return out;
}

torch::Tensor BaselineAgent::LogProbs(
    std::span<const Decision* const> decisions) {
  const int64_t n = static_cast<int64_t>(decisions.size());
  size_t longest = 1;
  for (const Decision* d : decisions) longest = std::max(longest, d->actions.size());
  const int64_t l = static_cast<int64_t>(longest);
  std::vector<int64_t> in(n * l, vocab_.pad()), tgt(n * l, 0);
  std::vector<double> mask(n * l, 0.0);
  std::vector<torch::Tensor> contexts;
  for (int64_t i = 0; i < n; ++i) {
    const auto& acts = decisions[i]->actions;
    for (size_t t = 0; t < acts.size(); ++t) {
      in[i * l + t] = t == 0 ? vocab_.bos() : acts[t - 1];
      tgt[i * l + t] = acts[t];
      mask[i * l + t] = 1.0;
    }
    contexts.push_back(decisions[i]->context);
  }
  auto type = ParamType(*net_);
  auto logits = QgenLogits(torch::stack(contexts).to(type),
                           torch::tensor(in, torch::kLong).reshape({n, l}));
  auto logp = torch::log_softmax(logits, -1).gather(
      2, torch::tensor(tgt, torch::kLong).reshape({n, l, 1}));
  auto m = torch::tensor(mask, torch::kDouble).reshape({n, l}).to(type);
  return (logp.squeeze(2) * m).sum(1);
}

std::vector<torch::Tensor> BaselineAgent::PolicyParameters() {
  std::vector<torch::Tensor> out;
  for (auto* m : std::initializer_list<nn::Module*>{
           qgen_embed_.get(), qgen_.get(), qgen_init_.get(), qgen_out_.get()}) {
    for (const auto& p : m->parameters()) out.push_back(p);
  }
  return out;
}

std::vector<torch::Tensor> BaselineAgent::FrozenParameters() {
  std::vector<torch::Tensor> out;
  for (const auto& item : net_->named_parameters()) {
    if (item.key().rfind("qgen", 0) != 0) out.push_back(item.value());
  }
  return out;
}

}  // namespace goalq
