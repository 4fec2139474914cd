/**
 * Copyright 2026 The Sparse Forge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "sforge/post_rewards.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "sforge/error.hpp"

namespace sforge::reward {

namespace {

bool is_space(unsigned char ch) { return ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\f' || ch == '\v'; }

bool starts_with_at(const std::string &text, std::size_t pos, const std::string &mark) {
  return !mark.empty() && text.compare(pos, mark.size(), mark) == 0;
}

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

}  // namespace

std::vector<std::string> simple_tokenize(const std::string &text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t start = i;
    while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
    if (i < text.size()) {
      const auto ch = static_cast<unsigned char>(text[i]);
      if (std::isalnum(ch)) {
        while (i < text.size() && std::isalnum(static_cast<unsigned char>(text[i]))) ++i;
      } else {
        i = std::min(text.size(), i + utf8_length(ch));
      }
    }
    out.push_back(text.substr(start, i - start));
  }
  return out;
}

std::vector<Span> segment_sentences(std::span<const std::string> tokens, const std::string &text,
                                    const SegmentOptions &opts) {
  if (text.empty()) throw InvalidInput("segment_sentences: empty text");
  if (tokens.empty()) throw InvalidInput("segment_sentences: no tokens");

  std::vector<std::size_t> starts;
  std::size_t pos = 0;
  for (const auto &tok : tokens) {
    starts.push_back(pos);
    for (std::size_t k = 0; k < tok.size(); ++k, ++pos)
      if (pos >= text.size() || text[pos] != tok[k])
        throw SegmentationError("tokens do not match the text at byte offset " + std::to_string(pos), pos);
  }
  if (pos != text.size())
    throw SegmentationError("tokens end at byte offset " + std::to_string(pos) + " before the text does", pos);

  // Character-level sentence boundaries (byte offsets where a sentence ends).
  std::vector<std::size_t> bounds;
  for (std::size_t i = 0; i < text.size();) {
    std::size_t adv = 0;
    bool brk = false;
    for (const auto &m : opts.immediate)
      if (starts_with_at(text, i, m)) {
        adv = m.size();
        brk = true;
        break;
      }
    if (!brk)
      for (const auto &m : opts.spaced)
        if (starts_with_at(text, i, m)) {
          adv = m.size();
          const std::size_t after = i + adv;
          brk = after == text.size() || is_space(static_cast<unsigned char>(text[after]));
          break;
        }
    if (adv == 0) adv = utf8_length(static_cast<unsigned char>(text[i]));
    i = std::min(text.size(), i + adv);
    if (brk) bounds.push_back(i);
  }
  if (bounds.empty() || bounds.back() != text.size()) bounds.push_back(text.size());

  // Whitespace-only pieces join the previous sentence.
  std::vector<std::size_t> merged;
  std::size_t prev = 0;
  for (std::size_t b : bounds) {
    const bool blank = std::all_of(text.begin() + static_cast<std::ptrdiff_t>(prev),
                                   text.begin() + static_cast<std::ptrdiff_t>(b),
                                   [](char c) { return is_space(static_cast<unsigned char>(c)); });
    if (blank && !merged.empty())
      merged.back() = b;
    else
      merged.push_back(b);
    prev = b;
  }

  std::vector<Span> spans;
  std::size_t sentence = 0;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const std::size_t s = std::min(starts[t], text.size() - 1);
    bool fresh = spans.empty();
    while (sentence + 1 < merged.size() && s >= merged[sentence]) {
      ++sentence;
      fresh = true;
    }
    if (fresh)
      spans.push_back({t, t + 1});
    else
      spans.back().end = t + 1;
  }
  return spans;
}

double sentence_ratio(std::span<const double> old_logprobs, std::span<const double> new_logprobs, Span span) {
  if (span.end <= span.begin) throw InvalidInput("sentence_ratio: empty span");
  if (span.end > old_logprobs.size() || span.end > new_logprobs.size())
    throw InvalidInput("sentence_ratio: span exceeds the log-prob arrays");
  double sum = 0.0;
  for (std::size_t t = span.begin; t < span.end; ++t) {
    if (!std::isfinite(old_logprobs[t]) || !std::isfinite(new_logprobs[t]))
      throw InvalidInput("sentence_ratio: non-finite log-prob at token " + std::to_string(t));
    sum += new_logprobs[t] - old_logprobs[t];
  }
  return std::exp(sum / static_cast<double>(span.size()));
}

std::vector<double> group_advantages(std::span<const double> rewards) {
  if (rewards.size() < 2) throw InvalidInput("group_advantages: need at least 2 rewards");
  for (double r : rewards)
    if (!std::isfinite(r)) throw InvalidInput("group_advantages: non-finite reward");
  const double n = static_cast<double>(rewards.size());
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
  std::vector<double> out(rewards.size(), 0.0);
  if (std::all_of(rewards.begin(), rewards.end(), [&](double r) { return r == rewards.front(); })) return out;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::max(std::sqrt(var / n), 1e-8);
  for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / sd;
  return out;
}

void validate(const Response &r, std::size_t index) {
  const std::string who = "response " + std::to_string(index) + ": ";
  if (r.old_logprobs.empty()) throw InvalidInput(who + "no tokens");
  if (r.old_logprobs.size() != r.new_logprobs.size())
    throw InvalidInput(who + "old and new log-prob lengths differ");
  for (std::size_t t = 0; t < r.old_logprobs.size(); ++t)
    if (!std::isfinite(r.old_logprobs[t]) || !std::isfinite(r.new_logprobs[t]))
      throw InvalidInput(who + "non-finite log-prob at token " + std::to_string(t));
  std::size_t next = 0;
  for (const auto &s : r.sentences) {
    if (s.begin != next || s.end <= s.begin)
      throw InvalidInput(who + "sentence spans must be non-empty, contiguous and start at 0");
    next = s.end;
  }
  if (next != r.old_logprobs.size()) throw InvalidInput(who + "sentence spans do not cover every token");
  if (!std::isfinite(r.reward)) throw InvalidInput(who + "non-finite reward");
}

LpoReport lpo_objective(std::span<const Response> group, std::span<const double> advantages, const LpoConfig &cfg) {
  if (!(cfg.epsilon > 0.0) || !std::isfinite(cfg.epsilon)) throw InvalidInput("lpo: epsilon must be positive");
  if (group.empty()) throw InvalidInput("lpo: empty group");
  if (advantages.size() != group.size()) throw InvalidInput("lpo: one advantage per response required");
  LpoReport rep;
  rep.advantages.assign(advantages.begin(), advantages.end());
  double tokens = 0.0, total = 0.0;
  for (std::size_t i = 0; i < group.size(); ++i) {
    const Response &r = group[i];
    validate(r, i);
    const double a = advantages[i];
    tokens += static_cast<double>(r.old_logprobs.size());
    for (const Span &s : r.sentences) {
      const double ratio = sentence_ratio(r.old_logprobs, r.new_logprobs, s);
      const double raw = ratio * a;
      const double clip = std::clamp(ratio, 1.0 - cfg.epsilon, 1.0 + cfg.epsilon) * a;
      const double c = static_cast<double>(s.size()) * std::min(raw, clip);
      total += c;
      rep.sentences.push_back({i, s, ratio, clip < raw, c});
    }
  }
  rep.objective = total / tokens;
  return rep;
}

LpoReport lpo_objective(std::span<const Response> group, const LpoConfig &cfg) {
  std::vector<double> rewards;
  for (const auto &r : group) rewards.push_back(r.reward);
  const std::vector<double> adv = group_advantages(rewards);
  return lpo_objective(group, adv, cfg);
}

double length_reward(std::span<const double> lengths, std::size_t index, bool correct, double alpha) {
  if (lengths.empty()) throw InvalidInput("length_reward: empty group");
  if (index >= lengths.size()) throw InvalidInput("length_reward: index out of range");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidInput("length_reward: alpha must be positive");
  for (double l : lengths)
    if (!std::isfinite(l) || l < 0.0) throw InvalidInput("length_reward: lengths must be finite and non-negative");
  const auto [lo, hi] = std::minmax_element(lengths.begin(), lengths.end());
  const double p = 0.5 - (lengths[index] - *lo) / (*hi - *lo + 1e-9);
  return alpha * (correct ? p : std::min(p, 0.0));
}

bool contains_think_marker(const std::string &text) { return text.find("<think>") != std::string::npos; }

RewardBreakdown composite_reward(bool correct, std::span<const double> lengths, std::size_t index, double alpha,
                                 bool has_think_marker, std::span<const double> task_rewards) {
  RewardBreakdown r;
  r.correctness = correct ? 1.0 : 0.0;
  r.length = length_reward(lengths, index, correct, alpha);
  r.format = has_think_marker ? -0.5 : 0.0;
  r.task_specific.assign(task_rewards.begin(), task_rewards.end());
  for (double t : r.task_specific)
    if (!std::isfinite(t)) throw InvalidInput("composite_reward: non-finite task reward");
  r.total = r.correctness + r.length + r.format;
  for (double t : r.task_specific) r.total += t;
  return r;
}

double AlphaSchedule::alpha_for(const std::string &task) const {
  auto it = per_task.find(task);
  return it == per_task.end() ? default_alpha : it->second;
}

std::optional<MatchResult> parse_match_result(const std::string &s) {
  if (s == "win") return MatchResult::win;
  if (s == "loss") return MatchResult::loss;
  if (s == "tie") return MatchResult::tie;
  return std::nullopt;
}

std::vector<double> gar_scores(const ArenaOutcome &outcome) {
  const std::size_t g = outcome.group_size;
  if (g < 2) throw InvalidInput("gar_scores: need at least 2 responses");
  for (const auto &[key, r] : outcome.results)
    if (key.first >= g || key.second >= g || key.first == key.second)
      throw InvalidInput("gar_scores: invalid pair (" + std::to_string(key.first) + "," + std::to_string(key.second) +
                         ")");
  auto value = [](MatchResult r) { return r == MatchResult::win ? 1.0 : r == MatchResult::tie ? 0.5 : 0.0; };
  std::vector<double> scores(g, 0.0);
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t j = 0; j < g; ++j) {
      if (i == j) continue;
      auto it = outcome.results.find({i, j});
      if (it == outcome.results.end())
        throw InvalidInput("gar_scores: missing pair (" + std::to_string(i) + "," + std::to_string(j) + ")");
      const double v = value(it->second);
      scores[i] += v;
      scores[j] += 1.0 - v;
    }
  return scores;
}

ArenaOutcome adjudicate_by_score(std::span<const double> scores, double tie_tolerance) {
  ArenaOutcome out;
  out.group_size = scores.size();
  for (std::size_t i = 0; i < scores.size(); ++i)
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (i == j) continue;
      const double d = scores[i] - scores[j];
      out.set(i, j, std::abs(d) <= tie_tolerance ? MatchResult::tie : d > 0 ? MatchResult::win : MatchResult::loss);
    }
  return out;
}

double pass_at_k(std::size_t n, std::size_t c, std::size_t k) {
  if (c > n) throw InvalidInput("pass_at_k: c exceeds n");
  if (k < 1 || k > n) throw InvalidInput("pass_at_k: k must lie in [1, n]");
  if (n - c < k) return 1.0;
  double miss = 1.0;
  for (std::size_t i = n - c + 1; i <= n; ++i) miss *= 1.0 - static_cast<double>(k) / static_cast<double>(i);
  return 1.0 - miss;
}

}  // namespace sforge::reward
