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


#ifndef SFORGE_POST_REWARDS_HPP_
#define SFORGE_POST_REWARDS_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sforge::reward {

/// Half-open token range [begin, end).
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool operator==(const Span &) const = default;
};

/// Sentence-break marks, matched as UTF-8 byte strings. `spaced` marks break
/// only before whitespace or the end of the text; `immediate` marks (CJK
/// full-width punctuation, written without spaces) always break.
struct SegmentOptions {
  std::vector<std::string> spaced = {".", "!", "?", ";", ":", ",", "…"};
  std::vector<std::string> immediate = {"。", "！", "？", "；", "：", "，", "、"};
};

/// Splits `tokens` (whose concatenation must equal `text`) into sentence
/// spans. A token belongs to the sentence holding its first byte; text that is
/// only whitespace joins the sentence before it.
std::vector<Span> segment_sentences(std::span<const std::string> tokens, const std::string &text,
                                    const SegmentOptions &opts = {});

/// Fallback tokenizer for inputs without explicit tokens: each piece is an
/// optional whitespace run followed by either an ASCII alphanumeric run or one
/// UTF-8 code point.
std::vector<std::string> simple_tokenize(const std::string &text);

/// exp of the mean token log-ratio over `span`.
double sentence_ratio(std::span<const double> old_logprobs, std::span<const double> new_logprobs, Span span);

/// (R - mean) / max(std, 1e-8) with the population std; all zeros when the
/// rewards are all equal.
std::vector<double> group_advantages(std::span<const double> rewards);

struct Response {
  std::vector<double> old_logprobs;
  std::vector<double> new_logprobs;
  std::vector<Span> sentences;
  double reward = 0.0;
  bool correct = false;
};

struct LpoConfig {
  double epsilon = 0.03;
};

struct SentenceTerm {
  std::size_t response = 0;
  Span span;
  double ratio = 1.0;
  /// True when the clipped branch is strictly the smaller one.
  bool clipped = false;
  double contribution = 0.0;
};

struct LpoReport {
  double objective = 0.0;
  std::vector<double> advantages;
  std::vector<SentenceTerm> sentences;
};

void validate(const Response &r, std::size_t index = 0);

LpoReport lpo_objective(std::span<const Response> group, const LpoConfig &cfg = {});
LpoReport lpo_objective(std::span<const Response> group, std::span<const double> advantages,
                        const LpoConfig &cfg = {});

/// alpha * p(l_i), with p(l) = 0.5 - (l - l_min) / (l_max - l_min + 1e-9);
/// positive values are dropped for incorrect responses.
double length_reward(std::span<const double> lengths, std::size_t index, bool correct, double alpha);

struct RewardBreakdown {
  double correctness = 0.0;
  double length = 0.0;
  double format = 0.0;
  std::vector<double> task_specific;
  double total = 0.0;
};

bool contains_think_marker(const std::string &text);

RewardBreakdown composite_reward(bool correct, std::span<const double> lengths, std::size_t index, double alpha,
                                 bool has_think_marker, std::span<const double> task_rewards = {});

/// Per-task length-reward weight; easier tasks usually get a larger alpha.
struct AlphaSchedule {
  double default_alpha = 0.5;
  std::map<std::string, double> per_task;

  double alpha_for(const std::string &task) const;
};

enum class MatchResult { loss, tie, win };

std::optional<MatchResult> parse_match_result(const std::string &s);

/// Judge verdicts keyed by ordered pair (i, j), each from i's point of view.
struct ArenaOutcome {
  std::size_t group_size = 0;
  std::map<std::pair<std::size_t, std::size_t>, MatchResult> results;

  void set(std::size_t i, std::size_t j, MatchResult r) { results[{i, j}] = r; }
};

/// Round-robin totals: response i collects win = 1, tie = 0.5 from every
/// ordered pair it appears in. Totals sum to G(G-1).
std::vector<double> gar_scores(const ArenaOutcome &outcome);

/// Test adjudicator: compares hidden scores, ties within `tie_tolerance`.
ArenaOutcome adjudicate_by_score(std::span<const double> scores, double tie_tolerance = 0.0);

/// 1 - C(n-c, k) / C(n, k) evaluated as a product.
double pass_at_k(std::size_t n, std::size_t c, std::size_t k);

}  // namespace sforge::reward

#endif  // SFORGE_POST_REWARDS_HPP_
