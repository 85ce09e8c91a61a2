// SPDX-License-Identifier: Apache-2.0
#include "inform/probes/perturb.hpp"

#include <cctype>
#include <numeric>
#include <regex>

#include "inform/diffcore/rng.hpp"
#include "inform/error.hpp"
#include "inform/experts/encoder.hpp"

namespace inform {

std::string_view to_string(PerturbationKind kind) noexcept {
  switch (kind) {
    case PerturbationKind::remove_numbers: return "remove_numbers";
    case PerturbationKind::mask_numbers: return "mask_numbers";
    case PerturbationKind::shuffle_sentences: return "shuffle_sentences";
    case PerturbationKind::remove_reasoning: return "remove_reasoning";
  }
  return "unknown";
}

PerturbationKind parse_perturbation_kind(std::string_view text) {
  for (PerturbationKind k : all_perturbation_kinds()) {
    if (to_string(k) == text) return k;
  }
  throw Error(ErrorCode::ConfigError, "unknown perturbation kind '" + std::string(text) + "'");
}

std::vector<PerturbationKind> all_perturbation_kinds() {
  return {PerturbationKind::remove_numbers, PerturbationKind::mask_numbers, PerturbationKind::shuffle_sentences,
          PerturbationKind::remove_reasoning};
}

const std::vector<std::string>& default_reasoning_cues() {
  static const std::vector<std::string> cues = {"because", "therefore", "so",    "step by step",
                                                "let's think", "first,", "then,", "thus"};
  return cues;
}

namespace {

const std::regex& number_pattern() {
  static const std::regex re("[0-9]+(?:\\.[0-9]+)*");
  return re;
}

std::string escape_regex(std::string_view s) {
  static const std::string special = R"(\^$.|?*+()[]{})";
  std::string out;
  for (char c : s) {
    if (special.find(c) != std::string::npos) out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }

std::string remove_cues(std::string text, const std::vector<std::string>& cues) {
  for (const std::string& cue : cues) {
    if (cue.empty()) continue;
    std::string pattern;
    if (is_word_char(cue.front())) pattern += "\\b";
    pattern += escape_regex(cue);
    if (is_word_char(cue.back())) pattern += "\\b";
    text = std::regex_replace(text, std::regex(pattern, std::regex::icase), "");
  }
  return text;
}

std::string shuffle_sentences(std::string_view text, std::uint64_t seed, bool& noop) {
  std::vector<std::string> parts = split_sentences(text);
  noop = true;
  if (parts.size() < 2) return std::string(text);
  std::vector<std::size_t> order(parts.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = derive_stream(seed, {fnv1a("shuffle"), fnv1a(text)});
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  bool identity = true;
  for (std::size_t i = 0; i < order.size(); ++i) identity = identity && order[i] == i;
  if (identity) std::rotate(order.begin(), order.begin() + 1, order.end());
  std::string out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += parts[order[i]];
  }
  std::string joined;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) joined.push_back(' ');
    joined += parts[i];
  }
  noop = out == joined;
  return noop ? std::string(text) : out;
}

}  // namespace

PerturbedText perturb_prompt(std::string_view text, const PerturbationSpec& spec) {
  if (text.empty()) throw Error(ErrorCode::EmptyText, "cannot perturb an empty prompt");
  const std::string input(text);
  PerturbedText out;
  switch (spec.kind) {
    case PerturbationKind::remove_numbers:
      out.text = std::regex_replace(input, number_pattern(), "");
      break;
    case PerturbationKind::mask_numbers:
      out.text = std::regex_replace(input, number_pattern(), "[NUM]");
      break;
    case PerturbationKind::shuffle_sentences: {
      bool noop = false;
      out.text = shuffle_sentences(text, spec.seed, noop);
      out.noop = noop;
      return out;
    }
    case PerturbationKind::remove_reasoning:
      out.text = remove_cues(input, spec.cues);
      break;
  }
  out.noop = out.text == input;
  return out;
}

}  // namespace inform
