// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "inform/diffcore/tensor.hpp"

namespace inform {

/// Lowercased whitespace tokens with leading/trailing punctuation trimmed.
std::vector<std::string> tokenize(std::string_view text);

/// Sentence segments split after '.', '?' or '!', trimmed, terminators kept.
std::vector<std::string> split_sentences(std::string_view text);

/// Deterministic stand-in for a frozen text encoder.
///
/// The first `dim - dim/4` coordinates hold signed hashed token counts (a
/// bag of words, so token order inside the text is irrelevant). The last
/// `dim/4` coordinates hold signed hashed counts of adjacent sentence pairs,
/// where a sentence is identified by its token multiset; this channel is the
/// only one that sees sentence order. Each channel is L2-normalized, the
/// sentence channel is weighted by `kOrderChannelWeight`, and the
/// concatenation is normalized again.
class PromptEncoder {
 public:
  static constexpr double kOrderChannelWeight = 0.5;

  explicit PromptEncoder(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t token_channel() const noexcept { return dim_ - dim_ / 4; }
  std::size_t order_channel() const noexcept { return dim_ / 4; }

  Vector encode(std::string_view text) const;

 private:
  std::size_t dim_;
};

Vector encode_prompt(std::string_view text, std::size_t dim);

}  // namespace inform
