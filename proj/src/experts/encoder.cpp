// SPDX-License-Identifier: Apache-2.0
#include "inform/experts/encoder.hpp"

#include <cctype>
#include <cmath>

#include "inform/diffcore/rng.hpp"
#include "inform/error.hpp"

namespace inform {

namespace {

bool is_trimmed(unsigned char c) { return std::ispunct(c) != 0 && c != '[' && c != ']'; }

void add_hashed(std::span<double> channel, std::uint64_t h) {
  const std::size_t bucket = static_cast<std::size_t>(h % channel.size());
  channel[bucket] += (h >> 63) != 0 ? -1.0 : 1.0;
}

void normalize_in_place(std::span<double> v, double weight) {
  double s = 0.0;
  for (double x : v) s += x * x;
  if (s == 0.0) return;
  const double scale = weight / std::sqrt(s);
  for (double& x : v) x *= scale;
}

std::uint64_t sentence_key(std::string_view sentence) {
  // Sum of token hashes: independent of token order inside the sentence.
  std::uint64_t key = 0;
  for (const std::string& tok : tokenize(sentence)) key += mix64(fnv1a(tok));
  return key;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    std::size_t a = i;
    std::size_t b = j;
    while (a < b && is_trimmed(static_cast<unsigned char>(text[a]))) ++a;
    while (b > a && is_trimmed(static_cast<unsigned char>(text[b - 1]))) --b;
    if (b > a) {
      std::string tok(text.substr(a, b - a));
      for (char& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      tokens.push_back(std::move(tok));
    }
    i = j;
  }
  return tokens;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    std::size_t a = 0;
    std::size_t b = current.size();
    while (a < b && std::isspace(static_cast<unsigned char>(current[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(current[b - 1]))) --b;
    if (b > a) out.push_back(current.substr(a, b - a));
    current.clear();
  };
  for (char c : text) {
    current.push_back(c);
    if (c == '.' || c == '?' || c == '!') flush();
  }
  flush();
  return out;
}

PromptEncoder::PromptEncoder(std::size_t dim) : dim_(dim) {
  if (dim < 4) throw Error(ErrorCode::InvalidArgument, "encoder dimension must be at least 4");
}

Vector PromptEncoder::encode(std::string_view text) const {
  const std::vector<std::string> tokens = tokenize(text);
  if (tokens.empty()) throw Error(ErrorCode::EmptyText, "prompt has no tokens");

  Vector v(dim_);
  std::span<double> words = v.span().subspan(0, token_channel());
  std::span<double> order = v.span().subspan(token_channel());
  for (const std::string& tok : tokens) add_hashed(words, fnv1a(tok));

  const std::vector<std::string> sentences = split_sentences(text);
  for (std::size_t s = 0; s + 1 < sentences.size(); ++s) {
    add_hashed(order, hash_combine(sentence_key(sentences[s]), sentence_key(sentences[s + 1])));
  }
  normalize_in_place(words, 1.0);
  normalize_in_place(order, kOrderChannelWeight);
  return normalized(v.span());
}

Vector encode_prompt(std::string_view text, std::size_t dim) { return PromptEncoder(dim).encode(text); }

}  // namespace inform
