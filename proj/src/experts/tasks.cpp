// SPDX-License-Identifier: Apache-2.0
#include "inform/experts/tasks.hpp"

#include <array>
#include <cstdio>
#include <string>

#include "inform/error.hpp"

namespace inform {

namespace {

template <std::size_t N>
const char* pick(const std::array<const char*, N>& options, Rng& rng) {
  return options[std::uniform_int_distribution<std::size_t>(0, N - 1)(rng)];
}

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

constexpr std::array<const char*, 8> kNames = {"Tom", "Ana", "Ravi", "Mei", "Lena", "Omar", "Kofi", "Sara"};
constexpr std::array<const char*, 6> kItems = {"apples", "marbles", "books", "coins", "stickers", "pencils"};
constexpr std::array<const char*, 8> kSubjects = {"astronomy", "biology", "chemistry", "history",
                                                  "geography", "economics", "law",       "music"};
constexpr std::array<const char*, 10> kConcepts = {"tidal locking", "osmosis",   "catalysis",     "feudal tenure",
                                                   "plate drift",   "inflation", "common law",    "counterpoint",
                                                   "photosynthesis", "monsoon circulation"};
constexpr std::array<const char*, 8> kTraits = {"gradual", "reversible", "cyclic",   "contested",
                                                "local",   "universal",  "unstable", "well documented"};
constexpr std::array<const char*, 6> kLinks = {"energy transfer", "trade routes", "pressure gradients",
                                               "legal precedent", "cell membranes", "harmonic rules"};
constexpr std::array<const char*, 6> kFunctions = {"sum_even", "max_gap", "dedupe", "running_total", "count_peaks",
                                                   "rotate_left"};
constexpr std::array<const char*, 6> kActions = {"adds the even values of", "finds the largest gap in",
                                                 "removes duplicates from", "accumulates",
                                                 "counts local maxima in", "rotates"};
constexpr std::array<const char*, 4> kResults = {"a single integer", "a new list", "the count as an integer",
                                                 "the transformed list"};
constexpr std::array<const char*, 4> kLetters = {"A", "B", "C", "D"};

PromptInstance finish(TaskTag tag, std::string text, const std::string& answer, const PromptEncoder& encoder) {
  const Vector p = encoder.encode(text);
  const Vector a = encoder.encode(answer);
  std::vector<double> t(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) t[i] = p[i] + 0.5 * a[i];
  char id[32];
  std::snprintf(id, sizeof id, "%.12llx", static_cast<unsigned long long>(fnv1a(text) & 0xffffffffffffULL));
  return {std::string(to_string(tag)) + "-" + id, std::move(text), normalized(t), tag};
}

PromptInstance make_arith(Rng& rng, const PromptEncoder& encoder) {
  const std::string name = pick(kNames, rng);
  const std::string item = pick(kItems, rng);
  const int op = uniform_int(rng, 0, 2);
  int a = uniform_int(rng, 2, 99);
  const int b = uniform_int(rng, 2, 60);
  std::string text;
  int answer = 0;
  std::string op_name;
  const std::string sa = std::to_string(a);
  const std::string sb = std::to_string(b);
  switch (op) {
    case 0:
      text = name + " has " + sa + " " + item + ". " + name + " buys " + sb + " more " + item + ". How many " + item +
             " does " + name + " have now? Let's think step by step.";
      answer = a + b;
      op_name = "sum";
      break;
    case 1:
      a += b;
      text = name + " has " + std::to_string(a) + " " + item + ". " + name + " gives away " + sb + " " + item +
             ". How many " + item + " are left? First, write the starting amount. Then, subtract because some " +
             item + " were given away.";
      answer = a - b;
      op_name = "difference";
      break;
    default:
      text = "Each box holds " + sa + " " + item + ". There are " + sb + " boxes. How many " + item +
             " are there in total? Multiply, therefore count every box.";
      answer = a * b;
      op_name = "product";
      break;
  }
  return finish(TaskTag::arith, std::move(text), "answer " + std::to_string(answer) + " " + op_name, encoder);
}

PromptInstance make_knowledge(Rng& rng, const PromptEncoder& encoder) {
  const std::string subject = pick(kSubjects, rng);
  const std::string concept_name = pick(kConcepts, rng);
  const std::string trait1 = pick(kTraits, rng);
  const std::string trait2 = pick(kTraits, rng);
  const std::string link = pick(kLinks, rng);
  const std::string letter = pick(kLetters, rng);
  std::string text = "The study of " + concept_name + " belongs to " + subject + ". Scholars describe it as " +
                     trait1 + " and " + trait2 + ". It is often linked to " + link + ".";
  if (uniform_int(rng, 0, 2) == 0) text += " It was first described in " + std::to_string(uniform_int(rng, 1600, 1990)) + ".";
  text += " Which statement about " + concept_name + " is correct? Choose option A, B, C or D.";
  return finish(TaskTag::knowledge, std::move(text), "answer option " + letter + " " + concept_name + " " + link,
                encoder);
}

PromptInstance make_code(Rng& rng, const PromptEncoder& encoder) {
  const std::size_t f = std::uniform_int_distribution<std::size_t>(0, kFunctions.size() - 1)(rng);
  const std::string result = pick(kResults, rng);
  std::string text = std::string("Write a function named ") + kFunctions[f] + " that " + kActions[f] +
                     " a list of integers. It should return " + result +
                     ". Handle the empty list without raising an error.";
  return finish(TaskTag::code, std::move(text), std::string("solution ") + kFunctions[f] + " " + kActions[f],
                encoder);
}

}  // namespace

std::string_view to_string(TaskTag tag) noexcept {
  switch (tag) {
    case TaskTag::arith: return "arith";
    case TaskTag::code: return "code";
    case TaskTag::knowledge: return "knowledge";
  }
  return "arith";
}

TaskTag parse_task_tag(std::string_view text) {
  if (text == "arith") return TaskTag::arith;
  if (text == "code") return TaskTag::code;
  if (text == "knowledge") return TaskTag::knowledge;
  throw Error(ErrorCode::ConfigError, "unknown task tag '" + std::string(text) + "'");
}

PromptInstance generate_task(TaskTag tag, Rng& rng, const PromptEncoder& encoder) {
  switch (tag) {
    case TaskTag::arith: return make_arith(rng, encoder);
    case TaskTag::code: return make_code(rng, encoder);
    case TaskTag::knowledge: return make_knowledge(rng, encoder);
  }
  return make_arith(rng, encoder);
}

std::vector<PromptInstance> generate_corpus(const TaskMix& mix, std::size_t count, std::uint64_t seed,
                                            const PromptEncoder& encoder) {
  double total = 0.0;
  for (const auto& [tag, w] : mix) {
    if (w < 0.0) throw Error(ErrorCode::ConfigError, "negative task weight");
    total += w;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::ConfigError, "task mix has no positive weight");

  std::vector<PromptInstance> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = derive_stream(seed, {fnv1a("corpus"), i});
    double u = std::uniform_real_distribution<double>(0.0, total)(rng);
    TaskTag tag = mix.begin()->first;
    for (const auto& [t, w] : mix) {
      tag = t;
      if (u < w) break;
      u -= w;
    }
    PromptInstance p = generate_task(tag, rng, encoder);
    char id[32];
    std::snprintf(id, sizeof id, "-%04zu", i);
    p.id = std::string(to_string(tag)) + id;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace inform
