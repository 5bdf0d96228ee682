#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "predaspect/corpus.hpp"

namespace predaspect {

// Which tokens around the target verb form its context set.
struct ContextSpec {
  enum class Kind { kVerbOnly, kWindow, kDepHead, kDepChildren, kDepFull, kFullSentence };

  Kind kind = Kind::kVerbOnly;
  std::size_t window = 0;  // only meaningful for kWindow, always >= 1 there

  static ContextSpec verb_only() { return {Kind::kVerbOnly, 0}; }
  static ContextSpec window_of(std::size_t k);
  static ContextSpec dep_head() { return {Kind::kDepHead, 0}; }
  static ContextSpec dep_children() { return {Kind::kDepChildren, 0}; }
  static ContextSpec dep_full() { return {Kind::kDepFull, 0}; }
  static ContextSpec full_sentence() { return {Kind::kFullSentence, 0}; }

  friend bool operator==(const ContextSpec&, const ContextSpec&) = default;
};

// `verb`, `window:K`, `dep-head`, `dep-children`, `dep-full`, `sentence`.
ContextSpec parse_context_spec(std::string_view text);
std::string to_string(const ContextSpec& spec);

// Token indices of the context set in ascending order. The target itself is
// never included; every kind may yield an empty list.
std::vector<std::size_t> extract_context(std::span<const Token> tokens, std::size_t target,
                                         const ContextSpec& spec);
std::vector<std::size_t> extract_context(const Instance& instance, const ContextSpec& spec);

}  // namespace predaspect
