#include "predaspect/context.hpp"

#include <algorithm>
#include <charconv>

#include "predaspect/error.hpp"

namespace predaspect {

ContextSpec ContextSpec::window_of(std::size_t k) {
  if (k == 0) throw ConfigError("context window size must be at least 1");
  return {Kind::kWindow, k};
}

ContextSpec parse_context_spec(std::string_view text) {
  if (text == "verb") return ContextSpec::verb_only();
  if (text == "dep-head") return ContextSpec::dep_head();
  if (text == "dep-children") return ContextSpec::dep_children();
  if (text == "dep-full") return ContextSpec::dep_full();
  if (text == "sentence") return ContextSpec::full_sentence();
  if (text.starts_with("window:")) {
    const auto num = text.substr(7);
    std::size_t k = 0;
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), k);
    if (ec == std::errc() && ptr == num.data() + num.size() && k >= 1) {
      return ContextSpec::window_of(k);
    }
  }
  throw ConfigError("invalid context '" + std::string(text) +
                    "' (expected verb, window:K, dep-head, dep-children, dep-full or sentence)");
}

std::string to_string(const ContextSpec& spec) {
  switch (spec.kind) {
    case ContextSpec::Kind::kVerbOnly:
      return "verb";
    case ContextSpec::Kind::kWindow:
      return "window:" + std::to_string(spec.window);
    case ContextSpec::Kind::kDepHead:
      return "dep-head";
    case ContextSpec::Kind::kDepChildren:
      return "dep-children";
    case ContextSpec::Kind::kDepFull:
      return "dep-full";
    case ContextSpec::Kind::kFullSentence:
      return "sentence";
  }
  return "unknown";
}

std::vector<std::size_t> extract_context(std::span<const Token> tokens, std::size_t target,
                                         const ContextSpec& spec) {
  std::vector<std::size_t> out;
  const std::size_t n = tokens.size();
  if (target >= n) {
    throw DataError("target index " + std::to_string(target) + " out of range for a " +
                    std::to_string(n) + "-token sentence");
  }
  auto add_head = [&] {
    if (tokens[target].head) out.push_back(*tokens[target].head);
  };
  auto add_children = [&] {
    for (const auto& t : tokens) {
      if (t.head && *t.head == target) out.push_back(t.index);
    }
  };

  switch (spec.kind) {
    case ContextSpec::Kind::kVerbOnly:
      break;
    case ContextSpec::Kind::kWindow: {
      const std::size_t lo = target >= spec.window ? target - spec.window : 0;
      const std::size_t hi = std::min(n - 1, target + spec.window);
      for (std::size_t i = lo; i <= hi; ++i) {
        if (i != target) out.push_back(i);
      }
      break;
    }
    case ContextSpec::Kind::kDepHead:
      add_head();
      break;
    case ContextSpec::Kind::kDepChildren:
      add_children();
      break;
    case ContextSpec::Kind::kDepFull:
      add_head();
      add_children();
      std::sort(out.begin(), out.end());
      break;
    case ContextSpec::Kind::kFullSentence:
      for (std::size_t i = 0; i < n; ++i) {
        if (i != target) out.push_back(i);
      }
      break;
  }
  return out;
}

std::vector<std::size_t> extract_context(const Instance& instance, const ContextSpec& spec) {
  return extract_context(instance.tokens(), instance.target, spec);
}

}  // namespace predaspect
