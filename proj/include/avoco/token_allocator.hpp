// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace avoco {

inline constexpr std::string_view kVocoSpelling = "<voco>";
inline constexpr std::string_view kPlaceholderSpelling = "<ph>";

struct Token {
  enum class Kind { kText, kPlaceholder, kVoco };

  Kind kind = Kind::kText;
  std::string text;  // only meaningful for kText

  static Token make_text(std::string id) { return {Kind::kText, std::move(id)}; }
  static Token placeholder() { return {Kind::kPlaceholder, {}}; }
  static Token voco() { return {Kind::kVoco, {}}; }

  friend bool operator==(const Token&, const Token&) = default;
};

using TokenSequence = std::vector<Token>;

/// Replaces the single placeholder with `count` consecutive voco tokens.
/// Throws StructureError unless exactly one placeholder is present and
/// ParameterError for count < 1.
TokenSequence expand(const TokenSequence& sequence, int count);

struct CostModel {
  double text = 1.0;
  double voco = 1.0;
};

/// Sum of per-token costs. Throws StructureError if a placeholder remains.
double sequence_cost(const TokenSequence& sequence, const CostModel& model = {});

/// Whitespace-separated tokens; "<voco>" and "<ph>" are reserved.
TokenSequence parse_tokens(std::string_view line);
std::string format_tokens(const TokenSequence& sequence);

}  // namespace avoco
