// SPDX-License-Identifier: Apache-2.0
#include "avoco/token_allocator.hpp"

#include <algorithm>
#include <sstream>

#include "avoco/error.hpp"

namespace avoco {

TokenSequence expand(const TokenSequence& sequence, int count) {
  if (count < 1) throw ParameterError("expansion count must be >= 1, got " + std::to_string(count));
  const auto is_ph = [](const Token& t) { return t.kind == Token::Kind::kPlaceholder; };
  const auto n_ph = std::count_if(sequence.begin(), sequence.end(), is_ph);
  if (n_ph != 1) {
    throw StructureError("expected exactly one placeholder, found " + std::to_string(n_ph));
  }
  const auto at = std::find_if(sequence.begin(), sequence.end(), is_ph);

  TokenSequence out;
  out.reserve(sequence.size() - 1 + static_cast<std::size_t>(count));
  out.insert(out.end(), sequence.begin(), at);
  out.insert(out.end(), static_cast<std::size_t>(count), Token::voco());
  out.insert(out.end(), std::next(at), sequence.end());
  return out;
}

double sequence_cost(const TokenSequence& sequence, const CostModel& model) {
  double cost = 0.0;
  for (const auto& t : sequence) {
    switch (t.kind) {
      case Token::Kind::kText: cost += model.text; break;
      case Token::Kind::kVoco: cost += model.voco; break;
      case Token::Kind::kPlaceholder: throw StructureError("sequence_cost on an unexpanded sequence");
    }
  }
  return cost;
}

TokenSequence parse_tokens(std::string_view line) {
  std::istringstream in{std::string(line)};
  TokenSequence seq;
  std::string word;
  while (in >> word) {
    if (word == kVocoSpelling) {
      seq.push_back(Token::voco());
    } else if (word == kPlaceholderSpelling) {
      seq.push_back(Token::placeholder());
    } else {
      seq.push_back(Token::make_text(word));
    }
  }
  return seq;
}

std::string format_tokens(const TokenSequence& sequence) {
  std::string out;
  for (const auto& t : sequence) {
    if (!out.empty()) out += ' ';
    switch (t.kind) {
      case Token::Kind::kText: out += t.text; break;
      case Token::Kind::kVoco: out += kVocoSpelling; break;
      case Token::Kind::kPlaceholder: out += kPlaceholderSpelling; break;
    }
  }
  return out;
}

}  // namespace avoco
