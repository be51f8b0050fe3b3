#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qd/env/game.hpp"

namespace qd::archive {

class SchemeMismatch : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Win: one bit per level (win). KeyWin: two bits per level, bit 2i = key,
// bit 2i+1 = win. Level 0 occupies the lowest-order bits.
enum class Scheme { Win, KeyWin };

struct FeatureScheme {
  Scheme kind = Scheme::Win;
  int level_count = 10;

  int bit_count() const {
    return kind == Scheme::Win ? level_count : 2 * level_count;
  }
  std::uint64_t cell_count() const { return 1ull << bit_count(); }
  bool operator==(const FeatureScheme&) const = default;
};

struct BehaviorFeature {
  FeatureScheme scheme;
  std::uint64_t bits = 0;

  bool operator==(const BehaviorFeature&) const = default;
  bool operator<(const BehaviorFeature& o) const { return bits < o.bits; }

  int wins() const {
    if (scheme.kind == Scheme::Win) return std::popcount(bits);
    int n = 0;
    for (int i = 0; i < scheme.level_count; ++i)
      n += (bits >> (2 * i + 1)) & 1;
    return n;
  }
};

inline BehaviorFeature feature_from_results(
    const std::vector<env::EpisodeResult>& per_level,
    const FeatureScheme& scheme) {
  if (static_cast<int>(per_level.size()) != scheme.level_count)
    throw SchemeMismatch("result count does not match scheme level count");
  BehaviorFeature f;
  f.scheme = scheme;
  for (int i = 0; i < scheme.level_count; ++i) {
    const auto& r = per_level[i];
    if (scheme.kind == Scheme::Win) {
      if (r.won) f.bits |= 1ull << i;
    } else {
      if (r.got_key) f.bits |= 1ull << (2 * i);
      if (r.won) f.bits |= 1ull << (2 * i + 1);
    }
  }
  return f;
}

// Win: "1-0-1-0-..." with level 1 first. KeyWin: per-level tokens
// "0" / "k" / "w" / "kw".
inline std::string feature_to_string(const BehaviorFeature& f) {
  std::string out;
  for (int i = 0; i < f.scheme.level_count; ++i) {
    if (i) out.push_back('-');
    if (f.scheme.kind == Scheme::Win) {
      out.push_back((f.bits >> i) & 1 ? '1' : '0');
    } else {
      bool key = (f.bits >> (2 * i)) & 1;
      bool win = (f.bits >> (2 * i + 1)) & 1;
      if (key && win) out += "kw";
      else if (key) out += "k";
      else if (win) out += "w";
      else out += "0";
    }
  }
  return out;
}

inline BehaviorFeature feature_from_string(const std::string& text,
                                           const FeatureScheme& scheme) {
  BehaviorFeature f;
  f.scheme = scheme;
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : text) {
    if (c == '-') {
      tokens.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  tokens.push_back(cur);
  if (static_cast<int>(tokens.size()) != scheme.level_count)
    throw SchemeMismatch("feature string token count mismatch: " + text);
  for (int i = 0; i < scheme.level_count; ++i) {
    const std::string& t = tokens[i];
    if (scheme.kind == Scheme::Win) {
      if (t == "1") f.bits |= 1ull << i;
      else if (t != "0") throw SchemeMismatch("bad feature token: " + t);
    } else {
      if (t == "k") f.bits |= 1ull << (2 * i);
      else if (t == "w") f.bits |= 1ull << (2 * i + 1);
      else if (t == "kw") f.bits |= 3ull << (2 * i);
      else if (t != "0") throw SchemeMismatch("bad feature token: " + t);
    }
  }
  return f;
}

}  // namespace qd::archive
