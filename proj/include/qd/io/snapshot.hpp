#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qd/archive/elite_map.hpp"
#include "qd/archive/genome_store.hpp"
#include "qd/policy/genome.hpp"

namespace qd::io {

class CorruptSnapshot : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shortest round-trip decimal representation.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw CorruptSnapshot("bad numeric value: '" + s + "'");
  return v;
}

inline std::string scheme_token(const archive::FeatureScheme& s) {
  return (s.kind == archive::Scheme::Win ? "win-" : "keywin-") +
         std::to_string(s.level_count);
}

inline archive::FeatureScheme parse_scheme_token(const std::string& t) {
  archive::FeatureScheme s;
  auto dash = t.find('-');
  if (dash == std::string::npos)
    throw CorruptSnapshot("bad scheme token: " + t);
  std::string kind = t.substr(0, dash);
  if (kind == "win") s.kind = archive::Scheme::Win;
  else if (kind == "keywin") s.kind = archive::Scheme::KeyWin;
  else throw CorruptSnapshot("bad scheme token: " + t);
  s.level_count = std::stoi(t.substr(dash + 1));
  if (s.level_count < 1 || s.level_count > 31)
    throw CorruptSnapshot("bad scheme level count: " + t);
  return s;
}

// Genome snapshot: one header line "genome id parent_id param_count
// topology_hash" ('-' for no parent), then one parameter per line at full
// round-trip precision.
inline void write_genome(std::ostream& os, const policy::Genome& g,
                         std::uint64_t topology_hash) {
  os << "genome " << g.id << ' '
     << (g.parent_id ? std::to_string(*g.parent_id) : std::string("-")) << ' '
     << g.params.size() << ' ' << topology_hash << '\n';
  for (double p : g.params) os << format_double(p) << '\n';
}

inline policy::Genome read_genome(std::istream& is,
                                  std::uint64_t* topology_hash = nullptr) {
  std::string line;
  if (!std::getline(is, line))
    throw CorruptSnapshot("unexpected end of genome snapshot");
  std::istringstream hdr(line);
  std::string tag, parent;
  policy::Genome g;
  std::uint64_t count = 0, hash = 0;
  if (!(hdr >> tag >> g.id >> parent >> count >> hash) || tag != "genome")
    throw CorruptSnapshot("bad genome header: '" + line + "'");
  if (parent != "-") g.parent_id = std::stoull(parent);
  if (topology_hash) *topology_hash = hash;
  g.params.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    if (!std::getline(is, line))
      throw CorruptSnapshot("truncated genome parameters (id " +
                            std::to_string(g.id) + ")");
    g.params.push_back(parse_double(line));
  }
  return g;
}

// Archive snapshot: header, one tab-separated record per occupied cell,
// then the referenced genome snapshots.
//   feature_bits TAB scheme TAB score TAB timesteps TAB found_at TAB genome_id
inline void write_map(std::ostream& os, const archive::EliteMap& map) {
  os << "map " << scheme_token(map.scheme()) << ' '
     << (map.criterion() == archive::Criterion::MaxScore ? "max_score"
                                                         : "min_timesteps")
     << ' ' << map.size() << '\n';
  for (const auto& [bits, e] : map.cells()) {
    os << bits << '\t' << scheme_token(map.scheme()) << '\t'
       << format_double(e.score) << '\t' << e.timesteps << '\t' << e.found_at
       << '\t' << e.genome_id << '\n';
  }
}

inline archive::EliteMap read_map(std::istream& is) {
  std::string line;
  if (!std::getline(is, line))
    throw CorruptSnapshot("unexpected end of map snapshot");
  std::istringstream hdr(line);
  std::string tag, scheme_tok, crit_tok;
  std::uint64_t count = 0;
  if (!(hdr >> tag >> scheme_tok >> crit_tok >> count) || tag != "map")
    throw CorruptSnapshot("bad map header: '" + line + "'");
  auto scheme = parse_scheme_token(scheme_tok);
  archive::Criterion crit;
  if (crit_tok == "max_score") crit = archive::Criterion::MaxScore;
  else if (crit_tok == "min_timesteps") crit = archive::Criterion::MinTimesteps;
  else throw CorruptSnapshot("bad map criterion: " + crit_tok);

  archive::EliteMap map(scheme, crit);
  for (std::uint64_t i = 0; i < count; ++i) {
    if (!std::getline(is, line))
      throw CorruptSnapshot("truncated map records at cell " +
                            std::to_string(i));
    std::vector<std::string> f;
    std::string cur;
    for (char c : line) {
      if (c == '\t') {
        f.push_back(cur);
        cur.clear();
      } else cur.push_back(c);
    }
    f.push_back(cur);
    if (f.size() != 6)
      throw CorruptSnapshot("bad map record: '" + line + "'");
    archive::BehaviorFeature feat{scheme, std::stoull(f[0])};
    archive::EliteEntry e;
    e.score = parse_double(f[2]);
    e.timesteps = std::stoll(f[3]);
    e.found_at = std::stoull(f[4]);
    e.genome_id = std::stoull(f[5]);
    if (!map.try_insert(feat, e))
      throw CorruptSnapshot("duplicate map record: '" + line + "'");
  }
  return map;
}

inline void write_store(std::ostream& os, const archive::GenomeStore& store,
                        std::uint64_t topology_hash) {
  os << "genomes " << store.size() << '\n';
  store.for_each([&](const policy::Genome& g, int refs) {
    os << "refs " << refs << '\n';
    write_genome(os, g, topology_hash);
  });
}

inline archive::GenomeStore read_store(std::istream& is,
                                       std::uint64_t* topology_hash = nullptr) {
  std::string line;
  if (!std::getline(is, line))
    throw CorruptSnapshot("unexpected end of genome store");
  std::istringstream hdr(line);
  std::string tag;
  std::uint64_t count = 0;
  if (!(hdr >> tag >> count) || tag != "genomes")
    throw CorruptSnapshot("bad genome store header: '" + line + "'");
  archive::GenomeStore store;
  for (std::uint64_t i = 0; i < count; ++i) {
    if (!std::getline(is, line))
      throw CorruptSnapshot("truncated genome store");
    std::istringstream rh(line);
    std::string rtag;
    int refs = 0;
    if (!(rh >> rtag >> refs) || rtag != "refs" || refs < 1)
      throw CorruptSnapshot("bad refs line: '" + line + "'");
    auto g = read_genome(is, topology_hash);
    for (int r = 0; r < refs; ++r) store.retain(g);
  }
  return store;
}

}  // namespace qd::io
