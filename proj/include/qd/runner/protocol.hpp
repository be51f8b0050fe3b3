#pragma once

#include <cstdint>
#include <sstream>
#include <string>

#include "qd/archive/elite_map.hpp"
#include "qd/io/snapshot.hpp"
#include "qd/policy/genome.hpp"

namespace qd::runner {

// Master -> worker unit of work.
struct Task {
  std::uint64_t task_id = 0;
  policy::Genome genome;
  std::uint64_t issued_at = 0;  // evaluation counter when issued
};

// Worker -> master reply. `failed` carries evaluator faults back to the
// master, which owns the reissue policy.
struct ResultMsg {
  std::uint64_t task_id = 0;
  archive::EvaluationResult result;
  int worker_id = 0;
  std::int64_t wall_time_ms = 0;
  bool failed = false;
  std::string error;
};

inline void write_eval_result(std::ostream& os,
                              const archive::EvaluationResult& r) {
  os << "evalresult " << io::scheme_token(r.feature.scheme) << ' '
     << r.feature.bits << ' ' << io::format_double(r.total_score) << ' '
     << r.total_timesteps << ' ' << r.per_level.size() << '\n';
  for (const auto& ep : r.per_level) {
    os << ep.won << ' ' << ep.got_key << ' ' << io::format_double(ep.score)
       << ' ' << ep.steps_used << ' ' << ep.tiles_visited << ' '
       << ep.monsters_killed << '\n';
  }
}

inline archive::EvaluationResult read_eval_result(std::istream& is) {
  std::string tag, scheme_tok, score;
  size_t levels = 0;
  archive::EvaluationResult r;
  if (!(is >> tag >> scheme_tok >> r.feature.bits >> score >>
        r.total_timesteps >> levels) ||
      tag != "evalresult")
    throw io::CorruptSnapshot("bad evalresult header");
  r.feature.scheme = io::parse_scheme_token(scheme_tok);
  r.total_score = io::parse_double(score);
  for (size_t i = 0; i < levels; ++i) {
    env::EpisodeResult ep;
    std::string ep_score;
    if (!(is >> ep.won >> ep.got_key >> ep_score >> ep.steps_used >>
          ep.tiles_visited >> ep.monsters_killed))
      throw io::CorruptSnapshot("truncated evalresult");
    ep.score = io::parse_double(ep_score);
    r.per_level.push_back(ep);
  }
  is.ignore();
  return r;
}

// Length-prefixed frame: 4-byte big-endian payload size, then the payload.
// Used verbatim by process-separated workers; in-process workers exchange
// the same records through queues.
inline std::string frame(const std::string& payload) {
  std::uint32_t n = static_cast<std::uint32_t>(payload.size());
  std::string out;
  out.push_back(static_cast<char>((n >> 24) & 0xff));
  out.push_back(static_cast<char>((n >> 16) & 0xff));
  out.push_back(static_cast<char>((n >> 8) & 0xff));
  out.push_back(static_cast<char>(n & 0xff));
  return out + payload;
}

inline std::string unframe(std::istream& is) {
  unsigned char hdr[4];
  if (!is.read(reinterpret_cast<char*>(hdr), 4))
    throw io::CorruptSnapshot("truncated frame header");
  std::uint32_t n = (std::uint32_t(hdr[0]) << 24) |
                    (std::uint32_t(hdr[1]) << 16) |
                    (std::uint32_t(hdr[2]) << 8) | std::uint32_t(hdr[3]);
  std::string payload(n, '\0');
  if (!is.read(payload.data(), n))
    throw io::CorruptSnapshot("truncated frame payload");
  return payload;
}

inline std::string encode_task(const Task& t, std::uint64_t topology_hash) {
  std::ostringstream os;
  os << "task " << t.task_id << ' ' << t.issued_at << '\n';
  io::write_genome(os, t.genome, topology_hash);
  return frame(os.str());
}

inline Task decode_task(std::istream& is) {
  std::istringstream body(unframe(is));
  Task t;
  std::string tag;
  if (!(body >> tag >> t.task_id >> t.issued_at) || tag != "task")
    throw io::CorruptSnapshot("bad task record");
  body.ignore();
  t.genome = io::read_genome(body);
  return t;
}

inline std::string encode_result(const ResultMsg& m) {
  std::ostringstream os;
  os << "result " << m.task_id << ' ' << m.worker_id << ' ' << m.wall_time_ms
     << ' ' << (m.failed ? 1 : 0) << '\n';
  if (m.failed)
    os << m.error << '\n';
  else
    write_eval_result(os, m.result);
  return frame(os.str());
}

inline ResultMsg decode_result(std::istream& is) {
  std::istringstream body(unframe(is));
  ResultMsg m;
  std::string tag;
  int failed = 0;
  if (!(body >> tag >> m.task_id >> m.worker_id >> m.wall_time_ms >>
        failed) ||
      tag != "result")
    throw io::CorruptSnapshot("bad result record");
  m.failed = failed != 0;
  body.ignore();
  if (m.failed)
    std::getline(body, m.error);
  else
    m.result = read_eval_result(body);
  return m;
}

}  // namespace qd::runner
