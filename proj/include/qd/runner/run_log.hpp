#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qd/io/snapshot.hpp"

namespace qd::runner {

class MalformedLog : public std::runtime_error {
 public:
  MalformedLog(const std::string& what, int line)
      : std::runtime_error(what + " at line " + std::to_string(line)),
        line(line) {}
  int line;
};

struct RunLogRecord {
  std::uint64_t evaluation_index = 0;
  std::uint64_t archive_size = 0;
  int most_levels_solved = 0;
  double best_score = 0.0;
  bool accepted = false;
  std::int64_t unix_ms = 0;
};

// Wall-clock source; injectable so tests and resumed runs can produce
// byte-identical logs.
using Clock = std::function<std::int64_t()>;

inline std::int64_t system_clock_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

inline constexpr const char* kRunLogHeader =
    "evaluation,archive_size,most_levels_solved,best_score,accepted,unix_ms";

class RunLog {
 public:
  void append(const RunLogRecord& r) { records_.push_back(r); }
  const std::vector<RunLogRecord>& records() const { return records_; }
  size_t size() const { return records_.size(); }

  void write_csv(std::ostream& os) const {
    os << kRunLogHeader << '\n';
    for (const auto& r : records_) {
      os << r.evaluation_index << ',' << r.archive_size << ','
         << r.most_levels_solved << ',' << io::format_double(r.best_score)
         << ',' << (r.accepted ? 1 : 0) << ',' << r.unix_ms << '\n';
    }
  }

  static RunLog read_csv(std::istream& is) {
    RunLog log;
    std::string line;
    int lineno = 0;
    if (!std::getline(is, line)) throw MalformedLog("empty log", 0);
    ++lineno;
    if (line != kRunLogHeader) throw MalformedLog("bad header", 1);
    while (std::getline(is, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::vector<std::string> f;
      std::string cur;
      for (char c : line) {
        if (c == ',') {
          f.push_back(cur);
          cur.clear();
        } else cur.push_back(c);
      }
      f.push_back(cur);
      if (f.size() != 6) throw MalformedLog("bad record", lineno);
      RunLogRecord r;
      try {
        r.evaluation_index = std::stoull(f[0]);
        r.archive_size = std::stoull(f[1]);
        r.most_levels_solved = std::stoi(f[2]);
        r.best_score = io::parse_double(f[3]);
        r.accepted = f[4] == "1";
        r.unix_ms = std::stoll(f[5]);
      } catch (const std::exception&) {
        throw MalformedLog("bad record", lineno);
      }
      log.append(r);
    }
    if (log.records_.empty()) throw MalformedLog("log has no records", lineno);
    return log;
  }

 private:
  std::vector<RunLogRecord> records_;
};

}  // namespace qd::runner
