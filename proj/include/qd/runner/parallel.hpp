#pragma once

#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

#include "qd/algorithms/evaluate.hpp"
#include "qd/config/experiment_config.hpp"
#include "qd/runner/protocol.hpp"
#include "qd/runner/run_log.hpp"

namespace qd::runner {

namespace detail {

template <typename T>
class BlockingQueue {
 public:
  void push(T v) {
    {
      std::lock_guard<std::mutex> lk(m_);
      q_.push_back(std::move(v));
    }
    cv_.notify_one();
  }
  T pop() {
    std::unique_lock<std::mutex> lk(m_);
    cv_.wait(lk, [&] { return !q_.empty(); });
    T v = std::move(q_.front());
    q_.pop_front();
    return v;
  }

 private:
  std::mutex m_;
  std::condition_variable cv_;
  std::deque<T> q_;
};

}  // namespace detail

struct DroppedTask {
  std::uint64_t task_id = 0;
  int failures = 0;
  std::string last_error;
};

// Master/worker execution. The master (the calling thread) owns all driver
// and archive state; workers are stateless evaluators fed through queues.
// Up to worker_count tasks are kept in flight and results are applied in
// arrival order, so the final archive can differ from a sequential run of
// the same seed once worker_count > 1.
class ParallelRunner {
 public:
  using Evaluator = std::function<archive::EvaluationResult(
      const policy::Genome&, int worker_id)>;
  static constexpr int kMaxTaskFailures = 3;

  ParallelRunner(config::ExperimentConfig cfg, int worker_count,
                 Clock clock = system_clock_ms, Evaluator evaluator = nullptr)
      : cfg_(std::move(cfg)),
        worker_count_(worker_count),
        clock_(std::move(clock)),
        levels_(config::load_levels(cfg_.level_manifest)),
        topo_(config::make_topology(cfg_)),
        scheme_(config::make_scheme(cfg_, static_cast<int>(levels_.size()))),
        driver_(config::make_driver(cfg_, static_cast<int>(levels_.size()))),
        rng_(cfg_.seed),
        evaluator_(std::move(evaluator)) {
    config::validate(cfg_);
    if (worker_count_ < 1)
      throw config::ConfigError("worker_count must be >= 1");
    if (!evaluator_) {
      evaluator_ = [this](const policy::Genome& g, int) {
        return algorithms::evaluate_candidate(g, levels_, cfg_.env, topo_,
                                              cfg_.observation, scheme_);
      };
    }
  }

  const algorithms::Driver& driver() const { return *driver_; }
  const RunLog& log() const { return log_; }
  const std::vector<DroppedTask>& dropped_tasks() const { return dropped_; }
  std::uint64_t reissues() const { return reissues_; }

  void run_all() {
    std::vector<std::thread> workers;
    for (int w = 0; w < worker_count_; ++w)
      workers.emplace_back([this, w] { worker_loop(w); });

    std::map<std::uint64_t, Task> in_flight;
    std::map<std::uint64_t, int> failures;
    std::uint64_t applied = 0;

    auto issue_one = [&] {
      Task t;
      t.task_id = next_task_id_++;
      t.genome = driver_->propose(rng_, ids_);
      t.issued_at = applied;
      in_flight.emplace(t.task_id, t);
      tasks_.push(t);
    };

    while (applied < cfg_.budget) {
      while (in_flight.size() <
                 static_cast<size_t>(worker_count_) &&
             applied + in_flight.size() < cfg_.budget)
        issue_one();

      ResultMsg msg = results_.pop();
      auto it = in_flight.find(msg.task_id);
      if (it == in_flight.end()) continue;  // already applied or dropped

      if (msg.failed) {
        int n = ++failures[msg.task_id];
        if (n < kMaxTaskFailures) {
          ++reissues_;
          tasks_.push(it->second);  // reissue the same task
        } else {
          dropped_.push_back({msg.task_id, n, msg.error});
          in_flight.erase(it);  // a fresh proposal fills the slot
        }
        continue;
      }

      Task task = std::move(it->second);
      in_flight.erase(it);  // at-most-once application
      ++applied;
      bool accepted =
          driver_->apply(task.genome, msg.result, applied, rng_, ids_);
      auto stats = driver_->primary_map().stats();
      RunLogRecord rec;
      rec.evaluation_index = applied;
      rec.archive_size = stats.occupied_cells;
      rec.most_levels_solved = stats.most_levels_solved;
      rec.best_score = stats.occupied_cells ? stats.best_score : 0.0;
      rec.accepted = accepted;
      rec.unix_ms = clock_();
      log_.append(rec);
    }

    for (int w = 0; w < worker_count_; ++w) tasks_.push(Task{});  // poison
    for (auto& t : workers) t.join();
  }

 private:
  void worker_loop(int worker_id) {
    for (;;) {
      Task t = tasks_.pop();
      if (t.task_id == 0) return;  // poison
      ResultMsg msg;
      msg.task_id = t.task_id;
      msg.worker_id = worker_id;
      auto start = std::chrono::steady_clock::now();
      try {
        msg.result = evaluator_(t.genome, worker_id);
      } catch (const std::exception& e) {
        msg.failed = true;
        msg.error = e.what();
      }
      msg.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();
      results_.push(msg);
    }
  }

  config::ExperimentConfig cfg_;
  int worker_count_;
  Clock clock_;
  std::vector<env::Level> levels_;
  policy::NetworkTopology topo_;
  archive::FeatureScheme scheme_;
  std::unique_ptr<algorithms::Driver> driver_;
  Rng rng_;
  IdSource ids_;
  Evaluator evaluator_;
  RunLog log_;
  detail::BlockingQueue<Task> tasks_;
  detail::BlockingQueue<ResultMsg> results_;
  std::uint64_t next_task_id_ = 1;
  std::uint64_t reissues_ = 0;
  std::vector<DroppedTask> dropped_;
};

}  // namespace qd::runner
