#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <set>
#include <stdexcept>
#include <vector>

#include "qd/env/level.hpp"

namespace qd::env {

enum class Action : int { Up = 0, Down = 1, Left = 2, Right = 3, Use = 4 };
inline constexpr int kActionCount = 5;

enum class Direction : int { Up = 0, Down = 1, Left = 2, Right = 3 };

inline Cell offset(Direction d) {
  switch (d) {
    case Direction::Up: return {-1, 0};
    case Direction::Down: return {1, 0};
    case Direction::Left: return {0, -1};
    case Direction::Right: return {0, 1};
  }
  return {0, 0};
}

enum class Terminal : int { Running = 0, Won, Dead, TimedOut };

struct EnvConfig {
  int step_limit = 200;
  bool explore_reward = false;
  double reward_key = 1.0;
  double reward_kill = 2.0;
  double reward_win = 10.0;

  void validate() const {
    if (step_limit < 1) throw std::invalid_argument("step_limit must be >= 1");
    if (!(reward_key < reward_win))
      throw std::invalid_argument("reward_key must be below reward_win");
  }
};

struct Monster {
  Cell pos;
  bool alive = true;
  bool operator==(const Monster&) const = default;
};

struct GameState {
  Cell avatar_pos;
  Direction avatar_dir = Direction::Down;
  bool has_key = false;
  std::vector<Monster> monsters;
  std::set<Cell> visited;
  std::set<Cell> keys_taken;
  int tick = 0;
  double score = 0.0;
  int monsters_killed = 0;
  Terminal terminal = Terminal::Running;

  bool operator==(const GameState&) const = default;
};

struct EpisodeResult {
  bool won = false;
  bool got_key = false;
  double score = 0.0;
  int steps_used = 0;
  int tiles_visited = 0;
  int monsters_killed = 0;

  bool operator==(const EpisodeResult&) const = default;
};

class SteppedTerminal : public std::logic_error {
 public:
  SteppedTerminal() : std::logic_error("step() called on a terminal state") {}
};

inline GameState reset(const Level& level) {
  GameState s;
  s.avatar_pos = level.avatar_start;
  s.avatar_dir = Direction::Down;
  for (Cell m : level.monster_starts) s.monsters.push_back({m, true});
  s.visited.insert(s.avatar_pos);
  return s;
}

namespace detail {

inline bool passable(const Level& lvl, const GameState& s, Cell target) {
  Tile t = lvl.at(target);
  if (t == Tile::Wall) return false;
  if (t == Tile::Door && !s.has_key) return false;  // closed door blocks
  return true;
}

inline bool monster_passable(const Level& lvl, Cell target) {
  Tile t = lvl.at(target);
  return t != Tile::Wall && t != Tile::Door;
}

}  // namespace detail

// One game tick. Phase order: avatar action, pickups/win, monster moves
// (every second tick), collision, explore reward, tick/timeout. The order
// is part of the environment contract since scores depend on it.
inline void step(GameState& s, const Level& lvl, Action action,
                 const EnvConfig& cfg) {
  if (s.terminal != Terminal::Running) throw SteppedTerminal();

  // 1. avatar action
  if (action == Action::Use) {
    Cell faced = {s.avatar_pos.row + offset(s.avatar_dir).row,
                  s.avatar_pos.col + offset(s.avatar_dir).col};
    for (auto& m : s.monsters) {
      if (m.alive && m.pos == faced) {
        m.alive = false;
        s.monsters_killed += 1;
        s.score += cfg.reward_kill;
      }
    }
  } else {
    Direction d = static_cast<Direction>(static_cast<int>(action));
    s.avatar_dir = d;
    Cell target = {s.avatar_pos.row + offset(d).row,
                   s.avatar_pos.col + offset(d).col};
    if (detail::passable(lvl, s, target)) s.avatar_pos = target;
  }

  // 2. pickups and win
  Tile here = lvl.at(s.avatar_pos);
  if (here == Tile::Key && !s.keys_taken.count(s.avatar_pos)) {
    s.keys_taken.insert(s.avatar_pos);
    s.has_key = true;
    s.score += cfg.reward_key;
  } else if (here == Tile::Door && s.has_key) {
    s.terminal = Terminal::Won;
    s.score += cfg.reward_win;
  }

  if (s.terminal == Terminal::Running) {
    // 3. monster phase: half avatar speed, greedy Manhattan chase,
    //    tie-break Up, Down, Left, Right; walls and doors block.
    if (s.tick % 2 == 1) {
      for (auto& m : s.monsters) {
        if (!m.alive) continue;
        int best = std::abs(m.pos.row - s.avatar_pos.row) +
                   std::abs(m.pos.col - s.avatar_pos.col);
        Cell best_pos = m.pos;
        for (Direction d : {Direction::Up, Direction::Down, Direction::Left,
                            Direction::Right}) {
          Cell cand = {m.pos.row + offset(d).row, m.pos.col + offset(d).col};
          if (!detail::monster_passable(lvl, cand)) continue;
          int dist = std::abs(cand.row - s.avatar_pos.row) +
                     std::abs(cand.col - s.avatar_pos.col);
          if (dist < best) {
            best = dist;
            best_pos = cand;
          }
        }
        m.pos = best_pos;
      }
    }

    // 4. collision
    for (const auto& m : s.monsters) {
      if (m.alive && m.pos == s.avatar_pos) {
        s.terminal = Terminal::Dead;
        break;
      }
    }

    // 5. explore
    if (!s.visited.count(s.avatar_pos)) {
      s.visited.insert(s.avatar_pos);
      if (cfg.explore_reward) s.score += 1.0;
    }
  }

  // 6. tick / timeout
  s.tick += 1;
  if (s.terminal == Terminal::Running && s.tick >= cfg.step_limit)
    s.terminal = Terminal::TimedOut;
}

using PolicyFn = std::function<Action(const GameState&, const Level&)>;

inline EpisodeResult run_episode(const Level& level, const PolicyFn& policy,
                                 const EnvConfig& cfg) {
  GameState s = reset(level);
  while (s.terminal == Terminal::Running)
    step(s, level, policy(s, level), cfg);
  EpisodeResult r;
  r.won = s.terminal == Terminal::Won;
  r.got_key = s.has_key;
  r.score = s.score;
  r.steps_used = s.tick;
  r.tiles_visited = static_cast<int>(s.visited.size());
  r.monsters_killed = s.monsters_killed;
  return r;
}

}  // namespace qd::env
