#pragma once

#include <vector>

#include "qd/env/game.hpp"

namespace qd::policy {

enum class ObsMode { OneHot, CharMap };

inline constexpr int kEntityKinds = 6;  // wall floor key door avatar monster

// Channel indices for OneHot mode.
enum : int {
  kChWall = 0,
  kChFloor = 1,
  kChKey = 2,
  kChDoor = 3,
  kChAvatar = 4,
  kChMonster = 5,
};

struct Observation {
  ObsMode mode = ObsMode::OneHot;
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;  // (channels, H, W)

  double at(int ch, int r, int c) const {
    return data[(ch * height + r) * width + c];
  }
  double& at(int ch, int r, int c) {
    return data[(ch * height + r) * width + c];
  }
};

namespace detail {

inline int entity_at(const env::GameState& s, const env::Level& lvl, int r,
                     int c) {
  env::Cell cell{r, c};
  if (s.avatar_pos == cell) return kChAvatar;
  for (const auto& m : s.monsters)
    if (m.alive && m.pos == cell) return kChMonster;
  switch (lvl.at(r, c)) {
    case env::Tile::Wall: return kChWall;
    case env::Tile::Key:
      return s.keys_taken.count(cell) ? kChFloor : kChKey;
    case env::Tile::Door: return kChDoor;
    default: return kChFloor;  // floor, vacated starts
  }
}

}  // namespace detail

// OneHot: one channel per entity kind, exactly one channel hot per cell.
// CharMap: single channel of normalized per-kind codes. Collected keys and
// dead monsters read as floor.
inline Observation encode(const env::GameState& s, const env::Level& lvl,
                          ObsMode mode) {
  Observation obs;
  obs.mode = mode;
  obs.height = lvl.height;
  obs.width = lvl.width;
  obs.channels = mode == ObsMode::OneHot ? kEntityKinds : 1;
  obs.data.assign(static_cast<size_t>(obs.channels) * lvl.height * lvl.width,
                  0.0);
  for (int r = 0; r < lvl.height; ++r) {
    for (int c = 0; c < lvl.width; ++c) {
      int kind = detail::entity_at(s, lvl, r, c);
      if (mode == ObsMode::OneHot) {
        obs.at(kind, r, c) = 1.0;
      } else {
        obs.at(0, r, c) = static_cast<double>(kind) / (kEntityKinds - 1);
      }
    }
  }
  return obs;
}

}  // namespace qd::policy
