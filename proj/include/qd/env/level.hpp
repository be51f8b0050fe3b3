#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qd::env {

enum class Tile : std::uint8_t {
  Wall,
  Floor,
  Key,
  Door,
  AvatarStart,
  MonsterStart,
};

struct Cell {
  int row = 0;
  int col = 0;
  bool operator==(const Cell&) const = default;
  bool operator<(const Cell& o) const {
    return row != o.row ? row < o.row : col < o.col;
  }
};

class MalformedLevel : public std::runtime_error {
 public:
  MalformedLevel(const std::string& what, int row, int col)
      : std::runtime_error(what + " at row " + std::to_string(row) + ", col " +
                           std::to_string(col)),
        row(row),
        col(col) {}
  int row;
  int col;
};

// Immutable once parsed; safe to share across evaluator threads.
struct Level {
  int id = 0;
  int height = 0;
  int width = 0;
  std::vector<Tile> grid;  // row-major
  Cell avatar_start;
  std::vector<Cell> monster_starts;
  std::vector<Cell> key_cells;

  Tile at(int r, int c) const { return grid[r * width + c]; }
  Tile at(Cell p) const { return at(p.row, p.col); }
};

inline char tile_char(Tile t) {
  switch (t) {
    case Tile::Wall: return 'w';
    case Tile::Floor: return '.';
    case Tile::Key: return '+';
    case Tile::Door: return 'g';
    case Tile::AvatarStart: return 'A';
    case Tile::MonsterStart: return '3';
  }
  return '?';
}

// ASCII format: 'w' wall, '.' floor, 'A' avatar start, '+' key, 'g' door,
// '3' monster start. Rows newline-delimited, all the same length, border
// entirely wall.
inline Level parse_level(const std::string& text, int id = 0) {
  std::vector<std::string> rows;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      rows.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) rows.push_back(cur);
  while (!rows.empty() && rows.back().empty()) rows.pop_back();

  if (rows.size() < 3) throw MalformedLevel("level too small", 0, 0);
  const int h = static_cast<int>(rows.size());
  const int w = static_cast<int>(rows[0].size());
  if (w < 3) throw MalformedLevel("level too small", 0, 0);
  if (h > 64 || w > 64) throw MalformedLevel("level too large", 0, 0);

  Level lvl;
  lvl.id = id;
  lvl.height = h;
  lvl.width = w;
  lvl.grid.resize(static_cast<size_t>(h) * w);

  int avatars = 0, keys = 0, doors = 0;
  for (int r = 0; r < h; ++r) {
    if (static_cast<int>(rows[r].size()) != w)
      throw MalformedLevel("ragged row", r, static_cast<int>(rows[r].size()));
    for (int c = 0; c < w; ++c) {
      Tile t;
      switch (rows[r][c]) {
        case 'w': t = Tile::Wall; break;
        case '.': t = Tile::Floor; break;
        case '+': t = Tile::Key; break;
        case 'g': t = Tile::Door; break;
        case 'A': t = Tile::AvatarStart; break;
        case '3': t = Tile::MonsterStart; break;
        default:
          throw MalformedLevel(std::string("unknown character '") +
                                   rows[r][c] + "'",
                               r, c);
      }
      bool border = r == 0 || r == h - 1 || c == 0 || c == w - 1;
      if (border && t != Tile::Wall)
        throw MalformedLevel("open border", r, c);
      lvl.grid[r * w + c] = t;
      if (t == Tile::AvatarStart) {
        ++avatars;
        lvl.avatar_start = {r, c};
      } else if (t == Tile::Key) {
        ++keys;
        lvl.key_cells.push_back({r, c});
      } else if (t == Tile::Door) {
        ++doors;
      } else if (t == Tile::MonsterStart) {
        lvl.monster_starts.push_back({r, c});
      }
    }
  }
  if (avatars == 0) throw MalformedLevel("missing avatar", 0, 0);
  if (avatars > 1) throw MalformedLevel("multiple avatars", 0, 0);
  if (keys == 0) throw MalformedLevel("missing key", 0, 0);
  if (doors == 0) throw MalformedLevel("missing door", 0, 0);
  return lvl;
}

// Inverse of parse_level on valid input.
inline std::string serialize_level(const Level& lvl) {
  std::string out;
  out.reserve(static_cast<size_t>(lvl.height) * (lvl.width + 1));
  for (int r = 0; r < lvl.height; ++r) {
    for (int c = 0; c < lvl.width; ++c) out.push_back(tile_char(lvl.at(r, c)));
    out.push_back('\n');
  }
  return out;
}

}  // namespace qd::env
