#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace hetcong {

/// Database units. Kept integral until featurization.
using Dbu = std::int64_t;

struct Rect {
  Dbu x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  Dbu width() const { return x1 - x0; }
  Dbu height() const { return y1 - y0; }
  bool operator==(const Rect&) const = default;
};

enum class PinDirection : std::uint8_t { Input, Output };

struct Cell {
  std::size_t id = 0;
  std::string name;
  std::string master;
  Dbu x = 0, y = 0;  // lower-left corner
  Dbu w = 0, h = 0;
  bool is_macro = false;

  double center_x() const { return static_cast<double>(x) + 0.5 * static_cast<double>(w); }
  double center_y() const { return static_cast<double>(y) + 0.5 * static_cast<double>(h); }
  bool operator==(const Cell&) const = default;
};

struct NetPin {
  std::size_t cell = 0;
  PinDirection direction = PinDirection::Input;
  Dbu offset_x = 0, offset_y = 0;  // relative to the cell origin
  bool operator==(const NetPin&) const = default;
};

struct Net {
  std::size_t id = 0;
  std::string name;
  std::vector<NetPin> pins;
  bool operator==(const Net&) const = default;
};

struct MasterPin {
  std::string name;
  PinDirection direction = PinDirection::Input;
  bool has_offset = false;
  Dbu offset_x = 0, offset_y = 0;
};

struct Master {
  Dbu w = 0, h = 0;
  bool is_macro = false;
  std::vector<MasterPin> pins;
};

/// A placed netlist.
struct Design {
  std::string name;
  Rect die;
  std::vector<Cell> cells;
  std::vector<Net> nets;
  std::map<std::string, Master> masters;
};

/// Equality over name, die, cells and nets. The master library is not part of
/// the comparison: the canonical format carries per-cell geometry instead.
bool operator==(const Design& a, const Design& b);

/// Throws ValidationError on the first violated invariant.
void validate(const Design& d);

/// Absolute pin position in database units.
inline double pin_x(const Design& d, const NetPin& p) {
  return static_cast<double>(d.cells[p.cell].x + p.offset_x);
}
inline double pin_y(const Design& d, const NetPin& p) {
  return static_cast<double>(d.cells[p.cell].y + p.offset_y);
}

/// Name of the synthetic master assigned to I/O ports.
inline constexpr const char* kIoPortMaster = "__IOPORT__";

}  // namespace hetcong
