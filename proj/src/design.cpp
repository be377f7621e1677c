#include "hetcong/design.hpp"

#include <set>
#include <tuple>

#include "hetcong/error.hpp"

namespace hetcong {

bool operator==(const Design& a, const Design& b) {
  return a.name == b.name && a.die == b.die && a.cells == b.cells && a.nets == b.nets;
}

void validate(const Design& d) {
  if (d.die.x1 <= d.die.x0 || d.die.y1 <= d.die.y0)
    throw ValidationError("die area is empty: (" + std::to_string(d.die.x0) + "," + std::to_string(d.die.y0) +
                          ")-(" + std::to_string(d.die.x1) + "," + std::to_string(d.die.y1) + ")");
  if (d.cells.empty()) throw ValidationError("design '" + d.name + "' has no cells");

  for (std::size_t i = 0; i < d.cells.size(); ++i) {
    const Cell& c = d.cells[i];
    if (c.id != i) throw ValidationError("cell ids are not dense at '" + c.name + "'");
    if (c.w <= 0 || c.h <= 0)
      throw ValidationError("cell '" + c.name + "' has non-positive size " + std::to_string(c.w) + "x" +
                            std::to_string(c.h));
    if (c.x >= d.die.x1 || c.x + c.w <= d.die.x0 || c.y >= d.die.y1 || c.y + c.h <= d.die.y0)
      throw ValidationError("cell '" + c.name + "' lies outside the die area");
    if (!d.masters.contains(c.master))
      throw ValidationError("cell '" + c.name + "' references unknown master '" + c.master + "'");
  }

  for (std::size_t i = 0; i < d.nets.size(); ++i) {
    const Net& n = d.nets[i];
    if (n.id != i) throw ValidationError("net ids are not dense at '" + n.name + "'");
    if (n.pins.empty()) throw ValidationError("net '" + n.name + "' has no pins");
    std::set<std::tuple<std::size_t, Dbu, Dbu>> seen;
    for (const NetPin& p : n.pins) {
      if (p.cell >= d.cells.size())
        throw ValidationError("net '" + n.name + "' references unknown cell id " + std::to_string(p.cell));
      if (!seen.emplace(p.cell, p.offset_x, p.offset_y).second)
        throw ValidationError("net '" + n.name + "' has a duplicate pin on cell '" + d.cells[p.cell].name + "'");
    }
  }
}

}  // namespace hetcong
