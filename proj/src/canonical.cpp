#include <json.hpp>

#include "hetcong/error.hpp"
#include "hetcong/netlist_io.hpp"

namespace hetcong {
namespace {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

template <typename T>
T field(const json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("missing field '") + key + "'", line);
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string("field '") + key + "' has the wrong type", line);
  }
}

}  // namespace

Design parse_canonical(std::string_view text) {
  Design d;
  bool have_header = false;
  bool in_nets = false;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    if (!j.is_object()) throw ParseError("expected a JSON object", line_no);

    if (!have_header) {
      if (!j.contains("design")) throw ParseError("no design header", line_no);
      d.name = field<std::string>(j, "design", line_no);
      auto die = field<std::vector<Dbu>>(j, "die", line_no);
      if (die.size() != 4) throw ParseError("'die' must have 4 entries", line_no);
      d.die = Rect{die[0], die[1], die[2], die[3]};
      have_header = true;
    } else if (j.contains("cell")) {
      if (in_nets) throw ParseError("cell record after net records", line_no);
      Cell c;
      c.id = field<std::size_t>(j, "cell", line_no);
      if (c.id != d.cells.size()) throw ParseError("cell ids must be dense and ordered", line_no);
      c.name = field<std::string>(j, "name", line_no);
      c.x = field<Dbu>(j, "x", line_no);
      c.y = field<Dbu>(j, "y", line_no);
      c.w = field<Dbu>(j, "w", line_no);
      c.h = field<Dbu>(j, "h", line_no);
      c.master = field<std::string>(j, "master", line_no);
      c.is_macro = field<bool>(j, "is_macro", line_no);
      if (!d.masters.contains(c.master)) d.masters.emplace(c.master, Master{c.w, c.h, c.is_macro, {}});
      d.cells.push_back(std::move(c));
    } else if (j.contains("net")) {
      in_nets = true;
      Net n;
      n.id = field<std::size_t>(j, "net", line_no);
      if (n.id != d.nets.size()) throw ParseError("net ids must be dense and ordered", line_no);
      n.name = field<std::string>(j, "name", line_no);
      const auto& pins = j.find("pins");
      if (pins == j.end() || !pins->is_array()) throw ParseError("missing field 'pins'", line_no);
      for (const auto& p : *pins) {
        if (!p.is_array() || p.size() != 4 || !p[0].is_number_unsigned() || !p[1].is_string() ||
            !p[2].is_number_integer() || !p[3].is_number_integer())
          throw ParseError("pin must be [cell_id, \"I\"|\"O\", ox, oy]", line_no);
        const auto dir = p[1].get<std::string>();
        if (dir != "I" && dir != "O") throw ParseError("pin direction must be \"I\" or \"O\"", line_no);
        n.pins.push_back(NetPin{p[0].get<std::size_t>(), dir == "O" ? PinDirection::Output : PinDirection::Input,
                                p[2].get<Dbu>(), p[3].get<Dbu>()});
      }
      d.nets.push_back(std::move(n));
    } else {
      throw ParseError("record is neither a cell nor a net", line_no);
    }
  }
  if (!have_header) throw ParseError("no design header");
  try {
    validate(d);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("invariant violation: ") + e.what());
  }
  return d;
}

std::string emit_canonical(const Design& d) {
  std::string out;
  ordered_json header;
  header["design"] = d.name;
  header["die"] = {d.die.x0, d.die.y0, d.die.x1, d.die.y1};
  out += header.dump() + '\n';
  for (const Cell& c : d.cells) {
    ordered_json j;
    j["cell"] = c.id;
    j["name"] = c.name;
    j["x"] = c.x;
    j["y"] = c.y;
    j["w"] = c.w;
    j["h"] = c.h;
    j["master"] = c.master;
    j["is_macro"] = c.is_macro;
    out += j.dump() + '\n';
  }
  for (const Net& n : d.nets) {
    ordered_json j;
    j["net"] = n.id;
    j["name"] = n.name;
    ordered_json pins = ordered_json::array();
    for (const NetPin& p : n.pins)
      pins.push_back({p.cell, p.direction == PinDirection::Output ? "O" : "I", p.offset_x, p.offset_y});
    j["pins"] = std::move(pins);
    out += j.dump() + '\n';
  }
  return out;
}

}  // namespace hetcong
