#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "hetcong/error.hpp"
#include "hetcong/netlist_io.hpp"

namespace hetcong {
namespace {

struct Token {
  std::string text;
  std::size_t line = 0;
  std::size_t column = 0;
};

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t line = 1, col = 1, i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    Token tok{{}, line, col};
    if (c == '"') {
      advance(1);
      while (i < text.size() && text[i] != '"') {
        tok.text.push_back(text[i]);
        advance(1);
      }
      if (i >= text.size()) throw ParseError("unterminated string", tok.line, tok.column);
      advance(1);
      out.push_back(std::move(tok));
      continue;
    }
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) {
      tok.text.push_back(text[i]);
      advance(1);
    }
    // "N;" is common enough in hand-written files to accept.
    if (tok.text.size() > 1 && tok.text.back() == ';') {
      tok.text.pop_back();
      Token semi{";", line, col - 1};
      out.push_back(std::move(tok));
      out.push_back(std::move(semi));
    } else {
      out.push_back(std::move(tok));
    }
  }
  return out;
}

enum class Orient { N, S, E, W, FN, FS, FE, FW };

class DefParser {
 public:
  DefParser(std::string_view text, std::vector<std::string>* warnings)
      : toks_(tokenize(text)), warnings_(warnings) {}

  Design run() {
    bool have_die = false, have_components = false, have_nets = false;
    while (!at_end()) {
      const Token& t = peek();
      if (t.text == "DESIGN") {
        next();
        d_.name = next().text;
        expect(";");
      } else if (t.text == "DIEAREA") {
        parse_diearea();
        have_die = true;
      } else if (t.text == "MASTERS") {
        parse_masters();
      } else if (t.text == "COMPONENTS") {
        parse_components();
        have_components = true;
      } else if (t.text == "PINS") {
        parse_pins();
      } else if (t.text == "NETS") {
        if (!have_components) fail("NETS section before COMPONENTS", t);
        parse_nets();
        have_nets = true;
      } else if (t.text == "END") {
        next();
        const Token& what = next();
        if (what.text != "DESIGN") fail("unexpected END " + what.text, what);
        break;
      } else if (is_block_section(t.text)) {
        skip_block(t.text);
      } else {
        skip_statement();
      }
    }
    if (!have_die) throw ParseError("missing DIEAREA");
    if (!have_components) throw ParseError("missing COMPONENTS section");
    if (!have_nets && warnings_) warnings_->push_back("no NETS section; design has no nets");
    validate(d_);
    return std::move(d_);
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<std::string>* warnings_;
  Design d_;
  std::unordered_map<std::string, std::size_t> cell_index_;
  std::unordered_map<std::string, Orient> orient_;
  std::unordered_map<std::string, PinDirection> port_dir_;

  bool at_end() const { return pos_ >= toks_.size(); }
  const Token& peek() const {
    if (at_end()) throw ParseError("unexpected end of input", toks_.empty() ? 1 : toks_.back().line);
    return toks_[pos_];
  }
  const Token& next() {
    const Token& t = peek();
    ++pos_;
    return t;
  }
  [[noreturn]] void fail(const std::string& msg, const Token& t) const {
    throw ParseError(msg, t.line, t.column);
  }
  void expect(std::string_view s) {
    const Token& t = next();
    if (t.text != s) fail("expected '" + std::string(s) + "' but found '" + t.text + "'", t);
  }
  Dbu integer() {
    const Token& t = next();
    Dbu v = 0;
    const char* b = t.text.data();
    const char* e = b + t.text.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) {
      // DEF permits decimal coordinates; they must still be integral.
      double dv = 0;
      auto [pd, ecd] = std::from_chars(b, e, dv);
      if (ecd != std::errc() || pd != e || dv != static_cast<double>(static_cast<Dbu>(dv)))
        fail("expected an integer but found '" + t.text + "'", t);
      v = static_cast<Dbu>(dv);
    }
    return v;
  }
  void warn(const std::string& msg) {
    if (warnings_) warnings_->push_back(msg);
  }

  static bool is_block_section(const std::string& s) {
    static const char* kBlocks[] = {"VIAS",     "SPECIALNETS", "REGIONS", "GROUPS",          "BLOCKAGES",
                                    "FILLS",    "NONDEFAULTRULES", "STYLES", "PINPROPERTIES", "SCANCHAINS",
                                    "PROPERTYDEFINITIONS", "SLOTS", "COMPONENTMASKSHIFT"};
    for (const char* b : kBlocks)
      if (s == b) return true;
    return false;
  }

  void skip_statement() {
    const Token& head = next();
    if (head.text == "ROW" || head.text == "TRACKS" || head.text == "GCELLGRID")
      warn("skipping " + head.text + " statement at line " + std::to_string(head.line));
    while (!at_end() && peek().text != ";") next();
    if (!at_end()) next();
  }

  void skip_block(const std::string& name) {
    const Token& head = next();
    warn("skipping " + name + " section at line " + std::to_string(head.line));
    while (true) {
      const Token& t = next();
      if (t.text == "END" && !at_end() && peek().text == name) {
        next();
        return;
      }
    }
  }

  void parse_diearea() {
    next();
    expect("(");
    Dbu x0 = integer(), y0 = integer();
    expect(")");
    expect("(");
    Dbu x1 = integer(), y1 = integer();
    expect(")");
    if (peek().text == "(") fail("polygonal DIEAREA is not supported", peek());
    expect(";");
    d_.die = Rect{std::min(x0, x1), std::min(y0, y1), std::max(x0, x1), std::max(y0, y1)};
  }

  void parse_masters() {
    next();
    integer();
    expect(";");
    while (peek().text == "-") {
      next();
      const Token& name = next();
      Master m;
      m.w = integer();
      m.h = integer();
      while (peek().text == "+") {
        next();
        const Token& kw = next();
        if (kw.text == "CLASS") {
          const Token& cls = next();
          m.is_macro = cls.text == "BLOCK";
        } else if (kw.text == "PIN") {
          MasterPin pin;
          pin.name = next().text;
          pin.direction = direction_of(next());
          if (peek().text == "(") {
            next();
            pin.has_offset = true;
            pin.offset_x = integer();
            pin.offset_y = integer();
            expect(")");
          }
          m.pins.push_back(std::move(pin));
        } else {
          fail("unknown MASTERS attribute '" + kw.text + "'", kw);
        }
      }
      expect(";");
      if (d_.masters.contains(name.text)) fail("duplicate master '" + name.text + "'", name);
      d_.masters.emplace(name.text, std::move(m));
    }
    expect("END");
    expect("MASTERS");
  }

  PinDirection direction_of(const Token& t) const {
    if (t.text == "INPUT" || t.text == "INOUT" || t.text == "FEEDTHRU") return PinDirection::Input;
    if (t.text == "OUTPUT") return PinDirection::Output;
    fail("unknown pin direction '" + t.text + "'", t);
  }

  Orient orient_of(const Token& t) const {
    static const std::pair<const char*, Orient> kOrients[] = {{"N", Orient::N},   {"S", Orient::S},   {"E", Orient::E},
                                                              {"W", Orient::W},   {"FN", Orient::FN}, {"FS", Orient::FS},
                                                              {"FE", Orient::FE}, {"FW", Orient::FW}};
    for (auto& [s, o] : kOrients)
      if (t.text == s) return o;
    fail("unknown orientation '" + t.text + "'", t);
  }

  static bool rotated(Orient o) { return o == Orient::E || o == Orient::W || o == Orient::FE || o == Orient::FW; }

  void parse_components() {
    next();
    integer();
    expect(";");
    while (peek().text == "-") {
      next();
      const Token& name = next();
      const Token& master_tok = next();
      auto mit = d_.masters.find(master_tok.text);
      if (mit == d_.masters.end()) fail("component '" + name.text + "' uses unknown master '" + master_tok.text + "'", master_tok);
      bool placed = false;
      Cell c;
      Orient o = Orient::N;
      while (peek().text == "+") {
        next();
        const Token& kw = next();
        if (kw.text == "PLACED" || kw.text == "FIXED" || kw.text == "COVER") {
          expect("(");
          c.x = integer();
          c.y = integer();
          expect(")");
          o = orient_of(next());
          placed = true;
        } else if (kw.text == "UNPLACED") {
          fail("component '" + name.text + "' is unplaced", kw);
        } else {
          while (peek().text != "+" && peek().text != ";") next();
        }
      }
      expect(";");
      if (!placed) fail("component '" + name.text + "' has no placement", name);
      if (cell_index_.contains(name.text)) fail("duplicate component '" + name.text + "'", name);
      const Master& m = mit->second;
      c.id = d_.cells.size();
      c.name = name.text;
      c.master = master_tok.text;
      c.w = rotated(o) ? m.h : m.w;
      c.h = rotated(o) ? m.w : m.h;
      c.is_macro = m.is_macro;
      cell_index_.emplace(c.name, c.id);
      orient_.emplace(c.name, o);
      d_.cells.push_back(std::move(c));
    }
    expect("END");
    expect("COMPONENTS");
  }

  // Ports become 1x1 fixed cells: a positive footprint keeps every cell invariant intact.
  void parse_pins() {
    next();
    integer();
    expect(";");
    while (peek().text == "-") {
      next();
      const Token& name = next();
      PinDirection on_net = PinDirection::Input;
      bool placed = false;
      Dbu x = 0, y = 0;
      while (peek().text == "+") {
        next();
        const Token& kw = next();
        if (kw.text == "DIRECTION") {
          // A chip input drives its net.
          const Token& dir = next();
          direction_of(dir);
          on_net = dir.text == "INPUT" ? PinDirection::Output : PinDirection::Input;
        } else if (kw.text == "PLACED" || kw.text == "FIXED" || kw.text == "COVER") {
          expect("(");
          x = integer();
          y = integer();
          expect(")");
          next();
          placed = true;
        } else {
          while (peek().text != "+" && peek().text != ";") next();
        }
      }
      expect(";");
      if (!placed) fail("I/O pin '" + name.text + "' is unplaced", name);
      if (cell_index_.contains(name.text)) fail("I/O pin '" + name.text + "' collides with a component name", name);
      if (!d_.masters.contains(kIoPortMaster)) d_.masters.emplace(kIoPortMaster, Master{1, 1, false, {}});
      Cell c;
      c.id = d_.cells.size();
      c.name = name.text;
      c.master = kIoPortMaster;
      c.x = std::clamp(x, d_.die.x0, d_.die.x1 - 1);
      c.y = std::clamp(y, d_.die.y0, d_.die.y1 - 1);
      c.w = 1;
      c.h = 1;
      cell_index_.emplace(c.name, c.id);
      port_dir_.emplace(c.name, on_net);
      d_.cells.push_back(std::move(c));
    }
    expect("END");
    expect("PINS");
  }

  NetPin component_pin(const Token& comp, const Token& pin) const {
    auto it = cell_index_.find(comp.text);
    if (it == cell_index_.end() || port_dir_.contains(comp.text))
      fail("unknown component '" + comp.text + "' in NETS", comp);
    const Cell& c = d_.cells[it->second];
    const Master& m = d_.masters.at(c.master);
    const MasterPin* mp = nullptr;
    for (const MasterPin& p : m.pins)
      if (p.name == pin.text) mp = &p;
    if (!mp) fail("master '" + c.master + "' has no pin '" + pin.text + "'", pin);
    NetPin np;
    np.cell = c.id;
    np.direction = mp->direction;
    if (!mp->has_offset) {
      np.offset_x = c.w / 2;
      np.offset_y = c.h / 2;
      return np;
    }
    const Dbu px = mp->offset_x, py = mp->offset_y, w = m.w, h = m.h;
    switch (orient_.at(c.name)) {
      case Orient::N: np.offset_x = px, np.offset_y = py; break;
      case Orient::S: np.offset_x = w - px, np.offset_y = h - py; break;
      case Orient::E: np.offset_x = py, np.offset_y = w - px; break;
      case Orient::W: np.offset_x = h - py, np.offset_y = px; break;
      case Orient::FN: np.offset_x = w - px, np.offset_y = py; break;
      case Orient::FS: np.offset_x = px, np.offset_y = h - py; break;
      case Orient::FE: np.offset_x = py, np.offset_y = px; break;
      case Orient::FW: np.offset_x = h - py, np.offset_y = w - px; break;
    }
    return np;
  }

  void parse_nets() {
    next();
    integer();
    expect(";");
    std::unordered_map<std::string, bool> seen;
    while (peek().text == "-") {
      next();
      const Token& name = next();
      if (seen.contains(name.text)) fail("duplicate net '" + name.text + "'", name);
      seen.emplace(name.text, true);
      Net n;
      n.id = d_.nets.size();
      n.name = name.text;
      while (peek().text == "(") {
        next();
        const Token& a = next();
        const Token& b = next();
        expect(")");
        if (a.text == "*") fail("wildcard net connections are not supported", a);
        if (a.text == "PIN") {
          auto it = cell_index_.find(b.text);
          if (it == cell_index_.end() || !port_dir_.contains(b.text))
            fail("unknown I/O pin '" + b.text + "' in NETS", b);
          n.pins.push_back(NetPin{it->second, port_dir_.at(b.text), 0, 0});
        } else {
          n.pins.push_back(component_pin(a, b));
        }
      }
      while (!at_end() && peek().text != ";") next();
      expect(";");
      if (n.pins.empty()) fail("net '" + n.name + "' has no connections", name);
      d_.nets.push_back(std::move(n));
    }
    expect("END");
    expect("NETS");
  }
};

}  // namespace

Design parse_def(std::string_view text, std::vector<std::string>* warnings) {
  return DefParser(text, warnings).run();
}

Design parse_design(std::string_view text, std::vector<std::string>* warnings) {
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (c == '{') return parse_canonical(text);
    break;
  }
  return parse_def(text, warnings);
}

Design load_design(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open design file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_design(ss.str(), warnings);
}

}  // namespace hetcong
