#include "hetcong/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "hetcong/error.hpp"

namespace hetcong {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    throw ValidationError("bad value for " + key + ": '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  throw ValidationError("bad value for " + key + ": '" + v + "' (expected on/off)");
}

// Shortest text that parses back to the same double.
std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

struct Field {
  const char* key;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

Field size_field(const char* key, std::size_t RunConfig::*outer) {
  return {key, [outer](RunConfig& c, const std::string& k, const std::string& v) { c.*outer = parse_number<std::size_t>(k, v); },
          [outer](const RunConfig& c) { return std::to_string(c.*outer); }};
}

template <typename Sub, typename T>
Field nested(const char* key, Sub RunConfig::*sub, T Sub::*member) {
  return {key,
          [sub, member](RunConfig& c, const std::string& k, const std::string& v) {
            if constexpr (std::is_same_v<T, bool>)
              (c.*sub).*member = parse_bool(k, v);
            else
              (c.*sub).*member = parse_number<T>(k, v);
          },
          [sub, member](const RunConfig& c) -> std::string {
            const T& x = (c.*sub).*member;
            if constexpr (std::is_same_v<T, bool>)
              return x ? "on" : "off";
            else if constexpr (std::is_floating_point_v<T>)
              return format_double(x);
            else
              return std::to_string(x);
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      nested("model.hidden", &RunConfig::model, &ModelConfig::hidden),
      nested("model.layers", &RunConfig::model, &ModelConfig::layers),
      nested("model.grid_levels", &RunConfig::model, &ModelConfig::grid_levels),
      nested("model.k_geom", &RunConfig::model, &ModelConfig::k_geom),
      nested("model.hierarchical_grid", &RunConfig::model, &ModelConfig::hierarchical_grid),
      nested("model.grid_net_mp", &RunConfig::model, &ModelConfig::grid_net_mp),
      nested("model.geom_mp", &RunConfig::model, &ModelConfig::geom_mp),
      nested("model.gated_aggregation", &RunConfig::model, &ModelConfig::gated_aggregation),
      nested("model.enriched_features", &RunConfig::model, &ModelConfig::enriched_features),
      nested("model.weighted_loss", &RunConfig::model, &ModelConfig::weighted_loss),
      nested("model.variance_reg", &RunConfig::model, &ModelConfig::variance_reg),
      nested("train.lr", &RunConfig::train, &TrainConfig::lr),
      nested("train.weight_decay", &RunConfig::train, &TrainConfig::weight_decay),
      nested("train.step_size", &RunConfig::train, &TrainConfig::step_size),
      nested("train.gamma", &RunConfig::train, &TrainConfig::gamma),
      nested("train.max_epochs", &RunConfig::train, &TrainConfig::max_epochs),
      nested("train.patience", &RunConfig::train, &TrainConfig::patience),
      nested("train.beta", &RunConfig::train, &TrainConfig::beta),
      nested("train.lambda_grid", &RunConfig::train, &TrainConfig::lambda_grid),
      nested("train.lambda_var", &RunConfig::train, &TrainConfig::lambda_var),
      nested("train.seed", &RunConfig::train, &TrainConfig::seed),
      size_field("grid.m", &RunConfig::grid_m),
      size_field("grid.n", &RunConfig::grid_n),
      size_field("grid.source_scale", &RunConfig::source_scale),
      size_field("graph.net_cap_pins", &RunConfig::net_cap_pins),
      size_field("graph.net_cap_tiles", &RunConfig::net_cap_tiles),
  };
  return f;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const Field& f : fields()) {
    if (key == f.key) {
      f.set(*this, key, trim(value));
      return;
    }
  }
  throw ValidationError("unknown config key '" + key + "'");
}

void RunConfig::merge_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", lineno);
    try {
      set(trim(t.substr(0, eq)), t.substr(eq + 1));
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
}

void RunConfig::merge_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  merge_text(ss.str());
}

void RunConfig::validate() const {
  model.validate();
  train.validate();
  if (grid_m == 0 || grid_n == 0) throw ValidationError("grid.m and grid.n must be positive");
  if (source_scale == 0) throw ValidationError("grid.source_scale must be positive");
  if (net_cap_pins == 0 || net_cap_tiles == 0) throw ValidationError("graph caps must be positive");
}

GraphOptions RunConfig::graph_options() const {
  GraphOptions o;
  o.k_geom = model.k_geom;
  o.net_cap_pins = net_cap_pins;
  o.net_cap_tiles = net_cap_tiles;
  return o;
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const Field& f : fields()) out += std::string(f.key) + "=" + f.get(*this) + "\n";
  return out;
}

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> k;
  for (const Field& f : fields()) k.emplace_back(f.key);
  return k;
}

}  // namespace hetcong
