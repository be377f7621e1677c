#include <fstream>
#include <sstream>

#include "hetcong/binary_io.hpp"
#include "hetcong/error.hpp"
#include "hetcong/model.hpp"

namespace hetcong {
namespace {

constexpr char kMagic[4] = {'V', 'H', 'G', 'N'};

std::string config_block(const ModelConfig& c) {
  std::ostringstream os;
  os << "hidden=" << c.hidden << "\n"
     << "layers=" << c.layers << "\n"
     << "grid_levels=" << c.grid_levels << "\n"
     << "k_geom=" << c.k_geom << "\n"
     << "hierarchical_grid=" << c.hierarchical_grid << "\n"
     << "grid_net_mp=" << c.grid_net_mp << "\n"
     << "geom_mp=" << c.geom_mp << "\n"
     << "gated_aggregation=" << c.gated_aggregation << "\n"
     << "enriched_features=" << c.enriched_features << "\n"
     << "weighted_loss=" << c.weighted_loss << "\n"
     << "variance_reg=" << c.variance_reg << "\n";
  return os.str();
}

ModelConfig parse_config_block(const std::string& text) {
  ModelConfig c;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("checkpoint config line without '=': " + line);
    const std::string key = line.substr(0, eq);
    std::size_t v = 0;
    try {
      v = std::stoul(line.substr(eq + 1));
    } catch (const std::exception&) {
      throw ParseError("checkpoint config value is not an integer: " + line);
    }
    if (key == "hidden") c.hidden = v;
    else if (key == "layers") c.layers = v;
    else if (key == "grid_levels") c.grid_levels = v;
    else if (key == "k_geom") c.k_geom = v;
    else if (key == "hierarchical_grid") c.hierarchical_grid = v != 0;
    else if (key == "grid_net_mp") c.grid_net_mp = v != 0;
    else if (key == "geom_mp") c.geom_mp = v != 0;
    else if (key == "gated_aggregation") c.gated_aggregation = v != 0;
    else if (key == "enriched_features") c.enriched_features = v != 0;
    else if (key == "weighted_loss") c.weighted_loss = v != 0;
    else if (key == "variance_reg") c.variance_reg = v != 0;
    else throw ParseError("unknown checkpoint config key '" + key + "'");
  }
  return c;
}

}  // namespace

std::string encode_checkpoint(const ModelConfig& cfg, const ModelParams& p) {
  check_params(p, cfg);
  std::ostringstream os(std::ios::binary);
  os.write(kMagic, 4);
  binio::put_u32(os, kCheckpointVersion);
  binio::put_string(os, config_block(cfg));
  binio::put_u32(os, static_cast<std::uint32_t>(p.size()));
  for (const auto& [name, m] : p) {
    binio::put_string(os, name);
    binio::put_u32(os, static_cast<std::uint32_t>(m.rows()));
    binio::put_u32(os, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.size(); ++i) binio::put_f32(os, static_cast<float>(m.data()[i]));
  }
  return os.str();
}

std::pair<ModelConfig, ModelParams> decode_checkpoint(const std::string& bytes) {
  std::istringstream is(bytes, std::ios::binary);
  char magic[4];
  if (!is.read(magic, 4) || std::string(magic, 4) != std::string(kMagic, 4))
    throw ParseError("not a checkpoint file (bad magic)");
  const std::uint32_t version = binio::get_u32(is);
  if (version != kCheckpointVersion) throw ParseError("unsupported checkpoint version " + std::to_string(version));
  ModelConfig cfg = parse_config_block(binio::get_string(is));
  const std::uint32_t count = binio::get_u32(is);
  ModelParams p;
  for (std::uint32_t k = 0; k < count; ++k) {
    std::string name = binio::get_string(is, 4096);
    const std::uint32_t rows = binio::get_u32(is), cols = binio::get_u32(is);
    if (static_cast<std::uint64_t>(rows) * cols > (1ull << 32)) throw ParseError("parameter '" + name + "' too large");
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<double>(binio::get_f32(is));
    p.emplace(std::move(name), std::move(m));
  }
  cfg.validate();
  check_params(p, cfg);
  return {cfg, p};
}

void save_checkpoint(const std::string& path, const ModelConfig& cfg, const ModelParams& p) {
  const std::string bytes = encode_checkpoint(cfg, p);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write checkpoint '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::pair<ModelConfig, ModelParams> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open checkpoint '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace hetcong
