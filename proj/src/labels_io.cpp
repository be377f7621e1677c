#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hetcong/binary_io.hpp"
#include "hetcong/error.hpp"
#include "hetcong/oracle.hpp"

namespace hetcong {

std::string encode_labels(const std::string& design, const CongestionLabels& l) {
  if (static_cast<std::size_t>(l.grid.size()) != l.m * l.n) throw ValidationError("label grid size does not match m x n");
  nlohmann::ordered_json h;
  h["design"] = design;
  h["m"] = l.m;
  h["n"] = l.n;
  h["c_max"] = l.c_max;
  h["cells"] = l.cell.size();
  std::ostringstream os(std::ios::binary);
  os << h.dump() << '\n';
  for (Eigen::Index i = 0; i < l.grid.size(); ++i) binio::put_f32(os, static_cast<float>(l.grid(i)));
  for (Eigen::Index i = 0; i < l.cell.size(); ++i) binio::put_f32(os, static_cast<float>(l.cell(i)));
  return os.str();
}

CongestionLabels decode_labels(const std::string& bytes, std::string* design) {
  const auto nl = bytes.find('\n');
  if (nl == std::string::npos) throw ParseError("label file has no header line", 1);
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(bytes.substr(0, nl));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed label header: ") + e.what(), 1);
  }
  CongestionLabels l;
  std::size_t cells = 0;
  try {
    l.m = h.at("m").get<std::size_t>();
    l.n = h.at("n").get<std::size_t>();
    l.c_max = h.at("c_max").get<double>();
    cells = h.value("cells", std::size_t{0});
    if (design) *design = h.at("design").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("label header: ") + e.what(), 1);
  }
  const std::size_t expected = nl + 1 + 4 * (l.m * l.n + cells);
  if (bytes.size() != expected)
    throw ParseError("label payload is " + std::to_string(bytes.size() - nl - 1) + " bytes, expected " +
                     std::to_string(expected - nl - 1));
  std::istringstream is(bytes.substr(nl + 1), std::ios::binary);
  l.grid.resize(static_cast<Eigen::Index>(l.m * l.n));
  for (Eigen::Index i = 0; i < l.grid.size(); ++i) l.grid(i) = binio::get_f32(is);
  l.cell.resize(static_cast<Eigen::Index>(cells));
  for (Eigen::Index i = 0; i < l.cell.size(); ++i) l.cell(i) = binio::get_f32(is);
  auto in_range = [](const Vector& v) { return v.size() == 0 || (v.allFinite() && v.minCoeff() >= 0.0 && v.maxCoeff() <= 1.0); };
  if (!in_range(l.grid) || !in_range(l.cell)) throw ValidationError("label values must lie in [0, 1]");
  return l;
}

void save_labels(const std::string& path, const std::string& design, const CongestionLabels& labels) {
  const std::string bytes = encode_labels(design, labels);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write label file '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

CongestionLabels load_labels(const std::string& path, std::string* design) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open label file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_labels(ss.str(), design);
}

}  // namespace hetcong
