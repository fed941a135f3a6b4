#include "riesz/grid_io.hpp"

#include <json.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace riesz {

namespace {

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
  return r;
}

}  // namespace

const Eigen::VectorXd& GridFile::channel(const std::string& name) const {
  for (const auto& c : channels)
    if (c.name == name) return c.values;
  throw std::out_of_range("grid file has no channel '" + name + "'");
}

void write_grid_file(const std::filesystem::path& path, const Grid& grid,
                     const std::vector<GridChannel>& channels) {
  nlohmann::json h;
  h["format"] = "float64-le";
  h["dim"] = grid.dim();
  h["N"] = std::vector<long>(grid.dim(), grid.cells_per_axis());
  h["half_width"] = grid.half_width();
  h["spacing"] = grid.spacing();
  std::vector<double> origin(grid.origin().data(), grid.origin().data() + grid.dim());
  h["origin"] = origin;
  std::vector<bool> periodic;
  for (int a = 0; a < grid.dim(); ++a) periodic.push_back(grid.periodic(a));
  h["periodic"] = periodic;
  h["count"] = grid.size();
  std::vector<std::string> names;
  for (const auto& c : channels) {
    if (c.values.size() != grid.size()) throw std::invalid_argument("channel size does not match grid");
    names.push_back(c.name);
  }
  h["channels"] = names;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << h.dump() << '\n';
  for (const auto& c : channels) {
    for (long i = 0; i < c.values.size(); ++i) {
      const std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(c.values[i]));
      out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

GridFile read_grid_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  const auto h = nlohmann::json::parse(line);
  if (h.at("format") != "float64-le") throw std::runtime_error("unsupported grid file format");
  const int dim = h.at("dim").get<int>();
  const auto n = h.at("N").get<std::vector<long>>();
  if (static_cast<int>(n.size()) != dim) throw std::runtime_error("grid file N has wrong length");
  for (long v : n)
    if (v != n[0]) throw std::runtime_error("grid file axes must have equal resolution");
  const auto origin = h.at("origin").get<std::vector<double>>();
  const auto periodic = h.at("periodic").get<std::vector<bool>>();
  Point o(dim);
  std::array<bool, kMaxDim> flags{false, false, false};
  for (int a = 0; a < dim; ++a) {
    o[a] = origin.at(a);
    flags[a] = periodic.at(a);
  }
  Grid grid(dim, n[0], o, h.at("spacing").get<double>(), flags);
  if (h.at("count").get<long>() != grid.size()) throw std::runtime_error("grid file count mismatch");

  GridFile file{grid, {}};
  for (const auto& name : h.at("channels").get<std::vector<std::string>>()) {
    Eigen::VectorXd v(grid.size());
    for (long i = 0; i < grid.size(); ++i) {
      std::uint64_t bits = 0;
      in.read(reinterpret_cast<char*>(&bits), sizeof bits);
      v[i] = std::bit_cast<double>(to_le(bits));
    }
    if (!in) throw std::runtime_error("grid file " + path.string() + " is truncated");
    file.channels.push_back({name, std::move(v)});
  }
  return file;
}

void write_grid_function(const std::filesystem::path& path, const GridFunction& f, const std::string& name) {
  write_grid_file(path, f.grid(), {{name, f.values()}});
}

GridFunction read_grid_function(const std::filesystem::path& path, const std::string& name) {
  auto file = read_grid_file(path);
  if (file.channels.empty()) throw std::runtime_error("grid file has no channels");
  const auto& v = name.empty() ? file.channels.front().values : file.channel(name);
  return GridFunction(file.grid, v);
}

}  // namespace riesz
