#pragma once

#include "riesz/grid.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace riesz {

struct GridChannel {
  std::string name;
  Eigen::VectorXd values;
};

struct GridFile {
  Grid grid;
  std::vector<GridChannel> channels;

  const Eigen::VectorXd& channel(const std::string& name) const;
};

// One-line JSON header terminated by '\n', then every channel in order as
// little-endian float64 values in row-major cell order.
void write_grid_file(const std::filesystem::path& path, const Grid& grid,
                     const std::vector<GridChannel>& channels);
GridFile read_grid_file(const std::filesystem::path& path);

void write_grid_function(const std::filesystem::path& path, const GridFunction& f,
                         const std::string& name = "f");
GridFunction read_grid_function(const std::filesystem::path& path, const std::string& name = "");

}  // namespace riesz
