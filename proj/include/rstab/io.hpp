#pragma once

#include "rstab/grid_path.hpp"

#include <filesystem>
#include <optional>

namespace rstab::io {

using rough::GridPath;
using rough::RoughPathGrid;

struct ParseError : std::runtime_error {
  int line;
  ParseError(const std::string& what, int line_) : std::runtime_error(what), line(line_) {}
};

// CSV schema: header "t,x_1..x_m[,A_11..A_mm]", areas row-major; trajectory
// files use "y" as the variable prefix.
void write_csv(const std::filesystem::path& file, const GridPath& path,
               const std::string& var = "x");
void write_csv(const std::filesystem::path& file, const RoughPathGrid& rp);
GridPath read_path_csv(const std::filesystem::path& file);
RoughPathGrid read_lift_csv(const std::filesystem::path& file);

// Versioned binary container, bit-exact round trip.
void write_binary(const std::filesystem::path& file, const RoughPathGrid& rp);
RoughPathGrid read_binary(const std::filesystem::path& file);

std::uint64_t fnv1a(const std::string& data);

struct Manifest {
  std::string command_line;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version = "rstab 0.1.0";
  double wall_seconds = 0.0;
  std::vector<std::string> outputs;
};
void write_manifest(const std::filesystem::path& dir, const Manifest& m);

}  // namespace rstab::io
