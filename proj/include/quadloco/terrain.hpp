#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "quadloco/common.hpp"
#include "quadloco/rng.hpp"

namespace quadloco {

struct InvalidSpec : ConfigError {
  InvalidSpec(const std::string& param, const std::string& bound)
      : ConfigError("invalid terrain spec: " + param + " violates " + bound),
        param(param),
        bound(bound) {}
  std::string param;
  std::string bound;
};

/// Regular elevation grid centered on the world origin. Gap (void) regions
/// carry the sentinel gap_value so a single scalar query serves both the
/// exteroceptive observation and the safety logic.
class HeightField {
 public:
  HeightField() = default;
  HeightField(double resolution, int nx, int ny, double gap_value = kDefaultGap)
      : resolution_(resolution), nx_(nx), ny_(ny), gap_value_(gap_value),
        heights_(static_cast<std::size_t>(nx) * ny, 0.0f) {
    if (resolution <= 0.0 || nx < 1 || ny < 1)
      throw ConfigError("heightfield: resolution > 0 and dims >= 1 required");
  }

  static constexpr double kDefaultGap = -1.0;

  double resolution() const { return resolution_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double gap_value() const { return gap_value_; }

  float& at(int i, int j) { return heights_[static_cast<std::size_t>(j) * nx_ + i]; }
  float at(int i, int j) const { return heights_[static_cast<std::size_t>(j) * nx_ + i]; }
  const std::vector<float>& raw() const { return heights_; }
  std::vector<float>& raw() { return heights_; }

  double cell_x(int i) const { return (i - 0.5 * (nx_ - 1)) * resolution_; }
  double cell_y(int j) const { return (j - 0.5 * (ny_ - 1)) * resolution_; }

  bool cell_is_gap(int i, int j) const {
    return at(i, j) == static_cast<float>(gap_value_);
  }

  /// Bilinear elevation, except no interpolation across gap cells: if any of
  /// the four neighbors is a gap the nearest cell wins. Out of bounds reads
  /// as gap.
  double height_at(double x, double y) const {
    const double u = x / resolution_ + 0.5 * (nx_ - 1);
    const double v = y / resolution_ + 0.5 * (ny_ - 1);
    if (u < 0.0 || v < 0.0 || u > nx_ - 1 || v > ny_ - 1) return gap_value_;
    int i0 = static_cast<int>(std::floor(u));
    int j0 = static_cast<int>(std::floor(v));
    if (i0 >= nx_ - 1) i0 = nx_ - 2 >= 0 ? nx_ - 2 : 0;
    if (j0 >= ny_ - 1) j0 = ny_ - 2 >= 0 ? ny_ - 2 : 0;
    const int i1 = std::min(i0 + 1, nx_ - 1);
    const int j1 = std::min(j0 + 1, ny_ - 1);
    if (cell_is_gap(i0, j0) || cell_is_gap(i1, j0) || cell_is_gap(i0, j1) ||
        cell_is_gap(i1, j1)) {
      const int in = std::min(std::max(static_cast<int>(std::lround(u)), 0), nx_ - 1);
      const int jn = std::min(std::max(static_cast<int>(std::lround(v)), 0), ny_ - 1);
      return at(in, jn);
    }
    const double fu = u - i0;
    const double fv = v - j0;
    const double h0 = at(i0, j0) * (1.0 - fu) + at(i1, j0) * fu;
    const double h1 = at(i0, j1) * (1.0 - fu) + at(i1, j1) * fu;
    return h0 * (1.0 - fv) + h1 * fv;
  }

  bool is_gap(double x, double y) const {
    const double u = x / resolution_ + 0.5 * (nx_ - 1);
    const double v = y / resolution_ + 0.5 * (ny_ - 1);
    if (u < -0.5 || v < -0.5 || u > nx_ - 0.5 || v > ny_ - 0.5) return true;
    const int in = std::min(std::max(static_cast<int>(std::lround(u)), 0), nx_ - 1);
    const int jn = std::min(std::max(static_cast<int>(std::lround(v)), 0), ny_ - 1);
    return cell_is_gap(in, jn);
  }

 private:
  double resolution_ = 0.01;
  int nx_ = 1;
  int ny_ = 1;
  double gap_value_ = kDefaultGap;
  std::vector<float> heights_;
};

enum class TerrainFamily { Flat, Blocks, Stairs, SteppingStones, Poles };

inline const char* family_name(TerrainFamily f) {
  switch (f) {
    case TerrainFamily::Flat: return "flat";
    case TerrainFamily::Blocks: return "blocks";
    case TerrainFamily::Stairs: return "stairs";
    case TerrainFamily::SteppingStones: return "stepping_stones";
    case TerrainFamily::Poles: return "poles";
  }
  return "?";
}

inline TerrainFamily family_from_name(const std::string& s) {
  if (s == "flat") return TerrainFamily::Flat;
  if (s == "blocks") return TerrainFamily::Blocks;
  if (s == "stairs") return TerrainFamily::Stairs;
  if (s == "stepping_stones" || s == "stones") return TerrainFamily::SteppingStones;
  if (s == "poles") return TerrainFamily::Poles;
  throw ConfigError("unknown terrain family: " + s);
}

struct TerrainSpec {
  TerrainFamily family = TerrainFamily::Flat;
  double extent = 12.0;      // side length, m (>= 11 so a 5 m traverse fits)
  double resolution = 0.01;  // m/cell
  std::uint64_t seed = 0;

  // blocks
  double block_size = 0.5;
  double block_height_var = 0.06;
  // stairs (ascending along +x)
  double stair_rise = 0.08;
  double stair_run = 0.30;
  // stepping stones
  double stone_size = 0.30;
  double stone_gap = 0.15;
  double stone_height_jitter = 0.0;
  // poles
  double pole_diameter = 0.12;
  double pole_spacing = 0.25;
  double pole_height = 0.0;

  void validate() const {
    if (extent < 11.0) throw InvalidSpec("extent", ">= 11 m (5 m traverse any direction)");
    if (resolution <= 0.0) throw InvalidSpec("resolution", "> 0");
    switch (family) {
      case TerrainFamily::Flat:
        break;
      case TerrainFamily::Blocks:
        if (block_size <= 0.0) throw InvalidSpec("block_size", "> 0");
        if (block_height_var < 0.0) throw InvalidSpec("block_height_var", ">= 0");
        break;
      case TerrainFamily::Stairs:
        if (stair_rise < 0.03 || stair_rise > 0.15)
          throw InvalidSpec("stair_rise", "[0.03, 0.15] m");
        if (stair_run <= 0.0) throw InvalidSpec("stair_run", "> 0");
        break;
      case TerrainFamily::SteppingStones:
        if (stone_size <= 0.0) throw InvalidSpec("stone_size", "> 0");
        if (stone_gap <= 0.0 || stone_gap > 0.255)
          throw InvalidSpec("stone_gap", "(0, 0.255] m");
        if (stone_height_jitter < 0.0) throw InvalidSpec("stone_height_jitter", ">= 0");
        break;
      case TerrainFamily::Poles:
        if (pole_diameter < 0.10 || pole_diameter > 0.15)
          throw InvalidSpec("pole_diameter", "[0.10, 0.15] m");
        if (pole_spacing < pole_diameter)
          throw InvalidSpec("pole_spacing", ">= pole_diameter");
        break;
    }
  }
};

namespace detail {
inline double positive_mod(double x, double period) {
  return x - period * std::floor(x / period);
}
}  // namespace detail

/// Deterministic procedural generation: all per-tile randomness is keyed by
/// tile index and seed, so the result is identical for a fixed spec.
inline HeightField generate(const TerrainSpec& spec) {
  spec.validate();
  const int n = 2 * static_cast<int>(std::ceil(0.5 * spec.extent / spec.resolution)) + 1;
  HeightField field(spec.resolution, n, n);

  for (int j = 0; j < n; ++j) {
    const double y = field.cell_y(j);
    for (int i = 0; i < n; ++i) {
      const double x = field.cell_x(i);
      double h = 0.0;
      switch (spec.family) {
        case TerrainFamily::Flat:
          h = 0.0;
          break;
        case TerrainFamily::Blocks: {
          const auto bi = static_cast<std::int64_t>(std::floor(x / spec.block_size));
          const auto bj = static_cast<std::int64_t>(std::floor(y / spec.block_size));
          h = spec.block_height_var *
              hash_uniform(static_cast<std::uint64_t>(bi + (1 << 20)),
                           static_cast<std::uint64_t>(bj + (1 << 20)), spec.seed);
          break;
        }
        case TerrainFamily::Stairs:
          h = spec.stair_rise * std::floor(x / spec.stair_run);
          break;
        case TerrainFamily::SteppingStones: {
          const double period = spec.stone_size + spec.stone_gap;
          const double u = detail::positive_mod(x + 0.5 * spec.stone_size, period);
          const double v = detail::positive_mod(y + 0.5 * spec.stone_size, period);
          if (u < spec.stone_size && v < spec.stone_size) {
            const auto si = static_cast<std::int64_t>(
                std::floor((x + 0.5 * spec.stone_size) / period));
            const auto sj = static_cast<std::int64_t>(
                std::floor((y + 0.5 * spec.stone_size) / period));
            h = spec.stone_height_jitter *
                hash_uniform(static_cast<std::uint64_t>(si + (1 << 20)),
                             static_cast<std::uint64_t>(sj + (1 << 20)), spec.seed ^ 0x51);
          } else {
            h = field.gap_value();
          }
          break;
        }
        case TerrainFamily::Poles: {
          const double cx = std::round(x / spec.pole_spacing) * spec.pole_spacing;
          const double cy = std::round(y / spec.pole_spacing) * spec.pole_spacing;
          const double dx = x - cx, dy = y - cy;
          const double r = 0.5 * spec.pole_diameter;
          h = (dx * dx + dy * dy <= r * r) ? spec.pole_height : field.gap_value();
          break;
        }
      }
      field.at(i, j) = static_cast<float>(h);
    }
  }
  return field;
}

// ---------------------------------------------------------------------------
// Binary grid file: 8-byte magic, then version / resolution / dims /
// gap_value as little-endian 64-bit fields, then row-major float32 heights.
// ---------------------------------------------------------------------------

inline constexpr char kTerrainMagic[8] = {'Q', 'L', 'H', 'F', 'I', 'E', 'L', 'D'};
inline constexpr std::uint64_t kTerrainVersion = 1;

inline void save_terrain(const HeightField& field, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open terrain file for writing: " + path);
  out.write(kTerrainMagic, 8);
  auto write_u64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); };
  auto write_f64 = [&](double v) { out.write(reinterpret_cast<const char*>(&v), 8); };
  write_u64(kTerrainVersion);
  write_f64(field.resolution());
  write_u64(static_cast<std::uint64_t>(field.nx()));
  write_u64(static_cast<std::uint64_t>(field.ny()));
  write_f64(field.gap_value());
  out.write(reinterpret_cast<const char*>(field.raw().data()),
            static_cast<std::streamsize>(field.raw().size() * sizeof(float)));
  if (!out) throw IoError("short write: " + path);
}

inline HeightField load_terrain(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open terrain file: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kTerrainMagic, 8) != 0)
    throw IoError("not a terrain file: " + path);
  auto read_u64 = [&]() {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  auto read_f64 = [&]() {
    double v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  const std::uint64_t version = read_u64();
  if (version != kTerrainVersion) throw IoError("unsupported terrain file version");
  const double resolution = read_f64();
  const auto nx = static_cast<int>(read_u64());
  const auto ny = static_cast<int>(read_u64());
  const double gap_value = read_f64();
  HeightField field(resolution, nx, ny, gap_value);
  in.read(reinterpret_cast<char*>(field.raw().data()),
          static_cast<std::streamsize>(field.raw().size() * sizeof(float)));
  if (!in) throw IoError("truncated terrain file: " + path);
  return field;
}

inline void export_terrain_csv(const HeightField& field, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open csv for writing: " + path);
  out << "x,y,height\n";
  out.precision(9);
  for (int j = 0; j < field.ny(); ++j)
    for (int i = 0; i < field.nx(); ++i)
      out << field.cell_x(i) << ',' << field.cell_y(j) << ',' << field.at(i, j) << '\n';
}

}  // namespace quadloco
