#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace stepmap {

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;  // rgb, row-major from the top-left corner

  RgbImage(int w, int h, std::array<uint8_t, 3> fill);
  void set(int x, int y, std::array<uint8_t, 3> rgb);
};

void write_ppm(const std::filesystem::path& path, const RgbImage& image);

// Piecewise-linear approximation of the viridis colormap, t in [0, 1].
std::array<uint8_t, 3> viridis(double t);

// Generic cell heatmap over two value axes. `value` is x-major
// (ix * ny + iy), matching the map/grid index convention. Axis values label
// cell centers; the y axis points upward.
struct Heatmap {
  std::vector<double> x_axis;
  std::vector<double> y_axis;
  std::vector<double> value;
  std::vector<uint8_t> present;  // empty = every cell present; absent = gray
  std::vector<uint8_t> overlay;  // outlined cells (near-optimal); empty = none
  std::vector<int> star_y;       // per-column starred y index, -1 = none
  bool binary = false;           // two-color mode for {0, 1} data
  std::string title;
  std::string x_label;
  std::string y_label;

  void validate() const;
};

std::string heatmap_svg(const Heatmap& map);
RgbImage heatmap_raster(const Heatmap& map);

// Writes both representations (parent directories are created).
void render_heatmap(const std::filesystem::path& svg_path,
                    const std::filesystem::path& ppm_path, const Heatmap& map);

}  // namespace stepmap
