#include "stepmap/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace stepmap {

RgbImage::RgbImage(int w, int h, std::array<uint8_t, 3> fill) : width(w), height(h) {
  if (w <= 0 || h <= 0) throw std::invalid_argument("image dimensions must be positive");
  pixels.resize(static_cast<size_t>(w) * h * 3);
  for (size_t i = 0; i < pixels.size(); i += 3) {
    pixels[i] = fill[0];
    pixels[i + 1] = fill[1];
    pixels[i + 2] = fill[2];
  }
}

void RgbImage::set(int x, int y, std::array<uint8_t, 3> rgb) {
  if (x < 0 || y < 0 || x >= width || y >= height) return;
  const size_t i = (static_cast<size_t>(y) * width + x) * 3;
  pixels[i] = rgb[0];
  pixels[i + 1] = rgb[1];
  pixels[i + 2] = rgb[2];
}

void write_ppm(const std::filesystem::path& path, const RgbImage& image) {
  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "P6\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::array<uint8_t, 3> viridis(double t) {
  static constexpr std::array<std::array<double, 3>, 9> anchors{{{68, 1, 84},
                                                                 {71, 44, 122},
                                                                 {59, 81, 139},
                                                                 {44, 113, 142},
                                                                 {33, 144, 141},
                                                                 {39, 173, 129},
                                                                 {92, 200, 99},
                                                                 {170, 220, 50},
                                                                 {253, 231, 37}}};
  t = std::clamp(t, 0.0, 1.0);
  const double pos = t * (anchors.size() - 1);
  const int lo = std::min(static_cast<int>(pos), static_cast<int>(anchors.size()) - 2);
  const double f = pos - lo;
  std::array<uint8_t, 3> rgb{};
  for (int c = 0; c < 3; ++c) {
    const double v = anchors[static_cast<size_t>(lo)][static_cast<size_t>(c)] * (1.0 - f) +
                     anchors[static_cast<size_t>(lo) + 1][static_cast<size_t>(c)] * f;
    rgb[static_cast<size_t>(c)] = static_cast<uint8_t>(std::lround(v));
  }
  return rgb;
}

namespace {

constexpr std::array<uint8_t, 3> kAbsent{160, 160, 160};
constexpr std::array<uint8_t, 3> kBlack{0, 0, 0};
constexpr std::array<uint8_t, 3> kWhite{255, 255, 255};

// 5x7 bitmap glyphs for numeric tick labels; each byte is one row, bit 4 is
// the leftmost column.
struct Glyph {
  char ch;
  std::array<uint8_t, 7> rows;
};

constexpr std::array<Glyph, 14> kGlyphs{{
    {'0', {0x0e, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0e}},
    {'1', {0x04, 0x0c, 0x04, 0x04, 0x04, 0x04, 0x0e}},
    {'2', {0x0e, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1f}},
    {'3', {0x1f, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0e}},
    {'4', {0x02, 0x06, 0x0a, 0x12, 0x1f, 0x02, 0x02}},
    {'5', {0x1f, 0x10, 0x1e, 0x01, 0x01, 0x11, 0x0e}},
    {'6', {0x06, 0x08, 0x10, 0x1e, 0x11, 0x11, 0x0e}},
    {'7', {0x1f, 0x01, 0x02, 0x04, 0x04, 0x04, 0x04}},
    {'8', {0x0e, 0x11, 0x11, 0x0e, 0x11, 0x11, 0x0e}},
    {'9', {0x0e, 0x11, 0x11, 0x0f, 0x01, 0x02, 0x0c}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0c, 0x0c}},
    {'-', {0x00, 0x00, 0x00, 0x1f, 0x00, 0x00, 0x00}},
    {'+', {0x00, 0x04, 0x04, 0x1f, 0x04, 0x04, 0x00}},
    {'e', {0x00, 0x00, 0x0e, 0x11, 0x1f, 0x10, 0x0e}},
}};

const Glyph* find_glyph(char c) {
  for (const Glyph& g : kGlyphs)
    if (g.ch == c) return &g;
  return nullptr;
}

void draw_text(RgbImage& img, int x, int y, const std::string& text) {
  int cx = x;
  for (char c : text) {
    if (const Glyph* g = find_glyph(c)) {
      for (int r = 0; r < 7; ++r)
        for (int col = 0; col < 5; ++col)
          if (g->rows[static_cast<size_t>(r)] & (1 << (4 - col))) img.set(cx + col, y + r, kBlack);
    }
    cx += 6;
  }
}

int text_width(const std::string& text) {
  return text.empty() ? 0 : static_cast<int>(text.size()) * 6 - 1;
}

std::string format_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return std::string(buf);
}

struct Layout {
  int nx = 0, ny = 0;
  int cell = 16;
  int left = 60, right = 12, top = 24, bottom = 40;
  int plot_w = 0, plot_h = 0, width = 0, height = 0;

  explicit Layout(const Heatmap& map) {
    nx = static_cast<int>(map.x_axis.size());
    ny = static_cast<int>(map.y_axis.size());
    cell = std::max(4, std::min(24, 640 / std::max(nx, ny)));
    plot_w = nx * cell;
    plot_h = ny * cell;
    width = left + plot_w + right;
    height = top + plot_h + bottom;
  }
  // Pixel box of cell (ix, iy); the y axis points up.
  int cell_x(int ix) const { return left + ix * cell; }
  int cell_y(int iy) const { return top + (ny - 1 - iy) * cell; }
  int tick_stride(int n) const { return std::max(1, (n + 6) / 7); }
};

double value_t(const Heatmap& map, double lo, double hi, size_t i) {
  if (!(hi > lo)) return 0.5;
  return (map.value[i] - lo) / (hi - lo);
}

void value_range(const Heatmap& map, double& lo, double& hi) {
  lo = std::numeric_limits<double>::infinity();
  hi = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < map.value.size(); ++i) {
    if (!map.present.empty() && !map.present[i]) continue;
    lo = std::min(lo, map.value[i]);
    hi = std::max(hi, map.value[i]);
  }
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 1.0;
  }
}

std::array<uint8_t, 3> cell_color(const Heatmap& map, double lo, double hi, size_t i) {
  if (!map.present.empty() && !map.present[i]) return kAbsent;
  if (map.binary) return map.value[i] > 0.5 ? viridis(1.0) : viridis(0.0);
  return viridis(value_t(map, lo, hi, i));
}

std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return std::string(buf);
}

std::string svg_color(std::array<uint8_t, 3> rgb) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return std::string(buf);
}

// Escapes the handful of XML-special characters that can appear in titles.
std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void Heatmap::validate() const {
  if (x_axis.empty() || y_axis.empty()) throw std::invalid_argument("heatmap: empty axis");
  const size_t n = x_axis.size() * y_axis.size();
  if (value.size() != n) throw std::invalid_argument("heatmap: value size does not match axes");
  if (!present.empty() && present.size() != n)
    throw std::invalid_argument("heatmap: present mask size does not match axes");
  if (!overlay.empty() && overlay.size() != n)
    throw std::invalid_argument("heatmap: overlay mask size does not match axes");
  if (!star_y.empty() && star_y.size() != x_axis.size())
    throw std::invalid_argument("heatmap: star list must have one entry per column");
  for (int s : star_y)
    if (s < -1 || s >= static_cast<int>(y_axis.size()))
      throw std::invalid_argument("heatmap: star index out of range");
}

std::string heatmap_svg(const Heatmap& map) {
  map.validate();
  const Layout lay(map);
  double lo, hi;
  value_range(map, lo, hi);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << lay.width << "\" height=\""
      << lay.height << "\" viewBox=\"0 0 " << lay.width << " " << lay.height << "\">\n";
  svg << "<rect width=\"" << lay.width << "\" height=\"" << lay.height << "\" fill=\"#ffffff\"/>\n";
  if (!map.title.empty())
    svg << "<text x=\"" << lay.left + lay.plot_w / 2 << "\" y=\"15\" font-family=\"sans-serif\""
        << " font-size=\"13\" text-anchor=\"middle\">" << xml_escape(map.title) << "</text>\n";

  for (int ix = 0; ix < lay.nx; ++ix)
    for (int iy = 0; iy < lay.ny; ++iy) {
      const size_t i = static_cast<size_t>(ix) * lay.ny + iy;
      svg << "<rect x=\"" << lay.cell_x(ix) << "\" y=\"" << lay.cell_y(iy) << "\" width=\""
          << lay.cell << "\" height=\"" << lay.cell << "\" fill=\""
          << svg_color(cell_color(map, lo, hi, i)) << "\"/>\n";
    }

  if (!map.overlay.empty())
    for (int ix = 0; ix < lay.nx; ++ix)
      for (int iy = 0; iy < lay.ny; ++iy) {
        const size_t i = static_cast<size_t>(ix) * lay.ny + iy;
        if (!map.overlay[i]) continue;
        svg << "<rect class=\"near-opt\" x=\"" << svg_num(lay.cell_x(ix) + 0.75) << "\" y=\""
            << svg_num(lay.cell_y(iy) + 0.75) << "\" width=\"" << svg_num(lay.cell - 1.5)
            << "\" height=\"" << svg_num(lay.cell - 1.5)
            << "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1.5\"/>\n";
      }

  for (size_t ix = 0; ix < map.star_y.size(); ++ix) {
    const int iy = map.star_y[ix];
    if (iy < 0) continue;
    const double cx = lay.cell_x(static_cast<int>(ix)) + lay.cell / 2.0;
    const double cy = lay.cell_y(iy) + lay.cell / 2.0;
    const double r_out = 0.42 * lay.cell;
    const double r_in = 0.17 * lay.cell;
    svg << "<polygon class=\"star\" fill=\"#000000\" points=\"";
    for (int k = 0; k < 10; ++k) {
      constexpr double pi = std::numbers::pi;
      const double ang = -pi / 2.0 + k * pi / 5.0;
      const double r = (k % 2 == 0) ? r_out : r_in;
      if (k) svg << " ";
      svg << svg_num(cx + r * std::cos(ang)) << "," << svg_num(cy + r * std::sin(ang));
    }
    svg << "\"/>\n";
  }

  // Axes and tick labels.
  svg << "<line x1=\"" << lay.left << "\" y1=\"" << lay.top << "\" x2=\"" << lay.left
      << "\" y2=\"" << lay.top + lay.plot_h << "\" stroke=\"#000000\"/>\n";
  svg << "<line x1=\"" << lay.left << "\" y1=\"" << lay.top + lay.plot_h << "\" x2=\""
      << lay.left + lay.plot_w << "\" y2=\"" << lay.top + lay.plot_h
      << "\" stroke=\"#000000\"/>\n";
  const int sx = lay.tick_stride(lay.nx);
  for (int ix = 0; ix < lay.nx; ix += sx) {
    const double cx = lay.cell_x(ix) + lay.cell / 2.0;
    svg << "<text x=\"" << svg_num(cx) << "\" y=\"" << lay.top + lay.plot_h + 14
        << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">"
        << format_tick(map.x_axis[static_cast<size_t>(ix)]) << "</text>\n";
  }
  const int sy = lay.tick_stride(lay.ny);
  for (int iy = 0; iy < lay.ny; iy += sy) {
    const double cy = lay.cell_y(iy) + lay.cell / 2.0;
    svg << "<text x=\"" << lay.left - 4 << "\" y=\"" << svg_num(cy + 3.5)
        << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">"
        << format_tick(map.y_axis[static_cast<size_t>(iy)]) << "</text>\n";
  }
  if (!map.x_label.empty())
    svg << "<text x=\"" << lay.left + lay.plot_w / 2 << "\" y=\"" << lay.height - 8
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
        << xml_escape(map.x_label) << "</text>\n";
  if (!map.y_label.empty())
    svg << "<text x=\"12\" y=\"" << lay.top + lay.plot_h / 2
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\""
        << " transform=\"rotate(-90 12 " << lay.top + lay.plot_h / 2 << ")\">"
        << xml_escape(map.y_label) << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

RgbImage heatmap_raster(const Heatmap& map) {
  map.validate();
  const Layout lay(map);
  double lo, hi;
  value_range(map, lo, hi);

  RgbImage img(lay.width, lay.height, kWhite);
  for (int ix = 0; ix < lay.nx; ++ix)
    for (int iy = 0; iy < lay.ny; ++iy) {
      const size_t i = static_cast<size_t>(ix) * lay.ny + iy;
      const std::array<uint8_t, 3> rgb = cell_color(map, lo, hi, i);
      const int x0 = lay.cell_x(ix);
      const int y0 = lay.cell_y(iy);
      for (int dy = 0; dy < lay.cell; ++dy)
        for (int dx = 0; dx < lay.cell; ++dx) img.set(x0 + dx, y0 + dy, rgb);
    }

  if (!map.overlay.empty())
    for (int ix = 0; ix < lay.nx; ++ix)
      for (int iy = 0; iy < lay.ny; ++iy) {
        const size_t i = static_cast<size_t>(ix) * lay.ny + iy;
        if (!map.overlay[i]) continue;
        const int x0 = lay.cell_x(ix);
        const int y0 = lay.cell_y(iy);
        for (int d = 0; d < lay.cell; ++d) {
          img.set(x0 + d, y0, kBlack);
          img.set(x0 + d, y0 + lay.cell - 1, kBlack);
          img.set(x0, y0 + d, kBlack);
          img.set(x0 + lay.cell - 1, y0 + d, kBlack);
        }
      }

  // Stars drawn as asterisks: horizontal, vertical, and diagonal strokes.
  for (size_t ix = 0; ix < map.star_y.size(); ++ix) {
    const int iy = map.star_y[ix];
    if (iy < 0) continue;
    const int cx = lay.cell_x(static_cast<int>(ix)) + lay.cell / 2;
    const int cy = lay.cell_y(iy) + lay.cell / 2;
    const int r = std::max(2, lay.cell * 2 / 5);
    for (int d = -r; d <= r; ++d) {
      img.set(cx + d, cy, kBlack);
      img.set(cx, cy + d, kBlack);
      img.set(cx + d, cy + d, kBlack);
      img.set(cx + d, cy - d, kBlack);
    }
  }

  for (int x = 0; x < lay.plot_w; ++x) img.set(lay.left + x, lay.top + lay.plot_h, kBlack);
  for (int y = 0; y <= lay.plot_h; ++y) img.set(lay.left - 1, lay.top + y, kBlack);

  const int sx = lay.tick_stride(lay.nx);
  for (int ix = 0; ix < lay.nx; ix += sx) {
    const std::string label = format_tick(map.x_axis[static_cast<size_t>(ix)]);
    const int cx = lay.cell_x(ix) + lay.cell / 2;
    draw_text(img, cx - text_width(label) / 2, lay.top + lay.plot_h + 5, label);
  }
  const int sy = lay.tick_stride(lay.ny);
  for (int iy = 0; iy < lay.ny; iy += sy) {
    const std::string label = format_tick(map.y_axis[static_cast<size_t>(iy)]);
    const int cy = lay.cell_y(iy) + lay.cell / 2;
    draw_text(img, lay.left - 5 - text_width(label), cy - 3, label);
  }
  return img;
}

void render_heatmap(const std::filesystem::path& svg_path,
                    const std::filesystem::path& ppm_path, const Heatmap& map) {
  const std::string svg = heatmap_svg(map);
  if (!svg_path.parent_path().empty()) std::filesystem::create_directories(svg_path.parent_path());
  std::ofstream out(svg_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + svg_path.string() + " for writing");
  out << svg;
  if (!out) throw std::runtime_error("failed writing " + svg_path.string());
  write_ppm(ppm_path, heatmap_raster(map));
}

}  // namespace stepmap
