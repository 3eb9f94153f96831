#include "render.hpp"

#include <cmath>
#include <cstdio>
#include <memory>

#include <png.h>

#include "error.hpp"

namespace craft {

namespace {

struct Painter {
  Image& image;
  double scale;  // pixels per meter

  // pixel (px, py) center in world coordinates
  Vec2 world(int px, int py) const {
    return {(px + 0.5) / scale, (image.height - (py + 0.5)) / scale};
  }

  void set(int px, int py, std::array<std::uint8_t, 3> c) {
    auto* p = &image.rgb[(static_cast<std::size_t>(py) * image.width + px) * 3];
    p[0] = c[0];
    p[1] = c[1];
    p[2] = c[2];
  }

  template <typename Inside>
  void fill(Aabb box, std::array<std::uint8_t, 3> color, Inside inside) {
    const int x0 = std::max(0, static_cast<int>(std::floor(box.lo.x * scale)));
    const int x1 = std::min(image.width - 1, static_cast<int>(std::ceil(box.hi.x * scale)));
    const int y0 = std::max(0, static_cast<int>(std::floor(image.height - box.hi.y * scale)));
    const int y1 = std::min(image.height - 1, static_cast<int>(std::ceil(image.height - box.lo.y * scale)));
    for (int py = y0; py <= y1; ++py) {
      for (int px = x0; px <= x1; ++px) {
        if (inside(world(px, py))) set(px, py, color);
      }
    }
  }

  void polygon(const std::vector<Vec2>& pts, std::array<std::uint8_t, 3> color) {
    Aabb box{pts.front(), pts.front()};
    for (Vec2 v : pts) {
      box.lo = {std::min(box.lo.x, v.x), std::min(box.lo.y, v.y)};
      box.hi = {std::max(box.hi.x, v.x), std::max(box.hi.y, v.y)};
    }
    fill(box, color, [&](Vec2 p) {
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (cross(pts[(i + 1) % pts.size()] - pts[i], p - pts[i]) < 0.0) return false;
      }
      return true;
    });
  }

  void circle(Vec2 c, double r, std::array<std::uint8_t, 3> color) {
    fill({{c.x - r, c.y - r}, {c.x + r, c.y + r}}, color,
         [&](Vec2 p) { return length_squared(p - c) <= r * r; });
  }
};

}  // namespace

std::array<std::uint8_t, 3> rgb_of(Color c) {
  switch (c) {
    case Color::gray: return {128, 128, 128};
    case Color::red: return {220, 40, 40};
    case Color::blue: return {40, 80, 220};
    case Color::green: return {40, 170, 60};
    case Color::brown: return {140, 90, 40};
    case Color::purple: return {140, 60, 180};
    case Color::cyan: return {40, 200, 200};
    case Color::yellow: return {230, 210, 40};
  }
  return {255, 255, 255};
}

std::vector<Image> render_frames(const SceneSpec& scene, const physics::SimulationTrace& trace,
                                 int fps, int resolution, const RenderOptions& options) {
  if (fps <= 0 || resolution <= 0) fail(ErrorKind::argument, "fps and resolution must be positive");
  const double tick_rate = 1.0 / trace.dt;
  const double exact = tick_rate / fps;
  const int stride = static_cast<int>(std::lround(exact));
  if (stride < 1 || std::abs(exact - stride) > 1e-6 * exact) {
    fail(ErrorKind::argument, "fps " + std::to_string(fps) + " does not divide the tick rate");
  }

  constexpr std::array<std::uint8_t, 3> kBlack{0, 0, 0};
  Image background{resolution, resolution,
                   std::vector<std::uint8_t>(static_cast<std::size_t>(resolution) * resolution * 3, 255)};
  Painter bg{background, resolution / options.world_size};
  for (const auto& s : scene.statics) {
    for (const auto& poly : s.polygons) bg.polygon(poly, kBlack);
  }

  std::vector<Image> frames;
  for (int tick = 0; tick < trace.tick_count; tick += stride) {
    Image frame = background;
    Painter painter{frame, bg.scale};
    for (const auto& st : trace.states[tick]) {
      const DynamicObject* d = scene.find_dynamic(st.id);
      if (!d) continue;
      const double r = extent(d->size);
      if (d->shape == Shape::circle) {
        painter.circle(st.position, r, rgb_of(d->color));
      } else {
        const Transform xf(st.position, st.angle);
        std::vector<Vec2> pts;
        for (Vec2 v : local_outline(d->shape, r)) pts.push_back(apply(xf, v));
        painter.polygon(pts, rgb_of(d->color));
      }
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

void write_png(const std::filesystem::path& path, const Image& image) {
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!file) fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorKind::internal, "libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorKind::io, "failed writing " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < image.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(&image.rgb[static_cast<std::size_t>(y) * image.width * 3]));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace craft
