#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "physics.hpp"

namespace craft {

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, top row first

  friend bool operator==(const Image&, const Image&) = default;
};

struct RenderOptions {
  double world_size = 10.0;  // square world window [0, world_size]^2 in meters
};

std::array<std::uint8_t, 3> rgb_of(Color c);

/// Frames sampled every tick_rate / fps ticks, starting at tick 0.
std::vector<Image> render_frames(const SceneSpec& scene, const physics::SimulationTrace& trace,
                                 int fps, int resolution, const RenderOptions& options = {});

void write_png(const std::filesystem::path& path, const Image& image);

}  // namespace craft
