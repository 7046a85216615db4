#pragma once

#include <string>

#include "grasp2d/serialize.hpp"

namespace grasp2d {

struct RenderOptions {
    int every = 10;           // render every k-th step
    int image_size = 640;     // px, square
    double margin = 0.02;     // m added around the scene bounds
    double force_scale = 5e-3;  // m of arrow length per N
};

// one SVG string for a single trace frame
std::string renderFrame(const Trace& trace, size_t frame_index, const RenderOptions& options);

// writes frame_000000.svg ... into out_dir; returns the number of frames
int renderTrace(const Trace& trace, const std::string& out_dir, const RenderOptions& options);

}  // namespace grasp2d
