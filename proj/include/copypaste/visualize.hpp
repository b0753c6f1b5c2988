#pragma once

#include <cstdint>
#include <span>

#include "copypaste/dataset.hpp"
#include "copypaste/image.hpp"

namespace copypaste {

/// Stable per-category color.
Rgb category_color(std::int64_t category_id);

/// True for annotations the engine marked as pasted.
bool is_pasted(const InstanceAnnotation& ann);

/// Tints each instance mask 50/50 with its category color, outlines its box
/// and writes the category id above it. Pasted instances are drawn last.
Image render_overlay(const Image& image, std::span<const InstanceAnnotation> annotations);

}  // namespace copypaste
