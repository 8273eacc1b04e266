#pragma once

#include <string>

#include "mmd/catalog.hpp"

namespace mmd {

/**
 * Deterministic 240x240 placeholder image for a product. The color token sets
 * the hue of the background and glyph fills, the category picks the glyph, the
 * pattern adds an overlay, and the caption lists the id and the remaining
 * attributes. Color appears only through fill values.
 */
std::string render_product_svg(const Product& product);

/// Escapes the five XML special characters.
std::string xml_escape(std::string_view text);

}  // namespace mmd
