#include "mmd/svg.hpp"

#include <array>
#include <sstream>

#include "mmd/rng.hpp"

namespace mmd {

namespace {

constexpr std::array<std::string_view, 6> kGlyphs = {
    // boot / shoe silhouette
    R"(<path d="M70 70 h40 v70 h60 q20 0 20 20 v20 h-120 z")",
    // shirt
    R"(<path d="M80 60 l-30 25 l15 20 l15 -10 v85 h80 v-85 l15 10 l15 -20 l-30 -25 q-20 15 -40 0 z")",
    // dress
    R"(<path d="M100 55 h40 l-5 40 l35 90 h-100 l35 -90 z")",
    // trousers
    R"(<path d="M85 55 h70 l10 130 h-30 l-15 -90 l-15 90 h-30 z")",
    // bag
    R"(<path d="M75 100 h90 l10 85 h-110 z M100 100 q20 -50 40 0")",
    // generic garment
    R"(<rect x="70" y="60" width="100" height="120" rx="18")",
};

std::string hue_of(const std::string& token) {
  return std::to_string(stable_hash("hue:" + token) % 360);
}

std::string pattern_overlay(const std::string& pattern) {
  if (pattern.empty() || pattern == "solid") return {};
  const std::uint64_t h = stable_hash("pattern:" + pattern);
  std::ostringstream out;
  out << R"(<defs><pattern id="ov" width="16" height="16" patternUnits="userSpaceOnUse">)";
  switch (h % 3) {
    case 0:
      out << R"(<path d="M0 16 L16 0" stroke="#ffffff" stroke-opacity="0.5" stroke-width="3"/>)";
      break;
    case 1:
      out << R"(<circle cx="8" cy="8" r="3" fill-opacity="0.5" fill="#ffffff"/>)";
      break;
    default:
      out << R"(<path d="M0 8 H16 M8 0 V16" stroke="#ffffff" stroke-opacity="0.5" stroke-width="2"/>)";
      break;
  }
  out << R"(</pattern></defs>)";
  out << "<rect x=\"0\" y=\"0\" width=\"240\" height=\"200\" fill=\"url(#ov)\"/>";
  return out.str();
}

}  // namespace

std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string render_product_svg(const Product& product) {
  const std::string hue = hue_of(product.value_of(attr::kColor).value_or(""));
  const std::string pattern = product.value_of(attr::kPattern).value_or("");
  const auto glyph = kGlyphs[stable_hash("glyph:" + product.category) % kGlyphs.size()];

  std::string caption = product.id + " " + product.gender + " " + product.category;
  for (const auto& [attribute, token] : product.attrs) {
    if (attribute == attr::kColor) continue;
    caption += " " + token;
  }

  std::ostringstream out;
  out << R"(<?xml version="1.0" encoding="UTF-8"?>)" << '\n'
      << R"(<svg xmlns="http://www.w3.org/2000/svg" width="240" height="240" viewBox="0 0 240 240">)"
      << '\n'
      << "<rect x=\"0\" y=\"0\" width=\"240\" height=\"240\" fill=\"hsl(" << hue << ",55%,78%)\"/>" << '\n';
  const std::string overlay = pattern_overlay(pattern);
  if (!overlay.empty()) out << overlay << '\n';
  out << glyph << " fill=\"hsl(" << hue << ",50%,38%)\" stroke=\"#202020\" stroke-width=\"2\"/>"
      << '\n'
      << R"(<rect x="0" y="200" width="240" height="40" fill="#ffffff" fill-opacity="0.85"/>)" << '\n'
      << R"(<text x="8" y="216" font-family="sans-serif" font-size="11" fill="#202020">)"
      << xml_escape(product.id + " " + product.gender + " " + product.category) << "</text>\n"
      << R"(<text x="8" y="232" font-family="sans-serif" font-size="10" fill="#404040">)";
  std::string details;
  for (const auto& [attribute, token] : product.attrs) {
    if (attribute == attr::kColor) continue;
    if (!details.empty()) details += ", ";
    details += token;
  }
  out << xml_escape(details) << "</text>\n"
      << "<title>" << xml_escape(caption) << "</title>\n"
      << "</svg>\n";
  return out.str();
}

}  // namespace mmd
