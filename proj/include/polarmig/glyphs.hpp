#pragma once

#include "polarmig/migrate.hpp"

namespace polarmig {

// Image of the unit circle under a real 2x2 matrix plus the arrows sigma_j v_j.
struct EllipseGlyph {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  std::vector<Eigen::Vector2d> boundary;  // A v for unit v, unscaled
  Eigen::Vector2d sigma = Eigen::Vector2d::Zero();
  Eigen::Matrix2d u = Eigen::Matrix2d::Identity();  // principal axes of the ellipse
  Eigen::Matrix2d v = Eigen::Matrix2d::Identity();  // arrow directions
  double scale = 1;      // drawing scale, longest axis maps to the same length for every glyph
  double deviation = 0;  // largest angle between an arrow and its principal axis, radians
  bool symmetric = false;
};

EllipseGlyph make_glyph(const Eigen::Matrix2d& A, const Eigen::Vector2d& center = Eigen::Vector2d::Zero(),
                        int samples = 72);

struct GlyphSet {
  std::vector<EllipseGlyph> real, imag;
  std::vector<std::size_t> points;  // grid indices of the glyph sites
};

// Glyphs at local maxima of |alpha| above threshold * max, longest axis drawn at `length`.
GlyphSet emit_glyphs(const ImageField& field, double threshold, double length = 0);

void write_glyph_svg(const std::string& path, const std::vector<EllipseGlyph>& glyphs, const std::string& title);
void write_glyph_csv(const std::string& path, const GlyphSet& set);

}  // namespace polarmig
