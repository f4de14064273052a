#include "polarmig/glyphs.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>

namespace polarmig {

EllipseGlyph make_glyph(const Eigen::Matrix2d& A, const Eigen::Vector2d& center, int samples) {
  EllipseGlyph g;
  g.center = center;
  const double nrm = A.norm();
  g.symmetric = (A - A.transpose()).norm() <= 1e-10 * nrm;
  if (g.symmetric) {
    // For a symmetric matrix the SVD follows the eigenvectors, which keeps
    // arrows on the axes even when the singular values coincide.
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(0.5 * (A + A.transpose()));
    Eigen::Vector2d lam = es.eigenvalues();
    Eigen::Matrix2d V = es.eigenvectors();
    if (std::abs(lam(0)) < std::abs(lam(1))) {
      std::swap(lam(0), lam(1));
      V.col(0).swap(V.col(1));
    }
    g.sigma = lam.cwiseAbs();
    g.v = V;
    g.u = V;
    for (int j = 0; j < 2; ++j)
      if (lam(j) < 0) g.u.col(j) *= -1;
  } else {
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    g.sigma = svd.singularValues();
    g.u = svd.matrixU();
    g.v = svd.matrixV();
  }
  g.deviation = 0;
  for (int j = 0; j < 2; ++j) {
    // atan2 keeps small angles accurate where acos of a near-one cosine would not.
    const Eigen::Vector2d a = g.u.col(j), b = g.v.col(j);
    g.deviation = std::max(g.deviation, std::atan2(std::abs(a.x() * b.y() - a.y() * b.x()), std::abs(a.dot(b))));
  }
  for (int s = 0; s < samples; ++s) {
    const double t = 2 * kPi * s / samples;
    g.boundary.push_back(A * Eigen::Vector2d(std::cos(t), std::sin(t)));
  }
  g.scale = g.sigma(0) > 0 ? 1.0 / g.sigma(0) : 1.0;
  return g;
}

namespace {

bool local_max(const ImageField& f, std::size_t p) {
  const auto& c = f.grid.count;
  const std::size_t l = p % c[2], j = (p / c[2]) % c[1], i = p / (std::size_t(c[2]) * c[1]);
  for (int di = -1; di <= 1; ++di)
    for (int dj = -1; dj <= 1; ++dj)
      for (int dl = -1; dl <= 1; ++dl) {
        const long ii = long(i) + di, jj = long(j) + dj, ll = long(l) + dl;
        if ((di | dj | dl) == 0 || ii < 0 || jj < 0 || ll < 0 || ii >= c[0] || jj >= c[1] || ll >= c[2]) continue;
        const std::size_t q = (std::size_t(ii) * c[1] + std::size_t(jj)) * c[2] + std::size_t(ll);
        if (f.alpha_norm[q] > f.alpha_norm[p] || (f.alpha_norm[q] == f.alpha_norm[p] && q < p)) return false;
      }
  return true;
}

}  // namespace

GlyphSet emit_glyphs(const ImageField& field, double threshold, double length) {
  if (field.alpha.empty() || field.alpha_norm.size() != field.alpha.size())
    throw ValidationError("glyphs need a recovered tensor field");
  if (threshold < 0 || threshold > 1) throw ValidationError("glyph threshold must lie in [0, 1]");
  double peak = 0;
  for (double v : field.alpha_norm) peak = std::max(peak, v);
  if (!(peak > 0)) throw ValidationError("glyphs need a non-zero tensor field");
  // Planar coordinates along the first two grid axes.
  const Vec3d e1 = field.grid.axis[0].norm() > 0 ? Vec3d(field.grid.axis[0].normalized()) : Vec3d::UnitX();
  Vec3d e2 = field.grid.axis[1].norm() > 0 ? Vec3d(field.grid.axis[1].normalized()) : Vec3d::UnitY();
  if (length <= 0) {
    double step = std::max(field.grid.axis[0].norm(), field.grid.axis[1].norm());
    length = step > 0 ? 0.45 * step : 1.0;
  }
  GlyphSet out;
  for (std::size_t p = 0; p < field.alpha.size(); ++p) {
    if (field.alpha_norm[p] < threshold * peak || !local_max(field, p)) continue;
    const Vec3d y = field.grid.point(p) - field.grid.origin;
    const Eigen::Vector2d at(y.dot(e1), y.dot(e2));
    EllipseGlyph re = make_glyph(field.alpha[p].real(), at);
    EllipseGlyph im = make_glyph(field.alpha[p].imag(), at);
    re.scale *= length;
    im.scale *= length;
    out.real.push_back(re);
    out.imag.push_back(im);
    out.points.push_back(p);
  }
  return out;
}

void write_glyph_svg(const std::string& path, const std::vector<EllipseGlyph>& glyphs, const std::string& title) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw FormatError("cannot open '" + path + "' for writing");
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  bool first = true;
  for (const auto& g : glyphs) {
    const double r = g.sigma(0) * g.scale;
    if (first) {
      x0 = g.center.x() - r, x1 = g.center.x() + r, y0 = g.center.y() - r, y1 = g.center.y() + r;
      first = false;
    }
    x0 = std::min(x0, g.center.x() - r);
    x1 = std::max(x1, g.center.x() + r);
    y0 = std::min(y0, g.center.y() - r);
    y1 = std::max(y1, g.center.y() + r);
  }
  const double pad = 0.05 * std::max(x1 - x0, y1 - y0);
  const double w = x1 - x0 + 2 * pad, h = y1 - y0 + 2 * pad;
  std::fprintf(f, "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"%.9g %.9g %.9g %.9g\">\n", x0 - pad, -(y1 + pad), w, h);
  std::fprintf(f, "<title>%s</title>\n", title.c_str());
  const double stroke = 0.004 * std::max(w, h);
  // SVG y grows downward, so points are drawn at (x, -y).
  for (const auto& g : glyphs) {
    std::fprintf(f, "<polygon fill=\"none\" stroke=\"black\" stroke-width=\"%.6g\" points=\"", stroke);
    for (const auto& b : g.boundary) {
      const Eigen::Vector2d q = g.center + g.scale * b;
      std::fprintf(f, "%.9g,%.9g ", q.x(), -q.y());
    }
    std::fprintf(f, "\"/>\n");
    const char* colors[2] = {"red", "blue"};
    for (int j = 0; j < 2; ++j) {
      const Eigen::Vector2d tip = g.center + g.scale * g.sigma(j) * g.v.col(j);
      std::fprintf(f, "<line x1=\"%.9g\" y1=\"%.9g\" x2=\"%.9g\" y2=\"%.9g\" stroke=\"%s\" stroke-width=\"%.6g\"/>\n",
                   g.center.x(), -g.center.y(), tip.x(), -tip.y(), colors[j], stroke);
      std::fprintf(f, "<circle cx=\"%.9g\" cy=\"%.9g\" r=\"%.6g\" fill=\"%s\"/>\n", tip.x(), -tip.y(), 2 * stroke, colors[j]);
    }
  }
  std::fprintf(f, "</svg>\n");
  std::fclose(f);
}

void write_glyph_csv(const std::string& path, const GlyphSet& set) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw FormatError("cannot open '" + path + "' for writing");
  std::fprintf(f, "part,point,cx,cy,sigma1,sigma2,u1x,u1y,u2x,u2y,v1x,v1y,v2x,v2y,scale,deviation,symmetric\n");
  for (int part = 0; part < 2; ++part) {
    const auto& gs = part == 0 ? set.real : set.imag;
    for (std::size_t n = 0; n < gs.size(); ++n) {
      const auto& g = gs[n];
      std::fprintf(f, "%s,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n",
                   part == 0 ? "re" : "im", set.points[n], g.center.x(), g.center.y(), g.sigma(0), g.sigma(1), g.u(0, 0),
                   g.u(1, 0), g.u(0, 1), g.u(1, 1), g.v(0, 0), g.v(1, 0), g.v(0, 1), g.v(1, 1), g.scale, g.deviation,
                   g.symmetric ? 1 : 0);
    }
  }
  std::fclose(f);
}

}  // namespace polarmig
