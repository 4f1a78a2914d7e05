#include "physgen/lens/lens.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <sstream>

#include "physgen/core/parallel.hpp"

namespace physgen::lens {

LensParams LensParams::for_image(int width, int height) {
  LensParams p;
  p.fx = p.fy = width;
  p.cx = width / 2.0;
  p.cy = height / 2.0;
  return p;
}

void validate(const LensParams& p) {
  for (double v : {p.k1, p.k2, p.k3, p.p1, p.p2, p.fx, p.fy, p.cx, p.cy})
    if (!std::isfinite(v)) throw ValidationError("lens parameters must be finite");
  if (!(p.fx > 0.0) || !(p.fy > 0.0)) throw ValidationError("focal lengths must be positive");
}

Vec2 to_normalized(Vec2 px, const Intrinsics& k) { return {(px.x - k.cx) / k.fx, (px.y - k.cy) / k.fy}; }
Vec2 to_pixels(Vec2 n, const Intrinsics& k) { return {n.x * k.fx + k.cx, n.y * k.fy + k.cy}; }

namespace {

double radial_factor(double r2, const LensParams& p) { return 1.0 + r2 * (p.k1 + r2 * (p.k2 + r2 * p.k3)); }

Vec2 tangential_terms(Vec2 n, double p1, double p2) {
  const double r2 = n.x * n.x + n.y * n.y;
  return {2.0 * p1 * n.x * n.y + p2 * (r2 + 2.0 * n.x * n.x), p1 * (r2 + 2.0 * n.y * n.y) + 2.0 * p2 * n.x * n.y};
}

}  // namespace

Vec2 distort_normalized(Vec2 n, const LensParams& p) {
  const double r2 = n.x * n.x + n.y * n.y;
  const double rad = radial_factor(r2, p);
  const Vec2 t = tangential_terms(n, p.p1, p.p2);
  return {n.x * rad + t.x, n.y * rad + t.y};
}

Vec2 distort_point_full(Vec2 px, const LensParams& p) {
  if (p.zero_coefficients()) return px;
  const Intrinsics k = p.intrinsics();
  return to_pixels(distort_normalized(to_normalized(px, k), p), k);
}

Vec2 tangential_p1_only(Vec2 n, double p1) {
  const double r2 = n.x * n.x + n.y * n.y;
  return {n.x + 2.0 * p1 * n.x * n.y, n.y + p1 * (r2 + 2.0 * n.y * n.y)};
}

Vec2 tangential_p2_only(Vec2 n, double p2) {
  const double r2 = n.x * n.x + n.y * n.y;
  return {n.x + p2 * (r2 + 2.0 * n.x * n.x), n.y + 2.0 * p2 * n.x * n.y};
}

Vec2 distort_point_tangential(Vec2 px, double p1, double p2, const Intrinsics& k) {
  if (p1 == 0.0 && p2 == 0.0) return px;
  const Vec2 n = to_normalized(px, k);
  Vec2 d;
  if (p2 == 0.0) {
    d = tangential_p1_only(n, p1);
  } else if (p1 == 0.0) {
    d = tangential_p2_only(n, p2);
  } else {
    const Vec2 t = tangential_terms(n, p1, p2);
    d = {n.x + t.x, n.y + t.y};
  }
  return to_pixels(d, k);
}

Inversion invert_distortion_detailed(Vec2 q_px, const LensParams& p, double tol) {
  if (p.zero_coefficients()) return {q_px, 1, 0.0};
  const Intrinsics k = p.intrinsics();
  const Vec2 q = to_normalized(q_px, k);
  Vec2 x = q;
  double residual = norm(distort_normalized(x, p) - q);
  for (int it = 1; it <= kMaxInversionIterations; ++it) {
    const double rad = radial_factor(x.x * x.x + x.y * x.y, p);
    const Vec2 t = tangential_terms(x, p.p1, p.p2);
    x = {(q.x - t.x) / rad, (q.y - t.y) / rad};
    const double r = norm(distort_normalized(x, p) - q);
    if (!std::isfinite(r)) break;  // keep the last finite residual
    residual = r;
    if (residual <= tol) return {to_pixels(x, k), it, residual};
  }
  throw DivergenceError(residual, "distortion inversion did not converge (residual " + std::to_string(residual) + ")");
}

Vec2 invert_distortion(Vec2 q_px, const LensParams& params, double tol) {
  return invert_distortion_detailed(q_px, params, tol).point;
}

Image distort_image(const Image& img, const LensParams& params, unsigned workers) {
  if (img.empty()) throw ValidationError("distort_image: empty image");
  validate(params);
  if (params.zero_coefficients()) return img;
  Image out(img.width, img.height, img.channels);
  const double max_x = img.width - 1.0, max_y = img.height - 1.0;
  parallel_for(static_cast<std::size_t>(img.height), workers, [&](std::size_t row) {
    const int y = static_cast<int>(row);
    for (int x = 0; x < img.width; ++x) {
      Vec2 s = distort_point_full({static_cast<double>(x), static_cast<double>(y)}, params);
      // absorb rounding noise so exact grid hits stay exact
      if (std::abs(s.x - std::round(s.x)) < 1e-9) s.x = std::round(s.x);
      if (std::abs(s.y - std::round(s.y)) < 1e-9) s.y = std::round(s.y);
      if (!(s.x >= 0.0 && s.y >= 0.0 && s.x <= max_x && s.y <= max_y)) continue;
      const int x0 = static_cast<int>(s.x), y0 = static_cast<int>(s.y);
      const int x1 = std::min(x0 + 1, img.width - 1), y1 = std::min(y0 + 1, img.height - 1);
      const double fx = s.x - x0, fy = s.y - y0;
      for (int c = 0; c < img.channels; ++c) {
        const double top = img.at(x0, y0, c) * (1.0 - fx) + img.at(x1, y0, c) * fx;
        const double bottom = img.at(x0, y1, c) * (1.0 - fx) + img.at(x1, y1, c) * fx;
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::round(top * (1.0 - fy) + bottom * fy), 0.0, 255.0));
      }
    }
  });
  return out;
}

LandmarkSet transform_landmarks(const LandmarkSet& lm, const LensParams& params, double tol) {
  validate(params);
  LandmarkSet out = lm;
  for (std::size_t i = 0; i < lm.points.size(); ++i) {
    try {
      out.points[i] = invert_distortion(lm.points[i], params, tol);
    } catch (const DivergenceError& e) {
      throw LandmarkDivergenceError(i, e.residual());
    }
  }
  return out;
}

std::string landmarks_to_csv(const LandmarkSet& lm) {
  std::ostringstream os;
  os.precision(17);
  os << "index,x,y\n";
  for (std::size_t i = 0; i < lm.points.size(); ++i) os << i << ',' << lm.points[i].x << ',' << lm.points[i].y << '\n';
  return os.str();
}

LandmarkSet landmarks_from_csv(const std::string& text, int width, int height) {
  LandmarkSet lm;
  lm.width = width;
  lm.height = height;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (line_no == 1 && line.rfind("index", 0) == 0)) continue;
    std::istringstream row(line);
    std::string a, b, c;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c))
      throw ValidationError("landmark CSV line " + std::to_string(line_no) + ": expected index,x,y");
    try {
      const std::size_t idx = std::stoul(a);
      if (idx != lm.points.size())
        throw ValidationError("landmark CSV line " + std::to_string(line_no) + ": indices must be consecutive");
      lm.points.push_back({std::stod(b), std::stod(c)});
    } catch (const std::logic_error&) {
      throw ValidationError("landmark CSV line " + std::to_string(line_no) + ": not a number");
    }
  }
  return lm;
}

std::string params_to_json(const LensParams& p) {
  const nlohmann::ordered_json j = {{"k1", p.k1}, {"k2", p.k2}, {"k3", p.k3}, {"p1", p.p1}, {"p2", p.p2},
                                    {"fx", p.fx}, {"fy", p.fy}, {"cx", p.cx}, {"cy", p.cy}};
  return j.dump(2);
}

LensParams params_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("lens params JSON: ") + e.what());
  }
  LensParams p;
  p.k1 = j.value("k1", 0.0);
  p.k2 = j.value("k2", 0.0);
  p.k3 = j.value("k3", 0.0);
  p.p1 = j.value("p1", 0.0);
  p.p2 = j.value("p2", 0.0);
  try {
    p.fx = j.at("fx").get<double>();
    p.fy = j.at("fy").get<double>();
    p.cx = j.at("cx").get<double>();
    p.cy = j.at("cy").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("lens params JSON: ") + e.what());
  }
  validate(p);
  return p;
}

}  // namespace physgen::lens
