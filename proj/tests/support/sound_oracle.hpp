#pragma once

// Reference implementations for the sound solver. They share no code with
// src/sound: high-precision formula evaluation, a dense visibility graph with
// O(V^2) Dijkstra over every polygon vertex, and specular paths built by
// mirroring the receiver instead of the source.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <limits>
#include <vector>

#include "physgen/scene/scene.hpp"

namespace oracle {

using hp = boost::multiprecision::cpp_bin_float_50;
using physgen::Vec2;
using Ring = std::vector<Vec2>;

inline double hp_spreading(double d) { return static_cast<double>(20 * log10(hp(d)) + 11); }
inline double hp_atmospheric(double d, double a) { return static_cast<double>(hp(a) * hp(d) / 1000); }
inline double hp_diffraction(double delta, double lambda, double c) {
  const hp z = hp(40) / hp(lambda) * hp(c) * hp(delta);
  if (z < -2) return 0.0;
  return static_cast<double>(10 * log10(3 + z));
}
/// Unrolled recurrence: base + (1 + 2 + ... + n) * 10 log10(1 - alpha).
inline double hp_reflected(double base, int n, double alpha) {
  return static_cast<double>(hp(base) + hp(n) * (n + 1) / 2 * 10 * log10(1 - hp(alpha)));
}

// --- geometry, written independently of physgen::geometry ---

inline double cross3(Vec2 o, Vec2 a, Vec2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

/// Winding number; 0 means outside.
inline int winding(Vec2 p, const Ring& ring) {
  int w = 0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Vec2 a = ring[i], b = ring[(i + 1) % ring.size()];
    if (a.y <= p.y) {
      if (b.y > p.y && cross3(a, b, p) > 0) ++w;
    } else if (b.y <= p.y && cross3(a, b, p) < 0) {
      --w;
    }
  }
  return w;
}

inline double seg_dist(Vec2 p, Vec2 a, Vec2 b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  double t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / (dx * dx + dy * dy);
  t = t < 0 ? 0 : (t > 1 ? 1 : t);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

/// Inside and farther than eps from the boundary.
inline bool deep_inside(Vec2 p, const Ring& ring, double eps = 1e-7) {
  if (winding(p, ring) == 0) return false;
  for (std::size_t i = 0; i < ring.size(); ++i)
    if (seg_dist(p, ring[i], ring[(i + 1) % ring.size()]) < eps) return false;
  return true;
}

inline bool crosses(Vec2 p, Vec2 q, Vec2 a, Vec2 b) {
  const double eps = 1e-10 * std::hypot(q.x - p.x, q.y - p.y) * std::hypot(b.x - a.x, b.y - a.y);
  const double d1 = cross3(p, q, a), d2 = cross3(p, q, b), d3 = cross3(a, b, p), d4 = cross3(a, b, q);
  return ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps)) && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps));
}

/// Segment p-q enters some building: proper edge crossing or a sampled
/// interior point well inside a footprint.
inline bool blocked(const std::vector<Ring>& rings, Vec2 p, Vec2 q, int samples = 400) {
  for (const Ring& r : rings)
    for (std::size_t i = 0; i < r.size(); ++i)
      if (crosses(p, q, r[i], r[(i + 1) % r.size()])) return true;
  for (int k = 1; k < samples; ++k) {
    const double t = static_cast<double>(k) / samples;
    const Vec2 m{p.x + (q.x - p.x) * t, p.y + (q.y - p.y) * t};
    for (const Ring& r : rings)
      if (deep_inside(m, r)) return true;
  }
  return false;
}

/// Dense Dijkstra over {src, rcv, all vertices}; returns infinity when unreachable.
inline double shortest_path_length(const std::vector<Ring>& rings, Vec2 src, Vec2 rcv) {
  std::vector<Vec2> nodes{src, rcv};
  for (const Ring& r : rings) nodes.insert(nodes.end(), r.begin(), r.end());
  const std::size_t n = nodes.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> w(n * n, inf);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (!blocked(rings, nodes[i], nodes[j]))
        w[i * n + j] = w[j * n + i] = std::hypot(nodes[i].x - nodes[j].x, nodes[i].y - nodes[j].y);
  std::vector<double> dist(n, inf);
  std::vector<bool> done(n, false);
  dist[0] = 0;
  for (std::size_t it = 0; it < n; ++it) {
    std::size_t u = n;
    for (std::size_t i = 0; i < n; ++i)
      if (!done[i] && (u == n || dist[i] < dist[u])) u = i;
    if (u == n || dist[u] == inf) break;
    done[u] = true;
    for (std::size_t v = 0; v < n; ++v)
      if (dist[u] + w[u * n + v] < dist[v]) dist[v] = dist[u] + w[u * n + v];
  }
  return dist[1];
}

inline Vec2 reflect(Vec2 p, Vec2 a, Vec2 b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / (dx * dx + dy * dy);
  const Vec2 f{a.x + t * dx, a.y + t * dy};
  return {2 * f.x - p.x, 2 * f.y - p.y};
}

struct Wall {
  Vec2 a, b;
  Vec2 out;  // outward normal
};

inline std::vector<Wall> walls_of(const std::vector<Ring>& rings) {
  std::vector<Wall> out;
  for (const Ring& r : rings) {
    double area2 = 0;
    for (std::size_t i = 0; i < r.size(); ++i) area2 += cross3({0, 0}, r[i], r[(i + 1) % r.size()]);
    for (std::size_t i = 0; i < r.size(); ++i) {
      const Vec2 a = r[i], b = r[(i + 1) % r.size()];
      const double len = std::hypot(b.x - a.x, b.y - a.y);
      Vec2 n{(b.y - a.y) / len, -(b.x - a.x) / len};
      if (area2 < 0) n = {-n.x, -n.y};
      out.push_back({a, b, n});
    }
  }
  return out;
}

inline bool in_front(const Wall& w, Vec2 p) { return (p.x - w.a.x) * w.out.x + (p.y - w.a.y) * w.out.y > 1e-9; }

/// Lengths of all valid specular paths of order 1..max_order, found by
/// mirroring the receiver across the chain in reverse.
inline std::vector<std::pair<int, double>> specular_lengths(const std::vector<Ring>& rings, Vec2 src, Vec2 rcv,
                                                            int max_order) {
  const std::vector<Wall> walls = walls_of(rings);
  std::vector<std::pair<int, double>> out;
  std::vector<std::size_t> chain;
  auto try_chain = [&] {
    const std::size_t n = chain.size();
    // images of the receiver: img[k] = receiver unfolded across walls k..n-1
    std::vector<Vec2> img(n + 1);
    img[n] = rcv;
    for (std::size_t k = n; k-- > 0;) img[k] = reflect(img[k + 1], walls[chain[k]].a, walls[chain[k]].b);
    std::vector<Vec2> pts{src};
    for (std::size_t k = 0; k < n; ++k) {
      const Wall& w = walls[chain[k]];
      const Vec2 from = pts.back(), to = img[k];
      const double den = cross3({0, 0}, {to.x - from.x, to.y - from.y}, {w.b.x - w.a.x, w.b.y - w.a.y});
      if (den == 0) return;
      const double s = cross3({0, 0}, {w.a.x - from.x, w.a.y - from.y}, {w.b.x - w.a.x, w.b.y - w.a.y}) / den;
      const double t = cross3({0, 0}, {w.a.x - from.x, w.a.y - from.y}, {to.x - from.x, to.y - from.y}) / den;
      if (s <= 0 || s > 1 || t < 0 || t > 1) return;
      pts.push_back({from.x + (to.x - from.x) * s, from.y + (to.y - from.y) * s});
    }
    pts.push_back(rcv);
    for (std::size_t k = 0; k < n; ++k) {
      const Wall& w = walls[chain[k]];
      if (!in_front(w, pts[k]) || !in_front(w, pts[k + 2])) return;
    }
    double len = 0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
      if (blocked(rings, pts[k], pts[k + 1])) return;
      len += std::hypot(pts[k + 1].x - pts[k].x, pts[k + 1].y - pts[k].y);
    }
    out.push_back({static_cast<int>(n), len});
  };
  auto recurse = [&](auto&& self, int depth) -> void {
    if (depth > 0) try_chain();
    if (depth == max_order) return;
    for (std::size_t w = 0; w < walls.size(); ++w) {
      if (!chain.empty() && chain.back() == w) continue;
      chain.push_back(w);
      self(self, depth + 1);
      chain.pop_back();
    }
  };
  recurse(recurse, 0);
  return out;
}

/// Energetic sum over the direct path (if clear) and every specular path.
inline double reflection_level(const std::vector<Ring>& rings, Vec2 src, Vec2 rcv, int max_order, double lw,
                               double alpha_vert, double alpha_air) {
  using std::log10;
  std::vector<std::pair<int, double>> paths = specular_lengths(rings, src, rcv, max_order);
  if (!blocked(rings, src, rcv)) paths.push_back({0, std::hypot(rcv.x - src.x, rcv.y - src.y)});
  if (paths.empty()) return 0.0;
  hp energy = 0;
  for (const auto& [n, len] : paths) {
    const hp l = hp(lw) + hp(n) * (n + 1) / 2 * 10 * log10(1 - hp(alpha_vert)) -
                 (20 * log10(hp(len < 1 ? 1 : len)) + 11) - hp(alpha_air) * hp(len) / 1000;
    energy += pow(hp(10), l / 10);
  }
  const double level = static_cast<double>(10 * log10(energy));
  return level < 0 ? 0.0 : level;
}

}  // namespace oracle
