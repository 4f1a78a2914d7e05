#include "physgen/sound/paths.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>

namespace physgen::sound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

DiffractionGraph::DiffractionGraph(const scene::SceneIndex& index, Vec2 source) : index_(&index), source_(source) {
  const scene::UrbanScene& sc = index.scene();
  for (const scene::Polygon& poly : sc.buildings) {
    const double sign = signed_area(poly) < 0.0 ? -1.0 : 1.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 prev = poly[(i + n - 1) % n], v = poly[i], next = poly[(i + 1) % n];
      if (sign * orient(prev, v, next) <= 0.0) continue;  // reflex or straight
      // skip corners buried inside a neighbouring building
      Vec2 out = scene::outward_normal(prev, v) + scene::outward_normal(v, next);
      out = out * (sign / norm(out));
      if (index.is_indoor(v + out * 1e-6)) continue;
      corners_.push_back(v);
    }
  }

  const std::size_t m = corners_.size();
  dist_.assign(m, kInf);
  pred_.assign(m, -1);
  std::vector<std::vector<std::size_t>> adj(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if (!index.segment_blocked(corners_[i], corners_[j])) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }

  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (std::size_t i = 0; i < m; ++i) {
    if (index.segment_blocked(source_, corners_[i])) continue;
    dist_[i] = distance(source_, corners_[i]);
    heap.push({dist_[i], i});
  }
  std::vector<char> done(m, 0);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (done[u]) continue;
    done[u] = 1;
    for (std::size_t v : adj[u]) {
      const double nd = d + distance(corners_[u], corners_[v]);
      if (nd < dist_[v]) {
        dist_[v] = nd;
        pred_[v] = static_cast<int>(u);
        heap.push({nd, v});
      }
    }
  }
  for (std::size_t i = 0; i < m; ++i)
    if (dist_[i] < kInf) order_.push_back(i);
}

std::optional<PropagationPath> DiffractionGraph::shortest_path(Vec2 rcv) const {
  if (!index_->segment_blocked(source_, rcv))
    throw PreconditionError("shortest_diffraction_path: direct path is unobstructed");
  std::vector<std::pair<double, std::size_t>> cand;
  cand.reserve(order_.size());
  for (std::size_t i : order_) cand.push_back({dist_[i] + distance(corners_[i], rcv), i});
  std::sort(cand.begin(), cand.end());
  for (const auto& [total, i] : cand) {
    if (index_->segment_blocked(corners_[i], rcv)) continue;
    PropagationPath path;
    path.kind = PathKind::kDiffracted;
    path.length_m = total;
    path.delta_m = std::max(0.0, total - distance(source_, rcv));
    path.vertices.push_back(rcv);
    for (int k = static_cast<int>(i); k >= 0; k = pred_[k]) path.vertices.push_back(corners_[k]);
    path.vertices.push_back(source_);
    std::reverse(path.vertices.begin(), path.vertices.end());
    return path;
  }
  return std::nullopt;
}

std::optional<PropagationPath> shortest_diffraction_path(const scene::UrbanScene& scene, Vec2 src, Vec2 rcv) {
  const scene::SceneIndex index(scene);
  return DiffractionGraph(index, src).shortest_path(rcv);
}

namespace {

bool faces(const scene::EdgeRef& e, Vec2 p) { return dot(p - e.segment.a, e.normal) > 1e-9; }

}  // namespace

std::vector<ImageSource> enumerate_image_sources(const scene::SceneIndex& index, Vec2 src, int order) {
  if (order < 1) throw ValidationError("image source order must be at least 1");
  const auto& edges = index.edges();
  std::vector<ImageSource> out;
  std::size_t level_begin = 0;
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (faces(edges[e], src)) out.push_back({mirror_across_line(src, edges[e].segment), {e}});
  for (int k = 2; k <= order; ++k) {
    const std::size_t level_end = out.size();
    for (std::size_t i = level_begin; i < level_end; ++i) {
      for (std::size_t e = 0; e < edges.size(); ++e) {
        if (e == out[i].edges.back() || !faces(edges[e], out[i].position)) continue;
        ImageSource next{mirror_across_line(out[i].position, edges[e].segment), out[i].edges};
        next.edges.push_back(e);
        out.push_back(std::move(next));
      }
    }
    level_begin = level_end;
  }
  return out;
}

std::vector<ImageSource> enumerate_image_sources(const scene::UrbanScene& scene, Vec2 src, int order) {
  const scene::SceneIndex index(scene);
  return enumerate_image_sources(index, src, order);
}

std::optional<PropagationPath> specular_path(const scene::SceneIndex& index, const ImageSource& image, Vec2 src,
                                             Vec2 rcv) {
  const auto& edges = index.edges();
  const int n = image.order();
  std::vector<Vec2> images(n + 1);
  images[0] = src;
  for (int k = 1; k <= n; ++k) images[k] = mirror_across_line(images[k - 1], edges[image.edges[k - 1]].segment);

  std::vector<Vec2> pts{rcv};
  Vec2 target = rcv;
  for (int k = n; k >= 1; --k) {
    const scene::EdgeRef& e = edges[image.edges[k - 1]];
    if (!faces(e, target)) return std::nullopt;
    const Segment leg{target, images[k]};
    double u = 0.0;
    if (!line_intersection_param(leg, e.segment, u) || u <= 0.0 || u > 1.0) return std::nullopt;
    const Vec2 p = target + (images[k] - target) * u;
    const Vec2 ed = e.segment.b - e.segment.a;
    const double t = dot(p - e.segment.a, ed) / squared_norm(ed);
    if (t < -1e-12 || t > 1.0 + 1e-12) return std::nullopt;
    if (index.segment_blocked(p, target)) return std::nullopt;
    pts.push_back(p);
    target = p;
  }
  if (index.segment_blocked(src, target)) return std::nullopt;
  pts.push_back(src);
  std::reverse(pts.begin(), pts.end());

  PropagationPath path;
  path.kind = PathKind::kReflected;
  path.order = n;
  path.length_m = distance(images[n], rcv);
  path.vertices = std::move(pts);
  return path;
}

}  // namespace physgen::sound
