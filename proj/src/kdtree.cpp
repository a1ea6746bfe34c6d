#include "afft/kdtree.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

#include "afft/error.hpp"

namespace afft {

namespace {
constexpr std::uint32_t kLeafSize = 12;
}

SceneIndex::SceneIndex(std::vector<Point3> points) : points_(std::move(points)) {
  if (points_.empty()) throw InputError("cannot index an empty point set");
  if (points_.size() >= std::numeric_limits<std::uint32_t>::max()) throw InputError("point set too large");
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * points_.size() / kLeafSize + 1);
  build(0, static_cast<std::uint32_t>(points_.size()));
  ordered_points_.reserve(points_.size());
  for (auto i : order_) ordered_points_.push_back(points_[i]);
}

std::int32_t SceneIndex::build(std::uint32_t begin, std::uint32_t end) {
  Node node;
  node.begin = begin;
  node.end = end;
  node.lo = node.hi = points_[order_[begin]];
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    node.lo = node.lo.cwiseMin(points_[order_[i]]);
    node.hi = node.hi.cwiseMax(points_[order_[i]]);
  }
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= kLeafSize) return id;

  Eigen::Index axis = 0;
  (node.hi - node.lo).maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = points_[a][axis], cb = points_[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  const auto left = build(begin, mid);
  const auto right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

double SceneIndex::box_distance2(const Node& n, const Point3& q) {
  double d2 = 0.0;
  for (int a = 0; a < 3; ++a) {
    double e = 0.0;
    if (q[a] < n.lo[a])
      e = n.lo[a] - q[a];
    else if (q[a] > n.hi[a])
      e = q[a] - n.hi[a];
    d2 += e * e;
  }
  return d2;
}

Neighbor SceneIndex::nearest(const Point3& q) const {
  Neighbor best;
  std::int32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    // '>' rather than '>=': a box at exactly the best distance may hold a lower index.
    if (box_distance2(node, q) > best.squared_distance) continue;
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const Neighbor cand{order_[i], squared_distance(q, ordered_points_[i])};
        if (cand < best) best = cand;
      }
      continue;
    }
    const double dl = box_distance2(nodes_[node.left], q);
    const double dr = box_distance2(nodes_[node.right], q);
    // Push the farther child first so the nearer one is explored first.
    if (dl <= dr) {
      stack[top++] = node.right;
      stack[top++] = node.left;
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  return best;
}

std::vector<Neighbor> SceneIndex::k_nearest(const Point3& q, std::size_t k) const {
  std::vector<Neighbor> heap;  // max-heap under Neighbor::operator<
  if (k == 0) return heap;
  heap.reserve(k + 1);
  std::int32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (heap.size() == k && box_distance2(node, q) > heap.front().squared_distance) continue;
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const Neighbor cand{order_[i], squared_distance(q, ordered_points_[i])};
        if (heap.size() < k) {
          heap.push_back(cand);
          std::push_heap(heap.begin(), heap.end());
        } else if (cand < heap.front()) {
          std::pop_heap(heap.begin(), heap.end());
          heap.back() = cand;
          std::push_heap(heap.begin(), heap.end());
        }
      }
      continue;
    }
    const double dl = box_distance2(nodes_[node.left], q);
    const double dr = box_distance2(nodes_[node.right], q);
    if (dl <= dr) {
      stack[top++] = node.right;
      stack[top++] = node.left;
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  std::sort_heap(heap.begin(), heap.end());
  return heap;
}

std::vector<std::uint32_t> SceneIndex::within_radius(const Point3& q, double radius) const {
  std::vector<std::uint32_t> out;
  if (!(radius >= 0.0)) return out;
  const double r2 = radius * radius;
  std::int32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (box_distance2(node, q) > r2) continue;
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i)
        if (squared_distance(q, ordered_points_[i]) <= r2) out.push_back(order_[i]);
      continue;
    }
    stack[top++] = node.left;
    stack[top++] = node.right;
  }
  std::sort(out.begin(), out.end());
  return out;
}

Neighbor SceneIndex::nearest_in_ball(const Point3& q, const Point3& center, double radius) const {
  Neighbor best;
  if (!(radius >= 0.0)) return best;
  const double r2 = radius * radius;
  std::int32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (box_distance2(node, q) > best.squared_distance || box_distance2(node, center) > r2) continue;
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        if (squared_distance(center, ordered_points_[i]) > r2) continue;
        const Neighbor cand{order_[i], squared_distance(q, ordered_points_[i])};
        if (cand < best) best = cand;
      }
      continue;
    }
    const double dl = box_distance2(nodes_[node.left], q);
    const double dr = box_distance2(nodes_[node.right], q);
    if (dl <= dr) {
      stack[top++] = node.right;
      stack[top++] = node.left;
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  return best;
}

std::vector<Point3> BallView::gather() const {
  std::vector<Point3> out;
  for (auto i : index_->within_radius(center_, radius_)) out.push_back(index_->point(i));
  return out;
}

}  // namespace afft
