#pragma once

#include <algorithm>
#include <vector>

#include "voxrf/common.hpp"

namespace voxrf {

// Static 3d kd-tree for nearest-neighbor lookups. Split by the widest axis
// at the median; exact search, so distances match a brute-force scan bit for
// bit (both compute the same squared distance for the winning point).
class KdTree {
 public:
  explicit KdTree(const std::vector<Vec3>& points) : pts_(points) {
    if (pts_.empty()) throw ValidationError("kd-tree needs at least one point");
    idx_.resize(pts_.size());
    for (std::size_t i = 0; i < idx_.size(); ++i) idx_[i] = static_cast<uint32_t>(i);
    nodes_.reserve(pts_.size() * 2);
    root_ = build(0, idx_.size());
  }

  double nearest_sq(const Vec3& q) const {
    double best = std::numeric_limits<double>::infinity();
    search(root_, q, best);
    return best;
  }

 private:
  struct Node {
    int axis = -1;        // -1 marks a leaf
    double split = 0;
    int left = -1, right = -1;
    uint32_t begin = 0, end = 0;  // leaf range in idx_
  };

  static constexpr std::size_t kLeaf = 16;

  int build(std::size_t b, std::size_t e) {
    Node n;
    if (e - b <= kLeaf) {
      n.begin = static_cast<uint32_t>(b);
      n.end = static_cast<uint32_t>(e);
      nodes_.push_back(n);
      return static_cast<int>(nodes_.size() - 1);
    }
    Vec3 lo = pts_[idx_[b]], hi = lo;
    for (std::size_t i = b + 1; i < e; ++i)
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], pts_[idx_[i]][a]);
        hi[a] = std::max(hi[a], pts_[idx_[i]][a]);
      }
    Vec3 ext = hi - lo;
    int axis = ext.x >= ext.y ? (ext.x >= ext.z ? 0 : 2) : (ext.y >= ext.z ? 1 : 2);
    std::size_t mid = (b + e) / 2;
    std::nth_element(idx_.begin() + b, idx_.begin() + mid, idx_.begin() + e,
                     [&](uint32_t x, uint32_t y) { return pts_[x][axis] < pts_[y][axis]; });
    n.axis = axis;
    n.split = pts_[idx_[mid]][axis];
    int self = static_cast<int>(nodes_.size());
    nodes_.push_back(n);
    int left = build(b, mid);
    int right = build(mid, e);
    nodes_[self].left = left;
    nodes_[self].right = right;
    return self;
  }

  void search(int ni, const Vec3& q, double& best) const {
    const Node& n = nodes_[ni];
    if (n.axis < 0) {
      for (uint32_t i = n.begin; i < n.end; ++i) {
        Vec3 d = pts_[idx_[i]] - q;
        best = std::min(best, dot(d, d));
      }
      return;
    }
    double delta = q[n.axis] - n.split;
    int first = delta < 0 ? n.left : n.right;
    int second = delta < 0 ? n.right : n.left;
    search(first, q, best);
    if (delta * delta < best) search(second, q, best);
  }

  std::vector<Vec3> pts_;
  std::vector<uint32_t> idx_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace voxrf
