#include "thermoforge/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "thermoforge/errors.hpp"

namespace thermoforge::spatial {

namespace {

double dist2(const Point3& a, const Point3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

Point3 mean_of(std::span<const Point3> points, std::span<const int> idx) {
  Point3 c{0.0, 0.0, 0.0};
  for (int i : idx)
    for (int d = 0; d < 3; ++d) c[d] += points[i][d];
  for (int d = 0; d < 3; ++d) c[d] /= static_cast<double>(idx.size());
  return c;
}

int nearest_centroid(const Point3& p, const std::vector<Point3>& centroids) {
  int best = 0;
  double best_d = dist2(p, centroids[0]);
  for (int c = 1; c < static_cast<int>(centroids.size()); ++c) {
    const double d = dist2(p, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::vector<Point3> seed_plus_plus(std::span<const Point3> points, int k, std::mt19937_64& rng) {
  const int n = static_cast<int>(points.size());
  std::vector<Point3> centers;
  std::vector<bool> chosen(n, false);
  std::uniform_int_distribution<int> first(0, n - 1);
  int idx = first(rng);
  centers.push_back(points[idx]);
  chosen[idx] = true;
  std::vector<double> d2(n);
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      d2[i] = dist2(points[i], centers[0]);
      for (std::size_t c = 1; c < centers.size(); ++c) d2[i] = std::min(d2[i], dist2(points[i], centers[c]));
      total += d2[i];
    }
    if (total <= 0.0) {
      // All remaining points coincide with a center; take the first unused index.
      idx = static_cast<int>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
    } else {
      std::uniform_real_distribution<double> u(0.0, total);
      double r = u(rng);
      idx = -1;
      for (int i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        idx = i;  // rounding fallback: last point with positive weight
        r -= d2[i];
        if (r < 0.0) break;
      }
    }
    centers.push_back(points[idx]);
    chosen[idx] = true;
  }
  return centers;
}

}  // namespace

void DeviceLayout::validate() const {
  for (std::size_t i = 0; i < positions.size(); ++i)
    for (double v : positions[i])
      if (!std::isfinite(v)) throw ValidationError("non-finite coordinate for device " + std::to_string(i + 1));
  if (!heat_loads_kw.empty() && heat_loads_kw.size() != positions.size())
    throw ValidationError("layout has " + std::to_string(positions.size()) + " positions but " +
                          std::to_string(heat_loads_kw.size()) + " heat loads");
}

DeviceLayout layout_from_json(const nlohmann::json& j) {
  DeviceLayout layout;
  if (!j.contains("positions") || !j["positions"].is_array())
    throw ValidationError("layout JSON needs a \"positions\" array");
  for (const auto& p : j["positions"]) {
    if (!p.is_array() || p.size() < 2 || p.size() > 3) throw ValidationError("each position must be [x,y] or [x,y,z]");
    Point3 q{p[0].get<double>(), p[1].get<double>(), p.size() == 3 ? p[2].get<double>() : 0.0};
    layout.positions.push_back(q);
  }
  if (j.contains("heat_loads_kw")) layout.heat_loads_kw = j["heat_loads_kw"].get<std::vector<double>>();
  layout.validate();
  return layout;
}

nlohmann::json to_json(const DeviceLayout& layout) {
  nlohmann::json pos = nlohmann::json::array();
  for (const auto& p : layout.positions) pos.push_back({p[0], p[1], p[2]});
  return {{"positions", pos}, {"heat_loads_kw", layout.heat_loads_kw}};
}

KMeansResult kmeans(std::span<const Point3> points, int k, std::uint64_t seed, int max_iterations) {
  const int n = static_cast<int>(points.size());
  if (n == 0) throw ValidationError("kmeans needs at least one point");
  if (k < 1 || k > n) throw ValidationError("kmeans: k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");

  std::mt19937_64 rng(seed);
  KMeansResult res;
  res.centroids = seed_plus_plus(points, k, rng);
  res.assignment.assign(n, -1);

  for (int it = 0; it < max_iterations; ++it) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      const int c = nearest_centroid(points[i], res.centroids);
      if (c != res.assignment[i]) {
        res.assignment[i] = c;
        changed = true;
      }
    }
    res.iterations = it + 1;

    // Empty clusters: move the centroid onto the point farthest from its own centroid.
    std::vector<int> counts(k, 0);
    for (int a : res.assignment) ++counts[a];
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      int far = -1;
      double far_d = -1.0;
      for (int i = 0; i < n; ++i) {
        if (counts[res.assignment[i]] <= 1) continue;
        const double d = dist2(points[i], res.centroids[res.assignment[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far < 0) continue;
      --counts[res.assignment[far]];
      res.assignment[far] = c;
      counts[c] = 1;
      res.centroids[c] = points[far];
      changed = true;
    }

    std::vector<Point3> sums(k, Point3{0.0, 0.0, 0.0});
    for (int i = 0; i < n; ++i)
      for (int d = 0; d < 3; ++d) sums[res.assignment[i]][d] += points[i][d];
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (int d = 0; d < 3; ++d) res.centroids[c][d] = sums[c][d] / counts[c];
    }
    if (!changed) break;
  }

  res.inertia = 0.0;
  for (int i = 0; i < n; ++i) res.inertia += dist2(points[i], res.centroids[res.assignment[i]]);
  return res;
}

double mean_silhouette(std::span<const Point3> points, std::span<const int> assignment, int k) {
  const int n = static_cast<int>(points.size());
  if (n == 0 || k <= 1) return 0.0;
  std::vector<int> counts(k, 0);
  for (int a : assignment) ++counts[a];
  double total = 0.0;
  std::vector<double> sum_d(k);
  for (int i = 0; i < n; ++i) {
    const int own = assignment[i];
    if (counts[own] <= 1) continue;  // singleton contributes 0
    std::fill(sum_d.begin(), sum_d.end(), 0.0);
    for (int j = 0; j < n; ++j) {
      if (j != i) sum_d[assignment[j]] += std::sqrt(dist2(points[i], points[j]));
    }
    const double a = sum_d[own] / (counts[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c)
      if (c != own && counts[c] > 0) b = std::min(b, sum_d[c] / counts[c]);
    if (!std::isfinite(b)) continue;
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / n;
}

std::vector<std::vector<int>> canonical_partition(std::span<const int> assignment, int k) {
  std::vector<std::vector<int>> parts(k);
  for (int i = 0; i < static_cast<int>(assignment.size()); ++i) parts[assignment[i]].push_back(i);
  std::erase_if(parts, [](const auto& p) { return p.empty(); });
  std::sort(parts.begin(), parts.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return parts;
}

ClusterSelection select_cluster_count(std::span<const Point3> points, const ClusterOptions& options) {
  const int n = static_cast<int>(points.size());
  ClusterSelection one;
  one.k = 1;
  one.assignment.assign(n, 0);
  if (n == 0) return one;
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  one.centroids = {mean_of(points, all)};
  if (n < 2) return one;

  struct Trial {
    bool stable = false;
    double score = 0.0;
    KMeansResult result;
  };
  auto trial = [&](int k) {
    Trial t;
    if (k == 1) {
      t.stable = true;
      t.score = options.single_cluster_score;
      return t;
    }
    if (k >= n) {  // all singletons
      t.stable = true;
      t.score = 0.0;
      return t;
    }
    t.result = kmeans(points, k, options.seed, 300);
    const auto reference = canonical_partition(t.result.assignment, k);
    t.stable = static_cast<int>(reference.size()) == k;
    for (int r = 1; r < options.restarts && t.stable; ++r) {
      auto other = kmeans(points, k, options.seed + static_cast<std::uint64_t>(r), 300);
      t.stable = canonical_partition(other.assignment, k) == reference;
    }
    t.score = mean_silhouette(points, t.result.assignment, k);
    return t;
  };

  Trial current = trial(1);
  for (int k = 1; k < n; ++k) {
    Trial next = trial(k + 1);
    if (current.stable && current.score > next.score) {
      if (k == 1) return one;
      ClusterSelection sel;
      sel.k = k;
      // Relabel clusters by smallest member so downstream order is canonical.
      const auto parts = canonical_partition(current.result.assignment, k);
      sel.assignment.assign(n, 0);
      for (int c = 0; c < k; ++c) {
        for (int i : parts[c]) sel.assignment[i] = c;
        sel.centroids.push_back(mean_of(points, parts[c]));
      }
      return sel;
    }
    current = std::move(next);
  }
  return one;
}

SuperNodeTree build_supernode_tree(const DeviceLayout& layout, int num_levels, const ClusterOptions& options) {
  if (num_levels < 1) throw ValidationError("num_levels must be at least 1");
  layout.validate();
  SuperNodeTree tree;
  tree.requested_levels = num_levels;

  SuperNode root;
  for (int i = 0; i < layout.device_count(); ++i) root.members.push_back(i + 1);
  root.junction = config::kTank;
  if (!root.members.empty()) {
    std::vector<int> idx(root.members.size());
    std::iota(idx.begin(), idx.end(), 0);
    root.centroid = mean_of(layout.positions, idx);
  }
  tree.levels.push_back({root});

  for (int level = 1; level <= num_levels; ++level) {
    std::vector<SuperNode> next;
    auto& prev = tree.levels.back();
    for (int s = 0; s < static_cast<int>(prev.size()); ++s) {
      std::vector<Label> pool;
      for (Label m : prev[s].members)
        if (m != prev[s].junction) pool.push_back(m);
      if (pool.empty()) continue;

      std::vector<Point3> pts;
      for (Label m : pool) pts.push_back(layout.positions[m - 1]);
      const auto sel = select_cluster_count(pts, options);

      std::vector<Label> chain = prev[s].parent_chain;
      chain.push_back(prev[s].junction);
      for (int c = 0; c < sel.k; ++c) {
        SuperNode child;
        child.parent = s;
        child.parent_chain = chain;
        child.centroid = sel.centroids[c];
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < static_cast<int>(pool.size()); ++i) {
          if (sel.assignment[i] != c) continue;
          child.members.push_back(pool[i]);
          const double d = dist2(pts[i], child.centroid);
          // pool is ascending, so strict < keeps the smaller label on ties
          if (d < best) {
            best = d;
            child.junction = pool[i];
          }
        }
        prev[s].children.push_back(static_cast<int>(next.size()));
        next.push_back(std::move(child));
      }
    }
    if (next.empty()) break;
    tree.levels.push_back(std::move(next));
  }
  return tree;
}

nlohmann::json to_json(const SuperNodeTree& tree) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& level : tree.levels) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& sn : level) {
      nodes.push_back({{"members", sn.members},
                       {"junction", sn.junction},
                       {"parent_chain", sn.parent_chain},
                       {"parent", sn.parent},
                       {"children", sn.children},
                       {"centroid", {sn.centroid[0], sn.centroid[1], sn.centroid[2]}}});
    }
    levels.push_back(nodes);
  }
  return {{"requested_levels", tree.requested_levels}, {"achieved_depth", tree.achieved_depth()}, {"levels", levels}};
}

}  // namespace thermoforge::spatial
