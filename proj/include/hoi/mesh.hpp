#pragma once

// Triangle-mesh kernel: OBJ loading, built-in primitives, normals, area
// sampling, BVH-accelerated ray casts and closest-point queries, and a
// voxel intersection-volume estimate.
//
// A TriMesh is immutable once built; all queries are const and safe to call
// concurrently.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hoi/math.hpp"

namespace hoi {

struct RayHit {
  double distance = 0.0;    // meters, >= 0
  Vec3 point;               // origin + distance * direction
  int face_id = -1;
};

struct SurfaceSample {
  Vec3 position;
  Vec3 normal;       // outward unit face normal
  int face_id = -1;
  Vec3 barycentric;  // nonnegative, sums to 1
};

struct ClosestPoint {
  double distance = 0.0;  // unsigned
  Vec3 point;
  Vec3 normal;  // face normal at the closest face
  int face_id = -1;
};

namespace detail {

struct BvhNode {
  Vec3 bmin, bmax;
  int left = -1, right = -1;  // internal children
  int first = 0, count = 0;   // leaf triangle range (count > 0 marks leaf)
};

inline double aabb_dist2(const Vec3& bmin, const Vec3& bmax, const Vec3& p) {
  double d2 = 0;
  for (int k = 0; k < 3; ++k) {
    double v = p[k];
    if (v < bmin[k]) d2 += (bmin[k] - v) * (bmin[k] - v);
    else if (v > bmax[k]) d2 += (v - bmax[k]) * (v - bmax[k]);
  }
  return d2;
}

inline bool aabb_ray(const Vec3& bmin, const Vec3& bmax, const Vec3& o, const Vec3& inv_d,
                     double tmax) {
  double t0 = 0.0, t1 = tmax;
  for (int k = 0; k < 3; ++k) {
    double ta = (bmin[k] - o[k]) * inv_d[k];
    double tb = (bmax[k] - o[k]) * inv_d[k];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

// Moller-Trumbore.
inline bool ray_triangle(const Vec3& o, const Vec3& d, const Vec3& v0, const Vec3& v1,
                         const Vec3& v2, double& t, double& u, double& v) {
  constexpr double eps = 1e-13;
  Vec3 e1 = v1 - v0, e2 = v2 - v0;
  Vec3 p = cross(d, e2);
  double det = dot(e1, p);
  if (std::abs(det) < eps) return false;
  double inv = 1.0 / det;
  Vec3 tv = o - v0;
  u = dot(tv, p) * inv;
  if (u < -1e-12 || u > 1.0 + 1e-12) return false;
  Vec3 q = cross(tv, e1);
  v = dot(d, q) * inv;
  if (v < -1e-12 || u + v > 1.0 + 1e-12) return false;
  t = dot(e2, q) * inv;
  return t >= 0.0;
}

// Closest point on triangle (Ericson, Real-Time Collision Detection).
inline Vec3 closest_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  Vec3 ab = b - a, ac = c - a, ap = p - a;
  double d1 = dot(ab, ap), d2 = dot(ac, ap);
  if (d1 <= 0 && d2 <= 0) return a;
  Vec3 bp = p - b;
  double d3 = dot(ab, bp), d4 = dot(ac, bp);
  if (d3 >= 0 && d4 <= d3) return b;
  double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) {
    double v = d1 / (d1 - d3);
    return a + ab * v;
  }
  Vec3 cp = p - c;
  double d5 = dot(ab, cp), d6 = dot(ac, cp);
  if (d6 >= 0 && d5 <= d6) return c;
  double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) {
    double w = d2 / (d2 - d6);
    return a + ac * w;
  }
  double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return b + (c - b) * w;
  }
  double denom = 1.0 / (va + vb + vc);
  double v = vb * denom, w = vc * denom;
  return a + ab * v + ac * w;
}

}  // namespace detail

class TriMesh {
 public:
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<Vec3> face_normals;
  std::vector<Vec3> vertex_normals;
  int degenerate_dropped = 0;  // faces removed during load-time cleanup

  TriMesh() = default;
  TriMesh(std::vector<Vec3> verts, std::vector<std::array<int, 3>> tris)
      : vertices(std::move(verts)), faces(std::move(tris)) {
    finalize();
  }

  size_t face_count() const { return faces.size(); }
  bool empty() const { return faces.empty(); }

  double face_area(int f) const { return face_areas_[f]; }
  double total_area() const { return total_area_; }
  int component_of_face(int f) const { return face_component_[f]; }
  int component_count() const { return component_count_; }

  Vec3 centroid() const { return area_centroid_; }

  const Vec3& bbox_min() const { return bmin_; }
  const Vec3& bbox_max() const { return bmax_; }

  // Every undirected edge shared by exactly two faces.
  bool watertight() const { return watertight_; }

  // ---- Queries -------------------------------------------------------

  // Nearest intersection along a unit direction, or nullopt. `tmax` bounds
  // the search and prunes traversal for rays that leave the scene.
  std::optional<RayHit> raycast(const Vec3& origin, const Vec3& dir,
                                double tmax = std::numeric_limits<double>::infinity()) const {
    double best_t = tmax;
    int best_face = -1;
    if (nodes_.empty()) return std::nullopt;
    Vec3 inv{1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z};
    int stack[64];
    int sp = 0;
    stack[sp++] = 0;
    while (sp > 0) {
      const auto& n = nodes_[stack[--sp]];
      if (!detail::aabb_ray(n.bmin, n.bmax, origin, inv, best_t)) continue;
      if (n.count > 0) {
        for (int i = n.first; i < n.first + n.count; ++i) {
          int f = order_[i];
          double t, u, v;
          if (detail::ray_triangle(origin, dir, vertices[faces[f][0]], vertices[faces[f][1]],
                                   vertices[faces[f][2]], t, u, v) &&
              t < best_t) {
            best_t = t;
            best_face = f;
          }
        }
      } else {
        stack[sp++] = n.left;
        stack[sp++] = n.right;
      }
    }
    if (best_face < 0) return std::nullopt;
    return RayHit{best_t, origin + dir * best_t, best_face};
  }

  // Nearest intersection plus barycentric coordinates of the hit.
  std::optional<RayHit> raycast(const Vec3& origin, const Vec3& dir, Vec3& bary,
                                double tmax = std::numeric_limits<double>::infinity()) const {
    auto hit = raycast(origin, dir, tmax);
    if (!hit) return hit;
    const auto& f = faces[hit->face_id];
    Vec3 cp = detail::closest_on_triangle(hit->point, vertices[f[0]], vertices[f[1]], vertices[f[2]]);
    bary = barycentric_of(hit->face_id, cp);
    return hit;
  }

  // All intersections along the ray (used by the parity inside-test).
  void raycast_all(const Vec3& origin, const Vec3& dir, std::vector<RayHit>& hits) const {
    hits.clear();
    if (nodes_.empty()) return;
    Vec3 inv{1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z};
    int stack[64];
    int sp = 0;
    stack[sp++] = 0;
    while (sp > 0) {
      const auto& n = nodes_[stack[--sp]];
      if (!detail::aabb_ray(n.bmin, n.bmax, origin, inv, std::numeric_limits<double>::infinity()))
        continue;
      if (n.count > 0) {
        for (int i = n.first; i < n.first + n.count; ++i) {
          int f = order_[i];
          double t, u, v;
          if (detail::ray_triangle(origin, dir, vertices[faces[f][0]], vertices[faces[f][1]],
                                   vertices[faces[f][2]], t, u, v))
            hits.push_back(RayHit{t, origin + dir * t, f});
        }
      } else {
        stack[sp++] = n.left;
        stack[sp++] = n.right;
      }
    }
  }

  ClosestPoint closest_point(const Vec3& query) const {
    if (empty()) throw std::runtime_error("closest_point on empty mesh");
    ClosestPoint best;
    best.distance = std::numeric_limits<double>::infinity();
    // Best-first traversal with an explicit stack; prune by box distance.
    struct Entry { double d2; int node; };
    Entry stack[64];
    int sp = 0;
    stack[sp++] = {detail::aabb_dist2(nodes_[0].bmin, nodes_[0].bmax, query), 0};
    double best_d2 = std::numeric_limits<double>::infinity();
    while (sp > 0) {
      Entry e = stack[--sp];
      if (e.d2 >= best_d2) continue;
      const auto& n = nodes_[e.node];
      if (n.count > 0) {
        for (int i = n.first; i < n.first + n.count; ++i) {
          int f = order_[i];
          Vec3 cp = detail::closest_on_triangle(query, vertices[faces[f][0]], vertices[faces[f][1]],
                                                vertices[faces[f][2]]);
          double d2 = norm2(cp - query);
          if (d2 < best_d2) {
            best_d2 = d2;
            best.point = cp;
            best.face_id = f;
          }
        }
      } else {
        Entry a{detail::aabb_dist2(nodes_[n.left].bmin, nodes_[n.left].bmax, query), n.left};
        Entry b{detail::aabb_dist2(nodes_[n.right].bmin, nodes_[n.right].bmax, query), n.right};
        if (a.d2 > b.d2) std::swap(a, b);  // push farther first
        if (b.d2 < best_d2) stack[sp++] = b;
        if (a.d2 < best_d2) stack[sp++] = a;
      }
    }
    best.distance = std::sqrt(best_d2);
    best.normal = face_normals[best.face_id];
    return best;
  }

  // Ray-parity inside test with 3 jittered directions, majority vote.
  // Parity is tracked per connected component so that unions of nested or
  // overlapping closed shells (the capsule hand) classify correctly: a point
  // is inside if any component's crossing count is odd.
  bool inside(const Vec3& p) const {
    static const Vec3 dirs[3] = {
        normalized(Vec3{0.5377712327, 0.7254316334, 0.4296754032}),
        normalized(Vec3{-0.6710531344, 0.3912042465, 0.6297331718}),
        normalized(Vec3{0.2113248654, -0.5236597145, 0.8253710424})};
    int votes = 0;
    std::vector<RayHit> hits;
    std::vector<int> comp_hits(component_count_, 0);
    for (const auto& d : dirs) {
      raycast_all(p, d, hits);
      std::fill(comp_hits.begin(), comp_hits.end(), 0);
      for (const auto& h : hits) comp_hits[face_component_[h.face_id]]++;
      bool in = false;
      for (int c : comp_hits)
        if (c % 2 == 1) { in = true; break; }
      votes += in ? 1 : 0;
    }
    return votes >= 2;
  }

  Vec3 barycentric_of(int face, const Vec3& p) const {
    const auto& f = faces[face];
    Vec3 a = vertices[f[0]], b = vertices[f[1]], c = vertices[f[2]];
    Vec3 v0 = b - a, v1 = c - a, v2 = p - a;
    double d00 = dot(v0, v0), d01 = dot(v0, v1), d11 = dot(v1, v1);
    double d20 = dot(v2, v0), d21 = dot(v2, v1);
    double denom = d00 * d11 - d01 * d01;
    if (denom <= 0) return {1, 0, 0};
    double v = (d11 * d20 - d01 * d21) / denom;
    double w = (d00 * d21 - d01 * d20) / denom;
    v = std::clamp(v, 0.0, 1.0);
    w = std::clamp(w, 0.0, 1.0 - v);
    return {1.0 - v - w, v, w};
  }

  TriMesh transformed(const Rigid& T) const {
    TriMesh out;
    out.vertices.reserve(vertices.size());
    for (const auto& v : vertices) out.vertices.push_back(T.apply(v));
    out.faces = faces;
    out.degenerate_dropped = degenerate_dropped;
    out.finalize();
    return out;
  }

  // Called by constructors/factories after vertices+faces are set.
  void finalize() {
    for (const auto& f : faces)
      for (int k = 0; k < 3; ++k)
        if (f[k] < 0 || f[k] >= static_cast<int>(vertices.size()))
          throw std::runtime_error("face index out of range");
    drop_degenerate_faces();
    compute_normals_and_areas();
    compute_components_and_watertight();
    build_bvh();
  }

 private:
  std::vector<double> face_areas_;
  std::vector<double> cumulative_area_;
  double total_area_ = 0;
  Vec3 area_centroid_;
  Vec3 bmin_, bmax_;
  std::vector<int> face_component_;
  int component_count_ = 0;
  bool watertight_ = false;
  std::vector<detail::BvhNode> nodes_;
  std::vector<int> order_;  // face indices, leaf-grouped

  friend std::vector<SurfaceSample> sample_surface(const TriMesh&, int, uint64_t);

  void drop_degenerate_faces() {
    std::vector<std::array<int, 3>> kept;
    kept.reserve(faces.size());
    for (const auto& f : faces) {
      Vec3 n = cross(vertices[f[1]] - vertices[f[0]], vertices[f[2]] - vertices[f[0]]);
      if (norm(n) * 0.5 < 1e-14 || f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
        degenerate_dropped++;
        continue;
      }
      kept.push_back(f);
    }
    faces = std::move(kept);
  }

  void compute_normals_and_areas() {
    face_normals.resize(faces.size());
    face_areas_.resize(faces.size());
    cumulative_area_.resize(faces.size());
    vertex_normals.assign(vertices.size(), Vec3{0, 0, 0});
    total_area_ = 0;
    area_centroid_ = {0, 0, 0};
    bmin_ = {1e300, 1e300, 1e300};
    bmax_ = {-1e300, -1e300, -1e300};
    for (const auto& v : vertices) {
      bmin_ = min(bmin_, v);
      bmax_ = max(bmax_, v);
    }
    for (size_t i = 0; i < faces.size(); ++i) {
      const auto& f = faces[i];
      Vec3 n = cross(vertices[f[1]] - vertices[f[0]], vertices[f[2]] - vertices[f[0]]);
      double a = 0.5 * norm(n);
      face_areas_[i] = a;
      face_normals[i] = normalized(n);
      total_area_ += a;
      cumulative_area_[i] = total_area_;
      Vec3 fc = (vertices[f[0]] + vertices[f[1]] + vertices[f[2]]) / 3.0;
      area_centroid_ += fc * a;
      for (int k = 0; k < 3; ++k) vertex_normals[f[k]] += n;
    }
    if (total_area_ > 0) area_centroid_ = area_centroid_ / total_area_;
    for (auto& vn : vertex_normals) vn = normalized(vn);
  }

  void compute_components_and_watertight() {
    // Union-find over faces sharing an undirected edge.
    std::vector<int> parent(faces.size());
    for (size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
    auto find = [&](int a) {
      while (parent[a] != a) { parent[a] = parent[parent[a]]; a = parent[a]; }
      return a;
    };
    std::map<std::pair<int, int>, std::pair<int, int>> edge_use;  // edge -> (count, first face)
    for (size_t i = 0; i < faces.size(); ++i) {
      for (int k = 0; k < 3; ++k) {
        int a = faces[i][k], b = faces[i][(k + 1) % 3];
        auto key = std::minmax(a, b);
        auto it = edge_use.find(key);
        if (it == edge_use.end()) {
          edge_use[key] = {1, static_cast<int>(i)};
        } else {
          it->second.first++;
          int ra = find(it->second.second), rb = find(static_cast<int>(i));
          if (ra != rb) parent[ra] = rb;
        }
      }
    }
    watertight_ = !faces.empty();
    for (const auto& [k, v] : edge_use)
      if (v.first != 2) { watertight_ = false; break; }
    face_component_.resize(faces.size());
    std::map<int, int> remap;
    for (size_t i = 0; i < faces.size(); ++i) {
      int r = find(static_cast<int>(i));
      auto it = remap.find(r);
      if (it == remap.end()) {
        int id = static_cast<int>(remap.size());
        remap[r] = id;
        face_component_[i] = id;
      } else {
        face_component_[i] = it->second;
      }
    }
    component_count_ = static_cast<int>(remap.size());
  }

  void build_bvh() {
    nodes_.clear();
    order_.resize(faces.size());
    for (size_t i = 0; i < faces.size(); ++i) order_[i] = static_cast<int>(i);
    if (faces.empty()) return;
    std::vector<Vec3> centers(faces.size());
    for (size_t i = 0; i < faces.size(); ++i) {
      const auto& f = faces[i];
      centers[i] = (vertices[f[0]] + vertices[f[1]] + vertices[f[2]]) / 3.0;
    }
    nodes_.reserve(faces.size() * 2);
    build_node(0, static_cast<int>(faces.size()), centers);
  }

  int build_node(int first, int count, const std::vector<Vec3>& centers) {
    detail::BvhNode node;
    node.bmin = {1e300, 1e300, 1e300};
    node.bmax = {-1e300, -1e300, -1e300};
    for (int i = first; i < first + count; ++i) {
      const auto& f = faces[order_[i]];
      for (int k = 0; k < 3; ++k) {
        node.bmin = min(node.bmin, vertices[f[k]]);
        node.bmax = max(node.bmax, vertices[f[k]]);
      }
    }
    int idx = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (count <= 4) {
      nodes_[idx].first = first;
      nodes_[idx].count = count;
      return idx;
    }
    Vec3 ext = node.bmax - node.bmin;
    int axis = 0;
    if (ext.y > ext.x) axis = 1;
    if (ext.z > ext[axis]) axis = 2;
    int mid = first + count / 2;
    std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count,
                     [&](int a, int b) {
                       if (centers[a][axis] != centers[b][axis]) return centers[a][axis] < centers[b][axis];
                       return a < b;  // deterministic tie-break
                     });
    int l = build_node(first, mid - first, centers);
    int r = build_node(mid, first + count - mid, centers);
    nodes_[idx].left = l;
    nodes_[idx].right = r;
    nodes_[idx].count = 0;
    return idx;
  }
};

// ---- OBJ I/O ----------------------------------------------------------

// Wavefront OBJ, triangles and quads (fan-triangulated); other records are
// ignored. Indices may be 1-based, negative (relative), or of the v/vt/vn
// slashed forms.
inline TriMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file: " + path);
  std::vector<Vec3> verts;
  std::vector<std::array<int, 3>> tris;
  std::string line;
  int lineno = 0;
  auto parse_index = [&](const std::string& tok) {
    size_t slash = tok.find('/');
    std::string head = slash == std::string::npos ? tok : tok.substr(0, slash);
    int idx = std::stoi(head);
    if (idx < 0) idx = static_cast<int>(verts.size()) + idx;  // relative
    else idx -= 1;
    if (idx < 0 || idx >= static_cast<int>(verts.size()))
      throw std::runtime_error("OBJ parse error at line " + std::to_string(lineno) +
                               ": vertex index out of range");
    return idx;
  };
  while (std::getline(in, line)) {
    lineno++;
    if (line.size() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ss >> v.x >> v.y >> v.z))
        throw std::runtime_error("OBJ parse error at line " + std::to_string(lineno) +
                                 ": bad vertex");
      verts.push_back(v);
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string tok;
      while (ss >> tok) poly.push_back(parse_index(tok));
      if (poly.size() < 3)
        throw std::runtime_error("OBJ parse error at line " + std::to_string(lineno) +
                                 ": face with fewer than 3 vertices");
      for (size_t k = 1; k + 1 < poly.size(); ++k)
        tris.push_back({poly[0], poly[k], poly[k + 1]});
    }
    // all other record types ignored
  }
  if (tris.empty()) throw std::runtime_error("degenerate mesh (no faces): " + path);
  return TriMesh(std::move(verts), std::move(tris));
}

inline void save_obj(const TriMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mesh file: " + path);
  char buf[128];
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "v %.9g %.9g %.9g\n", v.x, v.y, v.z);
    out << buf;
  }
  for (const auto& f : mesh.faces) out << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
}

// ---- Primitives --------------------------------------------------------

inline TriMesh make_box(double sx, double sy, double sz) {
  double x = sx / 2, y = sy / 2, z = sz / 2;
  std::vector<Vec3> v = {{-x, -y, -z}, {x, -y, -z}, {x, y, -z}, {-x, y, -z},
                         {-x, -y, z},  {x, -y, z},  {x, y, z},  {-x, y, z}};
  std::vector<std::array<int, 3>> f = {
      {0, 2, 1}, {0, 3, 2},  // bottom (-z)
      {4, 5, 6}, {4, 6, 7},  // top (+z)
      {0, 1, 5}, {0, 5, 4},  // -y
      {2, 3, 7}, {2, 7, 6},  // +y
      {1, 2, 6}, {1, 6, 5},  // +x
      {3, 0, 4}, {3, 4, 7},  // -x
  };
  return TriMesh(std::move(v), std::move(f));
}

inline TriMesh make_icosphere(double radius, int subdivisions = 3) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                         {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                         {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p = normalized(p);
  std::vector<std::array<int, 3>> f = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      Vec3 m = normalized((v[a] + v[b]) * 0.5);
      v.push_back(m);
      int idx = static_cast<int>(v.size()) - 1;
      midpoint[key] = idx;
      return idx;
    };
    std::vector<std::array<int, 3>> nf;
    nf.reserve(f.size() * 4);
    for (const auto& tri : f) {
      int a = mid(tri[0], tri[1]), b = mid(tri[1], tri[2]), c = mid(tri[2], tri[0]);
      nf.push_back({tri[0], a, c});
      nf.push_back({tri[1], b, a});
      nf.push_back({tri[2], c, b});
      nf.push_back({a, b, c});
    }
    f = std::move(nf);
  }
  for (auto& p : v) p *= radius;
  return TriMesh(std::move(v), std::move(f));
}

inline TriMesh make_cylinder(double radius, double height, int segments = 24) {
  std::vector<Vec3> v;
  std::vector<std::array<int, 3>> f;
  double hz = height / 2;
  for (int i = 0; i < segments; ++i) {
    double a = 2.0 * kPi * i / segments;
    v.push_back({radius * std::cos(a), radius * std::sin(a), -hz});
    v.push_back({radius * std::cos(a), radius * std::sin(a), hz});
  }
  int bot_center = static_cast<int>(v.size());
  v.push_back({0, 0, -hz});
  int top_center = static_cast<int>(v.size());
  v.push_back({0, 0, hz});
  for (int i = 0; i < segments; ++i) {
    int j = (i + 1) % segments;
    int b0 = 2 * i, t0 = 2 * i + 1, b1 = 2 * j, t1 = 2 * j + 1;
    f.push_back({b0, b1, t1});
    f.push_back({b0, t1, t0});
    f.push_back({bot_center, b1, b0});
    f.push_back({top_center, t0, t1});
  }
  return TriMesh(std::move(v), std::move(f));
}

inline TriMesh make_torus(double major_radius, double minor_radius, int major_segments = 32,
                          int minor_segments = 16) {
  std::vector<Vec3> v;
  std::vector<std::array<int, 3>> f;
  for (int i = 0; i < major_segments; ++i) {
    double a = 2.0 * kPi * i / major_segments;
    Vec3 center{major_radius * std::cos(a), major_radius * std::sin(a), 0};
    Vec3 out{std::cos(a), std::sin(a), 0};
    for (int j = 0; j < minor_segments; ++j) {
      double b = 2.0 * kPi * j / minor_segments;
      v.push_back(center + out * (minor_radius * std::cos(b)) +
                  Vec3{0, 0, minor_radius * std::sin(b)});
    }
  }
  auto idx = [&](int i, int j) {
    return (i % major_segments) * minor_segments + (j % minor_segments);
  };
  for (int i = 0; i < major_segments; ++i)
    for (int j = 0; j < minor_segments; ++j) {
      f.push_back({idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)});
      f.push_back({idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)});
    }
  return TriMesh(std::move(v), std::move(f));
}

// Thin rectangular plate; default 4 mm thickness, for deep-penetration tests.
inline TriMesh make_thin_plate(double sx = 0.08, double sy = 0.06, double thickness = 0.004) {
  return make_box(sx, sy, thickness);
}

// Built-in primitives addressable by name: "box", "sphere", "cylinder",
// "torus", "thin_plate", each optionally parameterized as "name:p1,p2,...".
inline TriMesh make_primitive(const std::string& spec) {
  std::string name = spec;
  std::vector<double> p;
  if (auto colon = spec.find(':'); colon != std::string::npos) {
    name = spec.substr(0, colon);
    std::istringstream ss(spec.substr(colon + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) p.push_back(std::stod(tok));
  }
  auto arg = [&](size_t i, double dflt) { return i < p.size() ? p[i] : dflt; };
  if (name == "box") return make_box(arg(0, 0.04), arg(1, arg(0, 0.04)), arg(2, arg(0, 0.04)));
  if (name == "sphere") return make_icosphere(arg(0, 0.03));
  if (name == "cylinder") return make_cylinder(arg(0, 0.02), arg(1, 0.08));
  if (name == "torus") return make_torus(arg(0, 0.03), arg(1, 0.01));
  if (name == "thin_plate") return make_thin_plate(arg(0, 0.08), arg(1, 0.06), arg(2, 0.004));
  throw std::runtime_error("unknown primitive: " + name);
}

// Loads a named primitive or an OBJ path.
inline TriMesh load_mesh(const std::string& ref) {
  if (ref.size() > 4 && ref.substr(ref.size() - 4) == ".obj") return load_obj(ref);
  return make_primitive(ref);
}

// ---- Sampling ----------------------------------------------------------

// Area-weighted uniform surface samples; bit-identical for a fixed seed.
inline std::vector<SurfaceSample> sample_surface(const TriMesh& mesh, int n, uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_surface: n must be >= 1");
  if (mesh.empty()) throw std::runtime_error("sample_surface: empty mesh");
  Rng rng(seed);
  std::vector<SurfaceSample> out;
  out.reserve(n);
  const auto& cum = mesh.cumulative_area_;
  for (int i = 0; i < n; ++i) {
    double r = rng.uniform() * mesh.total_area();
    int f = static_cast<int>(std::lower_bound(cum.begin(), cum.end(), r) - cum.begin());
    if (f >= static_cast<int>(mesh.face_count())) f = static_cast<int>(mesh.face_count()) - 1;
    double su = std::sqrt(rng.uniform());
    double v = rng.uniform();
    Vec3 bary{1.0 - su, su * (1.0 - v), su * v};
    const auto& tri = mesh.faces[f];
    SurfaceSample s;
    s.position = mesh.vertices[tri[0]] * bary.x + mesh.vertices[tri[1]] * bary.y +
                 mesh.vertices[tri[2]] * bary.z;
    s.normal = mesh.face_normals[f];
    s.face_id = f;
    s.barycentric = bary;
    out.push_back(s);
  }
  return out;
}

// ---- Intersection volume -----------------------------------------------

// Voxel count over the AABB overlap; each center tested for containment in
// both meshes. Returns cm^3. Requires watertight inputs.
inline double intersection_volume(const TriMesh& a, const TriMesh& b, double voxel_size = 0.002) {
  if (voxel_size <= 0) throw std::invalid_argument("intersection_volume: voxel_size must be > 0");
  if (!a.watertight() || !b.watertight())
    throw std::runtime_error("intersection_volume requires watertight meshes");
  Vec3 lo = max(a.bbox_min(), b.bbox_min());
  Vec3 hi = min(a.bbox_max(), b.bbox_max());
  if (lo.x >= hi.x || lo.y >= hi.y || lo.z >= hi.z) return 0.0;
  int nx = std::max(1, static_cast<int>(std::ceil((hi.x - lo.x) / voxel_size)));
  int ny = std::max(1, static_cast<int>(std::ceil((hi.y - lo.y) / voxel_size)));
  int nz = std::max(1, static_cast<int>(std::ceil((hi.z - lo.z) / voxel_size)));
  long long count = 0;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      for (int k = 0; k < nz; ++k) {
        Vec3 c{lo.x + (i + 0.5) * voxel_size, lo.y + (j + 0.5) * voxel_size,
               lo.z + (k + 0.5) * voxel_size};
        if (a.inside(c) && b.inside(c)) count++;
      }
  double vol_m3 = static_cast<double>(count) * voxel_size * voxel_size * voxel_size;
  return vol_m3 * 1e6;  // cm^3
}

}  // namespace hoi
