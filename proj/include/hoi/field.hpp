#pragma once

// Object-centric hand-object correspondence field: for each sampled object
// point, whether a ray along its surface normal reaches the hand, at what
// signed distance, and where the hit lives in canonical (rest-pose) hand
// space. Positive d means the hand lies on the outward side of the sample,
// negative d means it lies on the interior side (deep penetration).

#include <stdexcept>
#include <vector>

#include "hoi/hand.hpp"
#include "hoi/math.hpp"
#include "hoi/mesh.hpp"

namespace hoi {

struct CorrField {
  std::vector<SurfaceSample> samples;  // object points, fixed per frame
  std::vector<int> m;                  // 1 if a correspondence exists
  std::vector<double> d;               // signed ray distance (m); 0 where m=0
  std::vector<Vec3> p;                 // canonical-space hand position; 0 where m=0
  std::vector<double> cp_dist;         // closest-point distance to the hand mesh, capped
  // Hit bookkeeping (hand face and barycentric coordinates of each
  // correspondence); lets callers re-evaluate d under a frozen
  // correspondence when the hand moves slightly.
  std::vector<int> hit_face;
  std::vector<Vec3> hit_bary;
  double cutoff = 0.2;  // ray cutoff (m)

  size_t size() const { return samples.size(); }
};

struct HoiFrame {
  HandSkeleton skeleton;
  CorrField field;
  Rigid object_pose = Rigid::identity();
};

struct ContactMap {
  std::vector<bool> bits;

  size_t count() const {
    size_t c = 0;
    for (bool b : bits) c += b ? 1 : 0;
    return c;
  }
};

// Default ray cutoff: beyond hand scale, correspondences are meaningless.
constexpr double kFieldRayCutoff = 0.2;

// Ray origins are offset slightly along the cast direction; distances are
// still reported from the true sample position.
constexpr double kRayOriginOffset = 1e-5;

inline CorrField compute_field(const HandMesh& hand, const TriMesh& /*object*/,
                               const std::vector<SurfaceSample>& samples,
                               double cutoff = kFieldRayCutoff, bool with_cp_dist = true) {
  CorrField out;
  out.samples = samples;
  out.cutoff = cutoff;
  size_t n = samples.size();
  out.m.assign(n, 0);
  out.d.assign(n, 0.0);
  out.p.assign(n, Vec3{0, 0, 0});
  out.cp_dist.assign(n, cutoff);
  out.hit_face.assign(n, -1);
  out.hit_bary.assign(n, Vec3{0, 0, 0});
  const TriMesh& hm = hand.mesh;
  for (size_t j = 0; j < n; ++j) {
    const Vec3& pos = samples[j].position;
    const Vec3& nrm = samples[j].normal;
    Vec3 bary;
    auto record = [&](const RayHit& hit, const Vec3& dir, double sign) {
      double dist = dot(hit.point - pos, dir);  // from the true sample position
      if (dist < 0 || dist > cutoff) return false;
      out.m[j] = 1;
      out.d[j] = sign * dist;
      out.hit_face[j] = hit.face_id;
      out.hit_bary[j] = bary;
      const auto& f = hm.faces[hit.face_id];
      out.p[j] = hand.canonical_vertices[f[0]] * bary.x + hand.canonical_vertices[f[1]] * bary.y +
                 hand.canonical_vertices[f[2]] * bary.z;
      return true;
    };
    bool found = false;
    double tmax = cutoff + 2.0 * kRayOriginOffset;
    if (auto hit = hm.raycast(pos + nrm * kRayOriginOffset, nrm, bary, tmax))
      found = record(*hit, nrm, +1.0);
    if (!found) {
      if (auto hit = hm.raycast(pos - nrm * kRayOriginOffset, -nrm, bary, tmax))
        record(*hit, -nrm, -1.0);
    }
    if (with_cp_dist) {
      ClosestPoint cp = hm.closest_point(pos);
      out.cp_dist[j] = std::min(cp.distance, cutoff);
    }
  }
  return out;
}

inline ContactMap contact_map(const CorrField& field, double c_contact = 0.002) {
  ContactMap out;
  out.bits.resize(field.size());
  for (size_t j = 0; j < field.size(); ++j)
    out.bits[j] = field.m[j] == 1 && std::abs(field.d[j]) <= c_contact;
  return out;
}

// |a AND b| / |a OR b|; 1 when both maps are empty.
inline double contact_iou(const ContactMap& a, const ContactMap& b) {
  if (a.bits.size() != b.bits.size()) throw std::invalid_argument("contact_iou: length mismatch");
  size_t inter = 0, uni = 0;
  for (size_t i = 0; i < a.bits.size(); ++i) {
    inter += (a.bits[i] && b.bits[i]) ? 1 : 0;
    uni += (a.bits[i] || b.bits[i]) ? 1 : 0;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace hoi
