#pragma once

// JSON conversions for core value types. Quaternions serialize scalar-last
// as "rotation_xyzw"; translations as 3-arrays in meters.

#include <nlohmann/json.hpp>

#include "nbvox/core/error.hpp"
#include "nbvox/core/geometry.hpp"

namespace nbvox {

using Json = nlohmann::ordered_json;

inline Json to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

inline Vec3 vec3_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3)
    throw ParseError(what + ": expected a 3-element array");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

inline Json to_json(const RigidTransform& tf) {
  const Quat& q = tf.rotation();
  Json j;
  j["rotation_xyzw"] = Json::array({q.x(), q.y(), q.z(), q.w()});
  j["translation"] = to_json(tf.translation());
  return j;
}

inline RigidTransform transform_from_json(const Json& j,
                                          const std::string& what) {
  if (!j.contains("rotation_xyzw") || !j.contains("translation"))
    throw ParseError(what + ": expected rotation_xyzw and translation");
  const Json& r = j["rotation_xyzw"];
  if (!r.is_array() || r.size() != 4)
    throw ParseError(what + ": rotation_xyzw must have 4 elements");
  const Quat q(r[3].get<double>(), r[0].get<double>(), r[1].get<double>(),
               r[2].get<double>());
  return RigidTransform(q, vec3_from_json(j["translation"],
                                          what + ".translation"));
}

}  // namespace nbvox
