#pragma once

#include <string>

#include <json.hpp>

#include "hoigs/fit.hpp"
#include "hoigs/hexplane.hpp"
#include "hoigs/hoi.hpp"
#include "hoigs/nn.hpp"
#include "hoigs/skeleton.hpp"
#include "hoigs/spline.hpp"
#include "hoigs/synth.hpp"

namespace hoigs {

using json = nlohmann::ordered_json;

json vec3_to_json(const Vec3& v);
Vec3 vec3_from_json(const json& j);

json quat_to_json(const UnitRotation& q); // wxyz
UnitRotation quat_from_json(const json& j);

json camera_to_json(const CameraPose& cam); // row-major rotation
CameraPose camera_from_json(const json& j);

json tensor_to_json(const Tensor& t);
Tensor tensor_from_json(const json& j);

json mlp_to_json(const Mlp& m);
Mlp mlp_from_json(const json& j);

json track_to_json(const ChsTrack& t);
ChsTrack track_from_json(const json& j);

json grid_to_json(const TimeGrid& g);
TimeGrid grid_from_json(const json& j);

json skeleton_to_json(const Skeleton& s);
Skeleton skeleton_from_json(const json& j);

json rig_to_json(const AvatarRig& r);
AvatarRig rig_from_json(const json& j);

json scene_to_json(const SyntheticScene& s);
SyntheticScene scene_from_json(const json& j);

json hexplane_to_json(const HexPlaneGrid& g);
HexPlaneGrid hexplane_from_json(const json& j);

json hoi_module_to_json(const HoiModule& m);
HoiModule hoi_module_from_json(const json& j);

json object_features_to_json(const ObjectFeatureTrack& t);
ObjectFeatureTrack object_features_from_json(const json& j);

void write_json_file(const json& j, const std::string& path);
json read_json_file(const std::string& path);

// CSV trajectory export: "gaussian_id,frame,x,y,z" rows for a track.
void write_track_csv(const ChsTrack& track, const TimeGrid& grid, int gaussian_id,
                     const std::string& path);

std::string format_double(double v); // shortest round-trip decimal

} // namespace hoigs
