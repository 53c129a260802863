#include "hoigs/json_io.hpp"

#include <charconv>
#include <fstream>

namespace hoigs {

json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from_json(const json& j) {
    return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

json quat_to_json(const UnitRotation& q) { return json::array({q.w, q.x, q.y, q.z}); }

UnitRotation quat_from_json(const json& j) {
    return UnitRotation(j.at(0).get<double>(), j.at(1).get<double>(),
                        j.at(2).get<double>(), j.at(3).get<double>());
}

json camera_to_json(const CameraPose& cam) {
    json j;
    j["rotation"] = cam.rotation.m;
    j["translation"] = vec3_to_json(cam.translation);
    j["fx"] = cam.fx;
    j["fy"] = cam.fy;
    j["cx"] = cam.cx;
    j["cy"] = cam.cy;
    j["shift"] = vec3_to_json(cam.shift);
    return j;
}

CameraPose camera_from_json(const json& j) {
    CameraPose cam;
    for (int i = 0; i < 9; ++i)
        cam.rotation.m[static_cast<std::size_t>(i)] = j.at("rotation").at(i).get<double>();
    cam.translation = vec3_from_json(j.at("translation"));
    cam.fx = j.at("fx").get<double>();
    cam.fy = j.at("fy").get<double>();
    cam.cx = j.at("cx").get<double>();
    cam.cy = j.at("cy").get<double>();
    cam.shift = vec3_from_json(j.at("shift"));
    return cam;
}

json tensor_to_json(const Tensor& t) {
    json j;
    j["shape"] = t.shape;
    j["data"] = t.data;
    return j;
}

Tensor tensor_from_json(const json& j) {
    Tensor t;
    t.shape = j.at("shape").get<std::vector<int>>();
    t.data = j.at("data").get<std::vector<double>>();
    if (static_cast<long>(t.data.size()) != t.numel())
        throw InvalidConfig("tensor_from_json: data length disagrees with shape");
    return t;
}

namespace {

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::ReLU: return "relu";
        case Activation::Tanh: return "tanh";
        case Activation::Sigmoid: return "sigmoid";
        default: return "identity";
    }
}

Activation activation_from(const std::string& s) {
    if (s == "relu") return Activation::ReLU;
    if (s == "tanh") return Activation::Tanh;
    if (s == "sigmoid") return Activation::Sigmoid;
    return Activation::Identity;
}

} // namespace

json mlp_to_json(const Mlp& m) {
    json j;
    j["widths"] = m.widths;
    j["hidden_act"] = activation_name(m.hidden_act);
    j["output_act"] = activation_name(m.output_act);
    j["weights"] = m.weights;
    j["biases"] = m.biases;
    return j;
}

Mlp mlp_from_json(const json& j) {
    Mlp m;
    m.widths = j.at("widths").get<std::vector<int>>();
    m.hidden_act = activation_from(j.at("hidden_act").get<std::string>());
    m.output_act = activation_from(j.at("output_act").get<std::string>());
    m.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    m.biases = j.at("biases").get<std::vector<std::vector<double>>>();
    return m;
}

json track_to_json(const ChsTrack& t) {
    json j;
    json m = json::array(), tau = json::array(), q = json::array();
    for (const Vec3& v : t.control_points) m.push_back(vec3_to_json(v));
    for (const Vec3& v : t.velocities) tau.push_back(vec3_to_json(v));
    for (const UnitRotation& r : t.rotations) q.push_back(quat_to_json(r));
    j["m"] = m;
    j["tau"] = tau;
    j["rotations_wxyz"] = q;
    j["opacities"] = t.opacities;
    j["scale"] = vec3_to_json(t.scale);
    j["color"] = vec3_to_json(t.color);
    return j;
}

ChsTrack track_from_json(const json& j) {
    ChsTrack t;
    for (const auto& v : j.at("m")) t.control_points.push_back(vec3_from_json(v));
    for (const auto& v : j.at("tau")) t.velocities.push_back(vec3_from_json(v));
    for (const auto& v : j.at("rotations_wxyz")) t.rotations.push_back(quat_from_json(v));
    t.opacities = j.at("opacities").get<std::vector<double>>();
    t.scale = vec3_from_json(j.at("scale"));
    t.color = vec3_from_json(j.at("color"));
    return t;
}

json grid_to_json(const TimeGrid& g) {
    json j;
    j["n_frames"] = g.n_frames;
    j["n_keys"] = g.n_keys;
    j["key_stride"] = g.key_stride;
    return j;
}

TimeGrid grid_from_json(const json& j) {
    TimeGrid g;
    g.n_frames = j.at("n_frames").get<int>();
    g.n_keys = j.at("n_keys").get<int>();
    g.key_stride = j.at("key_stride").get<int>();
    g.validate();
    return g;
}

json skeleton_to_json(const Skeleton& s) {
    json j;
    j["names"] = s.names;
    j["parent"] = s.parent;
    json off = json::array();
    for (const Vec3& v : s.rest_offsets) off.push_back(vec3_to_json(v));
    j["rest_offsets"] = off;
    j["partition"] = {{"body", s.partition.body},
                      {"lhand", s.partition.lhand},
                      {"rhand", s.partition.rhand}};
    return j;
}

Skeleton skeleton_from_json(const json& j) {
    Skeleton s;
    s.names = j.at("names").get<std::vector<std::string>>();
    s.parent = j.at("parent").get<std::vector<int>>();
    for (const auto& v : j.at("rest_offsets")) s.rest_offsets.push_back(vec3_from_json(v));
    s.partition.body = j.at("partition").at("body").get<std::vector<int>>();
    s.partition.lhand = j.at("partition").at("lhand").get<std::vector<int>>();
    s.partition.rhand = j.at("partition").at("rhand").get<std::vector<int>>();
    s.validate();
    return s;
}

json rig_to_json(const AvatarRig& r) {
    json j;
    json pts = json::array();
    for (const Vec3& v : r.canonical_points) pts.push_back(vec3_to_json(v));
    j["canonical_points"] = pts;
    j["weights"] = tensor_to_json(r.weights);
    json theta = json::array();
    for (const Vec3& v : r.pose.theta) theta.push_back(vec3_to_json(v));
    j["pose"] = theta;
    j["alpha"] = r.alpha;
    return j;
}

AvatarRig rig_from_json(const json& j) {
    AvatarRig r;
    for (const auto& v : j.at("canonical_points"))
        r.canonical_points.push_back(vec3_from_json(v));
    r.weights = tensor_from_json(j.at("weights"));
    for (const auto& v : j.at("pose")) r.pose.theta.push_back(vec3_from_json(v));
    r.alpha = j.at("alpha").get<double>();
    return r;
}

json scene_to_json(const SyntheticScene& s) {
    json j;
    j["schema"] = "hoigs-scene-v1";
    j["seed"] = s.seed;
    j["config"] = {{"n_frames", s.config.n_frames},
                   {"key_stride", s.config.key_stride},
                   {"template", s.config.motion_template},
                   {"noise_sigma", s.config.noise_sigma},
                   {"avatar_points", s.config.avatar_points},
                   {"n_parts", s.config.n_parts}};
    j["grid"] = grid_to_json(s.grid);
    j["skeleton"] = skeleton_to_json(s.skeleton);
    j["rig"] = rig_to_json(s.rig);
    j["partition"] = s.partition.parts;
    json poses = json::array();
    for (const auto& p : s.gt_poses) {
        json th = json::array();
        for (const Vec3& v : p.theta) th.push_back(vec3_to_json(v));
        poses.push_back(th);
    }
    j["gt_poses"] = poses;
    json obj = json::array();
    for (std::size_t t = 0; t < s.gt_object_position.size(); ++t)
        obj.push_back({{"position", vec3_to_json(s.gt_object_position[t])},
                       {"rotation_wxyz", quat_to_json(s.gt_object_rotation[t])}});
    j["gt_object"] = obj;
    json cloud = json::array();
    for (const Vec3& v : s.object_cloud) cloud.push_back(vec3_to_json(v));
    j["object_cloud"] = cloud;
    json cams = json::array();
    for (const auto& c : s.cameras) cams.push_back(camera_to_json(c));
    j["cameras"] = cams;
    j["contacts"] = s.contact_frames;
    j["grip_offset"] = vec3_to_json(s.grip_offset);
    j["engaged_hand"] = s.engaged_hand;
    auto frames_of = [](const std::vector<std::vector<Vec3>>& frames) {
        json out = json::array();
        for (const auto& f : frames) {
            json fr = json::array();
            for (const Vec3& v : f) fr.push_back(vec3_to_json(v));
            out.push_back(fr);
        }
        return out;
    };
    j["observations"] = {{"human_points", frames_of(s.obs_human_points)},
                         {"object_points", frames_of(s.obs_object_points)}};
    return j;
}

SyntheticScene scene_from_json(const json& j) {
    SyntheticScene s;
    s.seed = j.at("seed").get<std::uint64_t>();
    const json& c = j.at("config");
    s.config.n_frames = c.at("n_frames").get<int>();
    s.config.key_stride = c.at("key_stride").get<int>();
    s.config.motion_template = c.at("template").get<std::string>();
    s.config.noise_sigma = c.at("noise_sigma").get<double>();
    s.config.avatar_points = c.at("avatar_points").get<int>();
    s.config.n_parts = c.at("n_parts").get<int>();
    s.grid = grid_from_json(j.at("grid"));
    s.skeleton = skeleton_from_json(j.at("skeleton"));
    s.rig = rig_from_json(j.at("rig"));
    s.partition.parts = j.at("partition").get<std::vector<std::vector<int>>>();
    for (const auto& p : j.at("gt_poses")) {
        PoseParams pose;
        for (const auto& v : p) pose.theta.push_back(vec3_from_json(v));
        s.gt_poses.push_back(std::move(pose));
    }
    for (const auto& o : j.at("gt_object")) {
        s.gt_object_position.push_back(vec3_from_json(o.at("position")));
        s.gt_object_rotation.push_back(quat_from_json(o.at("rotation_wxyz")));
    }
    for (const auto& v : j.at("object_cloud")) s.object_cloud.push_back(vec3_from_json(v));
    for (const auto& cjs : j.at("cameras")) s.cameras.push_back(camera_from_json(cjs));
    s.contact_frames = j.at("contacts").get<std::vector<int>>();
    s.grip_offset = vec3_from_json(j.at("grip_offset"));
    s.engaged_hand = j.at("engaged_hand").get<std::string>();
    auto frames_of = [](const json& arr) {
        std::vector<std::vector<Vec3>> out;
        for (const auto& f : arr) {
            std::vector<Vec3> fr;
            for (const auto& v : f) fr.push_back(vec3_from_json(v));
            out.push_back(std::move(fr));
        }
        return out;
    };
    s.obs_human_points = frames_of(j.at("observations").at("human_points"));
    s.obs_object_points = frames_of(j.at("observations").at("object_points"));
    return s;
}

json hexplane_to_json(const HexPlaneGrid& g) {
    json j;
    j["res"] = g.res;
    j["channels"] = g.channels;
    j["lo"] = vec3_to_json(g.lo);
    j["hi"] = vec3_to_json(g.hi);
    json planes = json::array();
    for (const auto& p : g.planes) planes.push_back(p);
    j["planes"] = planes;
    return j;
}

HexPlaneGrid hexplane_from_json(const json& j) {
    HexPlaneGrid g;
    g.res = j.at("res").get<int>();
    g.channels = j.at("channels").get<int>();
    g.lo = vec3_from_json(j.at("lo"));
    g.hi = vec3_from_json(j.at("hi"));
    for (int p = 0; p < 6; ++p)
        g.planes[static_cast<std::size_t>(p)] =
            j.at("planes").at(p).get<std::vector<double>>();
    return g;
}

json hoi_module_to_json(const HoiModule& m) {
    json j;
    j["human_dim"] = m.human_dim;
    j["object_dim"] = m.object_dim;
    j["d"] = m.d;
    j["d_th"] = m.d_th;
    j["conventional_values"] = m.conventional_values;
    j["wh_q"] = m.wh_q;
    j["wh_k"] = m.wh_k;
    j["wh_v"] = m.wh_v;
    j["wo_q"] = m.wo_q;
    j["wo_k"] = m.wo_k;
    j["wo_v"] = m.wo_v;
    j["mlp_hum"] = mlp_to_json(m.mlp_hum);
    j["mlp_obj"] = mlp_to_json(m.mlp_obj);
    return j;
}

HoiModule hoi_module_from_json(const json& j) {
    HoiModule m;
    m.human_dim = j.at("human_dim").get<int>();
    m.object_dim = j.at("object_dim").get<int>();
    m.d = j.at("d").get<int>();
    m.d_th = j.at("d_th").get<double>();
    m.conventional_values = j.at("conventional_values").get<bool>();
    m.wh_q = j.at("wh_q").get<std::vector<double>>();
    m.wh_k = j.at("wh_k").get<std::vector<double>>();
    m.wh_v = j.at("wh_v").get<std::vector<double>>();
    m.wo_q = j.at("wo_q").get<std::vector<double>>();
    m.wo_k = j.at("wo_k").get<std::vector<double>>();
    m.wo_v = j.at("wo_v").get<std::vector<double>>();
    m.mlp_hum = mlp_from_json(j.at("mlp_hum"));
    m.mlp_obj = mlp_from_json(j.at("mlp_obj"));
    return m;
}

json object_features_to_json(const ObjectFeatureTrack& t) {
    json j;
    json tau = json::array();
    for (const Vec3& v : t.tau) tau.push_back(vec3_to_json(v));
    j["tau"] = tau;
    j["embed"] = t.embed;
    j["head"] = mlp_to_json(t.head);
    return j;
}

ObjectFeatureTrack object_features_from_json(const json& j) {
    ObjectFeatureTrack t;
    for (const auto& v : j.at("tau")) t.tau.push_back(vec3_from_json(v));
    t.embed = j.at("embed").get<std::vector<std::vector<double>>>();
    t.head = mlp_from_json(j.at("head"));
    return t;
}

void write_json_file(const json& j, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("write_json_file: cannot open " + path);
    f << j.dump(2) << "\n";
}

json read_json_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("read_json_file: cannot open " + path);
    return json::parse(f);
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_track_csv(const ChsTrack& track, const TimeGrid& grid, int gaussian_id,
                     const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("write_track_csv: cannot open " + path);
    f << "# hoikit-trajectory-v1\n";
    f << "gaussian_id,frame,x,y,z\n";
    for (int t = 0; t < grid.n_frames; ++t) {
        const Vec3 p = chs_eval(track, t, grid);
        f << gaussian_id << "," << t << "," << format_double(p.x) << ","
          << format_double(p.y) << "," << format_double(p.z) << "\n";
    }
}

} // namespace hoigs
