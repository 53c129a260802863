#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hoigs/fit.hpp"
#include "hoigs/gradsuite.hpp"
#include "hoigs/json_io.hpp"
#include "hoigs/metrics.hpp"
#include "hoigs/render.hpp"
#include "hoigs/synth.hpp"

namespace fs = std::filesystem;
using hoigs::json;

namespace {

int thread_cap() {
    if (const char* env = std::getenv("HOIKIT_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

void echo_config(const std::string& command, const json& cfg) {
    json block;
    block["command"] = command;
    block["threads"] = thread_cap();
    block["config"] = cfg;
    std::cout << "config " << block.dump() << "\n";
}

// Point sets rendered as small isotropic splats for preview/eval imagery.
std::vector<hoigs::Splat> scene_splats(const std::vector<hoigs::Vec3>& human,
                                       const std::vector<hoigs::Vec3>& object) {
    std::vector<hoigs::Splat> splats;
    for (const auto& p : human) {
        hoigs::Splat s;
        s.position = p;
        s.scale = {0.03, 0.03, 0.03};
        s.opacity = 0.8;
        s.color = {0.85, 0.65, 0.5};
        splats.push_back(s);
    }
    for (const auto& p : object) {
        hoigs::Splat s;
        s.position = p;
        s.scale = {0.02, 0.02, 0.02};
        s.opacity = 0.9;
        s.color = {0.25, 0.45, 0.9};
        splats.push_back(s);
    }
    return splats;
}

struct RunArtifacts {
    json report;
    json frames; // per-frame fitted human points and object centroids
};

RunArtifacts load_run(const std::string& run_dir) {
    RunArtifacts r;
    r.report = hoigs::read_json_file((fs::path(run_dir) / "report.json").string());
    r.frames = hoigs::read_json_file((fs::path(run_dir) / "frames.json").string());
    return r;
}

std::vector<hoigs::Vec3> frame_points(const json& arr) {
    std::vector<hoigs::Vec3> out;
    for (const auto& v : arr) out.push_back(hoigs::vec3_from_json(v));
    return out;
}

int cmd_synth(const std::string& tmpl, std::uint64_t seed, int frames, int stride,
              double noise, const std::string& out) {
    hoigs::SceneConfig cfg;
    cfg.motion_template = tmpl;
    cfg.n_frames = frames;
    cfg.key_stride = stride;
    cfg.noise_sigma = noise;
    echo_config("synth", {{"template", tmpl}, {"seed", seed}, {"frames", frames},
                          {"stride", stride}, {"noise", noise}, {"out", out}});
    const auto scene = hoigs::generate_scene(cfg, seed);
    hoigs::write_json_file(hoigs::scene_to_json(scene), out);
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_fit_object(const std::string& scene_path, int iters, double step,
                   std::uint64_t seed, const std::vector<int>& holdout,
                   const std::string& out, const std::string& trace) {
    echo_config("fit-object", {{"scene", scene_path}, {"iters", iters}, {"step", step},
                               {"seed", seed}, {"holdout", holdout}, {"out", out},
                               {"trace", trace}});
    const auto scene = hoigs::scene_from_json(hoigs::read_json_file(scene_path));
    hoigs::FitOptions opt;
    opt.iters = iters;
    opt.step = step;
    opt.seed = seed;
    opt.holdout_frames = holdout;
    const auto result = hoigs::fit_object_track(scene.obs_object_points, scene.grid, opt);
    hoigs::write_json_file(hoigs::track_to_json(result.track), out);
    if (!trace.empty()) {
        std::ofstream f(trace, std::ios::binary);
        f << "# hoikit-trace-v1\niter,loss\n";
        for (std::size_t i = 0; i < result.loss_trace.size(); ++i)
            f << i << "," << hoigs::format_double(result.loss_trace[i]) << "\n";
    }
    std::cout << "final_loss "
              << (result.loss_trace.empty()
                      ? std::string("nan")
                      : hoigs::format_double(result.loss_trace.back()))
              << "\n";
    return 0;
}

json points_frames_json(const std::vector<std::vector<hoigs::Vec3>>& frames) {
    json out = json::array();
    for (const auto& f : frames) {
        json fr = json::array();
        for (const auto& p : f) fr.push_back(hoigs::vec3_to_json(p));
        out.push_back(fr);
    }
    return out;
}

json centroid_frames_json(const std::vector<hoigs::Vec3>& frames) {
    json out = json::array();
    for (const auto& p : frames) out.push_back(hoigs::vec3_to_json(p));
    return out;
}

json metrics_json(const hoigs::PhaseMetrics& m) {
    return {{"human_rmse", m.human_rmse},
            {"object_rmse", m.object_rmse},
            {"contact_cd_best", m.contact_cd_best}};
}

int cmd_fit_joint(const std::string& scene_path, const std::string& run_dir, bool no_hoi,
                  bool conventional, std::uint64_t seed, int pose_iters, int object_iters,
                  int hoi_iters) {
    echo_config("fit-joint", {{"scene", scene_path}, {"out", run_dir}, {"no_hoi", no_hoi},
                              {"conventional_values", conventional}, {"seed", seed},
                              {"pose_iters", pose_iters}, {"object_iters", object_iters},
                              {"hoi_iters", hoi_iters}});
    const auto scene = hoigs::scene_from_json(hoigs::read_json_file(scene_path));
    hoigs::JointFitOptions opt;
    opt.enable_hoi = !no_hoi;
    opt.conventional_values = conventional;
    opt.seed = seed;
    opt.pose_iters = pose_iters;
    opt.object_iters = object_iters;
    opt.hoi_iters = hoi_iters;
    const auto result = hoigs::fit_joint_hoi(scene, opt);

    fs::create_directories(run_dir);
    const fs::path dir(run_dir);
    hoigs::write_json_file(hoigs::track_to_json(result.track), (dir / "track.json").string());
    hoigs::write_json_file(hoigs::hoi_module_to_json(result.module),
                           (dir / "module.json").string());
    hoigs::write_json_file(hoigs::object_features_to_json(result.object_features),
                           (dir / "object_features.json").string());
    hoigs::write_json_file(hoigs::hexplane_to_json(result.feature_grid),
                           (dir / "hexplane.json").string());

    json poses = json::array();
    for (const auto& p : result.poses) {
        json th = json::array();
        for (const auto& v : p.theta) th.push_back(hoigs::vec3_to_json(v));
        poses.push_back(th);
    }
    hoigs::write_json_file(poses, (dir / "poses.json").string());

    json frames;
    frames["human_points_phase1"] = points_frames_json(result.human_points_phase1);
    frames["human_points_phase2"] = points_frames_json(result.human_points_phase2);
    frames["object_position_phase1"] = centroid_frames_json(result.object_position_phase1);
    frames["object_position_phase2"] = centroid_frames_json(result.object_position_phase2);
    hoigs::write_json_file(frames, (dir / "frames.json").string());

    {
        std::ofstream f((dir / "trace.csv").string(), std::ios::binary);
        f << "# hoikit-trace-v1\nstage,iter,loss\n";
        for (std::size_t i = 0; i < result.pose_loss_trace.size(); ++i)
            f << "pose," << i << "," << hoigs::format_double(result.pose_loss_trace[i]) << "\n";
        for (std::size_t i = 0; i < result.object_loss_trace.size(); ++i)
            f << "object," << i << "," << hoigs::format_double(result.object_loss_trace[i]) << "\n";
        for (std::size_t i = 0; i < result.hoi_loss_trace.size(); ++i)
            f << "hoi," << i << "," << hoigs::format_double(result.hoi_loss_trace[i]) << "\n";
    }

    json report;
    report["schema"] = "hoikit-run-v1";
    report["scene"] = scene_path;
    report["seed"] = seed;
    report["phase"] = no_hoi ? "baseline" : "hoi";
    report["conventional_values"] = conventional;
    report["pose_iters"] = pose_iters;
    report["object_iters"] = object_iters;
    report["hoi_iters"] = hoi_iters;
    report["d_th"] = result.d_th;
    report["phase1"] = metrics_json(result.phase1);
    report["phase2"] = metrics_json(result.phase2);
    report["files"] = {"track.json", "module.json", "object_features.json",
                       "hexplane.json", "poses.json", "frames.json", "trace.csv"};
    hoigs::write_json_file(report, (dir / "report.json").string());

    std::cout << "phase1 cd_best " << hoigs::format_double(result.phase1.contact_cd_best)
              << "\nphase2 cd_best " << hoigs::format_double(result.phase2.contact_cd_best)
              << "\n";
    return 0;
}

int cmd_eval(const std::string& scene_path, const std::string& run_dir,
             const std::string& csv_path) {
    echo_config("eval", {{"scene", scene_path}, {"run", run_dir}, {"csv", csv_path}});
    const auto scene = hoigs::scene_from_json(hoigs::read_json_file(scene_path));
    const auto run = load_run(run_dir);
    const std::string phase = run.report.at("phase").get<std::string>();
    const std::string scene_id =
        scene.config.motion_template + "-" + std::to_string(scene.seed);

    const auto hands = hoigs::hand_vertex_indices(scene.rig, scene.skeleton);
    const int img_w = 64, img_h = 64;

    std::ofstream f(csv_path, std::ios::binary);
    if (!f) throw hoigs::Error("eval: cannot open " + csv_path);
    f << "# hoikit-metrics-v1\n";
    f << "scene_id,frame,phase,psnr,dssim,l1,chamfer,cd_best\n";
    for (int t = 0; t < scene.grid.n_frames; ++t) {
        const auto fit_h =
            frame_points(run.frames.at("human_points_phase2").at(t));
        const hoigs::Vec3 fit_obj_c =
            hoigs::vec3_from_json(run.frames.at("object_position_phase2").at(t));
        std::vector<hoigs::Vec3> fit_obj;
        for (const auto& p : scene.object_cloud) fit_obj.push_back(p + fit_obj_c);

        const auto gt_h = scene.gt_human_points(t);
        const auto gt_obj = scene.gt_object_points(t);
        const auto& cam = scene.cameras[static_cast<std::size_t>(t)];
        const auto gt_img = hoigs::render_splats(scene_splats(gt_h, gt_obj), cam, img_w, img_h);
        const auto fit_img =
            hoigs::render_splats(scene_splats(fit_h, fit_obj), cam, img_w, img_h);

        const double psnr_v = hoigs::psnr(gt_img.rgb, fit_img.rgb);
        const double dssim_v = hoigs::dssim(gt_img.rgb, fit_img.rgb);
        const double l1_v = hoigs::l1_image(gt_img.rgb, fit_img.rgb);
        const double cd = hoigs::chamfer(fit_obj, gt_obj);
        std::vector<hoigs::Vec3> left, right;
        for (int i : hands.first) left.push_back(fit_h[static_cast<std::size_t>(i)]);
        for (int i : hands.second) right.push_back(fit_h[static_cast<std::size_t>(i)]);
        const double cdb = hoigs::cd_best(fit_obj, left, right);

        f << scene_id << "," << t << "," << phase << ","
          << (std::isinf(psnr_v) ? std::string("inf") : hoigs::format_double(psnr_v)) << ","
          << hoigs::format_double(dssim_v) << "," << hoigs::format_double(l1_v) << ","
          << hoigs::format_double(cd) << "," << hoigs::format_double(cdb) << "\n";
    }
    std::cout << "wrote " << csv_path << "\n";
    return 0;
}

int cmd_render(const std::string& scene_path, const std::string& run_dir, int frame,
               const std::string& out, const std::string& depth_out, int width, int height) {
    echo_config("render", {{"scene", scene_path}, {"run", run_dir}, {"frame", frame},
                           {"out", out}, {"depth", depth_out}, {"width", width},
                           {"height", height}});
    const auto scene = hoigs::scene_from_json(hoigs::read_json_file(scene_path));
    if (frame < 0 || frame >= scene.grid.n_frames)
        throw hoigs::OutOfRangeTime("render: frame outside the scene");
    std::vector<hoigs::Vec3> human, object;
    if (!run_dir.empty()) {
        const auto run = load_run(run_dir);
        human = frame_points(run.frames.at("human_points_phase2").at(frame));
        const hoigs::Vec3 c =
            hoigs::vec3_from_json(run.frames.at("object_position_phase2").at(frame));
        for (const auto& p : scene.object_cloud) object.push_back(p + c);
    } else {
        human = scene.gt_human_points(frame);
        object = scene.gt_object_points(frame);
    }
    const auto img = hoigs::render_splats(scene_splats(human, object),
                                          scene.cameras[static_cast<std::size_t>(frame)],
                                          width, height);
    hoigs::write_ppm(img.rgb, out);
    if (!depth_out.empty()) hoigs::write_pgm16(img.depth, depth_out);
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_gradcheck(const std::string& suite, std::uint64_t seed) {
    echo_config("gradcheck", {{"suite", suite}, {"seed", seed}});
    const auto results = hoigs::run_grad_suites(suite, seed);
    bool ok = true;
    for (const auto& r : results) {
        std::cout << r.name << " max_rel_error " << hoigs::format_double(r.max_rel_error)
                  << "\n";
        if (!(r.max_rel_error < 1e-4)) ok = false;
    }
    if (!ok) {
        std::cerr << "gradcheck: relative error above 1e-4\n";
        return 2;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hoikit: spline/LBS/HOI motion-fitting toolkit"};
    app.require_subcommand(1);

    std::string tmpl = "carry", scene_path, out, trace, run_dir, csv_path, depth_out;
    std::string suite = "all";
    std::uint64_t seed = 0;
    int frames = 33, stride = 4, iters = 2000, frame = 0, width = 128, height = 128;
    int pose_iters = 120, object_iters = 1200, hoi_iters = 120;
    double noise = 0.01, step = 0.05;
    bool no_hoi = false, conventional = false;
    std::vector<int> holdout;

    auto* synth = app.add_subcommand("synth", "generate a synthetic scene");
    synth->add_option("--template", tmpl)->check(CLI::IsMember({"carry", "place", "swing"}));
    synth->add_option("--seed", seed);
    synth->add_option("--frames", frames);
    synth->add_option("--stride", stride);
    synth->add_option("--noise", noise);
    synth->add_option("--out", out)->required();

    auto* fito = app.add_subcommand("fit-object", "fit a CHS track to object observations");
    fito->add_option("--scene", scene_path)->required();
    fito->add_option("--iters", iters);
    fito->add_option("--step", step);
    fito->add_option("--seed", seed);
    fito->add_option("--holdout", holdout);
    fito->add_option("--out", out)->required();
    fito->add_option("--trace", trace);

    auto* fitj = app.add_subcommand("fit-joint", "two-phase human+object+HOI fit");
    fitj->add_option("--scene", scene_path)->required();
    fitj->add_option("--out", run_dir)->required();
    fitj->add_flag("--no-hoi", no_hoi);
    fitj->add_flag("--conventional-values", conventional);
    fitj->add_option("--seed", seed);
    fitj->add_option("--pose-iters", pose_iters);
    fitj->add_option("--object-iters", object_iters);
    fitj->add_option("--hoi-iters", hoi_iters);

    auto* evalc = app.add_subcommand("eval", "metrics CSV for a finished run");
    evalc->add_option("--scene", scene_path)->required();
    evalc->add_option("--run", run_dir)->required();
    evalc->add_option("--csv", csv_path)->required();

    auto* renderc = app.add_subcommand("render", "render one frame to PPM");
    renderc->add_option("--scene", scene_path)->required();
    renderc->add_option("--run", run_dir);
    renderc->add_option("--frame", frame);
    renderc->add_option("--out", out)->required();
    renderc->add_option("--depth", depth_out);
    renderc->add_option("--width", width);
    renderc->add_option("--height", height);

    auto* gradc = app.add_subcommand("gradcheck", "finite-difference gradient suites");
    gradc->add_option("--suite", suite)
        ->check(CLI::IsMember({"all", "chs", "lbs", "hexplane", "attention"}));
    gradc->add_option("--seed", seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*synth) return cmd_synth(tmpl, seed, frames, stride, noise, out);
        if (*fito) return cmd_fit_object(scene_path, iters, step, seed, holdout, out, trace);
        if (*fitj)
            return cmd_fit_joint(scene_path, run_dir, no_hoi, conventional, seed, pose_iters,
                                 object_iters, hoi_iters);
        if (*evalc) return cmd_eval(scene_path, run_dir, csv_path);
        if (*renderc)
            return cmd_render(scene_path, run_dir, frame, out, depth_out, width, height);
        if (*gradc) return cmd_gradcheck(suite, seed);
    } catch (const hoigs::DivergedLoss& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
