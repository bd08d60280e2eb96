// Command-line front end: run, sweep, power, table2, infill.

#include "tofdepth/tofdepth.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace tofdepth;

namespace {

struct RunArgs {
    std::string dataset;
    std::string config;
    double threshold = 4.0;
    std::uint64_t seed = 0;
    std::size_t limit = 100;
    std::string out = "out";
    bool emit_depth = false;
    bool emit_trajectory = false;
    int median_fill = 0;
    unsigned threads = 1;
    std::string thresholds = "1,2,4,8,16";
};

/// --config wins, then <dataset>/camera.cfg, then the TUM fr1 defaults.
DatasetConfig resolve_config(const std::string& config, const std::string& dataset) {
    if (!config.empty()) return read_config(config);
    if (!dataset.empty()) {
        const fs::path local = fs::path(dataset) / "camera.cfg";
        if (fs::exists(local)) return read_config(local);
    }
    return DatasetConfig{};
}

PipelineOptions pipeline_options(const RunArgs& a) {
    PipelineOptions opt;
    opt.ransac.threshold = a.threshold;
    opt.ransac.seed = a.seed;
    opt.limit = a.limit;
    opt.median_fill_kernel = a.median_fill;
    opt.threads = a.threads;
    return opt;
}

void add_run_options(CLI::App& cmd, RunArgs& a) {
    cmd.add_option("--dataset", a.dataset, "Sequence directory with rgb.txt and depth.txt")->required();
    cmd.add_option("--config", a.config, "Camera config (key = value)");
    cmd.add_option("--seed", a.seed, "RANSAC seed")->capture_default_str();
    cmd.add_option("--limit", a.limit, "Maximum number of frames")->capture_default_str()->check(CLI::PositiveNumber);
    cmd.add_option("--out", a.out, "Output directory")->capture_default_str();
    cmd.add_option("--median-fill", a.median_fill, "Median infill kernel for estimated maps (odd, >= 3)");
    cmd.add_option("--threads", a.threads, "Worker threads for flow (0 = all cores)")->capture_default_str();
}

std::vector<double> parse_thresholds(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (item.find_first_not_of(" \t", used) != std::string::npos || !(v > 0.0))
            throw CLI::ValidationError("--thresholds", "bad threshold '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw CLI::ValidationError("--thresholds", "need at least one threshold");
    return out;
}

std::string pct(double x) {
    if (!std::isfinite(x)) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", x);
    return buf;
}

int cmd_run(const RunArgs& a) {
    const auto cfg = resolve_config(a.config, a.dataset);
    const auto frames = load_sequence(a.dataset, cfg.intrinsics, cfg.max_time_diff, a.limit);
    const fs::path out = a.out;
    fs::create_directories(out);
    if (a.emit_depth) fs::create_directories(out / "depth");

    const auto rep = run_sequence(frames, cfg.intrinsics, pipeline_options(a), [&](const FrameDecision& d) {
        if (!a.emit_depth) return;
        char name[32];
        std::snprintf(name, sizeof name, "%06zu.png", d.frame_index);
        write_file_bytes(out / "depth" / name, encode_depth_png(d.depth_out, cfg.intrinsics.depth_scale));
    });

    std::ofstream csv(out / "metrics.csv", std::ios::binary);
    write_metrics_csv(csv, rep);
    if (a.emit_trajectory) {
        std::ofstream traj(out / "trajectory.txt", std::ios::binary);
        write_trajectory(traj, rep);
    }
    std::cout << "frames " << rep.frames.size() << "  tof " << rep.tof_frames << "  DC " << pct(rep.duty_cycle_percent)
              << "%  MRE " << pct(rep.median_mre_percent) << "%  MAE " << pct(rep.median_mae_cm) << " cm  RMSE "
              << pct(rep.median_rmse_cm) << " cm\n";
    return 0;
}

int cmd_sweep(const RunArgs& a) {
    const auto thresholds = parse_thresholds(a.thresholds);
    const auto cfg = resolve_config(a.config, a.dataset);
    const auto frames = load_sequence(a.dataset, cfg.intrinsics, cfg.max_time_diff, a.limit);
    const auto rows = sweep_threshold(frames, cfg.intrinsics, pipeline_options(a), thresholds);
    fs::create_directories(a.out);
    std::ofstream csv(fs::path(a.out) / "tradeoff.csv", std::ios::binary);
    write_tradeoff_csv(csv, rows);
    write_tradeoff_csv(std::cout, rows);
    return 0;
}

int cmd_power(double dc, double lo, double hi, double step) {
    if (!(step > 0.0) || hi < lo) throw CLI::ValidationError("--tof-range", "need min <= max and a positive step");
    std::cout << "p_tof,duty_cycle,system_power,reduction\n";
    const auto n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
    for (int i = 0; i <= n; ++i) {
        PowerParams p;
        p.p_tof = lo + step * i;
        std::printf("%.3f,%.3f,%.4f,%.2f\n", p.p_tof, dc, system_power(dc, p), reduction_vs_tof(dc, p));
    }
    return 0;
}

int cmd_table2(std::uint64_t seed, std::size_t trials, double depth_mag, double flow_mag, double fraction) {
    Table2Options opt;
    opt.trials = trials;
    for (auto* spec : {&opt.depth_only, &opt.flow_only, &opt.both}) {
        spec->depth_magnitude = depth_mag;
        spec->flow_magnitude = flow_mag;
        spec->corrupt_fraction = fraction;
    }
    std::cout << "regime,trials,signals,error_without_mm,error_with_mm,reduction\n";
    for (const auto& r : table2_experiment(seed, opt))
        std::printf("%s,%zu,%zu,%.4f,%.4f,%.2f\n", r.name.c_str(), r.trials, r.signals, 1e3 * r.mean_error_without_m,
                    1e3 * r.mean_error_with_m, r.reduction_percent);
    return 0;
}

struct InfillArgs {
    std::string ref_image, ref_depth, cur_image, cur_depth, config, out = "filled.png";
    double threshold = 4.0;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

int cmd_infill(const InfillArgs& a) {
    const auto cfg = resolve_config(a.config, {});
    const auto& k = cfg.intrinsics;
    RansacParams rp;
    rp.threshold = a.threshold;
    rp.seed = a.seed;
    const auto res = infill(load_gray_image(a.ref_image), load_depth_image(a.ref_depth, k.depth_scale),
                            load_gray_image(a.cur_image), load_depth_image(a.cur_depth, k.depth_scale), k, GridSpec{},
                            rp, a.threads);
    write_file_bytes(a.out, encode_depth_png(res.depth_filled, k.depth_scale));
    std::cout << "filled " << res.filled_pixel_count << " px  overlap MRE "
              << (res.overlap_mre_percent ? pct(*res.overlap_mre_percent) + "%" : std::string("n/a")) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Duty-cycled depth estimation: replaces TOF measurements with reprojected depth"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run the pipeline on a sequence and write metrics");
    add_run_options(*run_cmd, run);
    run_cmd->add_option("--threshold", run.threshold, "RANSAC inlier threshold (px^2)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    run_cmd->add_flag("--emit-depth", run.emit_depth, "Write every output depth map as 16-bit PNG");
    run_cmd->add_flag("--emit-trajectory", run.emit_trajectory, "Write trajectory.txt");

    RunArgs sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Duty cycle vs. error over several thresholds");
    add_run_options(*sweep_cmd, sweep);
    sweep_cmd->add_option("--thresholds", sweep.thresholds, "Comma-separated thresholds")->capture_default_str();

    double dc = 15.0, tof_min = 1.0, tof_max = 5.0, tof_step = 1.0;
    auto* power_cmd = app.add_subcommand("power", "System power and reduction over a TOF power range");
    power_cmd->add_option("--dc", dc, "Duty cycle in percent")->capture_default_str()->check(CLI::Range(0.0, 100.0));
    power_cmd->add_option("--tof-min", tof_min, "Lowest TOF power (W)")->capture_default_str();
    power_cmd->add_option("--tof-max", tof_max, "Highest TOF power (W)")->capture_default_str();
    power_cmd->add_option("--tof-step", tof_step, "Step (W)")->capture_default_str();

    std::uint64_t t2_seed = 0;
    std::size_t t2_trials = 100;
    double depth_mag = 0.10, flow_mag = 10.0, fraction = 0.3;
    auto* t2_cmd = app.add_subcommand("table2", "Translation error with and without robust estimation");
    t2_cmd->add_option("--seed", t2_seed)->capture_default_str();
    t2_cmd->add_option("--trials", t2_trials)->capture_default_str();
    t2_cmd->add_option("--depth-magnitude", depth_mag, "Relative depth noise bound")->capture_default_str();
    t2_cmd->add_option("--flow-magnitude", flow_mag, "Flow noise bound per axis (px)")->capture_default_str();
    t2_cmd->add_option("--fraction", fraction, "Share of corrupted samples")->capture_default_str();

    InfillArgs inf;
    auto* inf_cmd = app.add_subcommand("infill", "Fill invalid pixels of a depth map from a reference frame");
    inf_cmd->add_option("--ref-image", inf.ref_image)->required();
    inf_cmd->add_option("--ref-depth", inf.ref_depth)->required();
    inf_cmd->add_option("--cur-image", inf.cur_image)->required();
    inf_cmd->add_option("--cur-depth", inf.cur_depth)->required();
    inf_cmd->add_option("--config", inf.config);
    inf_cmd->add_option("--out", inf.out)->capture_default_str();
    inf_cmd->add_option("--threshold", inf.threshold)->capture_default_str()->check(CLI::PositiveNumber);
    inf_cmd->add_option("--seed", inf.seed)->capture_default_str();
    inf_cmd->add_option("--threads", inf.threads)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) return cmd_run(run);
        if (*sweep_cmd) return cmd_sweep(sweep);
        if (*power_cmd) return cmd_power(dc, tof_min, tof_max, tof_step);
        if (*t2_cmd) return cmd_table2(t2_seed, t2_trials, depth_mag, flow_mag, fraction);
        if (*inf_cmd) return cmd_infill(inf);
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "tofdepth: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
