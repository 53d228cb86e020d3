#include "sid/cli.hpp"

#include "sid/engine.hpp"
#include "sid/errors.hpp"
#include "sid/expert.hpp"
#include "sid/render.hpp"
#include "sid/rng.hpp"
#include "sid/training.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

namespace sid {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

void write_manifest(const fs::path& dir, const std::string& command,
                    const std::vector<std::string>& args, std::uint64_t seed) {
    json j;
    j["command"] = command;
    j["args"] = args;
    j["seed"] = seed;
    j["version"] = kVersion;
    std::string canon;
    for (const auto& a : args) canon += a + "\n";
    j["config_hash"] = fnv1a_64(canon);
    std::ofstream f(dir / "manifest.json");
    f << j.dump(2) << "\n";
}

struct ModelHandle {
    std::unique_ptr<ScoreModel> model;
};

ModelHandle load_model(const std::string& path, bool analytic, int horizon,
                       double bridge_sigma) {
    ModelHandle h;
    if (analytic) {
        h.model = std::make_unique<AnalyticBridgeScore>(NoiseSchedule::cosine(25), horizon,
                                                        bridge_sigma);
    } else {
        if (path.empty()) throw SidError("need --model FILE or --analytic");
        h.model = std::make_unique<Denoiser>(Denoiser::load(path));
    }
    return h;
}

struct RunFlags {
    std::string model_path;
    bool analytic = false;
    double bridge_sigma = 0.05;
    int k = 8;
    int horizon = 64;
    double v_max = 0.05;
    double obs_range = 0.0;
    int max_rounds = 0;
    double epsilon = 2.0;
    double margin = 0.004;
    double proj_tol = 1e-4;
    std::uint64_t seed = 0;
    bool parallel_agents = false;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--model", model_path, "denoiser checkpoint (JSON)");
        cmd->add_flag("--analytic", analytic, "use the analytic bridge score instead");
        cmd->add_option("--bridge-sigma", bridge_sigma, "bridge prior per-step std");
        cmd->add_option("--k", k, "execution window");
        cmd->add_option("--horizon", horizon, "planning horizon H");
        cmd->add_option("--v-max", v_max, "speed limit per step");
        cmd->add_option("--obs-range", obs_range, "observation range (0 = half map size)");
        cmd->add_option("--max-rounds", max_rounds, "round cap (0 = H/k)");
        cmd->add_option("--epsilon", epsilon, "SGLD base step size");
        cmd->add_option("--margin", margin, "extra planning-side separation margin");
        cmd->add_option("--proj-tol", proj_tol, "projection tolerance");
        cmd->add_option("--seed", seed, "run seed");
        cmd->add_flag("--parallel-agents", parallel_agents, "plan agents concurrently");
    }

    RunConfig to_config(const ScenarioInstance& inst, const ScoreModel* model) const {
        RunConfig cfg;
        cfg.instance = inst;
        cfg.model = model;
        cfg.k = k;
        cfg.horizon = horizon;
        cfg.v_max = v_max;
        cfg.obs_range = obs_range;
        cfg.max_rounds = max_rounds;
        cfg.separation_margin = margin;
        cfg.seed = seed;
        cfg.sampler.epsilon = epsilon;
        cfg.sampler.projection.tol = proj_tol;
        cfg.parallel_agents = parallel_agents;
        return cfg;
    }
};

std::vector<Trajectory> executed_from_report_json(const json& j) {
    std::vector<Trajectory> out;
    for (const auto& t : j.at("executed")) {
        std::vector<Vec2> pts;
        for (const auto& p : t) pts.emplace_back(p[0].get<double>(), p[1].get<double>());
        out.emplace_back(std::move(pts));
    }
    return out;
}

int cmd_generate(const std::string& family_str, int robots, int count, std::uint64_t seed,
                 const std::string& out_dir, const GenerateOptions& opt) {
    const MapFamily family = parse_family(family_str);
    fs::create_directories(out_dir);
    for (int i = 0; i < count; ++i) {
        ScenarioInstance inst = generate_instance(family, robots, seed + static_cast<std::uint64_t>(i), opt);
        std::ostringstream name;
        name << family_str << "_" << robots << "_" << std::setw(3) << std::setfill('0') << i
             << ".json";
        save_scenario((fs::path(out_dir) / name.str()).string(), inst);
    }
    std::cout << "wrote " << count << " scenarios to " << out_dir << "\n";
    return 0;
}

int cmd_train(const std::string& dataset_path, const std::string& scenario_dir,
              int per_instance, const TrainingConfig& tc, int width, int depth, int horizon,
              std::uint64_t seed, const std::string& out_path,
              const std::string& save_dataset_path, const std::string& resume_path,
              const std::string& loss_csv) {
    Dataset dataset;
    if (!dataset_path.empty()) {
        dataset = load_dataset(dataset_path);
    } else if (!scenario_dir.empty()) {
        std::vector<ScenarioInstance> instances;
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(scenario_dir)) {
            if (e.path().extension() == ".json") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) instances.push_back(load_scenario(f.string()));
        ExpertOptions eo;
        eo.horizon = horizon;
        eo.seed = seed;
        dataset = expert_dataset(instances, per_instance, eo);
        if (!save_dataset_path.empty()) save_dataset(save_dataset_path, dataset);
    } else {
        throw SidError("train: need --dataset or --scenario-dir");
    }

    NoiseSchedule schedule = NoiseSchedule::cosine(25);
    Denoiser::Arch arch;
    arch.x_dim = 2 * (dataset.horizon + 1);
    arch.cond_dim = dataset.samples.empty()
                        ? 68
                        : 4 + static_cast<int>(dataset.samples.front().cond.map_patch.size());
    arch.width = width;
    arch.depth = depth;

    std::mt19937_64 rng = make_rng(seed);
    std::unique_ptr<Denoiser> resume;
    if (!resume_path.empty()) {
        resume = std::make_unique<Denoiser>(Denoiser::load(resume_path));
        schedule = resume->schedule();
        arch = resume->arch();
    }
    TrainingResult result =
        train_denoiser(dataset, schedule, tc, rng, arch, resume.get());
    result.model.save(out_path);
    if (!loss_csv.empty()) write_loss_curve_csv(loss_csv, result.epoch_loss);
    std::cout << "trained " << tc.epochs << " epochs; final loss "
              << (result.epoch_loss.empty() ? 0.0 : result.epoch_loss.back()) << "; saved "
              << out_path << "\n";
    return 0;
}

int cmd_run(const std::string& scenario_path, const RunFlags& flags,
            const std::string& out_dir, bool svg, bool csv,
            const std::vector<std::string>& argv) {
    const ScenarioInstance inst = load_scenario(scenario_path);
    ModelHandle mh = load_model(flags.model_path, flags.analytic, flags.horizon,
                                flags.bridge_sigma);
    fs::create_directories(out_dir);
    const RunConfig cfg = flags.to_config(inst, mh.model.get());
    const InstanceReport report = run_instance(cfg);

    std::ofstream(fs::path(out_dir) / "report.json") << report_to_json(report);
    {
        std::ofstream trace(fs::path(out_dir) / "trace.jsonl");
        for (const auto& t : report.traces) {
            json j = {{"round", t.round},       {"id", t.id},
                      {"neighbors", t.neighbors}, {"a_i", t.arrival_step},
                      {"converged", t.converged}, {"violation", t.violation},
                      {"comm_events", t.comm_events}};
            trace << j.dump() << "\n";
        }
    }
    {
        std::ofstream msgs(fs::path(out_dir) / "messages.jsonl");
        for (size_t e = 0; e < report.episodes.size(); ++e) {
            const auto& ep = report.episodes[e];
            for (const auto& m : ep.messages) {
                json j = {{"round", m.round},
                          {"episode", e},
                          {"sender", m.sender},
                          {"recipients", m.recipients},
                          {"d_values", ep.d_values}};
                msgs << j.dump() << "\n";
            }
        }
    }
    if (svg) save_svg((fs::path(out_dir) / "run.svg").string(), inst, report.executed);
    if (csv) {
        std::ofstream f(fs::path(out_dir) / "executed.csv");
        write_trajectories_csv(f, report.executed);
    }
    write_manifest(out_dir, "run", argv, flags.seed);
    std::cout << "success=" << (report.success ? "true" : "false") << " cause="
              << report.failure_cause << " comm_events=" << report.comm_events << "\n";
    return 0;
}

struct BenchCell {
    std::string family;
    int robots = 0;
    double obs_range = 0.0;
    int k = 0;
    BenchmarkCell metrics;
};

int cmd_bench(const std::string& scenario_dir, const RunFlags& base_flags,
              const std::string& out_dir, std::vector<double> obs_ranges, std::vector<int> ks,
              int workers, bool svg, const std::vector<std::string>& argv) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(scenario_dir)) {
        if (e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw SidError("bench: no scenario files in " + scenario_dir);
    fs::create_directories(fs::path(out_dir) / "reports");

    ModelHandle mh = load_model(base_flags.model_path, base_flags.analytic,
                                base_flags.horizon, base_flags.bridge_sigma);
    if (obs_ranges.empty()) obs_ranges.push_back(base_flags.obs_range);
    if (ks.empty()) ks.push_back(base_flags.k);

    std::vector<BenchCell> cells;
    for (double obs : obs_ranges) {
        for (int k : ks) {
            // Group instances by (family, robots) so each sweep point
            // aggregates like a benchmark table cell.
            std::map<std::pair<std::string, int>, std::vector<InstanceReport>> grouped;
            std::vector<InstanceReport> reports(files.size());
            std::vector<ScenarioInstance> instances(files.size());

            std::atomic<size_t> next{0};
            auto worker = [&]() {
                for (;;) {
                    const size_t idx = next.fetch_add(1);
                    if (idx >= files.size()) return;
                    instances[idx] = load_scenario(files[idx].string());
                    RunFlags flags = base_flags;
                    flags.obs_range = obs;
                    flags.k = k;
                    RunConfig cfg = flags.to_config(instances[idx], mh.model.get());
                    reports[idx] = run_instance(cfg);
                }
            };
            const int W = std::max(1, workers);
            std::vector<std::future<void>> futs;
            for (int w = 0; w < W; ++w) futs.push_back(std::async(std::launch::async, worker));
            for (auto& f : futs) f.get();

            for (size_t idx = 0; idx < files.size(); ++idx) {
                const auto key = std::make_pair(family_name(instances[idx].family),
                                                instances[idx].n_robots());
                grouped[key].push_back(reports[idx]);
                std::ostringstream name;
                name << files[idx].stem().string() << "_obs" << obs << "_k" << k << ".json";
                std::ofstream(fs::path(out_dir) / "reports" / name.str())
                    << report_to_json(reports[idx]);
                if (svg) {
                    save_svg((fs::path(out_dir) / "reports" /
                              (files[idx].stem().string() + ".svg"))
                                 .string(),
                             instances[idx], reports[idx].executed);
                }
            }
            for (const auto& [key, reps] : grouped) {
                BenchCell cell;
                cell.family = key.first;
                cell.robots = key.second;
                cell.obs_range = obs;
                cell.k = k;
                cell.metrics = aggregate_metrics(reps);
                cells.push_back(std::move(cell));
            }
        }
    }

    std::ofstream csv(fs::path(out_dir) / "aggregate.csv");
    csv << "family,robots,obs_range,k,S,C,A,T,successes,total\n";
    for (const auto& c : cells) {
        csv << c.family << ',' << c.robots << ',' << c.obs_range << ',' << c.k << ','
            << c.metrics.success_rate << ',' << c.metrics.comm_frequency << ',';
        if (c.metrics.smoothness) {
            csv << *c.metrics.smoothness;
        } else {
            csv << "N/A";
        }
        csv << ',';
        if (c.metrics.travel_time) {
            csv << *c.metrics.travel_time;
        } else {
            csv << "N/A";
        }
        csv << ',' << c.metrics.successes << ',' << c.metrics.total << "\n";
    }
    write_manifest(out_dir, "bench", argv, base_flags.seed);
    std::cout << "bench complete: " << files.size() << " instances, " << cells.size()
              << " cells -> " << out_dir << "/aggregate.csv\n";
    return 0;
}

int cmd_render(const std::string& scenario_path, const std::string& report_path,
               const std::string& out_path) {
    const ScenarioInstance inst = load_scenario(scenario_path);
    std::vector<Trajectory> executed;
    if (!report_path.empty()) {
        std::ifstream f(report_path);
        if (!f) throw SidError("cannot open: " + report_path);
        std::stringstream ss;
        ss << f.rdbuf();
        executed = executed_from_report_json(json::parse(ss.str()));
    }
    save_svg(out_path, inst, executed);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

}  // namespace

int run_cli(std::vector<std::string> args) {
    CLI::App app{"Simulation-informed diffusion planner for decentralized multi-robot "
                 "motion planning"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "generate benchmark scenario instances");
    std::string gen_family = "basic", gen_out = "scenarios";
    int gen_robots = 3, gen_count = 25;
    std::uint64_t gen_seed = 1;
    GenerateOptions gen_opt;
    gen->add_option("--family", gen_family, "basic|dense|room|shelf")->required();
    gen->add_option("--robots", gen_robots, "robots per instance")->required();
    gen->add_option("--count", gen_count, "number of instances");
    gen->add_option("--seed", gen_seed, "base seed (instance i uses seed+i)");
    gen->add_option("--out-dir", gen_out, "output directory");
    gen->add_option("--map-size", gen_opt.map_size, "square map edge length");
    gen->add_option("--obstacles", gen_opt.obstacle_count, "override obstacle count");
    gen->add_option("--radius", gen_opt.robot_radius, "robot radius");

    // train
    auto* train = app.add_subcommand("train", "train the denoiser score model");
    std::string tr_dataset, tr_scenarios, tr_out = "model.json", tr_save_ds, tr_resume,
                            tr_loss_csv;
    int tr_per_instance = 8, tr_width = 256, tr_depth = 4, tr_horizon = 64;
    std::uint64_t tr_seed = 0;
    TrainingConfig tr_cfg;
    train->add_option("--dataset", tr_dataset, "prebuilt dataset file");
    train->add_option("--scenario-dir", tr_scenarios, "build expert dataset from scenarios");
    train->add_option("--per-instance", tr_per_instance, "expert samples per instance");
    train->add_option("--epochs", tr_cfg.epochs, "training epochs");
    train->add_option("--batch", tr_cfg.batch_size, "batch size");
    train->add_option("--lr", tr_cfg.learning_rate, "learning rate");
    train->add_option("--width", tr_width, "hidden width");
    train->add_option("--depth", tr_depth, "residual layers");
    train->add_option("--horizon", tr_horizon, "trajectory horizon H");
    train->add_option("--seed", tr_seed, "training seed");
    train->add_option("--out", tr_out, "checkpoint output path");
    train->add_option("--save-dataset", tr_save_ds, "also save the built dataset");
    train->add_option("--resume", tr_resume, "resume from checkpoint");
    train->add_option("--loss-csv", tr_loss_csv, "loss curve CSV path");

    // run
    auto* run = app.add_subcommand("run", "run one scenario");
    std::string run_scenario, run_out = "out";
    bool run_svg = false, run_csv = false;
    RunFlags run_flags;
    run->add_option("--scenario", run_scenario, "scenario JSON")->required();
    run->add_option("--out-dir", run_out, "output directory");
    run->add_flag("--svg", run_svg, "render the executed run");
    run->add_flag("--csv", run_csv, "export executed trajectories as CSV");
    run_flags.add_to(run);

    // bench
    auto* bench = app.add_subcommand("bench", "run a scenario directory and aggregate");
    std::string bench_dir, bench_out = "bench_out";
    std::vector<double> bench_obs;
    std::vector<int> bench_ks;
    int bench_workers = 2;
    bool bench_svg = false;
    RunFlags bench_flags;
    bench->add_option("--scenario-dir", bench_dir, "directory of scenario JSONs")->required();
    bench->add_option("--out-dir", bench_out, "output directory");
    bench->add_option("--obs-range-list", bench_obs, "observation-range sweep values");
    bench->add_option("--k-list", bench_ks, "execution-window sweep values");
    bench->add_option("--workers", bench_workers, "parallel instance workers");
    bench->add_flag("--svg", bench_svg, "render each instance");
    bench_flags.add_to(bench);

    // render
    auto* render = app.add_subcommand("render", "draw a scenario (and a report) as SVG");
    std::string rnd_scenario, rnd_report, rnd_out = "scene.svg";
    render->add_option("--scenario", rnd_scenario, "scenario JSON")->required();
    render->add_option("--report", rnd_report, "report JSON with executed trajectories");
    render->add_option("--out", rnd_out, "SVG output path");

    // CLI11 wants argv-style reversed vector.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (gen->parsed()) {
            return cmd_generate(gen_family, gen_robots, gen_count, gen_seed, gen_out, gen_opt);
        }
        if (train->parsed()) {
            return cmd_train(tr_dataset, tr_scenarios, tr_per_instance, tr_cfg, tr_width,
                             tr_depth, tr_horizon, tr_seed, tr_out, tr_save_ds, tr_resume,
                             tr_loss_csv);
        }
        if (run->parsed()) {
            return cmd_run(run_scenario, run_flags, run_out, run_svg, run_csv, args);
        }
        if (bench->parsed()) {
            return cmd_bench(bench_dir, bench_flags, bench_out, bench_obs, bench_ks,
                             bench_workers, bench_svg, args);
        }
        if (render->parsed()) {
            return cmd_render(rnd_scenario, rnd_report, rnd_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace sid
