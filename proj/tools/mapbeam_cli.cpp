// SPDX-License-Identifier: Apache-2.0
//
// mapbeam — movable-antenna placement and dual-function beamforming
// Copyright (C) 2026 mapbeam contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
//
// Batch entry point. Subcommands:
//   run           solve every configured scheme once per seed
//   sweep         run the configured sweep axis (Gamma_th_db | nu | a)
//   baseline      run the two reference schemes only
//   oracle        exhaustive placement search on small instances (guarded)
//   verify_chance Monte-Carlo validation of the sensing outage constraint
//
// Artifacts per invocation: results.csv, trace_<seed>.csv (optimization
// traces of the proposed scheme), config.txt (canonical configuration) and
// manifest.txt. Exit codes: 0 full success, 1 flagged failures, 2 usage or
// configuration errors.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "mapbeam/config.hpp"
#include "mapbeam/units.hpp"

namespace fs = std::filesystem;

namespace
{
    constexpr const char *kToolVersion = "1.0.0";

    enum class LogLevel
    {
        quiet,
        normal,
        debug
    };

    struct CliOptions
    {
        std::string config_path;
        std::string out_dir = "out";
        std::string seeds;
        std::string profile = "desk";
        int workers = 0; // 0 → hardware thread count
        int samples = 0; // 0 → config value
        std::string log = "normal";

        LogLevel level() const
        {
            if (log == "quiet")
                return LogLevel::quiet;
            if (log == "debug")
                return LogLevel::debug;
            return LogLevel::normal;
        }
    };

    std::string utc_timestamp()
    {
        std::time_t now = std::time(nullptr);
        std::tm tm{};
        gmtime_r(&now, &tm);
        char buf[32];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
        return buf;
    }

    mapb::ExperimentConfig load_config(const CliOptions &cli)
    {
        mapb::ExperimentConfig base;
        if (cli.profile == "paper")
        {
            base = mapb::paper_profile();
            if (cli.level() != LogLevel::quiet)
                std::cerr << "warning: paper-scale profile selected; expect very "
                             "long runtimes compared to the desk profile\n";
        }
        mapb::ExperimentConfig cfg =
            cli.config_path.empty() ? base
                                    : mapb::parse_config_file(cli.config_path, base);
        // Flag overrides reuse the config parser so they get the same
        // validation and error messages.
        if (!cli.seeds.empty())
            cfg = mapb::parse_config_text("run.seeds = " + cli.seeds, cfg);
        if (cli.samples > 0)
            cfg.mc_samples = cli.samples;
        cfg.validate();
        return cfg;
    }

    int effective_workers(const CliOptions &cli)
    {
        if (cli.workers > 0)
            return cli.workers;
        unsigned hw = std::thread::hardware_concurrency();
        return hw > 0 ? static_cast<int>(hw) : 1;
    }

    // Dumps the conic form of the beamforming subproblem at the fixed-array
    // placement of the first seed — the debug artifact for solver triage.
    void dump_first_program(const mapb::ExperimentConfig &cfg, const fs::path &out)
    {
        mapb::Scenario sc = mapb::build_scenario(cfg, cfg.seeds.front());
        std::vector<int> indices;
        try
        {
            indices = mapb::fixed_array_placement(sc.grid, cfg.N);
        }
        catch (const std::exception &)
        {
            indices = mapb::greedy_spread_placement(
                sc.grid, mapb::distance_matrix(sc.grid), cfg.N, sc.d_min);
        }
        mapb::Placement p = mapb::make_placement(sc.grid, indices, sc.d_min);
        mapb::EffectiveScenario eff =
            mapb::make_effective_scenario(sc.grid, p, sc.chan, sc.targets, sc.bgrid);
        mapb::conic::Program prog = mapb::assemble_p1(eff, mapb::p1_power_scale(eff),
                                                      mapb::channel_rms(eff));
        std::ofstream os(out);
        prog.dump(os);
    }

    struct RunArtifacts
    {
        std::vector<mapb::ResultRecord> rows;
        std::vector<mapb::SweepCellDetail> details;
        std::string started;
        std::string command;
    };

    // Writes results.csv, per-seed trace files, the canonical config and the
    // manifest. Returns the number of flagged (infeasible) rows.
    int write_artifacts(const CliOptions &cli, const mapb::ExperimentConfig &cfg,
                        const RunArtifacts &art)
    {
        const fs::path out(cli.out_dir);
        fs::create_directories(out);

        const fs::path results_path = out / "results.csv";
        {
            std::ofstream os(results_path);
            if (!os)
                throw std::runtime_error("cannot write " + results_path.string());
            mapb::write_results_csv(os, art.rows, cfg.E());
        }

        // One trace file per seed; sweep levels are concatenated in run
        // order (the iteration column restarts at 0 for each level).
        std::map<std::uint64_t, std::vector<mapb::AOTraceRow>> traces;
        for (const mapb::SweepCellDetail &d : art.details)
        {
            auto &dst = traces[d.seed];
            dst.insert(dst.end(), d.trace.begin(), d.trace.end());
        }
        std::vector<std::string> trace_paths;
        for (const auto &[seed, rowsv] : traces)
        {
            fs::path tp = out / ("trace_" + std::to_string(seed) + ".csv");
            std::ofstream os(tp);
            if (!os)
                throw std::runtime_error("cannot write " + tp.string());
            mapb::write_trace_csv(os, rowsv);
            trace_paths.push_back(tp.string());
        }

        const fs::path config_path = out / "config.txt";
        {
            std::ofstream os(config_path);
            if (!os)
                throw std::runtime_error("cannot write " + config_path.string());
            os << mapb::serialize_config(cfg);
        }

        int flagged = 0;
        for (const mapb::ResultRecord &r : art.rows)
            if (!r.feasible)
                flagged++;

        const fs::path manifest_path = out / "manifest.txt";
        {
            std::ofstream os(manifest_path);
            if (!os)
                throw std::runtime_error("cannot write " + manifest_path.string());
            os << "manifest.command = " << art.command << '\n';
            os << "manifest.config = " << config_path.string() << '\n';
            os << "manifest.config_hash = " << mapb::config_hash(cfg) << '\n';
            os << "manifest.finished_utc = " << utc_timestamp() << '\n';
            os << "manifest.flagged = " << flagged << '\n';
            os << "manifest.results = " << results_path.string() << '\n';
            os << "manifest.samples = " << cfg.mc_samples << '\n';
            std::ostringstream seeds;
            for (std::size_t i = 0; i < cfg.seeds.size(); i++)
                seeds << (i ? "," : "") << cfg.seeds[i];
            os << "manifest.seeds = " << seeds.str() << '\n';
            os << "manifest.started_utc = " << art.started << '\n';
            os << "manifest.tool = mapbeam " << kToolVersion << '\n';
            std::ostringstream tp;
            for (std::size_t i = 0; i < trace_paths.size(); i++)
                tp << (i ? "," : "") << trace_paths[i];
            os << "manifest.traces = " << tp.str() << '\n';
        }

        if (cli.level() != LogLevel::quiet)
        {
            std::cerr << "wrote " << results_path.string() << " (" << art.rows.size()
                      << " rows, " << flagged << " flagged)\n";
        }
        return flagged;
    }

    int finish(const CliOptions &cli, const mapb::ExperimentConfig &cfg,
               const RunArtifacts &art)
    {
        int flagged = write_artifacts(cli, cfg, art);
        if (flagged > 0)
        {
            std::cerr << "flagged failures: " << flagged << " of " << art.rows.size()
                      << " cells did not produce a validated feasible design\n";
            return 1;
        }
        return 0;
    }

    int command_batch(const CliOptions &cli, mapb::ExperimentConfig cfg,
                      const std::string &command)
    {
        if (command == "run")
        {
            cfg.sweep_name = "none";
            cfg.sweep_values.clear();
        }
        else if (command == "sweep")
        {
            if (cfg.sweep_name == "none")
            {
                std::cerr << "error: 'sweep' needs sweep.axis in the config "
                             "(Gamma_th_db | nu | a)\n";
                return 2;
            }
        }
        else if (command == "baseline")
        {
            std::vector<std::string> keep;
            for (const std::string &s : cfg.schemes)
                if (s != "proposed")
                    keep.push_back(s);
            if (keep.empty())
                keep = {"baseline_fixed", "baseline_selection"};
            cfg.schemes = keep;
        }

        if (cli.level() == LogLevel::debug)
            dump_first_program(cfg, fs::path(cli.out_dir) / "debug_p1.txt");

        RunArtifacts art;
        art.command = command;
        art.started = utc_timestamp();
        if (cli.level() != LogLevel::quiet)
        {
            std::size_t levels =
                cfg.sweep_name == "none" ? 1 : cfg.sweep_values.size();
            std::cerr << command << ": " << cfg.schemes.size() << " scheme(s) × "
                      << cfg.seeds.size() << " seed(s) × " << levels
                      << " sweep level(s)\n";
        }
        art.rows = mapb::run_sweep(cfg, effective_workers(cli), &art.details);
        return finish(cli, cfg, art);
    }

    int command_oracle(const CliOptions &cli, const mapb::ExperimentConfig &cfg)
    {
        RunArtifacts art;
        art.command = "oracle";
        art.started = utc_timestamp();
        for (std::uint64_t seed : cfg.seeds)
        {
            auto t0 = std::chrono::steady_clock::now();
            mapb::Scenario sc = mapb::build_scenario(cfg, seed);
            mapb::SchemeRun run = mapb::oracle_run(sc, cfg.ao.p1);
            if (run.record.feasible && !mapb::revalidate_run(sc, run))
                run.record = mapb::ResultRecord{"oracle", seed};
            if (run.record.feasible)
            {
                mapb::Rng mc = mapb::Rng::child(seed, 0x6f7574ULL);
                run.record.outage_hat = mapb::monte_carlo_outage(
                    sc.grid, sc.targets, cfg.L0, run.indices, run.w, run.R,
                    cfg.mc_samples, mc);
            }
            else
            {
                run.record.outage_hat.assign(static_cast<std::size_t>(cfg.E()), 1.0);
            }
            auto t1 = std::chrono::steady_clock::now();
            run.record.runtime_s = std::chrono::duration<double>(t1 - t0).count();
            if (cli.level() != LogLevel::quiet)
                std::cerr << "oracle seed " << seed << ": "
                          << (run.record.feasible ? "feasible" : "infeasible")
                          << ", power " << run.record.power_w << " W over "
                          << run.record.iterations << " placements\n";
            art.rows.push_back(run.record);
        }
        return finish(cli, cfg, art);
    }

    int command_verify_chance(const CliOptions &cli, const mapb::ExperimentConfig &cfg)
    {
        RunArtifacts art;
        art.command = "verify_chance";
        art.started = utc_timestamp();
        const std::string scheme = cfg.schemes.front();
        const double band =
            3.0 * std::sqrt(cfg.nu * (1.0 - cfg.nu) /
                            static_cast<double>(cfg.mc_samples));
        bool all_ok = true;

        for (std::uint64_t seed : cfg.seeds)
        {
            auto t0 = std::chrono::steady_clock::now();
            mapb::Scenario sc = mapb::build_scenario(cfg, seed);
            mapb::SchemeRun run;
            if (scheme == "proposed")
            {
                mapb::AOConfig ao = cfg.ao;
                ao.seed = seed;
                run = mapb::proposed_scheme(sc, ao);
            }
            else if (scheme == "baseline_fixed")
            {
                run = mapb::baseline_fixed(sc, cfg.ao.p1);
            }
            else
            {
                run = mapb::baseline_antenna_selection(sc, cfg.ao.p1);
            }
            if (run.record.feasible && !mapb::revalidate_run(sc, run))
                run.record.feasible = false;

            if (!run.record.feasible)
            {
                all_ok = false;
                run.record.outage_hat.assign(static_cast<std::size_t>(cfg.E()), 1.0);
                std::cout << "seed " << seed << ": no feasible design\n";
            }
            else
            {
                mapb::Rng mc = mapb::Rng::child(seed, 0x6f7574ULL);
                run.record.outage_hat = mapb::monte_carlo_outage(
                    sc.grid, sc.targets, cfg.L0, run.indices, run.w, run.R,
                    cfg.mc_samples, mc);
                std::vector<double> values = mapb::committed_target_values(
                    sc.grid, sc.targets, run.indices, run.w, run.R);
                for (int e = 0; e < cfg.E(); e++)
                {
                    double hat = run.record.outage_hat[static_cast<std::size_t>(e)];
                    double closed = mapb::analytic_outage(
                        sc.targets, e, cfg.L0, values[static_cast<std::size_t>(e)]);
                    bool ok = hat <= cfg.nu + band;
                    all_ok = all_ok && ok;
                    std::cout << "seed " << seed << " target " << (e + 1)
                              << ": outage_hat " << hat << ", closed-form " << closed
                              << ", tolerance " << cfg.nu << " + " << band << " → "
                              << (ok ? "OK" : "VIOLATION") << '\n';
                }
            }
            auto t1 = std::chrono::steady_clock::now();
            run.record.runtime_s = std::chrono::duration<double>(t1 - t0).count();
            if (!run.ao.trace.empty())
                art.details.push_back(
                    {scheme, seed, 0.0, run.ao.trace});
            art.rows.push_back(run.record);
        }

        int flagged = write_artifacts(cli, cfg, art);
        if (!all_ok || flagged > 0)
        {
            std::cerr << "chance-constraint verification failed on at least one "
                         "seed/target\n";
            return 1;
        }
        return 0;
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"movable-antenna placement and dual-function beamforming "
                 "batch tool"};
    app.set_version_flag("--version", std::string("mapbeam ") + kToolVersion);

    CliOptions cli;
    app.add_option("--config", cli.config_path,
                   "configuration file (dotted-key text)")
        ->check(CLI::ExistingFile);
    app.add_option("--out", cli.out_dir, "output directory")
        ->capture_default_str();
    app.add_option("--seeds", cli.seeds, "comma-separated seed list override");
    app.add_option("--profile", cli.profile, "parameter profile")
        ->check(CLI::IsMember({"desk", "paper"}))
        ->capture_default_str();
    app.add_option("--workers", cli.workers,
                   "worker pool size (0 = hardware threads)");
    app.add_option("--samples", cli.samples, "Monte-Carlo sample count override");
    app.add_option("--log", cli.log, "log level")
        ->check(CLI::IsMember({"quiet", "normal", "debug"}))
        ->capture_default_str();

    app.require_subcommand(1);
    CLI::App *c_run =
        app.add_subcommand("run", "solve every configured scheme once per seed");
    CLI::App *c_sweep =
        app.add_subcommand("sweep", "run the configured sweep axis");
    CLI::App *c_baseline =
        app.add_subcommand("baseline", "run the reference schemes only");
    CLI::App *c_oracle = app.add_subcommand(
        "oracle", "exhaustive placement search on small instances (guarded)");
    CLI::App *c_verify = app.add_subcommand(
        "verify_chance", "Monte-Carlo check of the sensing outage constraint");

    CLI11_PARSE(app, argc, argv);

    try
    {
        mapb::ExperimentConfig cfg = load_config(cli);
        if (c_run->parsed())
            return command_batch(cli, cfg, "run");
        if (c_sweep->parsed())
            return command_batch(cli, cfg, "sweep");
        if (c_baseline->parsed())
            return command_batch(cli, cfg, "baseline");
        if (c_oracle->parsed())
            return command_oracle(cli, cfg);
        if (c_verify->parsed())
            return command_verify_chance(cli, cfg);
        std::cerr << "error: no subcommand selected\n";
        return 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
