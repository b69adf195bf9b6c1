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

#include "mapbeam/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <type_traits>
#include <vector>

#include "mapbeam/units.hpp"

namespace mapb
{
    namespace
    {
        constexpr double kSpeedOfLight = 299792458.0; // m/s

        std::string trim(const std::string &s)
        {
            std::size_t b = s.find_first_not_of(" \t\r\n");
            if (b == std::string::npos)
                return "";
            std::size_t e = s.find_last_not_of(" \t\r\n");
            return s.substr(b, e - b + 1);
        }

        [[noreturn]] void fail(const std::string &key, const std::string &what)
        {
            throw ConfigError("config key '" + key + "': " + what);
        }

        // Splits "<number> [suffix]" and returns the number; the trimmed
        // remainder (e.g. "dB") is stored in *suffix.
        double split_number(const std::string &key, const std::string &value,
                            std::string *suffix)
        {
            const char *begin = value.c_str();
            char *end = nullptr;
            double v = std::strtod(begin, &end);
            if (end == begin)
                fail(key, "expected a number, got '" + value + "'");
            *suffix = trim(std::string(end));
            return v;
        }

        double parse_plain(const std::string &key, const std::string &value)
        {
            std::string suffix;
            double v = split_number(key, value, &suffix);
            if (!suffix.empty())
                fail(key, "unexpected suffix '" + suffix + "'");
            return v;
        }

        // Linear ratio, or decibels with a "dB" suffix.
        double parse_ratio(const std::string &key, const std::string &value)
        {
            std::string suffix;
            double v = split_number(key, value, &suffix);
            if (suffix.empty())
                return v;
            if (suffix == "dB")
                return db_to_linear(v);
            fail(key, "expected a linear value or 'dB' suffix, got '" + suffix + "'");
        }

        // Watts, or dBm with a "dBm" suffix.
        double parse_power(const std::string &key, const std::string &value)
        {
            std::string suffix;
            double v = split_number(key, value, &suffix);
            if (suffix.empty())
                return v;
            if (suffix == "dBm")
                return dbm_to_watts(v);
            fail(key, "expected watts or a 'dBm' suffix, got '" + suffix + "'");
        }

        int parse_int(const std::string &key, const std::string &value)
        {
            const char *begin = value.c_str();
            char *end = nullptr;
            long v = std::strtol(begin, &end, 10);
            if (end == begin || !trim(std::string(end)).empty())
                fail(key, "expected an integer, got '" + value + "'");
            if (v < -2147483647L || v > 2147483647L)
                fail(key, "integer out of range");
            return static_cast<int>(v);
        }

        std::vector<std::string> split_list(const std::string &value)
        {
            std::vector<std::string> items;
            std::string cur;
            std::istringstream is(value);
            while (std::getline(is, cur, ','))
            {
                cur = trim(cur);
                if (!cur.empty())
                    items.push_back(cur);
            }
            return items;
        }

        std::vector<double> parse_double_list(const std::string &key,
                                              const std::string &value)
        {
            std::vector<double> out;
            for (const std::string &item : split_list(value))
                out.push_back(parse_plain(key, item));
            return out;
        }

        std::vector<std::uint64_t> parse_seed_list(const std::string &key,
                                                   const std::string &value)
        {
            std::vector<std::uint64_t> out;
            for (const std::string &item : split_list(value))
            {
                const char *begin = item.c_str();
                char *end = nullptr;
                unsigned long long v = std::strtoull(begin, &end, 10);
                if (end == begin || !trim(std::string(end)).empty())
                    fail(key, "expected an unsigned integer, got '" + item + "'");
                out.push_back(static_cast<std::uint64_t>(v));
            }
            return out;
        }

        std::string fmt_double(double v)
        {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            return buf;
        }

        template <typename T> std::string join(const std::vector<T> &items)
        {
            std::ostringstream os;
            for (std::size_t i = 0; i < items.size(); i++)
            {
                if (i)
                    os << ',';
                if constexpr (std::is_same_v<T, double>)
                    os << fmt_double(items[i]);
                else
                    os << items[i];
            }
            return os.str();
        }
    } // namespace

    ExperimentConfig parse_config_text(const std::string &text,
                                       const ExperimentConfig &base)
    {
        // Pass 1: collect key/value pairs, rejecting malformed lines and
        // duplicates early so error messages carry line numbers.
        std::map<std::string, std::string> kv;
        std::istringstream is(text);
        std::string line;
        int lineno = 0;
        while (std::getline(is, line))
        {
            lineno++;
            std::size_t hash = line.find('#');
            if (hash != std::string::npos)
                line = line.substr(0, hash);
            line = trim(line);
            if (line.empty())
                continue;
            std::size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": expected 'key = value', got '" + line + "'");
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (key.empty())
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": empty key");
            if (!kv.emplace(key, value).second)
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": duplicate key '" + key + "'");
        }

        ExperimentConfig cfg = base;
        auto take = [&](const char *key, std::string *out) {
            auto it = kv.find(key);
            if (it == kv.end())
                return false;
            *out = it->second;
            kv.erase(it);
            return true;
        };
        std::string v;

        if (take("scenario.N", &v))
            cfg.N = parse_int("scenario.N", v);
        if (take("scenario.K", &v))
            cfg.K = parse_int("scenario.K", v);
        // Wavelength and carrier frequency may be given independently (the
        // published table rounds the wavelength); a missing one is derived.
        bool have_lambda = take("scenario.lambda", &v);
        if (have_lambda)
            cfg.lambda = parse_plain("scenario.lambda", v);
        bool have_carrier = take("scenario.carrier_hz", &v);
        if (have_carrier)
            cfg.f_c = parse_plain("scenario.carrier_hz", v);
        if (have_lambda && !have_carrier && cfg.lambda > 0.0)
            cfg.f_c = kSpeedOfLight / cfg.lambda;
        if (have_carrier && !have_lambda && cfg.f_c > 0.0)
            cfg.lambda = kSpeedOfLight / cfg.f_c;
        if (take("scenario.a", &v))
            cfg.a = parse_plain("scenario.a", v);
        if (take("scenario.d", &v))
            cfg.d = parse_plain("scenario.d", v);
        if (take("scenario.D_min", &v))
            cfg.d_min = parse_plain("scenario.D_min", v);
        if (take("scenario.alpha", &v))
            cfg.alpha = parse_plain("scenario.alpha", v);
        if (take("scenario.L0", &v))
            cfg.L0 = parse_ratio("scenario.L0", v);
        if (take("scenario.sigma2", &v))
            cfg.sigma2 = parse_power("scenario.sigma2", v);
        if (take("scenario.gamma_th", &v))
            cfg.gamma_th = parse_ratio("scenario.gamma_th", v);
        if (take("scenario.Gamma_th", &v))
            cfg.Gamma_th = parse_ratio("scenario.Gamma_th", v);
        if (take("scenario.omega_av", &v))
            cfg.omega_av = parse_plain("scenario.omega_av", v);
        if (take("scenario.sigma_e2", &v))
            cfg.sigma_e2 = parse_power("scenario.sigma_e2", v);
        if (take("scenario.nu", &v))
            cfg.nu = parse_plain("scenario.nu", v);

        if (take("channel.L_p", &v))
            cfg.L_p = parse_int("channel.L_p", v);
        if (take("channel.dist_min", &v))
            cfg.user_dist_min = parse_plain("channel.dist_min", v);
        if (take("channel.dist_max", &v))
            cfg.user_dist_max = parse_plain("channel.dist_max", v);

        if (take("targets.theta_deg", &v))
            cfg.target_theta_deg = parse_double_list("targets.theta_deg", v);
        if (take("targets.phi_deg", &v))
            cfg.target_phi_deg = parse_double_list("targets.phi_deg", v);
        if (take("targets.range", &v))
            cfg.target_range = parse_double_list("targets.range", v);

        if (take("pattern.L", &v))
            cfg.L = parse_int("pattern.L", v);
        if (take("pattern.Q", &v))
            cfg.Q = parse_int("pattern.Q", v);
        if (take("pattern.half_el_deg", &v))
            cfg.half_el_deg = parse_plain("pattern.half_el_deg", v);
        if (take("pattern.half_az_deg", &v))
            cfg.half_az_deg = parse_plain("pattern.half_az_deg", v);
        if (take("pattern.delta_d", &v))
            cfg.delta_d = parse_plain("pattern.delta_d", v);
        if (take("pattern.mse_fit_multiplier", &v))
            cfg.mse_fit_multiplier = parse_plain("pattern.mse_fit_multiplier", v);

        if (take("run.seeds", &v))
            cfg.seeds = parse_seed_list("run.seeds", v);
        if (take("run.schemes", &v))
            cfg.schemes = split_list(v);
        if (take("run.samples", &v))
            cfg.mc_samples = parse_int("run.samples", v);

        if (take("sweep.axis", &v))
            cfg.sweep_name = v;
        if (take("sweep.values", &v))
            cfg.sweep_values = parse_double_list("sweep.values", v);

        if (take("ao.eps", &v))
            cfg.ao.eps_ao = parse_plain("ao.eps", v);
        if (take("ao.max_iters", &v))
            cfg.ao.max_ao_iters = parse_int("ao.max_iters", v);
        if (take("ao.restarts", &v))
            cfg.ao.restarts = parse_int("ao.restarts", v);
        if (take("ao.tau", &v))
            cfg.ao.tau0.fill(parse_plain("ao.tau", v));
        if (take("ao.p2_eps", &v))
            cfg.ao.p2_eps = parse_plain("ao.p2_eps", v);
        if (take("ao.p2_max_iters", &v))
            cfg.ao.p2_max_iters = parse_int("ao.p2_max_iters", v);

        if (take("solver.eps", &v))
            cfg.ao.p1.eps = parse_plain("solver.eps", v);
        if (take("solver.max_iters", &v))
            cfg.ao.p1.max_iters = parse_int("solver.max_iters", v);
        if (take("solver.randomization_draws", &v))
            cfg.ao.p1.randomization_draws = parse_int("solver.randomization_draws", v);

        // The target count is implied by the target lists; an explicit
        // scenario.E must agree with them.
        if (take("scenario.E", &v))
        {
            int e = parse_int("scenario.E", v);
            if (e != static_cast<int>(cfg.target_theta_deg.size()))
                fail("scenario.E",
                     "value " + std::to_string(e) + " does not match the " +
                         std::to_string(cfg.target_theta_deg.size()) +
                         " configured targets");
        }

        if (!kv.empty())
            throw ConfigError("unknown config key '" + kv.begin()->first + "'");

        try
        {
            cfg.validate();
        }
        catch (const std::invalid_argument &e)
        {
            throw ConfigError(e.what());
        }
        return cfg;
    }

    ExperimentConfig parse_config_file(const std::string &path,
                                       const ExperimentConfig &base)
    {
        std::ifstream is(path);
        if (!is)
            throw ConfigError("cannot open config file '" + path + "'");
        std::ostringstream buf;
        buf << is.rdbuf();
        return parse_config_text(buf.str(), base);
    }

    std::string serialize_config(const ExperimentConfig &cfg)
    {
        // Keys are emitted in lexicographic order so the serialization (and
        // thus the config hash) is independent of any input file ordering.
        std::map<std::string, std::string> kv;
        kv["ao.eps"] = fmt_double(cfg.ao.eps_ao);
        kv["ao.max_iters"] = std::to_string(cfg.ao.max_ao_iters);
        kv["ao.p2_eps"] = fmt_double(cfg.ao.p2_eps);
        kv["ao.p2_max_iters"] = std::to_string(cfg.ao.p2_max_iters);
        kv["ao.restarts"] = std::to_string(cfg.ao.restarts);
        kv["ao.tau"] = fmt_double(cfg.ao.tau0[0]);
        kv["channel.L_p"] = std::to_string(cfg.L_p);
        kv["channel.dist_max"] = fmt_double(cfg.user_dist_max);
        kv["channel.dist_min"] = fmt_double(cfg.user_dist_min);
        kv["pattern.L"] = std::to_string(cfg.L);
        kv["pattern.Q"] = std::to_string(cfg.Q);
        kv["pattern.delta_d"] = fmt_double(cfg.delta_d);
        kv["pattern.half_az_deg"] = fmt_double(cfg.half_az_deg);
        kv["pattern.half_el_deg"] = fmt_double(cfg.half_el_deg);
        kv["pattern.mse_fit_multiplier"] = fmt_double(cfg.mse_fit_multiplier);
        kv["run.samples"] = std::to_string(cfg.mc_samples);
        kv["run.schemes"] = join(cfg.schemes);
        kv["run.seeds"] = join(cfg.seeds);
        kv["scenario.D_min"] = fmt_double(cfg.d_min);
        kv["scenario.E"] = std::to_string(cfg.E());
        kv["scenario.Gamma_th"] = fmt_double(cfg.Gamma_th);
        kv["scenario.K"] = std::to_string(cfg.K);
        kv["scenario.L0"] = fmt_double(cfg.L0);
        kv["scenario.N"] = std::to_string(cfg.N);
        kv["scenario.a"] = fmt_double(cfg.a);
        kv["scenario.alpha"] = fmt_double(cfg.alpha);
        kv["scenario.carrier_hz"] = fmt_double(cfg.f_c);
        kv["scenario.d"] = fmt_double(cfg.d);
        kv["scenario.gamma_th"] = fmt_double(cfg.gamma_th);
        kv["scenario.lambda"] = fmt_double(cfg.lambda);
        kv["scenario.nu"] = fmt_double(cfg.nu);
        kv["scenario.omega_av"] = fmt_double(cfg.omega_av);
        kv["scenario.sigma2"] = fmt_double(cfg.sigma2);
        kv["scenario.sigma_e2"] = fmt_double(cfg.sigma_e2);
        kv["solver.eps"] = fmt_double(cfg.ao.p1.eps);
        kv["solver.max_iters"] = std::to_string(cfg.ao.p1.max_iters);
        kv["solver.randomization_draws"] =
            std::to_string(cfg.ao.p1.randomization_draws);
        kv["sweep.axis"] = cfg.sweep_name;
        kv["sweep.values"] = join(cfg.sweep_values);
        kv["targets.phi_deg"] = join(cfg.target_phi_deg);
        kv["targets.range"] = join(cfg.target_range);
        kv["targets.theta_deg"] = join(cfg.target_theta_deg);

        std::ostringstream os;
        for (const auto &[key, value] : kv)
            os << key << " = " << value << '\n';
        return os.str();
    }

    std::string config_hash(const ExperimentConfig &cfg)
    {
        std::string text = serialize_config(cfg);
        std::uint64_t h = 14695981039346656037ULL; // FNV-1a offset basis
        for (unsigned char c : text)
        {
            h ^= c;
            h *= 1099511628211ULL; // FNV-1a prime
        }
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(h));
        return buf;
    }

} // namespace mapb
