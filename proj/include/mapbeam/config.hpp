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
// Declarative experiment configuration: a flat text format with dotted keys
// (`scenario.nu = 0.01`), decibel-aware value parsing ("10 dB", "-80 dBm"),
// strict unknown-key rejection, canonical serialization and a stable hash.

#ifndef mapbeam_config_H
#define mapbeam_config_H

#include <stdexcept>
#include <string>

#include "mapbeam/evaluation.hpp"

namespace mapb
{
    // Raised for every malformed config: unknown or duplicate keys, type
    // errors and range violations. The message names the offending key.
    struct ConfigError : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };

    // Parses `key.path = value` lines ('#' starts a comment, blank lines are
    // ignored) on top of the given base configuration. An empty text yields
    // the base unchanged; the all-defaults base is the desk-scale profile.
    // Ratio-valued keys accept a "dB" suffix, power-valued keys a "dBm"
    // suffix; plain numbers are linear/watts.
    ExperimentConfig parse_config_text(const std::string &text,
                                       const ExperimentConfig &base = {});

    // File variant of parse_config_text. Missing file → ConfigError.
    ExperimentConfig parse_config_file(const std::string &path,
                                       const ExperimentConfig &base = {});

    // Canonical serialization: every key in fixed lexicographic order with
    // linear/SI values. parse(serialize(cfg)) reproduces cfg exactly.
    std::string serialize_config(const ExperimentConfig &cfg);

    // 16-hex-digit FNV-1a hash of the canonical serialization; independent
    // of the key order of the file the config was parsed from.
    std::string config_hash(const ExperimentConfig &cfg);

} // namespace mapb

#endif
