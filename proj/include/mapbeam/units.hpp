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

#ifndef mapbeam_units_H
#define mapbeam_units_H

#include <cmath>
#include <stdexcept>

namespace mapb
{
    // All unit conversions used by the library live here so that every module
    // converts decibel quantities in exactly one way. Configuration files mix
    // dB, dBm and linear values; a single conversion point prevents silent
    // inconsistencies between modules.

    // Power ratio in dB -> linear ratio, x_lin = 10^(x_dB/10)
    inline double db_to_linear(double x_db)
    {
        return std::pow(10.0, x_db / 10.0);
    }

    // Linear power ratio -> dB. Requires a positive input.
    inline double linear_to_db(double x_lin)
    {
        if (x_lin <= 0.0)
            throw std::invalid_argument("linear_to_db: input must be positive");
        return 10.0 * std::log10(x_lin);
    }

    // Power in dBm -> watts, P_W = 10^((P_dBm - 30)/10)
    inline double dbm_to_watts(double p_dbm)
    {
        return std::pow(10.0, (p_dbm - 30.0) / 10.0);
    }

    // Power in watts -> dBm. Requires a positive input.
    inline double watts_to_dbm(double p_w)
    {
        if (p_w <= 0.0)
            throw std::invalid_argument("watts_to_dbm: input must be positive");
        return 10.0 * std::log10(p_w) + 30.0;
    }

    // Carrier frequency in Hz -> free-space wavelength in meters.
    inline double frequency_to_wavelength(double f_hz)
    {
        if (f_hz <= 0.0)
            throw std::invalid_argument("frequency_to_wavelength: frequency must be positive");
        constexpr double c0 = 299792458.0; // speed of light, m/s
        return c0 / f_hz;
    }

    // Degrees -> radians.
    inline double deg_to_rad(double deg)
    {
        return deg * 3.14159265358979323846 / 180.0;
    }

} // namespace mapb

#endif
