// SPDX-License-Identifier: Apache-2.0
//
// mats - two-timescale movable-antenna MU-MIMO design library
// Copyright (C) 2026 The mats authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace mats {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input outside the documented domain of an operation (negative distance,
// angle out of range, infeasible layout, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Beamformer asked to act on an all-zero channel.
class DegenerateChannelError : public Error {
public:
    using Error::Error;
};

// Channel matrix without full column rank, or N <= M where ZF needs N > M.
class RankError : public Error {
public:
    using Error::Error;
};

// Matrix that should be invertible is numerically singular.
class NumericalRankError : public Error {
public:
    NumericalRankError(const std::string& what, double condition_estimate)
        : Error(what + " (condition estimate " + std::to_string(condition_estimate) + ")"),
          condition_estimate_(condition_estimate)
    {
    }

    double condition_estimate() const noexcept { return condition_estimate_; }

private:
    double condition_estimate_;
};

// Internal invariant of a cached quantity violated (e.g. nonpositive
// denominator of a Rayleigh quotient).
class InvariantError : public Error {
public:
    using Error::Error;
};

// Configuration file could not be parsed or is inconsistent.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace mats
