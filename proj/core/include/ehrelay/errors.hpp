// SPDX-License-Identifier: Apache-2.0
//
// ehrelay: capacity optimization for power-splitting MIMO relays
// Copyright (C) 2026 The ehrelay Authors
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

namespace ehrelay
{

// Malformed or inconsistent input: dimension mismatch, non-finite entries,
// parameters outside their documented range.
class InputError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

// The harvested-energy budget is identically zero (eta = 0, or no mode
// carries first-hop power), so no positive dual root exists.
class DegenerateBudget : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

// A dual search could not bracket a sign change within its expansion cap.
class BracketError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace ehrelay
