// Copyright 2026 The qetsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace qet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor-product space would exceed the configured dimension cap.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Populated amplitude would leave the truncated OAM or time-bin range.
class TruncationError : public Error {
 public:
  using Error::Error;
};

class NullPostselection : public Error {
 public:
  using Error::Error;
};

/// Sagnac sorter leaks population into the wrong output port.
class ExtinctionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace qet
