// Copyright 2026 The qndwork Authors
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

namespace qndwork {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Invalid input: a value violates a documented invariant, or a
/// configuration file is malformed. Nothing has been computed yet.
class ConfigError : public Error {
   public:
    using Error::Error;
};

/// A numerical procedure did not reach its tolerance within budget, or a
/// checked physical identity failed beyond tolerance. `diagnostics` carries
/// the details (worst interval, achieved error, ...).
class NumericalError : public Error {
   public:
    NumericalError(const std::string &what, std::string diagnostics = {})
        : Error(diagnostics.empty() ? what : what + " [" + diagnostics + "]"), diagnostics_(std::move(diagnostics)) {
    }

    const std::string &diagnostics() const noexcept {
        return diagnostics_;
    }

   private:
    std::string diagnostics_;
};

inline void require(bool condition, const std::string &message) {
    if (!condition) {
        throw ConfigError(message);
    }
}

}  // namespace qndwork
