// Copyright 2026 The cisp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace cisp {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid experiment or precoder configuration (bad modulation order, p0 <= 0, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Invalid call arguments: dimension mismatch, index out of range, non-positive variance.
class InputError : public Error {
public:
    using Error::Error;
};

/// Malformed channel or config file. Carries the 1-based line and field where parsing failed
/// (0 when not applicable).
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line, int field)
        : Error(what + " (line " + std::to_string(line) + ", field " + std::to_string(field) + ")"),
          line_(line),
          field_(field) {}

    int line() const noexcept { return line_; }
    int field() const noexcept { return field_; }

private:
    int line_;
    int field_;
};

/// A numerical step of the precoding pipeline could not proceed.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// The consistency operator has a trivial null space, so no non-zero pre-scaling vector exists.
class NoNullSpace : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// The reduced power form restricted to the null space vanished numerically.
class DegeneratePowerForm : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// The dual objective u'Mu is (numerically) zero, so the power multiplier is undefined.
class DegenerateDual : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace cisp
