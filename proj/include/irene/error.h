//
// Copyright 2026 The IRENE Authors
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
//

#ifndef IRENE_ERROR_H_
#define IRENE_ERROR_H_

#include <stdexcept>
#include <string>

namespace irene {

// Base class for every error raised by the library. The C API maps the
// concrete subclass onto a status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or precondition violation on user-supplied values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Tensor shapes that do not compose.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf produced during a forward pass, a loss, or a difference quotient.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Misuse of a stateful object (e.g. backward before forward).
class StateError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace irene

#endif  // IRENE_ERROR_H_
