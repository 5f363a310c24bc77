/*
 * Copyright 2026 The mdblock Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace mdblock {

/// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text: CSV records, rule documents, config files.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Header or attribute-level inconsistencies.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// A rule set that is well-formed but cannot be bound to a schema.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Invalid runtime configuration (unknown measure, bad engine parameters).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace mdblock
