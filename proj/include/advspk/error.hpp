/* Copyright 2026 The advspk Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef ADVSPK_ERROR_HPP_
#define ADVSPK_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace advspk {

// Base for every error raised by the toolkit. The message is prefixed with
// the module tag, e.g. "corpus: inconsistent label for speaker s1".
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what);

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

// Bad input: malformed files, violated invariants, invalid configuration.
// The CLI maps this to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Failure while doing valid work: I/O errors, training divergence.
// The CLI maps this to exit code 2.
class RuntimeFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace advspk

#endif  // ADVSPK_ERROR_HPP_
