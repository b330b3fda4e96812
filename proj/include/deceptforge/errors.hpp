// Copyright 2026 The DeceptForge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DECEPTFORGE_ERRORS_HPP_
#define DECEPTFORGE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace deceptforge {

// Root of every error raised by the library. Subclasses map one-to-one onto
// the failure kinds callers are expected to distinguish.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define DECEPTFORGE_DEFINE_ERROR(Name)        \
  class Name : public Error {                 \
   public:                                    \
    using Error::Error;                       \
  }

DECEPTFORGE_DEFINE_ERROR(EmptyText);
DECEPTFORGE_DEFINE_ERROR(IndexError);
DECEPTFORGE_DEFINE_ERROR(OverlapError);
DECEPTFORGE_DEFINE_ERROR(RangeError);
DECEPTFORGE_DEFINE_ERROR(AlignmentError);
DECEPTFORGE_DEFINE_ERROR(TokenizationError);
DECEPTFORGE_DEFINE_ERROR(VocabError);
DECEPTFORGE_DEFINE_ERROR(SelectionError);
DECEPTFORGE_DEFINE_ERROR(PatternError);
DECEPTFORGE_DEFINE_ERROR(ConfigError);
// Backend or oracle could not be reached, or answered with garbage.
DECEPTFORGE_DEFINE_ERROR(TransportError);

#undef DECEPTFORGE_DEFINE_ERROR

}  // namespace deceptforge

#endif  // DECEPTFORGE_ERRORS_HPP_
