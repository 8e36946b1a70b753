// Copyright 2026 The arpf authors
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

#ifndef ARPF_ERRORS_HPP_
#define ARPF_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace arpf
{

class InvalidArgument : public std::runtime_error
{
public:
  explicit InvalidArgument(const std::string & what) : std::runtime_error(what) {}
};

/// All particle weights (or all per-PE weight sums) collapsed to zero.
class DivergenceError : public std::runtime_error
{
public:
  explicit DivergenceError(const std::string & what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error
{
public:
  explicit IoError(const std::string & what) : std::runtime_error(what) {}
};

class ParseError : public std::runtime_error
{
public:
  explicit ParseError(const std::string & what) : std::runtime_error(what) {}
};

}  // namespace arpf

#endif  // ARPF_ERRORS_HPP_
