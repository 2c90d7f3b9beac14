/* Copyright 2026 The Demandlyzer Authors. All Rights Reserved.

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

#ifndef DEMAND_TESTS_COMMON_HPP
#define DEMAND_TESTS_COMMON_HPP

#include <fstream>
#include <sstream>
#include <string>

#include "demand/kernel.hpp"

namespace demand::testing {

inline std::string read_corpus(const std::string& name) {
  std::ifstream in(std::string(DEMAND_CORPUS_DIR) + "/" + name);
  if (!in) throw std::runtime_error("missing corpus file " + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Program load(const std::string& name) {
  return parse_program_or_throw(read_corpus(name));
}

}  // namespace demand::testing

#endif  // DEMAND_TESTS_COMMON_HPP
