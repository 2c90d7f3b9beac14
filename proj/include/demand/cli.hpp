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

#ifndef DEMAND_CLI_HPP
#define DEMAND_CLI_HPP

#include <ostream>

namespace demand {

enum ExitCode {
  kExitOk = 0,
  kExitRefuted = 1,
  kExitUnknown = 2,
  kExitUsage = 64,
  kExitNoInput = 66,
};

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace demand

#endif  // DEMAND_CLI_HPP
