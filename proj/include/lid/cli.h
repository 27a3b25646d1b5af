// lid/cli.h

// Copyright 2026 The lidnet Authors
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

#ifndef LID_CLI_H_
#define LID_CLI_H_

#include <iosfwd>
#include <string>

#include "lid/config.h"

namespace lid {

// Extracts LIDF feature files for every manifest entry and writes a new
// manifest pointing at them. Returns the number of failed files.
int CmdExtract(const RunConfig& cfg, const std::string& manifest_path,
               const std::string& out_dir, std::ostream& log);

// Trains per config; writes the best checkpoint to out_path, history CSV to
// out_path + ".history.csv" and the resolved config to out_path + ".config".
void CmdTrain(const RunConfig& cfg, const std::string& out_path, std::ostream& log);

// Evaluates a checkpoint on a manifest; writes metrics.csv, confusion.csv and
// confusion.txt under report_dir.
void CmdEval(const RunConfig& cfg, const std::string& checkpoint_path,
             const std::string& manifest_path, const std::string& report_dir,
             std::ostream& log);

// Single-utterance inference; prints the argmax ISO code then one
// "code probability" line per class.
void CmdPredict(const RunConfig& cfg, const std::string& checkpoint_path,
                const std::string& input_path, std::ostream& out);

// Full argv entry point; maps errors to exit codes
// (0 ok, 1 usage/config, 2 data, 3 numeric).
int RunCli(int argc, const char* const* argv);

}  // namespace lid

#endif  // LID_CLI_H_
