// src/config.cc

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

#include "lid/config.h"

#include <fstream>
#include <sstream>

namespace lid {

namespace {

int ParseInt(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const int out = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for " + key + ": '" + v + "'");
  }
}

int64_t ParseInt64(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const long long out = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for " + key + ": '" + v + "'");
  }
}

double ParseDouble(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config: bad real for " + key + ": '" + v + "'");
  }
}

bool ParseBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config: bad boolean for " + key + ": '" + v + "'");
}

std::vector<int> ParseIntList(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(ParseInt(key, item));
  if (out.empty()) throw ConfigError("config: empty list for " + key);
  return out;
}

std::string JoinInts(const std::vector<int>& v) {
  std::ostringstream os;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) os << ",";
    os << v[i];
  }
  return os.str();
}

std::string FmtReal(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void RunConfig::Set(const std::string& key, const std::string& value) {
  if (key == "features.sample_rate") features.sample_rate = ParseInt(key, value);
  else if (key == "features.window") features.window = ParseInt(key, value);
  else if (key == "features.hop") features.hop = ParseInt(key, value);
  else if (key == "features.fft_size") features.fft_size = ParseInt(key, value);
  else if (key == "features.n_mels") features.n_mels = ParseInt(key, value);
  else if (key == "features.f_min") features.f_min = ParseDouble(key, value);
  else if (key == "features.f_max") features.f_max = ParseDouble(key, value);
  else if (key == "features.log_floor") features.log_floor = ParseDouble(key, value);
  else if (key == "features.pre_emphasis") features.pre_emphasis = ParseDouble(key, value);
  else if (key == "features.normalize") features.normalize = ParseBool(key, value);
  else if (key == "model.blocks") model.blocks = ParseInt(key, value);
  else if (key == "model.subblocks") model.subblocks = ParseInt(key, value);
  else if (key == "model.channels") model.channels = ParseInt(key, value);
  else if (key == "model.attention_dim") attention_dim = ParseInt(key, value);
  else if (key == "model.dropout") model.dropout_p = static_cast<float>(ParseDouble(key, value));
  else if (key == "model.kernel_schedule") model.kernel_schedule = ParseIntList(key, value);
  else if (key == "model.separable") model.separable = ParseBool(key, value);
  else if (key == "augment.enabled") augment.enabled = ParseBool(key, value);
  else if (key == "augment.freq_mask_param") augment.freq_mask_param = ParseInt(key, value);
  else if (key == "augment.n_freq_masks") augment.n_freq_masks = ParseInt(key, value);
  else if (key == "augment.time_mask_param") augment.time_mask_param = ParseInt(key, value);
  else if (key == "augment.n_time_masks") augment.n_time_masks = ParseInt(key, value);
  else if (key == "augment.mask_value") augment.mask_value = static_cast<float>(ParseDouble(key, value));
  else if (key == "train.lr") train.lr_init = ParseDouble(key, value);
  else if (key == "train.lr_min") train.lr_min = ParseDouble(key, value);
  else if (key == "train.total_steps") train.total_steps = ParseInt64(key, value);
  else if (key == "train.batch_size") train.batch_size = ParseInt(key, value);
  else if (key == "train.max_epochs") train.max_epochs = ParseInt(key, value);
  else if (key == "train.patience") train.plateau_patience = ParseInt(key, value);
  else if (key == "train.min_delta") train.plateau_min_delta = ParseDouble(key, value);
  else if (key == "train.seed") train.seed = static_cast<uint64_t>(ParseInt64(key, value));
  else if (key == "train.workers") train.workers = ParseInt(key, value);
  else if (key == "train.bucket_by_length") train.bucket_by_length = ParseBool(key, value);
  else if (key == "data.train_manifest") train_manifest = value;
  else if (key == "data.val_manifest") val_manifest = value;
  else throw ConfigError("config: unknown key '" + key + "'");
}

void RunConfig::LoadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // Trim leading whitespace.
    size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    if (line[start] == '#') continue;
    const size_t eq = line.find('=', start);
    if (eq == std::string::npos)
      throw ConfigError("config: missing '=' at line " + std::to_string(line_no) +
                        " in " + path);
    std::string key = line.substr(start, eq - start);
    std::string value = line.substr(eq + 1);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    size_t vstart = value.find_first_not_of(" \t");
    value = vstart == std::string::npos ? "" : value.substr(vstart);
    while (!value.empty() && (value.back() == ' ' || value.back() == '\t')) value.pop_back();
    Set(key, value);
  }
}

void RunConfig::ApplyOverrides(const std::vector<std::string>& overrides) {
  for (const auto& kv : overrides) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: override '" + kv + "' is not key=value");
    Set(kv.substr(0, eq), kv.substr(eq + 1));
  }
}

std::string RunConfig::Serialize() const {
  std::ostringstream os;
  os << "features.sample_rate=" << features.sample_rate << "\n";
  os << "features.window=" << features.window << "\n";
  os << "features.hop=" << features.hop << "\n";
  os << "features.fft_size=" << features.fft_size << "\n";
  os << "features.n_mels=" << features.n_mels << "\n";
  os << "features.f_min=" << FmtReal(features.f_min) << "\n";
  os << "features.f_max=" << FmtReal(features.f_max) << "\n";
  os << "features.log_floor=" << FmtReal(features.log_floor) << "\n";
  os << "features.pre_emphasis=" << FmtReal(features.pre_emphasis) << "\n";
  os << "features.normalize=" << (features.normalize ? "true" : "false") << "\n";
  os << "model.blocks=" << model.blocks << "\n";
  os << "model.subblocks=" << model.subblocks << "\n";
  os << "model.channels=" << model.channels << "\n";
  os << "model.attention_dim=" << attention_dim << "\n";
  os << "model.dropout=" << FmtReal(model.dropout_p) << "\n";
  os << "model.kernel_schedule=" << JoinInts(model.kernel_schedule) << "\n";
  os << "model.separable=" << (model.separable ? "true" : "false") << "\n";
  os << "augment.enabled=" << (augment.enabled ? "true" : "false") << "\n";
  os << "augment.freq_mask_param=" << augment.freq_mask_param << "\n";
  os << "augment.n_freq_masks=" << augment.n_freq_masks << "\n";
  os << "augment.time_mask_param=" << augment.time_mask_param << "\n";
  os << "augment.n_time_masks=" << augment.n_time_masks << "\n";
  os << "augment.mask_value=" << FmtReal(augment.mask_value) << "\n";
  os << "train.lr=" << FmtReal(train.lr_init) << "\n";
  os << "train.lr_min=" << FmtReal(train.lr_min) << "\n";
  os << "train.total_steps=" << train.total_steps << "\n";
  os << "train.batch_size=" << train.batch_size << "\n";
  os << "train.max_epochs=" << train.max_epochs << "\n";
  os << "train.patience=" << train.plateau_patience << "\n";
  os << "train.min_delta=" << FmtReal(train.plateau_min_delta) << "\n";
  os << "train.seed=" << train.seed << "\n";
  os << "train.workers=" << train.workers << "\n";
  os << "train.bucket_by_length=" << (train.bucket_by_length ? "true" : "false") << "\n";
  os << "data.train_manifest=" << train_manifest << "\n";
  os << "data.val_manifest=" << val_manifest << "\n";
  return os.str();
}

void RunConfig::Validate() const {
  features.Validate();
  // The encoder consumes exactly what the front-end produces.
  EncoderConfig m = model;
  m.in_dim = features.n_mels;
  m.Validate();
  augment.Validate(features.n_mels);
  train.Validate();
}

}  // namespace lid
