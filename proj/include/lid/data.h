// lid/data.h

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

#ifndef LID_DATA_H_
#define LID_DATA_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lid/error.h"

namespace lid {

struct LanguageInfo {
  std::string code;  // ISO 639-3
  std::string name;
  std::string genus;
  std::string family;
};

// Ordered closed set of class labels; the order defines class indices and
// the axes of every confusion matrix and report.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<LanguageInfo> languages);

  // The 16-language set used throughout.
  static LabelSet Default16();

  int Size() const { return static_cast<int>(languages_.size()); }
  const LanguageInfo& Info(int index) const { return languages_[static_cast<size_t>(index)]; }
  const std::string& Code(int index) const { return languages_[static_cast<size_t>(index)].code; }

  // Returns -1 when the code is unknown.
  int IndexOf(const std::string& code) const;

 private:
  std::vector<LanguageInfo> languages_;
};

struct ManifestEntry {
  std::string path;  // WAV or LIDF feature file
  std::string label;
  int label_index = -1;
};

// One tab-separated record per line: path TAB iso639-3 code.
// Blank lines and '#' comments are skipped; errors cite the line number.
std::vector<ManifestEntry> LoadManifest(const std::string& path, const LabelSet& labels);

void WriteManifest(const std::string& path, const std::vector<ManifestEntry>& entries);

// Rows = true label, columns = predicted label.
struct ConfusionMatrix {
  int n_classes = 0;
  std::vector<int64_t> counts;  // row-major n x n

  explicit ConfusionMatrix(int n) : n_classes(n), counts(static_cast<size_t>(n) * n, 0) {}

  int64_t& At(int true_label, int predicted) {
    return counts[static_cast<size_t>(true_label) * n_classes + predicted];
  }
  int64_t At(int true_label, int predicted) const {
    return counts[static_cast<size_t>(true_label) * n_classes + predicted];
  }

  int64_t Total() const;
  int64_t RowSum(int r) const;
};

struct ClassMetrics {
  std::string code;
  int64_t support = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

struct Report {
  std::vector<ClassMetrics> per_class;
  double accuracy = 0;
  double macro_precision = 0;
  double macro_recall = 0;
  double macro_f1 = 0;
};

ConfusionMatrix BuildConfusion(const std::vector<std::pair<int, int>>& pairs,
                               const LabelSet& labels);

// Per class: precision, recall, f1 (0/0 defined as 0), support = row sum.
std::vector<ClassMetrics> ComputeClassMetrics(const ConfusionMatrix& m,
                                              const LabelSet& labels);

Report AggregateReport(const std::vector<ClassMetrics>& metrics, const ConfusionMatrix& m);

// CSV outputs; reals printed with 4 decimals.
void WriteMetricsCsv(const std::string& path, const Report& report);
void WriteConfusionCsv(const std::string& path, const ConfusionMatrix& m,
                       const LabelSet& labels);
std::string RenderConfusionGrid(const ConfusionMatrix& m, const LabelSet& labels);

}  // namespace lid

#endif  // LID_DATA_H_
