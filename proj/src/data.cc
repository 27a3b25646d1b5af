// src/data.cc

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

#include "lid/data.h"

#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace lid {

LabelSet::LabelSet(std::vector<LanguageInfo> languages)
    : languages_(std::move(languages)) {
  for (size_t i = 0; i < languages_.size(); ++i)
    for (size_t j = i + 1; j < languages_.size(); ++j)
      if (languages_[i].code == languages_[j].code)
        throw ConfigError("label set: duplicate code " + languages_[i].code);
}

LabelSet LabelSet::Default16() {
  return LabelSet({
      {"kab", "Kabyle", "Berber", "Afro-Asiatic"},
      {"ind", "Indonesian", "Malayo-Sumbawan", "Austronesian"},
      {"sun", "Sundanese", "Malayo-Sumbawan", "Austronesian"},
      {"jav", "Javanese", "Javanese", "Austronesian"},
      {"eus", "Euskara", "Basque", "Basque"},
      {"tam", "Tamil", "Southern Dravidian", "Dravidian"},
      {"kan", "Kannada", "Southern Dravidian", "Dravidian"},
      {"tel", "Telugu", "South-Central Dravidian", "Dravidian"},
      {"hin", "Hindi", "Indic", "Indo-European"},
      {"por", "Portuguese", "Romance", "Indo-European"},
      {"rus", "Russian", "Slavic", "Indo-European"},
      {"eng", "English", "Germanic", "Indo-European"},
      {"mar", "Marathi", "Indic", "Indo-European"},
      {"tha", "Thai", "Kam-Tai", "Tai-Kadai"},
      {"iba", "Iban", "Malayo-Sumbawan", "Austronesian"},
      {"cnh", "Chin, Hakha", "Gur", "Niger-Congo"},
  });
}

int LabelSet::IndexOf(const std::string& code) const {
  for (size_t i = 0; i < languages_.size(); ++i)
    if (languages_[i].code == code) return static_cast<int>(i);
  return -1;
}

std::vector<ManifestEntry> LoadManifest(const std::string& path, const LabelSet& labels) {
  std::ifstream in(path);
  if (!in) throw DataError("manifest: cannot open " + path);
  std::vector<ManifestEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size())
      throw DataError("manifest: malformed line " + std::to_string(line_no) + " in " +
                      path + " (expected <path>\\t<label>)");
    ManifestEntry e;
    e.path = line.substr(0, tab);
    e.label = line.substr(tab + 1);
    e.label_index = labels.IndexOf(e.label);
    if (e.label_index < 0)
      throw DataError("manifest: unknown label '" + e.label + "' at line " +
                      std::to_string(line_no) + " in " + path);
    entries.push_back(std::move(e));
  }
  return entries;
}

void WriteManifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path);
  if (!out) throw DataError("manifest: cannot write " + path);
  for (const auto& e : entries) out << e.path << "\t" << e.label << "\n";
}

int64_t ConfusionMatrix::Total() const {
  return std::accumulate(counts.begin(), counts.end(), int64_t{0});
}

int64_t ConfusionMatrix::RowSum(int r) const {
  int64_t sum = 0;
  for (int c = 0; c < n_classes; ++c) sum += At(r, c);
  return sum;
}

ConfusionMatrix BuildConfusion(const std::vector<std::pair<int, int>>& pairs,
                               const LabelSet& labels) {
  ConfusionMatrix m(labels.Size());
  for (const auto& [truth, predicted] : pairs) {
    if (truth < 0 || truth >= m.n_classes || predicted < 0 || predicted >= m.n_classes)
      throw DimensionError("confusion: label index out of range");
    ++m.At(truth, predicted);
  }
  return m;
}

std::vector<ClassMetrics> ComputeClassMetrics(const ConfusionMatrix& m,
                                              const LabelSet& labels) {
  std::vector<ClassMetrics> out;
  for (int c = 0; c < m.n_classes; ++c) {
    ClassMetrics cm;
    cm.code = labels.Code(c);
    const int64_t tp = m.At(c, c);
    int64_t fp = 0, fn = 0;
    for (int r = 0; r < m.n_classes; ++r)
      if (r != c) fp += m.At(r, c);
    for (int k = 0; k < m.n_classes; ++k)
      if (k != c) fn += m.At(c, k);
    cm.support = m.RowSum(c);
    cm.precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    cm.recall = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    const double pr = cm.precision + cm.recall;
    cm.f1 = pr > 0 ? 2.0 * cm.precision * cm.recall / pr : 0.0;
    out.push_back(std::move(cm));
  }
  return out;
}

Report AggregateReport(const std::vector<ClassMetrics>& metrics, const ConfusionMatrix& m) {
  const int64_t total = m.Total();
  if (total == 0 || metrics.empty())
    throw DataError("report: cannot aggregate an empty confusion matrix");
  Report r;
  r.per_class = metrics;
  int64_t trace = 0;
  for (int c = 0; c < m.n_classes; ++c) trace += m.At(c, c);
  r.accuracy = static_cast<double>(trace) / static_cast<double>(total);
  for (const auto& cm : metrics) {
    r.macro_precision += cm.precision;
    r.macro_recall += cm.recall;
    r.macro_f1 += cm.f1;
  }
  const double n = static_cast<double>(metrics.size());
  r.macro_precision /= n;
  r.macro_recall /= n;
  r.macro_f1 /= n;
  return r;
}

namespace {

std::string Fmt4(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << v;
  return os.str();
}

}  // namespace

void WriteMetricsCsv(const std::string& path, const Report& report) {
  std::ofstream out(path);
  if (!out) throw DataError("metrics csv: cannot write " + path);
  out << "language,support,precision,recall,f1\n";
  for (const auto& cm : report.per_class)
    out << cm.code << "," << cm.support << "," << Fmt4(cm.precision) << ","
        << Fmt4(cm.recall) << "," << Fmt4(cm.f1) << "\n";
  out << "accuracy,,,," << Fmt4(report.accuracy) << "\n";
  out << "macro_precision,,,," << Fmt4(report.macro_precision) << "\n";
  out << "macro_recall,,,," << Fmt4(report.macro_recall) << "\n";
  out << "macro_f1,,,," << Fmt4(report.macro_f1) << "\n";
}

void WriteConfusionCsv(const std::string& path, const ConfusionMatrix& m,
                       const LabelSet& labels) {
  std::ofstream out(path);
  if (!out) throw DataError("confusion csv: cannot write " + path);
  out << "true\\predicted";
  for (int c = 0; c < m.n_classes; ++c) out << "," << labels.Code(c);
  out << "\n";
  for (int r = 0; r < m.n_classes; ++r) {
    out << labels.Code(r);
    for (int c = 0; c < m.n_classes; ++c) out << "," << m.At(r, c);
    out << "\n";
  }
}

std::string RenderConfusionGrid(const ConfusionMatrix& m, const LabelSet& labels) {
  std::ostringstream os;
  os << "     ";
  for (int c = 0; c < m.n_classes; ++c) os << std::setw(6) << labels.Code(c);
  os << "\n";
  for (int r = 0; r < m.n_classes; ++r) {
    os << std::setw(4) << labels.Code(r) << " ";
    for (int c = 0; c < m.n_classes; ++c) os << std::setw(6) << m.At(r, c);
    os << "\n";
  }
  return os.str();
}

}  // namespace lid
