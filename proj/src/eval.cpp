#include "gesturekit/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gk {

EvalReport make_report(const std::vector<int>& truth,
                       const std::vector<int>& predictions,
                       const std::string& model_id) {
  if (truth.size() != predictions.size() || truth.empty())
    throw std::invalid_argument("make_report: size mismatch or empty");
  EvalReport r;
  r.model_id = model_id;
  r.sample_count = static_cast<int>(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i], p = predictions[i];
    if (t < 0 || t >= kNumClasses || p < 0 || p >= kNumClasses)
      throw std::invalid_argument("make_report: label out of range");
    ++r.confusion[t][p];
  }
  double sum = 0.0;
  for (int c = 0; c < kNumClasses; ++c) {
    int n = 0;
    for (int p = 0; p < kNumClasses; ++p) n += r.confusion[c][p];
    r.per_class_accuracy[c] = n > 0 ? static_cast<double>(r.confusion[c][c]) / n : 0.0;
    sum += r.per_class_accuracy[c];
  }
  r.average_accuracy = sum / kNumClasses;
  return r;
}

EvalReport evaluate_model(nn::Model<float>& model,
                          const std::vector<const RsaImage*>& images,
                          const std::vector<int>& labels,
                          const std::string& model_id) {
  if (images.size() != labels.size() || images.empty())
    throw std::invalid_argument("evaluate_model: bad inputs");
  nn::DataView view;
  view.x.reserve(images.size());
  for (const auto* img : images) view.x.push_back(img->data.data());
  view.y = labels;
  std::vector<int> predictions;
  nn::evaluate_accuracy(model, view, nullptr, &predictions);
  return make_report(labels, predictions, model_id);
}

EvalReport evaluate_templates(const GestureTemplateSet& templates,
                              const std::vector<const RsaImage*>& images,
                              const std::vector<int>& labels,
                              const std::string& model_id) {
  if (images.size() != labels.size() || images.empty())
    throw std::invalid_argument("evaluate_templates: bad inputs");
  std::vector<int> predictions;
  predictions.reserve(images.size());
  for (const auto* img : images)
    predictions.push_back(static_cast<int>(template_classify(*img, templates)));
  return make_report(labels, predictions, model_id);
}

std::vector<ConfusionPair> error_breakdown(const EvalReport& report) {
  std::vector<ConfusionPair> out;
  for (int t = 0; t < kNumClasses; ++t) {
    int row = 0;
    for (int p = 0; p < kNumClasses; ++p) row += report.confusion[t][p];
    for (int p = 0; p < kNumClasses; ++p) {
      if (p == t || report.confusion[t][p] == 0) continue;
      ConfusionPair c;
      c.truth = static_cast<GestureClass>(t);
      c.predicted = static_cast<GestureClass>(p);
      c.count = report.confusion[t][p];
      c.rate = row > 0 ? static_cast<double>(c.count) / row : 0.0;
      out.push_back(c);
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ConfusionPair& a, const ConfusionPair& b) {
                     return a.count > b.count;
                   });
  return out;
}

void write_report_csv(const std::string& path, const EvalReport& report) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  char num[64];
  f << "class,accuracy,n\n";
  for (int c = 0; c < kNumClasses; ++c) {
    int n = 0;
    for (int p = 0; p < kNumClasses; ++p) n += report.confusion[c][p];
    std::snprintf(num, sizeof(num), "%.17g", report.per_class_accuracy[c]);
    f << gesture_name(static_cast<GestureClass>(c)) << ',' << num << ',' << n
      << '\n';
  }
  std::snprintf(num, sizeof(num), "%.17g", report.average_accuracy);
  f << "avg," << num << ',' << report.sample_count << "\n\n";
  for (int t = 0; t < kNumClasses; ++t) {
    f << gesture_name(static_cast<GestureClass>(t));
    for (int p = 0; p < kNumClasses; ++p) f << ',' << report.confusion[t][p];
    f << '\n';
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

EvalReport read_report_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::string line;
  auto next_line = [&](bool allow_empty = false) {
    if (!std::getline(f, line) || (!allow_empty && line.empty()))
      throw std::runtime_error(path + ": truncated report");
    return line;
  };
  if (next_line() != "class,accuracy,n")
    throw std::runtime_error(path + ": unexpected report header");

  EvalReport r;
  auto split_fields = [&](const std::string& s) {
    std::vector<std::string> fields;
    std::stringstream ss(s);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
  };
  for (int c = 0; c < kNumClasses; ++c) {
    const auto fields = split_fields(next_line());
    if (fields.size() != 3 ||
        fields[0] != gesture_name(static_cast<GestureClass>(c)))
      throw std::runtime_error(path + ": malformed class row");
    r.per_class_accuracy[c] = std::stod(fields[1]);
  }
  const auto avg = split_fields(next_line());
  if (avg.size() != 3 || avg[0] != "avg")
    throw std::runtime_error(path + ": malformed avg row");
  r.average_accuracy = std::stod(avg[1]);
  r.sample_count = std::stoi(avg[2]);
  if (!next_line(true).empty())
    throw std::runtime_error(path + ": expected blank separator");
  for (int t = 0; t < kNumClasses; ++t) {
    const auto fields = split_fields(next_line());
    if (fields.size() != 1 + kNumClasses ||
        fields[0] != gesture_name(static_cast<GestureClass>(t)))
      throw std::runtime_error(path + ": malformed confusion row");
    for (int p = 0; p < kNumClasses; ++p)
      r.confusion[t][p] = std::stoi(fields[1 + p]);
  }
  return r;
}

}  // namespace gk
