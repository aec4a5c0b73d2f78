#pragma once

#include <array>
#include <string>
#include <vector>

#include "gesturekit/models.hpp"
#include "gesturekit/nn/train.hpp"

namespace gk {

struct EvalReport {
  std::array<double, kNumClasses> per_class_accuracy{};
  double average_accuracy = 0.0;  // macro: mean of per-class accuracies
  std::array<std::array<int, kNumClasses>, kNumClasses> confusion{};  // [truth][pred]
  int sample_count = 0;
  std::string model_id;

  bool operator==(const EvalReport&) const = default;
};

EvalReport make_report(const std::vector<int>& truth,
                       const std::vector<int>& predictions,
                       const std::string& model_id);

EvalReport evaluate_model(nn::Model<float>& model,
                          const std::vector<const RsaImage*>& images,
                          const std::vector<int>& labels,
                          const std::string& model_id);

EvalReport evaluate_templates(const GestureTemplateSet& templates,
                              const std::vector<const RsaImage*>& images,
                              const std::vector<int>& labels,
                              const std::string& model_id);

struct ConfusionPair {
  GestureClass truth;
  GestureClass predicted;
  int count = 0;
  double rate = 0.0;  // count / truth-class sample count
};

// Off-diagonal confusion cells, sorted by count descending.
std::vector<ConfusionPair> error_breakdown(const EvalReport& report);

// CSV: header class,accuracy,n; four class rows; one avg row; blank line;
// then the confusion matrix, one row per true class.
void write_report_csv(const std::string& path, const EvalReport& report);
EvalReport read_report_csv(const std::string& path);

}  // namespace gk
