#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lts/types.hpp"

namespace lts {

/// C x C counts, rows = ground truth, columns = prediction.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t num_classes = 0);

  std::size_t num_classes() const noexcept { return num_classes_; }
  std::uint64_t at(std::size_t gt, std::size_t pred) const { return counts_[gt * num_classes_ + pred]; }
  std::uint64_t& at(std::size_t gt, std::size_t pred) { return counts_[gt * num_classes_ + pred]; }
  std::uint64_t total() const;

  void merge(const ConfusionMatrix& other);

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t num_classes_;
  std::vector<std::uint64_t> counts_;
};

void accumulate(ConfusionMatrix& cm, const LabelVector& gt, const LabelVector& pred);

struct ClassIoU {
  std::string name;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::optional<double> iou;  // empty when the class never occurs
  bool in_mean = false;
};

struct IoUReport {
  std::vector<ClassIoU> classes;
  std::optional<double> mean_iou;  // empty when no class counted towards it

  const ClassIoU* find(const std::string& name) const;
};

/// Class-wise IoU = TP / (TP + FP + FN). Classes with an empty denominator are
/// absent and never enter the mean. Class 0 (background) is left out of the
/// mean unless `include_background` is set.
IoUReport iou_report(const ConfusionMatrix& cm, const std::vector<std::string>& class_names,
                     bool include_background = false);

struct ClassDelta {
  std::string name;
  std::optional<double> delta;  // b - a; empty when absent from either report
  std::string note;
};

std::vector<ClassDelta> compare_reports(const IoUReport& a, const IoUReport& b);

/// `class,tp,fp,fn,iou` lines after that header, then `mean_iou,,,,<value>`.
/// Absent IoUs are written as `-`.
void write_report_csv(const IoUReport& report, std::ostream& out);
void write_report_csv(const IoUReport& report, const std::filesystem::path& path);

/// Fixed-width table with IoUs in percent.
void print_report(const IoUReport& report, std::ostream& out);
void print_deltas(const std::vector<ClassDelta>& deltas, std::ostream& out);

}  // namespace lts
