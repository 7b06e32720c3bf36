#include "lts/metrics.hpp"

#include <fstream>
#include <numeric>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "lts/error.hpp"

namespace lts {

ConfusionMatrix::ConfusionMatrix(std::size_t num_classes)
    : num_classes_(num_classes), counts_(num_classes * num_classes, 0) {}

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.num_classes_ != num_classes_) {
    throw Error(ErrorKind::DimensionMismatch, "cannot merge confusion matrices of different sizes");
  }
  for (std::size_t k = 0; k < counts_.size(); ++k) counts_[k] += other.counts_[k];
}

void accumulate(ConfusionMatrix& cm, const LabelVector& gt, const LabelVector& pred) {
  if (gt.size() != pred.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("{} ground-truth labels vs {} predictions", gt.size(), pred.size()));
  }
  const std::size_t c = cm.num_classes();
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] >= c || pred[i] >= c) {
      throw Error(ErrorKind::Range, fmt::format("label at point {} exceeds {} classes", i, c));
    }
  }
  for (std::size_t i = 0; i < gt.size(); ++i) ++cm.at(gt[i], pred[i]);
}

const ClassIoU* IoUReport::find(const std::string& name) const {
  for (const auto& c : classes) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

IoUReport iou_report(const ConfusionMatrix& cm, const std::vector<std::string>& class_names,
                     bool include_background) {
  const std::size_t n = cm.num_classes();
  if (class_names.size() != n) {
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("{} class names for a {}-class matrix", class_names.size(), n));
  }
  IoUReport report;
  double sum = 0.0;
  std::size_t counted = 0;
  for (std::size_t c = 0; c < n; ++c) {
    ClassIoU row;
    row.name = class_names[c];
    std::uint64_t row_sum = 0, col_sum = 0;
    for (std::size_t k = 0; k < n; ++k) {
      row_sum += cm.at(c, k);
      col_sum += cm.at(k, c);
    }
    row.tp = cm.at(c, c);
    row.fp = col_sum - row.tp;
    row.fn = row_sum - row.tp;
    const std::uint64_t denom = row.tp + row.fp + row.fn;
    if (denom > 0) {
      row.iou = static_cast<double>(row.tp) / static_cast<double>(denom);
      row.in_mean = include_background || c != 0;
      if (row.in_mean) {
        sum += *row.iou;
        ++counted;
      }
    }
    report.classes.push_back(std::move(row));
  }
  if (counted > 0) report.mean_iou = sum / static_cast<double>(counted);
  return report;
}

std::vector<ClassDelta> compare_reports(const IoUReport& a, const IoUReport& b) {
  if (a.classes.size() != b.classes.size()) {
    throw Error(ErrorKind::DimensionMismatch, "reports cover different class sets");
  }
  std::vector<ClassDelta> deltas;
  for (std::size_t c = 0; c < a.classes.size(); ++c) {
    const auto& ca = a.classes[c];
    const auto& cb = b.classes[c];
    if (ca.name != cb.name) {
      throw Error(ErrorKind::DimensionMismatch, "class '" + ca.name + "' vs '" + cb.name + "'");
    }
    ClassDelta d{ca.name, std::nullopt, {}};
    if (ca.iou && cb.iou) {
      d.delta = *cb.iou - *ca.iou;
    } else if (!ca.iou && !cb.iou) {
      d.note = "absent in both";
    } else {
      d.note = ca.iou ? "absent in second report" : "absent in first report";
    }
    deltas.push_back(std::move(d));
  }
  return deltas;
}

void write_report_csv(const IoUReport& report, std::ostream& out) {
  out << "class,tp,fp,fn,iou\n";
  for (const auto& c : report.classes) {
    out << fmt::format("{},{},{},{},{}\n", c.name, c.tp, c.fp, c.fn, c.iou ? fmt::format("{:.6f}", *c.iou) : "-");
  }
  out << "mean_iou,,,," << (report.mean_iou ? fmt::format("{:.6f}", *report.mean_iou) : "-") << '\n';
}

void write_report_csv(const IoUReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  write_report_csv(report, out);
}

void print_report(const IoUReport& report, std::ostream& out) {
  fmt::print(out, "{:<14}{:>12}{:>12}{:>12}{:>9}\n", "class", "tp", "fp", "fn", "IoU%");
  for (const auto& c : report.classes) {
    const std::string iou = c.iou ? fmt::format("{:.1f}", 100.0 * *c.iou) : "-";
    fmt::print(out, "{:<14}{:>12}{:>12}{:>12}{:>9}{}\n", c.name, c.tp, c.fp, c.fn, iou,
               c.iou && !c.in_mean ? "  (not in mean)" : "");
  }
  fmt::print(out, "{:<14}{:>45}\n", "mean",
             report.mean_iou ? fmt::format("{:.1f}", 100.0 * *report.mean_iou) : "-");
}

void print_deltas(const std::vector<ClassDelta>& deltas, std::ostream& out) {
  fmt::print(out, "{:<14}{:>10}\n", "class", "dIoU%");
  for (const auto& d : deltas) {
    if (d.delta) {
      fmt::print(out, "{:<14}{:>+10.1f}\n", d.name, 100.0 * *d.delta);
    } else {
      fmt::print(out, "{:<14}{:>10}  ({})\n", d.name, "-", d.note);
    }
  }
}

}  // namespace lts
