#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fakespot/data/dataset.hpp"
#include "fakespot/nn/model.hpp"

namespace fakespot::metrics {

/// Confusion counts with REAL (1) as the positive class: a false negative is a
/// real photograph classified as AI-generated.
struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const noexcept { return tp + fp + tn + fn; }
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Throws std::invalid_argument on length mismatch or a value other than 0/1.
ConfusionCounts confusion(std::span<const int> predicted, std::span<const int> truth);

/// tp / (tp + fp); 0 when nothing was predicted positive.
double precision(const ConfusionCounts& c);
/// tp / (tp + fn); 0 when there are no positives.
double recall(const ConfusionCounts& c);
/// Harmonic mean 2pr / (p + r); 0 when p + r == 0.
double f1(double precision, double recall);
/// (tp + tn) / total; 0 for an empty set.
double accuracy(const ConfusionCounts& c);

struct MetricsReport {
    ConfusionCounts counts;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double mean_loss = 0.0;
    bool precision_undefined = false;  // tp + fp == 0, precision reported as 0
    bool recall_undefined = false;     // tp + fn == 0, recall reported as 0

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Report from per-item probabilities and 0/1 labels. Labels are thresholded at
/// p >= 0.5; mean_loss is the mean clamped BCE.
MetricsReport report_from_probabilities(std::span<const float> probabilities, std::span<const int> labels);

MetricsReport report_from_counts(const ConfusionCounts& counts, double mean_loss);

/// Single inference pass over `test` in batches of `batch_size`, in stored order.
/// Throws std::invalid_argument for an empty test set.
MetricsReport evaluate(const nn::TrainedModel& model, std::span<const data::LabeledImage> test,
                       std::size_t batch_size = 32);

/// CSV header and row used by every report file: tp,fp,tn,fn,accuracy,precision,recall,f1,mean_loss.
std::string csv_header();
std::string csv_row(const MetricsReport& report);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);

}  // namespace fakespot::metrics
