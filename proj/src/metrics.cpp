#include "fakespot/metrics.hpp"

#include <charconv>
#include <stdexcept>

#include "fakespot/nn/layers.hpp"

namespace fakespot::metrics {

ConfusionCounts confusion(std::span<const int> predicted, std::span<const int> truth)
{
    if (predicted.size() != truth.size()) {
        throw std::invalid_argument("confusion: " + std::to_string(predicted.size()) + " predictions for " +
                                    std::to_string(truth.size()) + " labels");
    }
    ConfusionCounts c;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const int p = predicted[i], t = truth[i];
        if ((p != 0 && p != 1) || (t != 0 && t != 1)) throw std::invalid_argument("confusion: labels must be 0 or 1");
        if (p == 1) {
            (t == 1 ? c.tp : c.fp)++;
        } else {
            (t == 0 ? c.tn : c.fn)++;
        }
    }
    return c;
}

double precision(const ConfusionCounts& c)
{
    const auto d = c.tp + c.fp;
    return d == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(d);
}

double recall(const ConfusionCounts& c)
{
    const auto d = c.tp + c.fn;
    return d == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(d);
}

double f1(double p, double r)
{
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

double accuracy(const ConfusionCounts& c)
{
    return c.total() == 0 ? 0.0 : static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

MetricsReport report_from_counts(const ConfusionCounts& counts, double mean_loss)
{
    MetricsReport r;
    r.counts = counts;
    r.accuracy = accuracy(counts);
    r.precision = precision(counts);
    r.recall = recall(counts);
    r.f1 = f1(r.precision, r.recall);
    r.mean_loss = mean_loss;
    r.precision_undefined = counts.tp + counts.fp == 0;
    r.recall_undefined = counts.tp + counts.fn == 0;
    return r;
}

MetricsReport report_from_probabilities(std::span<const float> probabilities, std::span<const int> labels)
{
    if (probabilities.size() != labels.size()) throw std::invalid_argument("report: probabilities/labels size mismatch");
    std::vector<int> predicted(probabilities.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        predicted[i] = nn::predict_label(probabilities[i]);
        loss += nn::bce_loss(probabilities[i], labels[i]);
    }
    const double mean = probabilities.empty() ? 0.0 : loss / static_cast<double>(probabilities.size());
    return report_from_counts(confusion(predicted, labels), mean);
}

MetricsReport evaluate(const nn::TrainedModel& model, std::span<const data::LabeledImage> test, std::size_t batch_size)
{
    if (test.empty()) throw std::invalid_argument("evaluate: test set is empty");
    std::vector<float> probabilities;
    std::vector<int> labels;
    probabilities.reserve(test.size());
    labels.reserve(test.size());
    for (const auto& idx : data::sequential_batches(test.size(), batch_size)) {
        const auto batch = data::gather_batch(test, idx);
        const auto p = model.predict(batch.images);
        probabilities.insert(probabilities.end(), p.begin(), p.end());
        for (auto i : idx) labels.push_back(test[i].label);
    }
    return report_from_probabilities(probabilities, labels);
}

std::string format_number(double v)
{
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string csv_header()
{
    return "tp,fp,tn,fn,accuracy,precision,recall,f1,mean_loss";
}

std::string csv_row(const MetricsReport& r)
{
    return std::to_string(r.counts.tp) + "," + std::to_string(r.counts.fp) + "," + std::to_string(r.counts.tn) + "," +
           std::to_string(r.counts.fn) + "," + format_number(r.accuracy) + "," + format_number(r.precision) + "," +
           format_number(r.recall) + "," + format_number(r.f1) + "," + format_number(r.mean_loss);
}

}  // namespace fakespot::metrics
