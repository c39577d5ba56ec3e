#include "ppd/roc.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "ppd/errors.hpp"

namespace ppd {

std::vector<RocPoint> roc_curve(const std::vector<double>& decisions,
                                const std::vector<int>& labels) {
    if (decisions.size() != labels.size()) throw DataError("decision/label size mismatch");
    std::size_t positives = 0, negatives = 0;
    for (int label : labels) (label == 1 ? positives : negatives)++;
    if (positives == 0 || negatives == 0)
        throw DataError("ROC needs both classes in the test set");

    std::vector<std::size_t> order(decisions.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return decisions[a] > decisions[b];
    });

    std::vector<RocPoint> curve;
    curve.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double value = decisions[order[i]];
        // Absorb the whole tie group before emitting a vertex.
        while (i < order.size() && decisions[order[i]] == value) {
            (labels[order[i]] == 1 ? tp : fp)++;
            ++i;
        }
        curve.push_back({static_cast<double>(fp) / negatives, static_cast<double>(tp) / positives,
                         value});
    }
    return curve;
}

std::vector<RocPoint> roc_curve(const SvmModel& model,
                                const std::vector<LabeledSample>& samples) {
    std::vector<double> decisions(samples.size());
    std::vector<int> labels(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        decisions[i] = predict(model, samples[i].features).decision_value;
        labels[i] = samples[i].label;
    }
    return roc_curve(decisions, labels);
}

double roc_auc(const std::vector<RocPoint>& curve) {
    double area = 0;
    for (std::size_t i = 1; i < curve.size(); ++i)
        area += (curve[i].fpr - curve[i - 1].fpr) * 0.5 * (curve[i].tpr + curve[i - 1].tpr);
    return area;
}

} // namespace ppd
