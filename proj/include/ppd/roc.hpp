#pragma once

#include <vector>

#include "ppd/svm.hpp"

namespace ppd {

struct RocPoint {
    double fpr = 0;
    double tpr = 0;
    double threshold = 0; // classify as stego when decision >= threshold
};

// Threshold sweep over decision values, one vertex per distinct value plus
// the (0,0) start. Requires both classes. Ends at (1,1).
std::vector<RocPoint> roc_curve(const std::vector<double>& decisions,
                                const std::vector<int>& labels);

std::vector<RocPoint> roc_curve(const SvmModel& model,
                                const std::vector<LabeledSample>& samples);

// Trapezoidal area under the curve.
double roc_auc(const std::vector<RocPoint>& curve);

} // namespace ppd
