#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ppd {

struct LabeledSample {
    std::string id;
    int label = 0; // -1 cover, +1 stego
    std::vector<double> features;
};

// Trained soft-margin RBF SVM. dual_coefficients[i] = alpha_i * y_i for the
// retained support vectors, so |coefficient| <= C. Metadata pins everything
// needed to reproduce the features the model was trained on.
struct SvmModel {
    int feature_dim = 0;
    double c = 0;
    double gamma = 0;
    double bias = 0;
    std::vector<double> dual_coefficients;
    std::vector<std::vector<double>> support_vectors;

    int s = 0;
    std::uint64_t seed = 0;
    std::string prng;
    std::string smoothing;
};

// exp(-gamma * ||a-b||^2)
double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

struct SmoOptions {
    double tol = 1e-3;     // KKT tolerance
    int max_passes = 10000; // full sweeps over the data
};

// Extra training outputs for audits and tests.
struct SmoDetail {
    std::vector<double> alphas; // one per input sample, including zeros
    int sweeps = 0;
    double max_kkt_violation = 0; // max over samples of the audit slack
    double sum_alpha_y = 0;
    double dual_objective = 0;
};

// Sequential minimal optimization on the dual problem: sweeps the samples,
// pairs each KKT violator with a randomly chosen partner (falling back to a
// full scan from a random start), and stops on a sweep with no progress.
// The exported bias is recomputed from the free support vectors. Throws
// DataError on single-class data or if the KKT audit still fails after
// max_passes sweeps.
SvmModel train_smo(const std::vector<LabeledSample>& data, double c, double gamma,
                   std::uint64_t seed, const SmoOptions& options = {},
                   SmoDetail* detail = nullptr);

struct Prediction {
    double decision_value = 0;
    int label = 0; // sign of decision_value, 0 maps to +1
};

Prediction predict(const SvmModel& model, std::span<const double> features);

// The multiplicative hyperparameter grid used by all experiments:
// C in 2^{-5,-3,...,15} (11 values), gamma in 2^{-15,...,-1,1,3} (10 values).
struct GridSpec {
    std::vector<double> c_values;
    std::vector<double> gamma_values;
    int folds = 5;

    static GridSpec standard();
};

struct GridCell {
    double c = 0;
    double gamma = 0;
    double cv_accuracy = 0;
};

struct GridResult {
    double best_c = 0;
    double best_gamma = 0;
    double best_accuracy = 0;
    std::vector<GridCell> table;
};

// Stratified fold assignment keyed on sample ids: within each class,
// samples are ranked by a seeded hash of their id and dealt round-robin.
// Reordering the input does not change the assignment.
std::vector<int> stratified_folds(const std::vector<LabeledSample>& data, int folds,
                                  std::uint64_t seed);

// Cross-validated accuracy for every grid cell; ties on accuracy resolve
// to the smaller C, then the smaller gamma. Cells run in parallel.
GridResult grid_search(const std::vector<LabeledSample>& data, const GridSpec& grid,
                       std::uint64_t seed, const SmoOptions& options = {});

// Line-oriented text model format, 17-significant-digit floats; loading a
// saved model reproduces its predictions bit-exactly.
void save_model(const SvmModel& model, const std::filesystem::path& path);
SvmModel load_model(const std::filesystem::path& path);

} // namespace ppd
