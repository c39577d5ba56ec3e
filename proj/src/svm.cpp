#include "ppd/svm.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "ppd/errors.hpp"
#include "ppd/rng.hpp"
#include "ppd/util.hpp"

namespace ppd {

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
    if (a.size() != b.size())
        throw DataError("kernel arguments of different length (" + std::to_string(a.size()) +
                        " vs " + std::to_string(b.size()) + ")");
    if (!(gamma > 0)) throw std::invalid_argument("gamma must be positive");
    double sq = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sq += d * d;
    }
    return std::exp(-gamma * sq);
}

namespace {

void validate_training_data(const std::vector<LabeledSample>& data) {
    if (data.size() < 2) throw DataError("need at least two training samples");
    std::size_t pos = 0, neg = 0;
    const std::size_t dim = data[0].features.size();
    for (const auto& sample : data) {
        if (sample.label == 1)
            ++pos;
        else if (sample.label == -1)
            ++neg;
        else
            throw DataError("labels must be -1 or +1");
        if (sample.features.size() != dim)
            throw DataError("feature-dimension drift in training data (sample '" + sample.id +
                            "')");
    }
    if (pos == 0 || neg == 0) throw DataError("training data contains a single class");
}

// Dual solver state. The gradient vector g[i] = sum_j alpha_j y_j K(i,j)
// is kept incrementally so examining a sample is O(1).
class SmoSolver {
public:
    SmoSolver(const std::vector<LabeledSample>& data, double c, double gamma,
              const SmoOptions& options, std::uint64_t seed)
        : data_(data),
          n_(data.size()),
          c_(c),
          tol_(options.tol),
          max_passes_(options.max_passes),
          rng_(seed) {
        if (!(c > 0)) throw std::invalid_argument("C must be positive");
        kernel_.resize(n_ * n_);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n_); ++i)
            for (std::size_t j = 0; j <= static_cast<std::size_t>(i); ++j) {
                const double k = rbf_kernel(data[i].features, data[j].features, gamma);
                kernel_[i * n_ + j] = k;
                kernel_[j * n_ + i] = k;
            }
        y_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) y_[i] = data[i].label;
        alphas_.assign(n_, 0.0);
        g_.assign(n_, 0.0);
    }

    void solve() {
        int stuck = 0;
        for (sweeps_ = 1; sweeps_ <= max_passes_; ++sweeps_) {
            // Screen violators against the bias the audit will use; the
            // Platt running bias inside a sweep is only locally consistent
            // and flags phantom violators near all-bound solutions.
            recompute_bias();
            if (audit_ok()) return;
            int changed = 0;
            for (std::size_t i = 0; i < n_; ++i)
                if (examine(i)) ++changed;
            if (changed > 0)
                stuck = 0;
            else if (++stuck >= 2)
                break; // no pair makes progress under a fresh bias
        }
        recompute_bias();
        if (!audit_ok())
            throw DataError("SMO did not converge within " + std::to_string(max_passes_) +
                            " passes (max KKT violation " + fmt_g17(max_violation()) + ")");
    }

    SvmModel build_model(double gamma) const {
        SvmModel model;
        model.feature_dim = static_cast<int>(data_[0].features.size());
        model.c = c_;
        model.gamma = gamma;
        model.bias = bias_;
        for (std::size_t i = 0; i < n_; ++i) {
            if (at_lower(i)) continue;
            model.dual_coefficients.push_back(alphas_[i] * y_[i]);
            model.support_vectors.push_back(data_[i].features);
        }
        return model;
    }

    void fill_detail(SmoDetail& detail) const {
        detail.alphas = alphas_;
        detail.sweeps = sweeps_;
        detail.max_kkt_violation = max_violation();
        detail.sum_alpha_y = sum_alpha_y();
        double dual = 0;
        for (std::size_t i = 0; i < n_; ++i) dual += alphas_[i] * (1.0 - 0.5 * y_[i] * g_[i]);
        detail.dual_objective = dual;
    }

private:
    double kern(std::size_t i, std::size_t j) const { return kernel_[i * n_ + j]; }
    double f(std::size_t i) const { return g_[i] + bias_; }

    // Box arithmetic can leave an alpha stranded just inside 0 or C: any
    // residual gap at most the step guard cannot be traversed by a later
    // step. Classify bounds with a slack just above the guard, everywhere.
    double step_guard() const { return 1e-10 * std::max(1.0, c_); }
    double bound_eps() const { return 2e-10 * std::max(1.0, c_); }
    bool at_lower(std::size_t i) const { return alphas_[i] <= bound_eps(); }
    bool at_upper(std::size_t i) const { return alphas_[i] >= c_ - bound_eps(); }

    bool examine(std::size_t i) {
        const double e_i = f(i) - y_[i];
        const double r = y_[i] * e_i;
        const bool violates = (r < -tol_ && !at_upper(i)) || (r > tol_ && !at_lower(i));
        if (!violates) return false;

        // Partner hierarchy: largest |E_i - E_j| over the free samples,
        // then the free samples from a random start, then everyone.
        std::size_t best = n_;
        double best_gap = -1;
        for (std::size_t j = 0; j < n_; ++j) {
            if (j == i || at_lower(j) || at_upper(j)) continue;
            const double gap = std::abs(e_i - (f(j) - y_[j]));
            if (gap > best_gap) {
                best_gap = gap;
                best = j;
            }
        }
        if (best < n_ && take_step(i, best)) return true;

        std::size_t start = rng_.below(n_);
        for (std::size_t off = 0; off < n_; ++off) {
            const std::size_t j = (start + off) % n_;
            if (j == i || at_lower(j) || at_upper(j)) continue;
            if (take_step(i, j)) return true;
        }
        start = rng_.below(n_);
        for (std::size_t off = 0; off < n_; ++off) {
            const std::size_t j = (start + off) % n_;
            if (j == i) continue;
            if (take_step(i, j)) return true;
        }
        return false;
    }

    bool take_step(std::size_t i1, std::size_t i2) {
        const double a1 = alphas_[i1], a2 = alphas_[i2];
        const int y1 = y_[i1], y2 = y_[i2];
        const double e1 = f(i1) - y1, e2 = f(i2) - y2;
        const double s = y1 * y2;

        double lo, hi;
        if (y1 != y2) {
            lo = std::max(0.0, a2 - a1);
            hi = std::min(c_, c_ + a2 - a1);
        } else {
            lo = std::max(0.0, a1 + a2 - c_);
            hi = std::min(c_, a1 + a2);
        }
        if (lo >= hi) return false;

        const double k11 = kern(i1, i1), k12 = kern(i1, i2), k22 = kern(i2, i2);
        const double eta = k11 + k22 - 2 * k12;
        const double guard = step_guard();

        double a2new;
        if (eta > 0) {
            a2new = std::clamp(a2 + y2 * (e1 - e2) / eta, lo, hi);
            // Land exactly on the segment ends; an interior result a hair
            // away from the box would strand there (later steps fall under
            // the progress guard) and be misread as a free vector.
            if (a2new - lo <= guard)
                a2new = lo;
            else if (hi - a2new <= guard)
                a2new = hi;
        } else {
            // Flat direction: evaluate the objective at both ends.
            const double f1 = y1 * (e1 + bias_) - a1 * k11 - s * a2 * k12;
            const double f2 = y2 * (e2 + bias_) - s * a1 * k12 - a2 * k22;
            const double l1 = a1 + s * (a2 - lo);
            const double h1 = a1 + s * (a2 - hi);
            const double psi_lo =
                l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 + s * lo * l1 * k12;
            const double psi_hi =
                h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 + s * hi * h1 * k12;
            if (psi_lo < psi_hi - 1e-12)
                a2new = lo;
            else if (psi_lo > psi_hi + 1e-12)
                a2new = hi;
            else
                return false;
        }

        if (std::abs(a2new - a2) <= guard) return false;

        double a1new = a1 + s * (a2 - a2new);
        // Keep sum(alpha*y) exact when rounding pushes a1 past a bound.
        if (a1new < 0) {
            a2new += s * a1new;
            a1new = 0;
        } else if (a1new > c_) {
            a2new += s * (a1new - c_);
            a1new = c_;
        }

        const double b1 = bias_ - e1 - y1 * (a1new - a1) * k11 - y2 * (a2new - a2) * k12;
        const double b2 = bias_ - e2 - y1 * (a1new - a1) * k12 - y2 * (a2new - a2) * k22;
        if (a1new > 0 && a1new < c_)
            bias_ = b1;
        else if (a2new > 0 && a2new < c_)
            bias_ = b2;
        else
            bias_ = 0.5 * (b1 + b2);

        const double d1 = y1 * (a1new - a1), d2 = y2 * (a2new - a2);
        for (std::size_t k = 0; k < n_; ++k) g_[k] += d1 * kern(i1, k) + d2 * kern(i2, k);
        alphas_[i1] = a1new;
        alphas_[i2] = a2new;
        return true;
    }

    // Bias with the widest KKT margin: mean over free support vectors, or
    // the midpoint of the feasible window when every alpha is at a bound.
    void recompute_bias() {
        double free_sum = 0;
        std::size_t free_count = 0;
        double lower = -std::numeric_limits<double>::infinity();
        double upper = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n_; ++i) {
            const double target = y_[i] - g_[i];
            if (!at_lower(i) && !at_upper(i)) {
                free_sum += target;
                ++free_count;
            } else if ((y_[i] == 1) == at_lower(i)) {
                lower = std::max(lower, target);
            } else {
                upper = std::min(upper, target);
            }
        }
        if (free_count > 0)
            bias_ = free_sum / static_cast<double>(free_count);
        else if (std::isfinite(lower) && std::isfinite(upper))
            bias_ = 0.5 * (lower + upper);
        else if (std::isfinite(lower))
            bias_ = lower;
        else if (std::isfinite(upper))
            bias_ = upper;
    }

    double max_violation() const {
        double worst = 0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double margin = y_[i] * f(i);
            double v;
            if (at_lower(i))
                v = std::max(0.0, 1.0 - margin);
            else if (at_upper(i))
                v = std::max(0.0, margin - 1.0);
            else
                v = std::abs(margin - 1.0);
            worst = std::max(worst, v);
        }
        return worst;
    }

    double sum_alpha_y() const {
        double sum = 0;
        for (std::size_t i = 0; i < n_; ++i) sum += alphas_[i] * y_[i];
        return sum;
    }

    bool audit_ok() const { return max_violation() <= tol_ && std::abs(sum_alpha_y()) <= 1e-9; }

    const std::vector<LabeledSample>& data_;
    std::size_t n_;
    double c_;
    double tol_;
    int max_passes_;
    Xoshiro256ss rng_;
    std::vector<double> kernel_;
    std::vector<int> y_;
    std::vector<double> alphas_;
    std::vector<double> g_;
    double bias_ = 0;
    int sweeps_ = 0;
};

} // namespace

SvmModel train_smo(const std::vector<LabeledSample>& data, double c, double gamma,
                   std::uint64_t seed, const SmoOptions& options, SmoDetail* detail) {
    validate_training_data(data);
    SmoSolver solver(data, c, gamma, options, seed);
    solver.solve();
    if (detail) solver.fill_detail(*detail);
    SvmModel model = solver.build_model(gamma);
    model.prng = kPrngName;
    model.smoothing = "add-one";
    model.seed = seed;
    return model;
}

Prediction predict(const SvmModel& model, std::span<const double> features) {
    if (static_cast<int>(features.size()) != model.feature_dim)
        throw DataError("feature dimension " + std::to_string(features.size()) +
                        " does not match model dimension " + std::to_string(model.feature_dim));
    double decision = model.bias;
    for (std::size_t i = 0; i < model.support_vectors.size(); ++i)
        decision +=
            model.dual_coefficients[i] * rbf_kernel(model.support_vectors[i], features, model.gamma);
    return {decision, decision < 0 ? -1 : 1};
}

GridSpec GridSpec::standard() {
    GridSpec spec;
    for (int e = -5; e <= 15; e += 2) spec.c_values.push_back(std::ldexp(1.0, e));
    for (int e = -15; e <= 3; e += 2) spec.gamma_values.push_back(std::ldexp(1.0, e));
    spec.folds = 5;
    return spec;
}

std::vector<int> stratified_folds(const std::vector<LabeledSample>& data, int folds,
                                  std::uint64_t seed) {
    if (folds < 2) throw DataError("need at least 2 folds");

    struct Key {
        std::uint64_t hash;
        std::string_view id;
        std::size_t index;
    };
    std::vector<Key> classes[2]; // 0: label -1, 1: label +1
    for (std::size_t i = 0; i < data.size(); ++i) {
        const int bucket = data[i].label == 1 ? 1 : 0;
        classes[bucket].push_back({derive_seed(seed, "fold-key", data[i].id), data[i].id, i});
    }

    std::vector<int> assignment(data.size(), -1);
    for (auto& members : classes) {
        if (members.size() < static_cast<std::size_t>(folds))
            throw DataError("insufficient data for stratification: class of size " +
                            std::to_string(members.size()) + " with " + std::to_string(folds) +
                            " folds");
        std::sort(members.begin(), members.end(), [](const Key& a, const Key& b) {
            if (a.hash != b.hash) return a.hash < b.hash;
            return a.id < b.id;
        });
        for (std::size_t rank = 0; rank + 1 < members.size(); ++rank)
            if (members[rank].id == members[rank + 1].id)
                throw DataError("duplicate sample id '" + std::string(members[rank].id) + "'");
        for (std::size_t rank = 0; rank < members.size(); ++rank)
            assignment[members[rank].index] = static_cast<int>(rank % folds);
    }
    return assignment;
}

GridResult grid_search(const std::vector<LabeledSample>& data, const GridSpec& grid,
                       std::uint64_t seed, const SmoOptions& options) {
    validate_training_data(data);
    if (grid.c_values.empty() || grid.gamma_values.empty()) throw DataError("empty grid");

    const std::vector<int> fold_of = stratified_folds(data, grid.folds, derive_seed(seed, "folds"));

    const std::size_t cells = grid.c_values.size() * grid.gamma_values.size();
    GridResult result;
    result.table.resize(cells);

    std::string first_error;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t cell = 0; cell < static_cast<std::ptrdiff_t>(cells); ++cell) {
        const double c = grid.c_values[cell / grid.gamma_values.size()];
        const double gamma = grid.gamma_values[cell % grid.gamma_values.size()];
        try {
            std::size_t correct = 0;
            for (int fold = 0; fold < grid.folds; ++fold) {
                std::vector<LabeledSample> train;
                std::vector<std::size_t> test;
                for (std::size_t i = 0; i < data.size(); ++i) {
                    if (fold_of[i] == fold)
                        test.push_back(i);
                    else
                        train.push_back(data[i]);
                }
                const SvmModel model =
                    train_smo(train, c, gamma,
                              derive_seed(seed, "smo-cell", static_cast<std::uint64_t>(cell),
                                          static_cast<std::uint64_t>(fold)),
                              options);
                for (std::size_t i : test)
                    if (predict(model, data[i].features).label == data[i].label) ++correct;
            }
            result.table[cell] = {c, gamma, static_cast<double>(correct) / data.size()};
        } catch (const std::exception& e) {
#pragma omp critical
            if (first_error.empty()) first_error = e.what();
        }
    }
    if (!first_error.empty()) throw DataError("grid search failed: " + first_error);

    // Scan in (C ascending, gamma ascending) order; strict improvement only,
    // so ties resolve to the smallest C, then the smallest gamma.
    result.best_accuracy = -1;
    for (const GridCell& cell : result.table) {
        if (cell.cv_accuracy > result.best_accuracy) {
            result.best_accuracy = cell.cv_accuracy;
            result.best_c = cell.c;
            result.best_gamma = cell.gamma;
        }
    }
    return result;
}

void save_model(const SvmModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string() + ": cannot open file for writing");
    out << "ppd-svm 1\n";
    out << "feature_dim " << model.feature_dim << "\n";
    out << "s " << model.s << "\n";
    out << "c " << fmt_g17(model.c) << "\n";
    out << "gamma " << fmt_g17(model.gamma) << "\n";
    out << "bias " << fmt_g17(model.bias) << "\n";
    out << "seed " << model.seed << "\n";
    out << "prng " << model.prng << "\n";
    out << "smoothing " << model.smoothing << "\n";
    out << "support_vectors " << model.support_vectors.size() << "\n";
    for (std::size_t i = 0; i < model.support_vectors.size(); ++i) {
        out << fmt_g17(model.dual_coefficients[i]);
        for (double v : model.support_vectors[i]) out << " " << fmt_g17(v);
        out << "\n";
    }
    if (!out) throw IoError(path.string() + ": write failed");
}

SvmModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path.string() + ": cannot open file");

    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "ppd-svm" || version != 1)
        throw IoError(path.string() + ": not a ppd-svm version 1 model file");

    SvmModel model;
    std::size_t sv_count = 0;
    std::string key;
    while (in >> key) {
        if (key == "feature_dim")
            in >> model.feature_dim;
        else if (key == "s")
            in >> model.s;
        else if (key == "c")
            in >> model.c;
        else if (key == "gamma")
            in >> model.gamma;
        else if (key == "bias")
            in >> model.bias;
        else if (key == "seed")
            in >> model.seed;
        else if (key == "prng")
            in >> model.prng;
        else if (key == "smoothing")
            in >> model.smoothing;
        else if (key == "support_vectors") {
            in >> sv_count;
            break;
        } else
            throw IoError(path.string() + ": unknown model header key '" + key + "'");
        if (!in) throw IoError(path.string() + ": malformed model header");
    }
    if (!in || model.feature_dim <= 0 || sv_count == 0)
        throw IoError(path.string() + ": malformed model file");

    model.dual_coefficients.resize(sv_count);
    model.support_vectors.assign(sv_count, std::vector<double>(model.feature_dim));
    for (std::size_t i = 0; i < sv_count; ++i) {
        if (!(in >> model.dual_coefficients[i]))
            throw IoError(path.string() + ": truncated support vector block");
        for (int j = 0; j < model.feature_dim; ++j)
            if (!(in >> model.support_vectors[i][j]))
                throw IoError(path.string() + ": truncated support vector block");
    }
    return model;
}

} // namespace ppd
