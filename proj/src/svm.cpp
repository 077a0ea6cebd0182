/* Copyright 2026 The cdrnet Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "cdrnet/svm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "cdrnet/error.hpp"
#include "cdrnet/rng.hpp"

namespace cdrnet {
namespace {

constexpr double kMinFeatureStd = 1e-6;

std::vector<double> standardize(const SvmModel& svm, std::span<const double> x) {
    if (x.size() != svm.feature_mean.size())
        throw usage_error("feature dimension " + std::to_string(x.size()) + " does not match SVM dimension " +
                          std::to_string(svm.feature_mean.size()));
    std::vector<double> z(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) z[k] = (x[k] - svm.feature_mean[k]) / svm.feature_std[k];
    return z;
}

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// Objective of one binary problem. The bias is trained as a weight on a
// constant feature, so it is regularized with the rest of w.
double binary_objective(std::span<const double> w, double b, double lambda,
                        const std::vector<std::vector<double>>& z, std::span<const int> labels, int positive) {
    double hinge = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double y = labels[i] == positive ? 1.0 : -1.0;
        hinge += std::max(0.0, 1.0 - y * (dot(w, z[i]) + b));
    }
    return 0.5 * lambda * (dot(w, w) + b * b) + hinge / static_cast<double>(z.size());
}

} // namespace

SvmTrainResult train_linear_svm(std::span<const std::vector<double>> features, std::span<const int> labels,
                                int classes, const SvmTrainOptions& options) {
    if (features.empty()) throw data_error("SVM training set is empty");
    if (features.size() != labels.size()) throw usage_error("feature and label counts differ");
    if (!(options.lambda > 0.0)) throw usage_error("SVM lambda must be positive");
    if (options.epochs < 1) throw usage_error("SVM epochs must be at least 1");
    const std::size_t dim = features.front().size();
    for (const auto& f : features)
        if (f.size() != dim) throw usage_error("SVM feature vectors differ in dimension");
    std::set<int> distinct(labels.begin(), labels.end());
    if (distinct.size() < 2) throw data_error("SVM training needs at least two classes");
    if (*distinct.begin() < 0 || *distinct.rbegin() >= classes) throw usage_error("SVM label out of range");

    const std::size_t n = features.size();
    SvmTrainResult result;
    auto& svm = result.model;
    svm.lambda = options.lambda;
    svm.feature_mean.assign(dim, 0.0);
    svm.feature_std.assign(dim, 0.0);
    for (const auto& f : features)
        for (std::size_t k = 0; k < dim; ++k) svm.feature_mean[k] += f[k];
    for (double& m : svm.feature_mean) m /= static_cast<double>(n);
    for (const auto& f : features)
        for (std::size_t k = 0; k < dim; ++k) {
            const double d = f[k] - svm.feature_mean[k];
            svm.feature_std[k] += d * d;
        }
    for (double& s : svm.feature_std) s = std::max(std::sqrt(s / static_cast<double>(n)), kMinFeatureStd);

    std::vector<std::vector<double>> z;
    z.reserve(n);
    for (const auto& f : features) z.push_back(standardize(svm, f));

    svm.weights.assign(classes, std::vector<double>(dim, 0.0));
    svm.bias.assign(classes, 0.0);
    result.objective.assign(options.epochs, 0.0);

    const double lambda = options.lambda;
    const double radius = 1.0 / std::sqrt(lambda);
    for (int c = 0; c < classes; ++c) {
        // w, b: the Pegasos iterate. avg_w, avg_b: its average weighted by
        // step number, which is what the model keeps.
        std::vector<double> w(dim, 0.0);
        double b = 0.0;
        auto& avg_w = svm.weights[c];
        double& avg_b = svm.bias[c];
        Rng rng(mix_seed(options.seed, static_cast<std::uint64_t>(c)));
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::uint64_t t = 0;
        for (int epoch = 0; epoch < options.epochs; ++epoch) {
            rng.shuffle(order.begin(), order.end());
            for (auto i : order) {
                ++t;
                const double eta = 1.0 / (lambda * static_cast<double>(t));
                const double y = labels[i] == c ? 1.0 : -1.0;
                const double margin = y * (dot(w, z[i]) + b);
                const double shrink = 1.0 - eta * lambda;
                for (double& v : w) v *= shrink;
                b *= shrink;
                if (margin < 1.0) {
                    for (std::size_t k = 0; k < dim; ++k) w[k] += eta * y * z[i][k];
                    b += eta * y;
                }
                const double norm = std::sqrt(dot(w, w) + b * b);
                if (norm > radius) {
                    const double s = radius / norm;
                    for (double& v : w) v *= s;
                    b *= s;
                }
                const double rho = 2.0 / static_cast<double>(t + 1);
                for (std::size_t k = 0; k < dim; ++k) avg_w[k] += rho * (w[k] - avg_w[k]);
                avg_b += rho * (b - avg_b);
            }
            result.objective[epoch] += binary_objective(avg_w, avg_b, lambda, z, labels, c);
        }
    }
    return result;
}

std::vector<double> svm_margins(const SvmModel& svm, std::span<const double> features) {
    const auto z = standardize(svm, features);
    std::vector<double> m(svm.bias.size());
    for (std::size_t c = 0; c < m.size(); ++c) m[c] = dot(svm.weights[c], z) + svm.bias[c];
    return m;
}

int svm_predict(const SvmModel& svm, std::span<const double> features) {
    const auto m = svm_margins(svm, features);
    return static_cast<int>(std::max_element(m.begin(), m.end()) - m.begin());
}

double svm_objective(const SvmModel& svm, std::span<const std::vector<double>> features, std::span<const int> labels) {
    std::vector<std::vector<double>> z;
    for (const auto& f : features) z.push_back(standardize(svm, f));
    double total = 0.0;
    for (int c = 0; c < svm.classes(); ++c)
        total += binary_objective(svm.weights[c], svm.bias[c], svm.lambda, z, labels, c);
    return total;
}

} // namespace cdrnet
