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
#include <algorithm>
#include <cmath>
#include <cstring>
#include <span>
#include <vector>
#include <string>

#include "cdrnet/error.hpp"
#include "cdrnet/tensornet.hpp"

namespace cdrnet {
namespace {

void check_conv_shapes(const Tensor3& input, std::size_t weight_count, std::size_t c_out, int kernel_h,
                       int kernel_w) {
    if (kernel_h < 1 || kernel_w < 1) throw usage_error("conv kernel sizes must be positive");
    if (kernel_h > input.height || kernel_w > input.width)
        throw usage_error("conv kernel " + std::to_string(kernel_h) + "x" + std::to_string(kernel_w) +
                          " larger than input " + std::to_string(input.height) + "x" +
                          std::to_string(input.width));
    if (weight_count != c_out * input.channels * kernel_h * kernel_w)
        throw usage_error("conv weight count does not match C_out x C_in x kh x kw");
}

inline double dot(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
#pragma omp simd reduction(+ : s)
    for (std::size_t k = 0; k < n; ++k) s += x[k] * y[k];
    return s;
}

// y[0..n) += a * x[0..n)
inline void axpy(double a, const double* __restrict x, double* __restrict y, std::size_t n) {
#pragma omp simd
    for (std::size_t k = 0; k < n; ++k) y[k] += a * x[k];
}

// The input seen as a K x P matrix, K = C_in*kh*kw (weight order), P = oh*ow
// output positions. Row k holds input[c][y+i][x+j] over all (y, x). When the
// kernel spans the full width the rows are contiguous runs of the input and
// no copy is made; otherwise they are gathered into an owned buffer.
class ColumnView {
public:
    ColumnView(const Tensor3& in, int kh, int kw) : k_(std::size_t(in.channels) * kh * kw) {
        oh_ = in.height - kh + 1;
        ow_ = in.width - kw + 1;
        p_ = std::size_t(oh_) * ow_;
        contiguous_ = ow_ == in.width || p_ == 1;
        rows_.resize(k_);
        offsets_.resize(k_);
        const std::size_t plane = std::size_t(in.height) * in.width;
        std::size_t k = 0;
        for (int c = 0; c < in.channels; ++c)
            for (int i = 0; i < kh; ++i)
                for (int j = 0; j < kw; ++j, ++k) offsets_[k] = c * plane + std::size_t(i) * in.width + j;
        if (contiguous_) {
            for (k = 0; k < k_; ++k) rows_[k] = in.data.data() + offsets_[k];
        } else {
            gathered_.resize(k_ * p_);
            for (k = 0; k < k_; ++k) {
                double* dst = gathered_.data() + k * p_;
                for (int y = 0; y < oh_; ++y)
                    for (int x = 0; x < ow_; ++x) dst[y * ow_ + x] = in.data[offsets_[k] + std::size_t(y) * in.width + x];
                rows_[k] = dst;
            }
        }
        width_ = in.width;
    }

    std::size_t rows() const { return k_; }
    std::size_t positions() const { return p_; }
    const double* row(std::size_t k) const { return rows_[k]; }
    bool contiguous() const { return contiguous_; }

    /// Adds a K x P gradient (row pointers) back onto the input layout.
    void scatter_add(const std::vector<double>& d_rows, std::vector<double>& d_input) const {
        for (std::size_t k = 0; k < k_; ++k)
            for (int y = 0; y < oh_; ++y)
                for (int x = 0; x < ow_; ++x)
                    d_input[offsets_[k] + std::size_t(y) * width_ + x] += d_rows[k * p_ + y * ow_ + x];
    }

    std::size_t offset(std::size_t k) const { return offsets_[k]; }

private:
    std::size_t k_, p_;
    int oh_, ow_, width_ = 0;
    bool contiguous_;
    std::vector<const double*> rows_;
    std::vector<std::size_t> offsets_;
    std::vector<double> gathered_;
};

using v2d = double __attribute__((vector_size(16)));

inline v2d load2(const double* p) {
    v2d v;
    std::memcpy(&v, p, sizeof v);
    return v;
}

inline void store2(double* p, v2d v) { std::memcpy(p, &v, sizeof v); }

constexpr std::size_t kBlockO = 4;
constexpr std::size_t kBlockP = 4;

// out[o][p] += sum_k w[o][k] * col.row(k)[p]
void gemm_forward(const double* w, const ColumnView& col, std::size_t c_out, double* out) {
    const std::size_t K = col.rows(), P = col.positions();
    if (P == 1) {
        // kernel covers the whole input: a plain matrix-vector product
        for (std::size_t o = 0; o < c_out; ++o) out[o] += dot(w + o * K, col.row(0), K);
        return;
    }
    constexpr std::size_t V = kBlockP / 2;
    std::size_t o0 = 0;
    for (; o0 + kBlockO <= c_out; o0 += kBlockO) {
        const double* w0 = w + o0 * K;
        std::size_t p0 = 0;
        for (; p0 + kBlockP <= P; p0 += kBlockP) {
            v2d acc[kBlockO][V] = {};
            for (std::size_t k = 0; k < K; ++k) {
                const double* r = col.row(k) + p0;
                v2d x[V];
                for (std::size_t b = 0; b < V; ++b) x[b] = load2(r + 2 * b);
                for (std::size_t a = 0; a < kBlockO; ++a) {
                    const double wa = w0[a * K + k];
                    for (std::size_t b = 0; b < V; ++b) acc[a][b] += wa * x[b];
                }
            }
            for (std::size_t a = 0; a < kBlockO; ++a)
                for (std::size_t b = 0; b < V; ++b) {
                    double* dst = out + (o0 + a) * P + p0 + 2 * b;
                    store2(dst, load2(dst) + acc[a][b]);
                }
        }
        for (; p0 < P; ++p0)
            for (std::size_t a = 0; a < kBlockO; ++a) {
                double s = 0.0;
                for (std::size_t k = 0; k < K; ++k) s += w0[a * K + k] * col.row(k)[p0];
                out[(o0 + a) * P + p0] += s;
            }
    }
    for (; o0 < c_out; ++o0)
        for (std::size_t k = 0; k < K; ++k) axpy(w[o0 * K + k], col.row(k), out + o0 * P, P);
}

// dw[o][k] += sum_p g[o][p] * col.row(k)[p]
void gemm_weight_grad(const double* g, const ColumnView& col, std::size_t c_out, double* dw) {
    const std::size_t K = col.rows(), P = col.positions();
    const std::size_t P2 = P & ~std::size_t(1);
    std::size_t o0 = 0;
    for (; o0 + 2 <= c_out; o0 += 2) {
        const double *ga = g + o0 * P, *gb = ga + P;
        std::size_t k = 0;
        for (; k + 2 <= K; k += 2) {
            const double *x0 = col.row(k), *x1 = col.row(k + 1);
            v2d a0 = {}, a1 = {}, b0 = {}, b1 = {};
            for (std::size_t p = 0; p < P2; p += 2) {
                const v2d u = load2(ga + p), v = load2(gb + p);
                const v2d y0 = load2(x0 + p), y1 = load2(x1 + p);
                a0 += u * y0;
                a1 += u * y1;
                b0 += v * y0;
                b1 += v * y1;
            }
            double s[4] = {a0[0] + a0[1], a1[0] + a1[1], b0[0] + b0[1], b1[0] + b1[1]};
            for (std::size_t p = P2; p < P; ++p) {
                s[0] += ga[p] * x0[p];
                s[1] += ga[p] * x1[p];
                s[2] += gb[p] * x0[p];
                s[3] += gb[p] * x1[p];
            }
            dw[o0 * K + k] += s[0];
            dw[o0 * K + k + 1] += s[1];
            dw[(o0 + 1) * K + k] += s[2];
            dw[(o0 + 1) * K + k + 1] += s[3];
        }
        for (; k < K; ++k) {
            dw[o0 * K + k] += dot(ga, col.row(k), P);
            dw[(o0 + 1) * K + k] += dot(gb, col.row(k), P);
        }
    }
    for (; o0 < c_out; ++o0)
        for (std::size_t k = 0; k < K; ++k) dw[o0 * K + k] += dot(g + o0 * P, col.row(k), P);
}

} // namespace

Tensor3 conv2d_valid(const Tensor3& input, std::span<const double> weights, std::span<const double> bias,
                     int kernel_h, int kernel_w) {
    const auto c_out = bias.size();
    check_conv_shapes(input, weights.size(), c_out, kernel_h, kernel_w);
    const ColumnView col(input, kernel_h, kernel_w);
    Tensor3 out(static_cast<int>(c_out), input.height - kernel_h + 1, input.width - kernel_w + 1);
    const std::size_t P = col.positions();
    for (std::size_t o = 0; o < c_out; ++o) std::fill_n(out.data.data() + o * P, P, bias[o]);
    gemm_forward(weights.data(), col, c_out, out.data.data());
    return out;
}

void conv2d_valid_backward(const Tensor3& input, std::span<const double> weights, const Tensor3& d_output,
                           int kernel_h, int kernel_w, std::span<double> d_weights, std::span<double> d_bias,
                           Tensor3* d_input) {
    const auto c_out = d_bias.size();
    check_conv_shapes(input, weights.size(), c_out, kernel_h, kernel_w);
    const int oh = input.height - kernel_h + 1;
    const int ow = input.width - kernel_w + 1;
    if (d_output.channels != static_cast<int>(c_out) || d_output.height != oh || d_output.width != ow)
        throw usage_error("conv upstream gradient shape mismatch");
    if (d_weights.size() != weights.size()) throw usage_error("conv weight gradient shape mismatch");

    const ColumnView col(input, kernel_h, kernel_w);
    const std::size_t K = col.rows(), P = col.positions();
    const double* g = d_output.data.data();

    for (std::size_t o = 0; o < c_out; ++o) {
        double s = 0.0;
        for (std::size_t p = 0; p < P; ++p) s += g[o * P + p];
        d_bias[o] += s;
    }

    // dW[o][k] += sum_p g[o][p] * col[k][p]
    if (P == 1) {
        for (std::size_t o = 0; o < c_out; ++o) axpy(g[o], col.row(0), d_weights.data() + o * K, K);
    } else {
        gemm_weight_grad(g, col, c_out, d_weights.data());
    }

    if (!d_input) return;
    *d_input = Tensor3(input.channels, input.height, input.width);
    auto& din = d_input->data;
    if (P == 1) {
        for (std::size_t o = 0; o < c_out; ++o) axpy(g[o], weights.data() + o * K, din.data(), K);
        return;
    }
    // d col[k][p] = sum_o w[o][k] g[o][p]
    std::vector<double> d_rows(col.contiguous() ? 0 : K * P, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        double* dst = col.contiguous() ? din.data() + col.offset(k) : d_rows.data() + k * P;
        std::size_t o = 0;
        for (; o + 4 <= c_out; o += 4) {
            const double w0 = weights[o * K + k], w1 = weights[(o + 1) * K + k];
            const double w2 = weights[(o + 2) * K + k], w3 = weights[(o + 3) * K + k];
            const double *g0 = g + o * P, *g1 = g0 + P, *g2 = g1 + P, *g3 = g2 + P;
            std::size_t p = 0;
            for (; p + 2 <= P; p += 2)
                store2(dst + p, load2(dst + p) + ((w0 * load2(g0 + p) + w1 * load2(g1 + p)) +
                                                  (w2 * load2(g2 + p) + w3 * load2(g3 + p))));
            for (; p < P; ++p) dst[p] += (w0 * g0[p] + w1 * g1[p]) + (w2 * g2[p] + w3 * g3[p]);
        }
        for (; o < c_out; ++o) axpy(weights[o * K + k], g + o * P, dst, P);
    }
    if (!col.contiguous()) col.scatter_add(d_rows, din);
}

std::vector<double> leaky_relu(std::span<const double> x, double alpha) {
    std::vector<double> y(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) y[k] = x[k] >= 0.0 ? x[k] : alpha * x[k];
    return y;
}

std::vector<double> leaky_relu_backward(std::span<const double> x, std::span<const double> d_y, double alpha) {
    if (x.size() != d_y.size()) throw usage_error("leaky_relu gradient shape mismatch");
    std::vector<double> d_x(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) d_x[k] = x[k] >= 0.0 ? d_y[k] : alpha * d_y[k];
    return d_x;
}

std::vector<double> dense_affine(std::span<const double> x, std::span<const double> weights,
                                 std::span<const double> bias) {
    const auto rows = bias.size();
    if (weights.size() != rows * x.size())
        throw usage_error("dense shape mismatch: W has " + std::to_string(weights.size()) + " entries, expected " +
                          std::to_string(rows) + "x" + std::to_string(x.size()));
    std::vector<double> y(rows);
    for (std::size_t r = 0; r < rows; ++r) y[r] = bias[r] + dot(weights.data() + r * x.size(), x.data(), x.size());
    return y;
}

std::vector<double> dense_affine_backward(std::span<const double> x, std::span<const double> weights,
                                          std::span<const double> d_y, std::span<double> d_weights,
                                          std::span<double> d_bias) {
    const auto rows = d_y.size();
    const auto cols = x.size();
    if (weights.size() != rows * cols || d_weights.size() != weights.size() || d_bias.size() != rows)
        throw usage_error("dense gradient shape mismatch");
    std::vector<double> d_x(cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        d_bias[r] += d_y[r];
        axpy(d_y[r], x.data(), d_weights.data() + r * cols, cols);
        axpy(d_y[r], weights.data() + r * cols, d_x.data(), cols);
    }
    return d_x;
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> p(logits.size());
    if (logits.empty()) return p;
    const double m = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (std::size_t k = 0; k < logits.size(); ++k) z += p[k] = std::exp(logits[k] - m);
    for (double& v : p) v /= z;
    return p;
}

std::vector<double> softmax_backward(std::span<const double> probs, std::span<const double> d_probs) {
    if (probs.size() != d_probs.size()) throw usage_error("softmax gradient shape mismatch");
    const double s = dot(probs.data(), d_probs.data(), probs.size());
    std::vector<double> d(probs.size());
    for (std::size_t k = 0; k < probs.size(); ++k) d[k] = probs[k] * (d_probs[k] - s);
    return d;
}

} // namespace cdrnet
