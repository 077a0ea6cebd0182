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
#include <numeric>
#include <random>

#include "cdrnet/error.hpp"
#include "cdrnet/tensornet.hpp"
#include "doctest.h"

using namespace cdrnet;

namespace {

std::vector<double> randn(std::mt19937_64& gen, std::size_t n) {
    std::normal_distribution<double> d;
    std::vector<double> v(n);
    for (double& x : v) x = d(gen);
    return v;
}

Tensor3 random_tensor(std::mt19937_64& gen, int c, int h, int w) {
    Tensor3 t(c, h, w);
    t.data = randn(gen, t.size());
    return t;
}

// out[o][y][x] = b[o] + sum_{c,i,j} in[c][y+i][x+j] * w[o][c][i][j]
Tensor3 direct_conv(const Tensor3& in, const std::vector<double>& w, const std::vector<double>& b, int kh, int kw) {
    const int co = static_cast<int>(b.size());
    Tensor3 out(co, in.height - kh + 1, in.width - kw + 1);
    for (int o = 0; o < co; ++o)
        for (int y = 0; y < out.height; ++y)
            for (int x = 0; x < out.width; ++x) {
                long double s = b[o];
                for (int c = 0; c < in.channels; ++c)
                    for (int i = 0; i < kh; ++i)
                        for (int j = 0; j < kw; ++j)
                            s += static_cast<long double>(in.at(c, y + i, x + j)) *
                                 w[((static_cast<std::size_t>(o) * in.channels + c) * kh + i) * kw + j];
                out.at(o, y, x) = static_cast<double>(s);
            }
    return out;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double dotv(const std::vector<double>& a, const std::vector<double>& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1e-8, std::abs(a) + std::abs(b)); }

} // namespace

TEST_SUITE("tensornet") {

TEST_CASE("conv2d_valid hand examples") {
    Tensor3 in(1, 5, 1);
    in.data = {1, 2, 3, 4, 5};
    const std::vector<double> w{1, 1, 1, 1}, b{0};
    const auto out = conv2d_valid(in, w, b, 4, 1);
    CHECK(out.channels == 1);
    CHECK(out.height == 2);
    CHECK(out.width == 1);
    CHECK(out.data == std::vector<double>{10, 14});

    std::mt19937_64 gen(1);
    const auto x = random_tensor(gen, 3, 6, 7);
    const auto z = conv2d_valid(x, std::vector<double>(2 * 3 * 2 * 3, 0.0), std::vector<double>{1.5, -2.0}, 2, 3);
    for (int y = 0; y < z.height; ++y)
        for (int xx = 0; xx < z.width; ++xx) {
            CHECK(z.at(0, y, xx) == 1.5);
            CHECK(z.at(1, y, xx) == -2.0);
        }
}

TEST_CASE("conv2d_valid rejects bad shapes") {
    Tensor3 in(1, 3, 1);
    CHECK_THROWS_AS(conv2d_valid(in, std::vector<double>(4, 1.0), std::vector<double>{0.0}, 4, 1), Error);
    CHECK_THROWS_AS(conv2d_valid(in, std::vector<double>(3, 1.0), std::vector<double>{0.0, 0.0}, 3, 1), Error);
}

TEST_CASE("conv2d_valid matches direct summation") {
    std::mt19937_64 gen(17);
    const auto x = random_tensor(gen, 3, 8, 7);
    const auto w = randn(gen, 4 * 3 * 4 * 1);
    const auto b = randn(gen, 4);
    CHECK(max_abs_diff(conv2d_valid(x, w, b, 4, 1).data, direct_conv(x, w, b, 4, 1).data) < 1e-12);

    std::uniform_int_distribution<int> dim(1, 9), ch(1, 5);
    for (int trial = 0; trial < 100; ++trial) {
        const int c = ch(gen), h = dim(gen), wd = dim(gen), co = ch(gen);
        const int kh = std::uniform_int_distribution<int>(1, h)(gen);
        const int kw = std::uniform_int_distribution<int>(1, wd)(gen);
        const auto in = random_tensor(gen, c, h, wd);
        const auto ww = randn(gen, static_cast<std::size_t>(co * c * kh * kw));
        const auto bb = randn(gen, static_cast<std::size_t>(co));
        CHECK(max_abs_diff(conv2d_valid(in, ww, bb, kh, kw).data, direct_conv(in, ww, bb, kh, kw).data) < 1e-12);
    }
}

TEST_CASE("conv2d_valid is linear in input and weights") {
    std::mt19937_64 gen(23);
    const std::vector<double> zero_b(3, 0.0);
    const auto x1 = random_tensor(gen, 2, 9, 7), x2 = random_tensor(gen, 2, 9, 7);
    const auto w1 = randn(gen, 3 * 2 * 3 * 2), w2 = randn(gen, 3 * 2 * 3 * 2);
    const double a = 0.7, c = -1.3;

    Tensor3 xs(2, 9, 7);
    for (std::size_t i = 0; i < xs.size(); ++i) xs.data[i] = a * x1.data[i] + c * x2.data[i];
    const auto lhs = conv2d_valid(xs, w1, zero_b, 3, 2);
    const auto y1 = conv2d_valid(x1, w1, zero_b, 3, 2), y2 = conv2d_valid(x2, w1, zero_b, 3, 2);
    std::vector<double> rhs(lhs.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = a * y1.data[i] + c * y2.data[i];
    CHECK(max_abs_diff(lhs.data, rhs) < 1e-12);

    std::vector<double> ws(w1.size());
    for (std::size_t i = 0; i < ws.size(); ++i) ws[i] = a * w1[i] + c * w2[i];
    const auto lw = conv2d_valid(x1, ws, zero_b, 3, 2);
    const auto z1 = conv2d_valid(x1, w1, zero_b, 3, 2), z2 = conv2d_valid(x1, w2, zero_b, 3, 2);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = a * z1.data[i] + c * z2.data[i];
    CHECK(max_abs_diff(lw.data, rhs) < 1e-12);
}

TEST_CASE("conv2d_valid is translation equivariant along hours") {
    std::mt19937_64 gen(29);
    const int h = 20;
    Tensor3 x(2, h, 7), shifted(2, h, 7);
    for (int c = 0; c < 2; ++c)
        for (int y = 4; y < 12; ++y)
            for (int d = 0; d < 7; ++d) {
                const double v = std::normal_distribution<double>()(gen);
                x.at(c, y, d) = v;
                shifted.at(c, y + 1, d) = v;
            }
    const auto w = randn(gen, 3 * 2 * 4 * 1);
    const auto b = randn(gen, 3);
    const auto y0 = conv2d_valid(x, w, b, 4, 1), y1 = conv2d_valid(shifted, w, b, 4, 1);
    for (int o = 0; o < 3; ++o)
        for (int y = 0; y + 1 < y0.height; ++y)
            for (int d = 0; d < 7; ++d) CHECK(y1.at(o, y + 1, d) == doctest::Approx(y0.at(o, y, d)).epsilon(1e-13));
}

TEST_CASE("conv2d_valid_backward matches finite differences") {
    std::mt19937_64 gen(31);
    struct Case {
        int c, h, w, co, kh, kw;
    };
    for (const auto& k : {Case{2, 7, 5, 3, 3, 1}, Case{3, 6, 7, 2, 2, 3}, Case{2, 4, 7, 3, 4, 7}, Case{1, 5, 1, 1, 4, 1}}) {
        auto x = random_tensor(gen, k.c, k.h, k.w);
        auto w = randn(gen, static_cast<std::size_t>(k.co * k.c * k.kh * k.kw));
        auto b = randn(gen, static_cast<std::size_t>(k.co));
        const auto r = randn(gen, static_cast<std::size_t>(k.co * (k.h - k.kh + 1) * (k.w - k.kw + 1)));
        // loss = sum(r * conv(x))
        auto loss = [&] { return dotv(r, conv2d_valid(x, w, b, k.kh, k.kw).data); };

        Tensor3 dy(k.co, k.h - k.kh + 1, k.w - k.kw + 1);
        dy.data = r;
        std::vector<double> dw(w.size(), 0.0), db(b.size(), 0.0);
        Tensor3 dx;
        conv2d_valid_backward(x, w, dy, k.kh, k.kw, dw, db, &dx);

        const double h = 1e-5;
        auto probe = [&](std::vector<double>& v, const std::vector<double>& g) {
            for (std::size_t i = 0; i < v.size(); ++i) {
                const double s = v[i];
                v[i] = s + h;
                const double up = loss();
                v[i] = s - h;
                const double dn = loss();
                v[i] = s;
                CHECK(rel(g[i], (up - dn) / (2 * h)) < 1e-6);
            }
        };
        probe(w, dw);
        probe(b, db);
        probe(x.data, dx.data);
    }
}

TEST_CASE("conv2d_valid_backward accumulates into weight gradients") {
    std::mt19937_64 gen(37);
    const auto x = random_tensor(gen, 2, 6, 3);
    const auto w = randn(gen, 2 * 2 * 2 * 1);
    Tensor3 dy(2, 5, 3);
    dy.data = randn(gen, dy.size());
    std::vector<double> dw(w.size(), 0.0), db(2, 0.0);
    conv2d_valid_backward(x, w, dy, 2, 1, dw, db, nullptr);
    auto once = dw;
    conv2d_valid_backward(x, w, dy, 2, 1, dw, db, nullptr);
    for (std::size_t i = 0; i < dw.size(); ++i) CHECK(dw[i] == doctest::Approx(2 * once[i]));
}

TEST_CASE("leaky_relu") {
    CHECK(leaky_relu(std::vector<double>{2.0}, 0.01)[0] == 2.0);
    CHECK(leaky_relu(std::vector<double>{-3.0}, 0.01)[0] == doctest::Approx(-0.03).epsilon(1e-15));
    CHECK(leaky_relu(std::vector<double>{-1.0, 0.0, 2.5, -0.5}, 0.0) == std::vector<double>{0.0, 0.0, 2.5, 0.0});
    const auto g = leaky_relu_backward(std::vector<double>{-1.0, 3.0}, std::vector<double>{2.0, 2.0}, 0.1);
    CHECK(g[0] == doctest::Approx(0.2));
    CHECK(g[1] == 2.0);
}

TEST_CASE("dense_affine") {
    const std::vector<double> x{1.5, -2.0, 0.25};
    const std::vector<double> eye{1, 0, 0, 0, 1, 0, 0, 0, 1};
    CHECK(dense_affine(x, eye, std::vector<double>(3, 0.0)) == x);
    const std::vector<double> b0{0.1, 0.2};
    CHECK(dense_affine(x, std::vector<double>(6, 0.0), b0) == b0);
    CHECK_THROWS_AS(dense_affine(x, std::vector<double>(5, 0.0), b0), Error);

    std::mt19937_64 gen(41);
    std::uniform_int_distribution<int> dim(1, 40);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t rows = trial == 0 ? 3 : dim(gen), cols = trial == 0 ? 4 : dim(gen);
        const auto W = randn(gen, rows * cols), xx = randn(gen, cols), bb = randn(gen, rows);
        const auto y = dense_affine(xx, W, bb);
        REQUIRE(y.size() == rows);
        for (std::size_t r = 0; r < rows; ++r) {
            long double s = bb[r];
            for (std::size_t c = 0; c < cols; ++c) s += static_cast<long double>(W[r * cols + c]) * xx[c];
            CHECK(std::abs(y[r] - static_cast<double>(s)) < 1e-12);
        }
    }
}

TEST_CASE("dense_affine_backward matches finite differences") {
    std::mt19937_64 gen(43);
    auto W = randn(gen, 5 * 3), x = randn(gen, 3), b = randn(gen, 5);
    const auto r = randn(gen, 5);
    auto loss = [&] { return dotv(r, dense_affine(x, W, b)); };
    std::vector<double> dW(W.size(), 0.0), db(b.size(), 0.0);
    const auto dx = dense_affine_backward(x, W, r, dW, db);
    const double h = 1e-5;
    auto probe = [&](std::vector<double>& v, const std::vector<double>& g) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double s = v[i];
            v[i] = s + h;
            const double up = loss();
            v[i] = s - h;
            const double dn = loss();
            v[i] = s;
            CHECK(rel(g[i], (up - dn) / (2 * h)) < 1e-6);
        }
    };
    probe(W, dW);
    probe(b, db);
    probe(x, dx);
}

TEST_CASE("softmax values and properties") {
    CHECK(softmax(std::vector<double>{0, 0}) == std::vector<double>{0.5, 0.5});
    for (double p : softmax(std::vector<double>{5, 5, 5})) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    // exp-normalize in extended precision
    const long double z = std::exp(1.0L) + std::exp(2.0L) + std::exp(3.0L);
    const auto p = softmax(std::vector<double>{1, 2, 3});
    const double expect[] = {0.090031, 0.244728, 0.665241};
    for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(p[i] - expect[i]) < 1e-6);
        CHECK(std::abs(p[i] - static_cast<double>(std::exp(static_cast<long double>(i + 1)) / z)) < 1e-15);
    }

    std::mt19937_64 gen(47);
    for (int trial = 0; trial < 100; ++trial) {
        auto l = randn(gen, 2 + trial % 9);
        for (double& v : l) v *= 30.0;
        const auto q = softmax(l);
        CHECK(std::abs(std::accumulate(q.begin(), q.end(), 0.0) - 1.0) < 1e-9);
        CHECK(std::all_of(q.begin(), q.end(), [](double v) { return v >= 0.0; }));
        auto shifted = l;
        for (double& v : shifted) v += 123.25;
        CHECK(max_abs_diff(softmax(shifted), q) < 1e-12);
    }
    const auto big = softmax(std::vector<double>{1000.0, 0.0});
    CHECK(std::isfinite(big[0]));
    CHECK(big[0] == doctest::Approx(1.0));
}

TEST_CASE("softmax_backward matches finite differences") {
    std::mt19937_64 gen(53);
    auto l = randn(gen, 4);
    const auto r = randn(gen, 4);
    const auto g = softmax_backward(softmax(l), r);
    for (std::size_t i = 0; i < l.size(); ++i) {
        const double s = l[i], h = 1e-6;
        l[i] = s + h;
        const double up = dotv(r, softmax(l));
        l[i] = s - h;
        const double dn = dotv(r, softmax(l));
        l[i] = s;
        CHECK(rel(g[i], (up - dn) / (2 * h)) < 1e-6);
    }
}

TEST_CASE("default config closes the shape chain") {
    const auto cfg = make_network_config(4);
    const auto chain = cfg.shape_chain();
    REQUIRE(chain.size() == 7);
    const int hours[] = {24, 21, 18, 15, 12, 1, 1};
    const int days[] = {7, 7, 7, 7, 7, 7, 1};
    for (int i = 0; i < 7; ++i) {
        CHECK(chain[i].height == hours[i]);
        CHECK(chain[i].width == days[i]);
    }
    CHECK(chain.back() == Shape3{64, 1, 1});

    NetworkConfig bad;
    bad.conv[4].kernel_h = 11;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = NetworkConfig{};
    bad.conv[0].kernel_w = 4; // the transposed reading does not fit
    bad.conv[1].kernel_w = 4;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = NetworkConfig{};
    bad.alpha = 1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    CHECK_THROWS_AS(make_network_config(1), Error);
}

TEST_CASE("init_params") {
    const auto cfg = make_network_config(2);
    const auto a = init_params(cfg, 5), b = init_params(cfg, 5);
    CHECK(a == b);
    CHECK(init_params(cfg, 6) != a);
    for (int l = 0; l < kLayers; ++l)
        for (double v : a.bias(l).values) CHECK(v == 0.0);
    check_params(cfg, a);
    CHECK(a.weights(0).shape == std::vector<int>{16, 8, 4, 1});
    CHECK(a.weights(5).shape == std::vector<int>{64, 32, 1, 7});
    CHECK(a.weights(6).shape == std::vector<int>{128, 64});
    CHECK(a.weights(8).shape == std::vector<int>{2, 64});

    // conv1 weight variance over 20 seeds (10240 draws)
    std::vector<double> pool;
    for (std::uint64_t s = 1; s <= 20; ++s) {
        const auto p = init_params(cfg, s);
        pool.insert(pool.end(), p.weights(0).values.begin(), p.weights(0).values.end());
    }
    REQUIRE(pool.size() >= 10000);
    const double mean = std::accumulate(pool.begin(), pool.end(), 0.0) / static_cast<double>(pool.size());
    double var = 0;
    for (double v : pool) var += (v - mean) * (v - mean);
    var /= static_cast<double>(pool.size());
    const double target = 2.0 / ((1.0 + 0.01 * 0.01) * 32.0);
    CHECK(std::abs(var - target) / target < 0.1);
    CHECK(std::abs(mean) < 0.01);
}

TEST_CASE("forward contracts") {
    const auto cfg = make_network_config(3);
    const auto params = init_params(cfg, 2);
    const std::vector<double> zeros(8 * 24 * 7, 0.0);
    const auto r = forward(cfg, params, zeros);
    for (double p : r.probs) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(r.features.size() == 64);
    CHECK(r.trace.conv_post.back().height == 1);
    CHECK(r.trace.conv_post.back().width == 1);

    std::mt19937_64 gen(59);
    const auto x = randn(gen, 8 * 24 * 7);
    const auto f1 = forward(cfg, params, x), f2 = forward(cfg, params, x);
    CHECK(f1.probs == f2.probs);
    CHECK(f1.features == f2.features);
    CHECK(std::abs(std::accumulate(f1.probs.begin(), f1.probs.end(), 0.0) - 1.0) < 1e-12);
    CHECK_THROWS_AS(forward(cfg, params, std::vector<double>(100, 0.0)), Error);
}

TEST_CASE("backward linearity and trace checks") {
    const auto cfg = NetworkConfig::downsized();
    const auto params = init_params(cfg, 3);
    std::mt19937_64 gen(61);
    const auto x = randn(gen, 2 * 10 * 7);
    const auto fw = forward(cfg, params, x);

    const auto zero = backward(cfg, params, fw.trace, std::vector<double>(3, 0.0));
    for (const auto& t : zero.tensors)
        for (double v : t.values) CHECK(v == 0.0);

    const std::vector<double> g{0.3, -0.5, 0.2}, g2{0.6, -1.0, 0.4};
    const auto a = backward(cfg, params, fw.trace, g), b = backward(cfg, params, fw.trace, g2);
    for (std::size_t t = 0; t < a.tensors.size(); ++t) {
        CHECK(a.tensors[t].shape == params.tensors[t].shape);
        for (std::size_t k = 0; k < a.tensors[t].values.size(); ++k)
            CHECK(b.tensors[t].values[k] == doctest::Approx(2 * a.tensors[t].values[k]).epsilon(1e-12));
    }

    const auto other = forward(make_network_config(3), init_params(make_network_config(3), 1),
                               std::vector<double>(8 * 24 * 7, 0.0));
    CHECK_THROWS_AS(backward(cfg, params, other.trace, g), Error);
    CHECK_THROWS_AS(backward(cfg, params, fw.trace, std::vector<double>(2, 0.0)), Error);
}

}
