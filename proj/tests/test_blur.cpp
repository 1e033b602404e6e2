#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "tilegan/blur.hpp"
#include "tilegan/rng.hpp"
#include "tilegan/tape.hpp"

namespace {

using namespace tilegan;
using detail::boundary_mode;

// Independent index folding for the oracle: mirror with the edge repeated
// (-1 -> 0, -2 -> 1) or modular wrap, written without reference to the
// library's helper.
int fold(int i, int n, boundary_mode mode) {
    if (mode == boundary_mode::periodic)
        return ((i % n) + n) % n;
    while (i < 0 || i >= n) {
        if (i < 0) i = -1 - i;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

// Dense O(H*W*k^2) 2-D convolution with the outer-product kernel. The
// separable implementation must reproduce this to roundoff.
tensor2 dense_blur(const tensor2& img, int k, double sigma,
                   boundary_mode mode) {
    const int h = static_cast<int>(img.rows());
    const int w = static_cast<int>(img.cols());
    const int r = k / 2;
    std::vector<double> taps(k);
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
        double d = i - r;
        taps[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += taps[i];
    }
    for (double& t : taps)
        t /= sum;
    tensor2 out(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int dy = 0; dy < k; ++dy)
                for (int dx = 0; dx < k; ++dx)
                    acc += taps[dy] * taps[dx] *
                           img(fold(y + dy - r, h, mode),
                               fold(x + dx - r, w, mode));
            out(y, x) = acc;
        }
    return out;
}

tensor2 random_image(int h, int w, rng& gen) {
    tensor2 img(h, w);
    for (int i = 0; i < img.size(); ++i)
        img.data()[i] = gen.normal();
    return img;
}

} // namespace

TEST_CASE("kernel size follows ceil(cell/10) bumped to odd") {
    // Worked cases: a 2800-wide image with 28 repeats has 100-pixel cells,
    // ceil(10) = 10 -> 11; 64/8 = 8-pixel cells, ceil(0.8) = 1; 280/4 = 70,
    // ceil(7) = 7 already odd.
    REQUIRE(blur_kernel_size(2800, 2800, 28, 28) == 11);
    REQUIRE(blur_kernel_size(64, 64, 8, 8) == 1);
    REQUIRE(blur_kernel_size(280, 280, 4, 4) == 7);

    for (int h : {16, 32, 64, 100, 128, 200, 256, 300, 400, 512})
        for (int p = 1; p <= 32; ++p) {
            int expect = static_cast<int>(
                std::ceil(static_cast<double>(h) / p / 10.0));
            if (expect < 1) expect = 1;
            if (expect % 2 == 0) expect += 1;
            REQUIRE(blur_kernel_size(h, h, p, p) == expect);
        }

    // With distinct axes the smaller cell wins.
    REQUIRE(blur_kernel_size(2800, 64, 28, 8) ==
            blur_kernel_size(64, 64, 8, 8));
    REQUIRE_THROWS_AS(blur_kernel_size(0, 64, 8, 8), contract_error);
}

TEST_CASE("sigma is k/6 floored at 0.8") {
    REQUIRE(blur_sigma(1) == 0.8);
    REQUIRE(blur_sigma(3) == 0.8);
    REQUIRE(blur_sigma(5) == Catch::Approx(5.0 / 6.0).margin(1e-15));
    REQUIRE(blur_sigma(11) == Catch::Approx(11.0 / 6.0).margin(1e-15));
    blur_config cfg = blur_config_for(2800, 2800, 28, 28);
    REQUIRE(cfg.k == 11);
    REQUIRE(cfg.sigma == Catch::Approx(11.0 / 6.0).margin(1e-15));
}

TEST_CASE("gaussian taps are normalized and symmetric") {
    for (int k : {1, 3, 5, 11}) {
        auto taps = detail::gaussian_taps(k, blur_sigma(k));
        double sum = 0.0;
        for (double t : taps)
            sum += t;
        REQUIRE(sum == Catch::Approx(1.0).margin(1e-12));
        for (int i = 0; i < k / 2; ++i)
            REQUIRE(taps[i] == Catch::Approx(taps[k - 1 - i]).margin(1e-15));
        if (k >= 3)
            REQUIRE(taps[k / 2] > taps[0]);
    }
    REQUIRE_THROWS_AS(detail::gaussian_taps(4, 1.0), contract_error);
    REQUIRE_THROWS_AS(detail::gaussian_taps(3, 0.0), contract_error);
}

TEST_CASE("separable blur equals a dense 2-D convolution") {
    rng gen(61);
    tensor2 img = random_image(16, 16, gen);
    for (auto mode : {boundary_mode::reflect, boundary_mode::periodic}) {
        blur_config cfg;
        cfg.k = 5;
        cfg.sigma = blur_sigma(5);
        tensor2 fast = gaussian_blur(img, cfg, mode);
        tensor2 slow = dense_blur(img, 5, cfg.sigma, mode);
        REQUIRE((fast - slow).cwiseAbs().maxCoeff() < 1e-12);
    }

    // Non-square image, larger kernel.
    tensor2 rect = random_image(12, 20, gen);
    blur_config cfg;
    cfg.k = 7;
    cfg.sigma = blur_sigma(7);
    tensor2 fast = gaussian_blur(rect, cfg, boundary_mode::reflect);
    tensor2 slow = dense_blur(rect, 7, cfg.sigma, boundary_mode::reflect);
    REQUIRE((fast - slow).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("k equal to one is the exact identity") {
    rng gen(62);
    tensor2 img = random_image(9, 13, gen);
    blur_config cfg;
    cfg.k = 1;
    cfg.sigma = 0.8;
    tensor2 out = gaussian_blur(img, cfg);
    for (int i = 0; i < img.size(); ++i)
        REQUIRE(out.data()[i] == img.data()[i]);
}

TEST_CASE("oversized kernels clamp to the image and report it") {
    rng gen(63);
    tensor2 img = random_image(6, 6, gen);
    blur_config cfg;
    cfg.k = 11;
    cfg.sigma = blur_sigma(11);
    int requested = 0, used = 0;
    tensor2 out = gaussian_blur(img, cfg, boundary_mode::reflect,
                                [&](int rq, int us) {
                                    requested = rq;
                                    used = us;
                                });
    REQUIRE(requested == 11);
    REQUIRE(used == 5);
    blur_config c5;
    c5.k = 5;
    c5.sigma = cfg.sigma; // sigma is kept; only the support shrinks
    tensor2 direct = gaussian_blur(img, c5, boundary_mode::reflect);
    REQUIRE((out - direct).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("blur preserves constants and the mean under periodic wrap") {
    tensor2 flat = tensor2::Constant(10, 10, 0.37);
    blur_config cfg;
    cfg.k = 5;
    cfg.sigma = blur_sigma(5);
    for (auto mode : {boundary_mode::reflect, boundary_mode::periodic}) {
        tensor2 out = gaussian_blur(flat, cfg, mode);
        REQUIRE((out.array() - 0.37).abs().maxCoeff() < 1e-12);
    }
    rng gen(64);
    tensor2 img = random_image(10, 10, gen);
    tensor2 out = gaussian_blur(img, cfg, boundary_mode::periodic);
    REQUIRE(out.mean() == Catch::Approx(img.mean()).margin(1e-12));
}

TEST_CASE("buffer adjoint satisfies the inner-product identity") {
    rng gen(65);
    const int h = 8, w = 11, k = 5;
    auto taps = detail::gaussian_taps(k, blur_sigma(k));
    tensor2 x = random_image(h, w, gen);
    tensor2 y = random_image(h, w, gen);
    for (auto mode : {boundary_mode::reflect, boundary_mode::periodic}) {
        tensor2 bx(h, w), aty(h, w);
        detail::blur2d_buffer(x.data(), bx.data(), h, w, taps, mode);
        detail::blur2d_buffer_adjoint(y.data(), aty.data(), h, w, taps, mode);
        double lhs = (bx.array() * y.array()).sum();
        double rhs = (x.array() * aty.array()).sum();
        REQUIRE(lhs == Catch::Approx(rhs).margin(1e-10));
    }
}

TEST_CASE("taped blur gradient is the adjoint operator") {
    rng gen(66);
    const int h = 7, w = 9, k = 3;
    const double sigma = blur_sigma(k);
    tensor2 x = random_image(1, h * w, gen);
    tensor2 y = random_image(1, h * w, gen);
    for (auto mode : {boundary_mode::reflect, boundary_mode::periodic}) {
        ad::tape t;
        ad::node_id xn = t.input(x, true);
        ad::node_id b = t.blur2d(xn, h, w, k, sigma, mode);
        ad::node_id loss = t.sum_all(t.hadamard(b, t.constant(y)));
        auto adj = t.backward(loss);
        auto taps = detail::gaussian_taps(k, sigma);
        tensor2 want(1, h * w);
        detail::blur2d_buffer_adjoint(y.data(), want.data(), h, w, taps, mode);
        REQUIRE((t.value(adj[xn]) - want).cwiseAbs().maxCoeff() < 1e-12);
    }
}
