#include "retrofit/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace k = retrofit::kernels;

namespace {

std::vector<float> random_vector(std::mt19937 &rng, std::size_t n) {
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    std::vector<float> v(n);
    for (auto &x : v) x = dist(rng);
    return v;
}

double exact_dot(const std::vector<float> &a, const std::vector<float> &b) {
    long double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
    return static_cast<double>(s);
}

std::vector<k::Backend> compiled_backends() {
    std::vector<k::Backend> out;
    for (const auto b : {k::Backend::scalar, k::Backend::avx2, k::Backend::neon}) {
        if (k::available(b)) out.push_back(b);
    }
    return out;
}

struct BackendGuard {
    k::Backend saved = k::active();
    ~BackendGuard() { k::select(saved); }
};

}  // namespace

TEST_CASE("scalar kernels against a long double reference") {
    std::mt19937 rng(1);
    for (const std::size_t n : {0u, 1u, 7u, 8u, 9u, 31u, 512u, 1000u}) {
        const auto a = random_vector(rng, n);
        const auto b = random_vector(rng, n);
        CHECK(k::scalar::dot(a.data(), b.data(), n) == doctest::Approx(exact_dot(a, b)).epsilon(1e-6));
        CHECK(k::scalar::squared_norm(a.data(), n) == doctest::Approx(exact_dot(a, a)).epsilon(1e-6));
    }
}

TEST_CASE("SIMD kernels agree with the scalar reference") {
    std::mt19937 rng(2);
    for (const std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 15u, 16u, 17u, 33u, 255u, 512u, 1031u}) {
        const auto a = random_vector(rng, n);
        const auto b = random_vector(rng, n);
        const float ref_dot = k::scalar::dot(a.data(), b.data(), n);
        const float ref_norm = k::scalar::squared_norm(a.data(), n);
        auto ref_scaled = a;
        k::scalar::scale(ref_scaled.data(), n, 0.37f);
        const double tol = 1e-5 * std::max(1.0, static_cast<double>(n) / 64.0);
        if (k::available(k::Backend::avx2)) {
            CHECK(k::avx2::dot(a.data(), b.data(), n) == doctest::Approx(ref_dot).epsilon(tol));
            CHECK(std::abs(k::avx2::dot(a.data(), b.data(), n) - ref_dot) <= tol);
            CHECK(std::abs(k::avx2::squared_norm(a.data(), n) - ref_norm) <= tol * std::max(1.0f, ref_norm));
            auto scaled = a;
            k::avx2::scale(scaled.data(), n, 0.37f);
            for (std::size_t i = 0; i < n; ++i) CHECK(scaled[i] == ref_scaled[i]);
        }
        if (k::available(k::Backend::neon)) {
            CHECK(std::abs(k::neon::dot(a.data(), b.data(), n) - ref_dot) <= tol);
            CHECK(std::abs(k::neon::squared_norm(a.data(), n) - ref_norm) <= tol * std::max(1.0f, ref_norm));
        }
    }
}

TEST_CASE("similarity matrix is identical in shape and close in value on every backend") {
    BackendGuard guard;
    std::mt19937 rng(3);
    const std::size_t rows = 13;
    const std::size_t cols = 7;
    const std::size_t dim = 96;
    const auto r = random_vector(rng, rows * dim);
    const auto c = random_vector(rng, cols * dim);
    std::vector<float> expected(rows * cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            expected[i * cols + j] = k::scalar::dot(&r[i * dim], &c[j * dim], dim);
        }
    }
    for (const auto b : compiled_backends()) {
        CAPTURE(k::to_string(b));
        k::select(b);
        CHECK(k::active() == b);
        std::vector<float> out(rows * cols, -99.0f);
        k::similarity_matrix(r, c, dim, out);
        for (std::size_t i = 0; i < out.size(); ++i) CHECK(std::abs(out[i] - expected[i]) <= 1e-5);
    }
}

TEST_CASE("backend names and selection") {
    BackendGuard guard;
    CHECK(k::available(k::Backend::scalar));
    CHECK(k::parse_backend("avx2") == k::Backend::avx2);
    CHECK_FALSE(k::parse_backend("sse").has_value());
    CHECK(k::to_string(k::Backend::neon) == "neon");
    k::select(k::Backend::scalar);
    CHECK(k::active() == k::Backend::scalar);
    if (!k::available(k::Backend::neon)) CHECK_THROWS_AS(k::select(k::Backend::neon), std::invalid_argument);
}

TEST_CASE("dispatching entry points check lengths") {
    const std::vector<float> a(4, 1.0f);
    const std::vector<float> b(5, 1.0f);
    CHECK_THROWS_AS(k::dot(a, b), std::invalid_argument);
    std::vector<float> out(1);
    CHECK_THROWS_AS(k::similarity_matrix(a, b, 4, out), std::invalid_argument);
}
