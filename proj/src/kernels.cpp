#include "retrofit/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace retrofit::kernels {

namespace scalar {

// Accumulates in double; this is the reference the SIMD variants are tested against.
float dot(const float *a, const float *b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return static_cast<float>(acc);
}

float squared_norm(const float *v, std::size_t n) { return dot(v, v, n); }

void scale(float *v, std::size_t n, float factor) {
    for (std::size_t i = 0; i < n; ++i) {
        v[i] *= factor;
    }
}

}  // namespace scalar

#if !defined(RETROFIT_HAVE_AVX2)
namespace avx2 {
float dot(const float *a, const float *b, std::size_t n) { return scalar::dot(a, b, n); }
float squared_norm(const float *v, std::size_t n) { return scalar::squared_norm(v, n); }
void scale(float *v, std::size_t n, float factor) { scalar::scale(v, n, factor); }
}  // namespace avx2
#endif

#if !defined(RETROFIT_HAVE_NEON)
namespace neon {
float dot(const float *a, const float *b, std::size_t n) { return scalar::dot(a, b, n); }
float squared_norm(const float *v, std::size_t n) { return scalar::squared_norm(v, n); }
void scale(float *v, std::size_t n, float factor) { scalar::scale(v, n, factor); }
}  // namespace neon
#endif

namespace {

struct Table {
    float (*dot)(const float *, const float *, std::size_t);
    float (*squared_norm)(const float *, std::size_t);
    void (*scale)(float *, std::size_t, float);
};

constexpr Table kScalar{scalar::dot, scalar::squared_norm, scalar::scale};
constexpr Table kAvx2{avx2::dot, avx2::squared_norm, avx2::scale};
constexpr Table kNeon{neon::dot, neon::squared_norm, neon::scale};

const Table &table_for(Backend b) {
    switch (b) {
        case Backend::avx2: return kAvx2;
        case Backend::neon: return kNeon;
        case Backend::scalar: break;
    }
    return kScalar;
}

Backend detect() {
    if (const char *forced = std::getenv("RETROFIT_SIMD")) {
        if (const auto b = parse_backend(forced); b && available(*b)) {
            return *b;
        }
    }
    if (available(Backend::avx2)) return Backend::avx2;
    if (available(Backend::neon)) return Backend::neon;
    return Backend::scalar;
}

std::atomic<int> g_backend{-1};

const Table &current() { return table_for(active()); }

}  // namespace

std::string_view to_string(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
        case Backend::neon: return "neon";
    }
    return "unknown";
}

std::optional<Backend> parse_backend(std::string_view name) {
    if (name == "scalar") return Backend::scalar;
    if (name == "avx2") return Backend::avx2;
    if (name == "neon") return Backend::neon;
    return std::nullopt;
}

bool available(Backend b) {
    switch (b) {
        case Backend::scalar:
            return true;
        case Backend::avx2:
#if defined(RETROFIT_HAVE_AVX2)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Backend::neon:
#if defined(RETROFIT_HAVE_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Backend active() {
    int b = g_backend.load(std::memory_order_acquire);
    if (b < 0) {
        b = static_cast<int>(detect());
        int expected = -1;
        if (!g_backend.compare_exchange_strong(expected, b)) {
            b = expected;
        }
    }
    return static_cast<Backend>(b);
}

void select(Backend b) {
    if (!available(b)) {
        throw std::invalid_argument("SIMD backend not available: " + std::string(to_string(b)));
    }
    g_backend.store(static_cast<int>(b), std::memory_order_release);
}

float dot(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("dot: dimension mismatch");
    }
    return current().dot(a.data(), b.data(), a.size());
}

float squared_norm(std::span<const float> v) { return current().squared_norm(v.data(), v.size()); }

void scale(std::span<float> v, float factor) { current().scale(v.data(), v.size(), factor); }

void similarity_matrix(std::span<const float> rows, std::span<const float> cols, std::size_t dim,
                       std::span<float> out) {
    if (dim == 0) {
        throw std::invalid_argument("similarity_matrix: zero dimension");
    }
    if (rows.size() % dim != 0 || cols.size() % dim != 0) {
        throw std::invalid_argument("similarity_matrix: buffer is not a whole number of rows");
    }
    const std::size_t n_rows = rows.size() / dim;
    const std::size_t n_cols = cols.size() / dim;
    if (out.size() != n_rows * n_cols) {
        throw std::invalid_argument("similarity_matrix: output size mismatch");
    }
    const auto kernel = current().dot;
    for (std::size_t i = 0; i < n_rows; ++i) {
        const float *row = rows.data() + i * dim;
        float *dst = out.data() + i * n_cols;
        for (std::size_t j = 0; j < n_cols; ++j) {
            dst[j] = kernel(row, cols.data() + j * dim, dim);
        }
    }
}

}  // namespace retrofit::kernels
