#pragma once

// Dense float kernels behind the matcher. Every kernel has a scalar reference
// implementation plus AVX2/FMA (x86-64) or NEON (aarch64) variants; the widest
// variant the CPU supports is selected on first use.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace retrofit::kernels {

enum class Backend { scalar, avx2, neon };

std::string_view to_string(Backend b);
std::optional<Backend> parse_backend(std::string_view name);

/// Compiled in and supported by this CPU.
bool available(Backend b);

/// Backend currently used by the dispatching entry points. Honors the
/// RETROFIT_SIMD environment variable ("scalar", "avx2", "neon") on first use.
Backend active();

/// Forces a backend; throws std::invalid_argument if it is not available.
void select(Backend b);

float dot(std::span<const float> a, std::span<const float> b);
float squared_norm(std::span<const float> v);
void scale(std::span<float> v, float factor);

/// out[i * n_cols + j] = dot(row i of `rows`, row j of `cols`); rows are `dim` floats each.
void similarity_matrix(std::span<const float> rows, std::span<const float> cols, std::size_t dim,
                       std::span<float> out);

// Fixed-backend entry points, used for equivalence testing.
namespace scalar {
float dot(const float *a, const float *b, std::size_t n);
float squared_norm(const float *v, std::size_t n);
void scale(float *v, std::size_t n, float factor);
}  // namespace scalar

namespace avx2 {
float dot(const float *a, const float *b, std::size_t n);
float squared_norm(const float *v, std::size_t n);
void scale(float *v, std::size_t n, float factor);
}  // namespace avx2

namespace neon {
float dot(const float *a, const float *b, std::size_t n);
float squared_norm(const float *v, std::size_t n);
void scale(float *v, std::size_t n, float factor);
}  // namespace neon

}  // namespace retrofit::kernels
