#include "retrofit/kernels.hpp"

#include <arm_neon.h>

namespace retrofit::kernels::neon {

float dot(const float *a, const float *b, std::size_t n) {
    float32x4_t acc0 = vdupq_n_f32(0.0f);
    float32x4_t acc1 = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = vfmaq_f32(acc0, vld1q_f32(a + i), vld1q_f32(b + i));
        acc1 = vfmaq_f32(acc1, vld1q_f32(a + i + 4), vld1q_f32(b + i + 4));
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f32(acc0, vld1q_f32(a + i), vld1q_f32(b + i));
    }
    float sum = vaddvq_f32(vaddq_f32(acc0, acc1));
    for (; i < n; ++i) {
        sum += a[i] * b[i];
    }
    return sum;
}

float squared_norm(const float *v, std::size_t n) { return dot(v, v, n); }

void scale(float *v, std::size_t n, float factor) {
    const float32x4_t f = vdupq_n_f32(factor);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        vst1q_f32(v + i, vmulq_f32(vld1q_f32(v + i), f));
    }
    for (; i < n; ++i) {
        v[i] *= factor;
    }
}

}  // namespace retrofit::kernels::neon
