#include "csaidx/half.hpp"

#include <bit>

#if defined(CSAIDX_X86_KERNELS)
#include "kernels/kernels_internal.hpp"
#endif

namespace csaidx {

namespace {

// Right shift with round to nearest, ties to even. v stays well under 2^31.
inline uint32_t rne_shift(uint32_t v, int shift) {
    const uint32_t bias = ((1u << (shift - 1)) - 1u) + ((v >> shift) & 1u);
    return (v + bias) >> shift;
}

}  // namespace

uint16_t float_to_half_bits(float x) {
    const uint32_t bits = std::bit_cast<uint32_t>(x);
    const uint16_t sign = static_cast<uint16_t>((bits >> 16) & 0x8000u);
    const uint32_t abs = bits & 0x7FFFFFFFu;

    if (abs >= 0x7F800000u) {
        if (abs > 0x7F800000u) return sign | 0x7E00u;  // NaN, quieted
        return sign | 0x7C00u;                          // infinity
    }

    const int exp32 = static_cast<int>(abs >> 23) - 127;
    const int exp16 = exp32 + 15;
    const uint32_t mant = abs & 0x7FFFFFu;

    if (exp16 >= 31) return sign | 0x7C00u;  // overflow, round would not save it

    if (exp16 <= 0) {
        // Subnormal target. Anything below a quarter of the smallest
        // subnormal (and every fp32 subnormal input) flushes to zero under
        // round-to-nearest.
        if (exp16 < -17 || (abs >> 23) == 0) return sign;
        // value = (1.mant) * 2^exp32, expressed in units of 2^-24.
        const uint32_t full = mant | 0x800000u;
        const int shift = -1 - exp32;  // 14..31 for exp16 in [0, -17]
        if (shift >= 32) return sign;
        const uint32_t rounded = rne_shift(full, shift);
        // A carry to 0x400 lands exactly on the smallest normal encoding.
        return static_cast<uint16_t>(sign | rounded);
    }

    const uint32_t rounded = rne_shift(mant, 13);
    // Mantissa carry bumps the exponent; bumping 30 to 31 is the honest
    // round-to-infinity overflow.
    return static_cast<uint16_t>(sign | ((static_cast<uint32_t>(exp16) << 10) + rounded));
}

float half_bits_to_float(uint16_t h) {
    const uint32_t sign = (static_cast<uint32_t>(h) & 0x8000u) << 16;
    const uint32_t exp = (h >> 10) & 0x1Fu;
    uint32_t mant = h & 0x3FFu;

    uint32_t bits;
    if (exp == 0) {
        if (mant == 0) {
            bits = sign;
        } else {
            // Normalize: value = mant * 2^-24.
            int e = -1;
            do {
                mant <<= 1;
                ++e;
            } while ((mant & 0x400u) == 0);
            bits = sign | (static_cast<uint32_t>(127 - 15 - e) << 23)
                 | ((mant & 0x3FFu) << 13);
        }
    } else if (exp == 31) {
        bits = sign | 0x7F800000u | (mant << 13);
    } else {
        bits = sign | ((exp - 15 + 127) << 23) | (mant << 13);
    }
    return std::bit_cast<float>(bits);
}

float half_round(float x) {
    const uint16_t h = float_to_half_bits(x);
    if ((h & 0x7FFFu) == 0x7C00u) {
        // Out of range (or infinite input): saturate instead of erroring.
        return (h & 0x8000u) ? -kHalfMax : kHalfMax;
    }
    return half_bits_to_float(h);
}

#if defined(CSAIDX_X86_KERNELS)
bool half_round_hw(float x, float& out) {
    if (!__builtin_cpu_supports("f16c")) return false;
    out = detail::half_round_f16c_raw(x);
    return true;
}
#else
bool half_round_hw(float, float&) { return false; }
#endif

}  // namespace csaidx
