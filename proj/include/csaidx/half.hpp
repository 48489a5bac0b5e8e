#pragma once

#include <cstdint>

namespace csaidx {

inline constexpr float kHalfMax = 65504.0f;

// IEEE binary16 conversion, round to nearest even. Overflow goes to the
// infinity encoding; subnormals are exact.
uint16_t float_to_half_bits(float x);
float half_bits_to_float(uint16_t bits);

// Round one fp32 value through binary16 and back. Anything beyond the
// binary16 range, infinities included, clamps to +/-65504 instead of
// erroring; NaN passes through. This is the emulated-accumulation rounding
// step, applied after each per-head dot product and after each head's
// weighted contribution is added.
float half_round(float x);

// Hardware (F16C) route of half_round, used as an independent cross-check of
// the bit-twiddled converter. Returns false when the CPU lacks F16C.
bool half_round_hw(float x, float& out);

}  // namespace csaidx
