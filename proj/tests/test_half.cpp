#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "csaidx/half.hpp"
#include "doctest.h"

using namespace csaidx;

namespace {
constexpr float kInf = std::numeric_limits<float>::infinity();

bool same_bits(float a, float b) {
    return std::bit_cast<uint32_t>(a) == std::bit_cast<uint32_t>(b);
}
}  // namespace

TEST_CASE("binary16 known encodings") {
    CHECK(float_to_half_bits(0.0f) == 0x0000);
    CHECK(float_to_half_bits(-0.0f) == 0x8000);
    CHECK(float_to_half_bits(1.0f) == 0x3C00);
    CHECK(float_to_half_bits(-2.0f) == 0xC000);
    CHECK(float_to_half_bits(65504.0f) == 0x7BFF);
    CHECK(float_to_half_bits(kInf) == 0x7C00);
    CHECK(float_to_half_bits(-kInf) == 0xFC00);
    CHECK(float_to_half_bits(std::ldexp(1.0f, -14)) == 0x0400);  // smallest normal
    CHECK(float_to_half_bits(std::ldexp(1.0f, -24)) == 0x0001);  // smallest subnormal
    // NaN maps to a quiet NaN encoding: exponent all ones, nonzero mantissa.
    const uint16_t nan_bits = float_to_half_bits(std::numeric_limits<float>::quiet_NaN());
    CHECK((nan_bits & 0x7C00) == 0x7C00);
    CHECK((nan_bits & 0x03FF) != 0);
}

TEST_CASE("round to nearest even at the mantissa boundary") {
    // 1 + 2^-11 sits exactly between 1.0 and 1 + 2^-10; ties go to the even
    // mantissa, which is 1.0.
    CHECK(half_round(1.0f + std::ldexp(1.0f, -11)) == 1.0f);
    // 1 + 3*2^-11 sits between 1 + 2^-10 and 1 + 2^-9; the even neighbor wins.
    CHECK(half_round(1.0f + 3.0f * std::ldexp(1.0f, -11)) == 1.0f + std::ldexp(1.0f, -9));
    // Just above the halfway point rounds up.
    CHECK(half_round(1.0f + std::ldexp(1.0f, -11) + std::ldexp(1.0f, -18)) ==
          1.0f + std::ldexp(1.0f, -10));
    // Exact binary16 values survive unchanged.
    CHECK(half_round(1.0f + std::ldexp(1.0f, -10)) == 1.0f + std::ldexp(1.0f, -10));
    CHECK(half_round(0.25f) == 0.25f);
}

TEST_CASE("subnormal rounding") {
    const float tiny = std::ldexp(1.0f, -24);
    CHECK(half_round(tiny) == tiny);
    // Half of the smallest subnormal ties with zero; even mantissa is zero.
    CHECK(half_round(std::ldexp(1.0f, -25)) == 0.0f);
    CHECK(half_round(-std::ldexp(1.0f, -25)) == 0.0f);
    CHECK(std::signbit(half_round(-std::ldexp(1.0f, -25))));
    // Three quarters of the way up rounds to the subnormal, not zero.
    CHECK(half_round(0.75f * tiny) == tiny);
    // Anything at or below a quarter step vanishes.
    CHECK(half_round(std::ldexp(1.0f, -26)) == 0.0f);
    CHECK(half_round(1e-30f) == 0.0f);
    // Largest subnormal and the normal boundary tie case.
    const float max_sub = std::ldexp(1.0f, -14) - std::ldexp(1.0f, -24);
    CHECK(half_round(max_sub) == max_sub);
    CHECK(half_round(std::ldexp(1.0f, -14) - std::ldexp(1.0f, -25)) == std::ldexp(1.0f, -14));
}

TEST_CASE("saturation at the binary16 range edge") {
    CHECK(half_round(65504.0f) == 65504.0f);
    // Below the tie point 65520 everything still rounds down into range.
    CHECK(half_round(65519.0f) == 65504.0f);
    CHECK(half_round(65519.99f) == 65504.0f);
    // 65520 ties toward 65536, which overflows; the emulated step clamps.
    CHECK(half_round(65520.0f) == 65504.0f);
    CHECK(half_round(70000.0f) == 65504.0f);
    CHECK(half_round(3.0e38f) == 65504.0f);
    CHECK(half_round(kInf) == 65504.0f);
    CHECK(half_round(-65520.0f) == -65504.0f);
    CHECK(half_round(-kInf) == -65504.0f);
    CHECK(std::isnan(half_round(std::numeric_limits<float>::quiet_NaN())));
    // The raw converter, by contrast, encodes infinity.
    CHECK(float_to_half_bits(65520.0f) == 0x7C00);
    CHECK(float_to_half_bits(-65520.0f) == 0xFC00);
}

TEST_CASE("sign of zero is preserved") {
    CHECK(same_bits(half_round(0.0f), 0.0f));
    CHECK(same_bits(half_round(-0.0f), -0.0f));
}

TEST_CASE("every binary16 value round-trips exactly") {
    for (uint32_t h = 0; h < 0x10000; ++h) {
        const uint16_t bits = static_cast<uint16_t>(h);
        const float f = half_bits_to_float(bits);
        if (std::isnan(f)) {
            const uint16_t back = float_to_half_bits(f);
            CHECK((back & 0x7C00) == 0x7C00);
            CHECK((back & 0x03FF) != 0);
            continue;
        }
        CHECK(float_to_half_bits(f) == bits);
        if (!std::isinf(f)) {
            CHECK(half_round(f) == f);          // representable values are fixed points
            CHECK(same_bits(half_round(f), f)); // including -0.0
        }
    }
}

TEST_CASE("rounding is idempotent") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 100000; ++i) {
        const float x = std::bit_cast<float>(static_cast<uint32_t>(rng()));
        if (std::isnan(x)) continue;
        const float once = half_round(x);
        CHECK(same_bits(half_round(once), once));
    }
}

TEST_CASE("bit-twiddled converter agrees with the hardware converter") {
    float hw = 0.0f;
    if (!half_round_hw(0.0f, hw)) {
        MESSAGE("F16C not available; skipping hardware cross-check");
        return;
    }
    // All values reachable from binary16 itself.
    for (uint32_t h = 0; h < 0x10000; ++h) {
        const float f = half_bits_to_float(static_cast<uint16_t>(h));
        if (std::isnan(f)) continue;
        REQUIRE(half_round_hw(f, hw));
        CHECK(same_bits(half_round(f), hw));
    }
    // A large random sample of fp32 bit patterns.
    std::mt19937_64 rng(19);
    for (int i = 0; i < 1000000; ++i) {
        const float x = std::bit_cast<float>(static_cast<uint32_t>(rng()));
        if (std::isnan(x)) continue;
        REQUIRE(half_round_hw(x, hw));
        if (!same_bits(half_round(x), hw)) {
            CAPTURE(std::bit_cast<uint32_t>(x));
            CHECK(same_bits(half_round(x), hw));
        }
    }
    // Dense sweep around the saturation edge.
    float x = 65400.0f;
    while (x < 65600.0f) {
        REQUIRE(half_round_hw(x, hw));
        CHECK(same_bits(half_round(x), hw));
        x = std::nextafter(x, kInf);
    }
}
