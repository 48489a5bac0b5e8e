#include <immintrin.h>

#include "kernels/kernels_internal.hpp"

namespace csaidx::detail {

float half_round_f16c_raw(float x) {
    const uint16_t h = static_cast<uint16_t>(_cvtss_sh(x, _MM_FROUND_TO_NEAREST_INT));
    if ((h & 0x7FFFu) == 0x7C00u) {
        return (h & 0x8000u) ? -65504.0f : 65504.0f;
    }
    return _cvtsh_ss(h);
}

}  // namespace csaidx::detail
