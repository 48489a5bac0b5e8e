#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "csaidx/types.hpp"

namespace csaidx {

// Input dump format: one file, three back-to-back sections in fixed order
// (queries, keys, weights). Every section is a 32-byte little-endian header
// followed by the fp32 payload:
//
//   offset  size  field
//        0     4  magic "CSAT"
//        4     4  u32 version (currently 1)
//        8     1  u8 tag: 0 = queries, 1 = keys, 2 = weights
//        9     1  u8 rank
//       10     2  u16 reserved (zero)
//       12    16  u32 dims[4], trailing entries zero
//       28     4  u32 reserved (zero)
//
// Section shapes: q [B, S, H_I, d_h], kc [B, T, d_h], w [B, S, H_I].

inline constexpr uint32_t kTensorFileVersion = 1;

struct TensorSection {
    uint8_t tag = 0;
    uint8_t rank = 0;
    uint32_t dims[4] = {0, 0, 0, 0};
    std::vector<float> data;
};

void write_inputs(std::ostream& os, const IndexerInputs& inputs, const ProblemDims& dims);
uint64_t write_inputs_file(const std::string& path, const IndexerInputs& inputs,
                           const ProblemDims& dims);  // returns bytes written

// Reads all sections; throws std::runtime_error on a malformed stream.
std::vector<TensorSection> read_sections(std::istream& is);

}  // namespace csaidx
