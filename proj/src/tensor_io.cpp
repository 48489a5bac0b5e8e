#include "csaidx/tensor_io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>

namespace csaidx {

namespace {

void put_u32(std::array<uint8_t, 32>& buf, size_t at, uint32_t v) {
    buf[at + 0] = static_cast<uint8_t>(v & 0xFF);
    buf[at + 1] = static_cast<uint8_t>((v >> 8) & 0xFF);
    buf[at + 2] = static_cast<uint8_t>((v >> 16) & 0xFF);
    buf[at + 3] = static_cast<uint8_t>((v >> 24) & 0xFF);
}

uint32_t get_u32(const std::array<uint8_t, 32>& buf, size_t at) {
    return static_cast<uint32_t>(buf[at]) | (static_cast<uint32_t>(buf[at + 1]) << 8) |
           (static_cast<uint32_t>(buf[at + 2]) << 16) |
           (static_cast<uint32_t>(buf[at + 3]) << 24);
}

void write_section(std::ostream& os, uint8_t tag, std::span<const uint32_t> dims,
                   const std::vector<float>& data) {
    std::array<uint8_t, 32> header{};
    header[0] = 'C';
    header[1] = 'S';
    header[2] = 'A';
    header[3] = 'T';
    put_u32(header, 4, kTensorFileVersion);
    header[8] = tag;
    header[9] = static_cast<uint8_t>(dims.size());
    for (size_t i = 0; i < dims.size(); ++i) {
        put_u32(header, 12 + 4 * i, dims[i]);
    }
    os.write(reinterpret_cast<const char*>(header.data()), header.size());

    // fp32 payload, little endian; written via byte copies so the format does
    // not depend on host endianness.
    std::vector<uint8_t> payload(data.size() * 4);
    for (size_t i = 0; i < data.size(); ++i) {
        uint32_t bits;
        std::memcpy(&bits, &data[i], 4);
        payload[4 * i + 0] = static_cast<uint8_t>(bits & 0xFF);
        payload[4 * i + 1] = static_cast<uint8_t>((bits >> 8) & 0xFF);
        payload[4 * i + 2] = static_cast<uint8_t>((bits >> 16) & 0xFF);
        payload[4 * i + 3] = static_cast<uint8_t>((bits >> 24) & 0xFF);
    }
    os.write(reinterpret_cast<const char*>(payload.data()),
             static_cast<std::streamsize>(payload.size()));
}

}  // namespace

void write_inputs(std::ostream& os, const IndexerInputs& inputs, const ProblemDims& dims) {
    const uint32_t B = static_cast<uint32_t>(dims.batch);
    const uint32_t S = static_cast<uint32_t>(dims.seq_len);
    const uint32_t T = static_cast<uint32_t>(dims.key_blocks);
    const uint32_t H = static_cast<uint32_t>(dims.heads);
    const uint32_t D = static_cast<uint32_t>(dims.head_dim);

    const uint32_t qdims[4] = {B, S, H, D};
    const uint32_t kdims[3] = {B, T, D};
    const uint32_t wdims[3] = {B, S, H};
    write_section(os, 0, qdims, inputs.q);
    write_section(os, 1, kdims, inputs.kc);
    write_section(os, 2, wdims, inputs.w);
}

uint64_t write_inputs_file(const std::string& path, const IndexerInputs& inputs,
                           const ProblemDims& dims) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) {
        throw std::runtime_error("write_inputs_file: cannot open " + path);
    }
    write_inputs(os, inputs, dims);
    os.flush();
    if (!os) {
        throw std::runtime_error("write_inputs_file: write failed for " + path);
    }
    const uint64_t sections = 3 * 32;
    return sections + 4 * (inputs.q.size() + inputs.kc.size() + inputs.w.size());
}

std::vector<TensorSection> read_sections(std::istream& is) {
    std::vector<TensorSection> out;
    std::array<uint8_t, 32> header{};
    while (is.read(reinterpret_cast<char*>(header.data()), header.size())) {
        if (header[0] != 'C' || header[1] != 'S' || header[2] != 'A' || header[3] != 'T') {
            throw std::runtime_error("read_sections: bad magic");
        }
        if (get_u32(header, 4) != kTensorFileVersion) {
            throw std::runtime_error("read_sections: unsupported version");
        }
        TensorSection section;
        section.tag = header[8];
        section.rank = header[9];
        if (section.rank == 0 || section.rank > 4) {
            throw std::runtime_error("read_sections: bad rank");
        }
        uint64_t elems = 1;
        for (size_t i = 0; i < 4; ++i) {
            section.dims[i] = get_u32(header, 12 + 4 * i);
            if (i < section.rank) {
                if (section.dims[i] == 0) {
                    throw std::runtime_error("read_sections: zero extent");
                }
                elems *= section.dims[i];
            }
        }
        std::vector<uint8_t> payload(elems * 4);
        if (!is.read(reinterpret_cast<char*>(payload.data()),
                     static_cast<std::streamsize>(payload.size()))) {
            throw std::runtime_error("read_sections: truncated payload");
        }
        section.data.resize(elems);
        for (uint64_t i = 0; i < elems; ++i) {
            const uint32_t bits = static_cast<uint32_t>(payload[4 * i]) |
                                  (static_cast<uint32_t>(payload[4 * i + 1]) << 8) |
                                  (static_cast<uint32_t>(payload[4 * i + 2]) << 16) |
                                  (static_cast<uint32_t>(payload[4 * i + 3]) << 24);
            std::memcpy(&section.data[i], &bits, 4);
        }
        out.push_back(std::move(section));
    }
    // A clean end of stream reads zero bytes; anything between 0 and a full
    // header is a truncated file, not an end marker.
    if (is.gcount() != 0) {
        throw std::runtime_error("read_sections: truncated header");
    }
    if (out.empty()) {
        throw std::runtime_error("read_sections: empty stream");
    }
    return out;
}

}  // namespace csaidx
