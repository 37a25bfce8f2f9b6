#pragma once

#include <cstdint>

#include "mvf/bitparse/bits.hpp"

namespace mvf::bitparse::cavlc {

// Parses one residual_block_cavlc() and returns TotalCoeff. nc is the
// coeff_token context (-1 selects the chroma DC table).
int parse_residual_block(BitReader& reader, int nc, int max_num_coeff);

// coded_block_pattern from its me(v) code number.
int decode_cbp(uint32_t code_num, bool intra);

}  // namespace mvf::bitparse::cavlc
