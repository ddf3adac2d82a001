#pragma once

// Attention map export: CSV (canonical, round-trips bit-exactly) and a
// plain SVG grid for eyeballing.

#include <iosfwd>
#include <string>

#include "mtplab/model.hpp"

namespace mtplab {

struct AttentionMaps {
  Matrix S1, S2;
};

// Header "layer,row,col,value", one line per entry of S1 then S2, zero-based
// indices, values in shortest round-trip form.
void write_attention_csv(const ForwardTrace& trace, std::ostream& out);
AttentionMaps read_attention_csv(std::istream& in);

// Two side-by-side T x T grids, darker = more weight, tokens along the axes.
std::string attention_svg(const ForwardTrace& trace, const ContentMatrix& z);

}  // namespace mtplab
