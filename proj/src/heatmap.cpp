#include "mtplab/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "mtplab/error.hpp"
#include "text.hpp"

namespace mtplab {

void write_attention_csv(const ForwardTrace& trace, std::ostream& out) {
  out << "layer,row,col,value\n";
  int layer = 1;
  for (const Matrix* m : {&trace.S1, &trace.S2}) {
    for (std::size_t i = 0; i < m->rows(); ++i)
      for (std::size_t j = 0; j < m->cols(); ++j)
        out << layer << ',' << i << ',' << j << ',' << text::format_double((*m)(i, j)) << '\n';
    ++layer;
  }
  if (!out) throw Error(Errc::io, "attention csv: write failed");
}

AttentionMaps read_attention_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "layer,row,col,value")
    throw Error(Errc::parse, "attention csv: missing header");
  struct Cell {
    int layer;
    std::size_t i, j;
    double v;
  };
  std::vector<Cell> cells;
  std::size_t t = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto parts = text::split({line, 0}, ",");
    if (parts.size() != 4) throw ParseError(0, "attention csv: expected 4 fields");
    Cell c{text::parse_int<int>(parts[0]), text::parse_int<std::size_t>(parts[1]),
           text::parse_int<std::size_t>(parts[2]), text::parse_double(parts[3].text, "attention csv")};
    if (c.layer != 1 && c.layer != 2) throw ParseError(parts[0].offset, "attention csv: bad layer");
    t = std::max({t, c.i + 1, c.j + 1});
    cells.push_back(c);
  }
  if (cells.size() != 2 * t * t) throw Error(Errc::parse, "attention csv: incomplete matrices");
  AttentionMaps maps{Matrix(t, t), Matrix(t, t)};
  for (const auto& c : cells) (c.layer == 1 ? maps.S1 : maps.S2)(c.i, c.j) = c.v;
  return maps;
}

std::string attention_svg(const ForwardTrace& trace, const ContentMatrix& z) {
  const std::size_t t = trace.S1.rows();
  const int cell = 24, margin = 30, gap = 40;
  const int side = static_cast<int>(t) * cell;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 2 * side + gap + 2 * margin
     << "\" height=\"" << side + 2 * margin << "\" font-family=\"monospace\" font-size=\"10\">\n";
  int x0 = margin;
  int layer = 1;
  for (const Matrix* m : {&trace.S1, &trace.S2}) {
    os << "<text x=\"" << x0 << "\" y=\"" << margin - 16 << "\">S" << layer << "</text>\n";
    for (std::size_t i = 0; i < t; ++i) {
      os << "<text x=\"" << x0 - 14 << "\" y=\"" << margin + static_cast<int>(i) * cell + 16
         << "\">" << z.tokens()[i] << "</text>\n";
      os << "<text x=\"" << x0 + static_cast<int>(i) * cell + 8 << "\" y=\"" << margin - 4
         << "\">" << z.tokens()[i] << "</text>\n";
      for (std::size_t j = 0; j < t; ++j) {
        const int shade = static_cast<int>(std::lround(255.0 * (1.0 - std::clamp((*m)(i, j), 0.0, 1.0))));
        os << "<rect x=\"" << x0 + static_cast<int>(j) * cell << "\" y=\""
           << margin + static_cast<int>(i) * cell << "\" width=\"" << cell << "\" height=\"" << cell
           << "\" fill=\"rgb(" << shade << ',' << shade << ",255)\" stroke=\"#ccc\"/>\n";
      }
    }
    x0 += side + gap;
    ++layer;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace mtplab
