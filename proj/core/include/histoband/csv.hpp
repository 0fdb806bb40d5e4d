#pragma once

#include <iosfwd>
#include <string>

#include "histoband/dataset.hpp"

namespace histoband {

/// Reads "x1,...,xp,y" CSV (p inferred from the header). Parsing is
/// locale-independent; errors mention the 1-based line number. Throws
/// std::runtime_error on malformed input, including coordinates outside
/// [0,1] and files with no data rows — unless allow_empty, in which case a
/// header with zero rows yields an empty Dataset with dim set.
Dataset read_dataset_csv(std::istream& in, bool allow_empty = false);

/// Writes the same format with round-trip precision (17 significant digits).
void write_dataset_csv(std::ostream& out, const Dataset& data);

/// Shortest locale-independent decimal that reads back to the same double.
std::string format_double(double v);

}  // namespace histoband
