#pragma once

#include "afieti/geometry.hpp"

#include <iosfwd>
#include <string>

namespace afieti {

/// Plain-text multipatch description (format documented in docs/multipatch_format.md).
void write_multipatch(const MultiPatch& mp, std::ostream& out);
std::string multipatch_to_string(const MultiPatch& mp);
/// Throws ParseError with a line number on malformed input.
MultiPatch read_multipatch(std::istream& in);
MultiPatch load_multipatch(const std::string& path);
void save_multipatch(const MultiPatch& mp, const std::string& path);

}  // namespace afieti
