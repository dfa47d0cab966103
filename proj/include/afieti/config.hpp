#pragma once

#include "afieti/experiment.hpp"

#include <iosfwd>
#include <string>

namespace afieti {

/// Reads `key = value` lines grouped under `[section]` headers. Sections and keys:
///   [problem] preset, domain_file, p, n_el, n_patch, lambda, mu
///   [solver]  variant, tol, max_iter
///   [output]  csv, seed
///   [sweep]   p, n_el, n_patch, variants   (comma-separated lists)
/// Blank lines and lines starting with '#' or ';' are ignored. Unknown sections or keys,
/// repeated keys and malformed values raise ConfigError with the line number.
SweepConfig parse_config(std::istream& is);
SweepConfig load_config(const std::string& path);

}  // namespace afieti
