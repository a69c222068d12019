#pragma once

#include <filesystem>
#include <iosfwd>

#include "bss/simulate.hpp"

namespace bss {

/// CSV with header t,x and 17 significant digits, so paths round-trip exactly.
void write_path_csv(std::ostream& out, const SamplePath& path);
void write_path_csv(const std::filesystem::path& file, const SamplePath& path);

/// Reads a t,x CSV. Times must start at 0 and be equidistant up to 1e-9
/// relative jitter; otherwise throws DataError. The step is the mean spacing.
SamplePath read_path_csv(std::istream& in);
SamplePath read_path_csv(const std::filesystem::path& file);

}  // namespace bss
