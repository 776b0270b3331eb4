#pragma once

#include <filesystem>
#include <string>

namespace corrpersist {

/// Writes `contents` to a sibling temp file and renames it over `path`, so a
/// reader never sees a partial file. Creates missing parent directories.
/// Throws Error(Io).
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Shortest decimal text that round-trips to the same double. NaN gives
/// "nan", infinities "inf" / "-inf".
std::string format_double(double v);

/// Like format_double but NaN becomes an empty CSV field.
std::string csv_double(double v);

}  // namespace corrpersist
