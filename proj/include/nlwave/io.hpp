#pragma once

#include "nlwave/experiments.hpp"

#include <filesystem>
#include <string>

namespace nlwave {

/**
 * Trace files.
 *
 * CSV: a header line of column names, a units line "# units: u1,u2,...", then
 * one row per sample with shortest round-trip decimal doubles.
 *
 * Binary (all integers little-endian):
 *   magic "NLWTRACE" (8 bytes), u32 version = 1, u32 column count C,
 *   u64 row count R, C x (u32 length + name bytes), C x (u32 length + unit bytes),
 *   R x C f64 values, row-major.
 */
enum class TraceFormat { csv, binary };

TraceFormat parse_trace_format(const std::string& name);
std::string trace_extension(TraceFormat f);

/// Bytes of a trace in the given format.  Series.name is not stored.
std::string encode_trace(const Series& s, TraceFormat f);
/// Detects the format from the content; throws InvalidArgument on malformed data.
Series decode_trace(const std::string& bytes);
Series read_trace(const std::filesystem::path& path);

/// Lower-case hex SHA-256 of the bytes.
std::string sha256_hex(const std::string& bytes);

/// Writes via a temporary file in the same directory followed by rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

}  // namespace nlwave
