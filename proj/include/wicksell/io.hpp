#ifndef WICKSELL_IO_HPP_
#define WICKSELL_IO_HPP_

#include <string>
#include <vector>

namespace wicksell {

/// Round-trip-exact decimal formatting (17 significant digits).
std::string format_full(double v);

/// Reads a one-column observation CSV. An optional first line "radius" or
/// "z" is skipped; every other line must hold one finite nonnegative
/// number. Errors name the offending row (1-based).
std::vector<double> read_observation_csv(const std::string& path);

/// Writes a CSV with the given header line and rows of full-precision
/// values.
void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<double>>& rows);

void write_text_file(const std::string& path, const std::string& contents);

}  // namespace wicksell

#endif  // WICKSELL_IO_HPP_
