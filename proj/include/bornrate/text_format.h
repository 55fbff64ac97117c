#ifndef BORNRATE_TEXT_FORMAT_H_
#define BORNRATE_TEXT_FORMAT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace bornrate {

// Locale-independent shortest representation that parses back to the same
// double.
std::string FormatDouble(double v);

std::optional<double> ParseDouble(std::string_view s);
std::optional<std::uint64_t> ParseUint(std::string_view s);

std::string_view Trim(std::string_view s);

// FNV-1a, used for config and content hashes.
std::uint64_t Fnv1a64(std::string_view data);
std::string Hex64(std::uint64_t v);

}  // namespace bornrate

#endif  // BORNRATE_TEXT_FORMAT_H_
