#pragma once

#include <cstddef>
#include <string_view>

namespace tsemos::log {

// Warnings go to stderr unless silenced; the count is process-wide so the
// CLI can report how many fits needed attention.
void warn(std::string_view message);
[[nodiscard]] std::size_t warning_count() noexcept;
void reset_warning_count() noexcept;
void set_quiet(bool quiet) noexcept;

}  // namespace tsemos::log
