#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <string_view>

namespace fakespot {

/// Calls `write(tmp)` for a temporary path next to `target`, then renames the
/// temporary over `target`. The temporary is removed if `write` throws.
void write_atomically(const std::filesystem::path& target,
                      const std::function<void(const std::filesystem::path&)>& write);

void write_file_atomically(const std::filesystem::path& target, std::string_view contents);
void write_file_atomically(const std::filesystem::path& target, std::span<const unsigned char> contents);

}  // namespace fakespot
