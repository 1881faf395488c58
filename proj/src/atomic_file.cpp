#include "fakespot/atomic_file.hpp"

#include <fstream>
#include <stdexcept>
#include <system_error>

namespace fakespot {

void write_atomically(const std::filesystem::path& target,
                      const std::function<void(const std::filesystem::path&)>& write)
{
    if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
    auto tmp = target;
    tmp += ".tmp";
    try {
        write(tmp);
        std::filesystem::rename(tmp, target);
    } catch (...) {
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        throw;
    }
}

void write_file_atomically(const std::filesystem::path& target, std::string_view contents)
{
    write_atomically(target, [&](const std::filesystem::path& tmp) {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.close();
        if (!out) throw std::runtime_error("write to " + tmp.string() + " failed");
    });
}

void write_file_atomically(const std::filesystem::path& target, std::span<const unsigned char> contents)
{
    write_file_atomically(target, std::string_view(reinterpret_cast<const char*>(contents.data()), contents.size()));
}

}  // namespace fakespot
