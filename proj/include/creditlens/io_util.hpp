#pragma once

#include <string>

namespace creditlens {

// Writes to <path>.tmp.<pid> then renames, so readers never observe a
// partially written file. Throws std::runtime_error on I/O failure.
void atomic_write_file(const std::string& path, const std::string& contents);

std::string read_file(const std::string& path);

}  // namespace creditlens
