#pragma once

#include <stdexcept>
#include <string>

namespace clusternet {

// File-level failure (open, read, write, or a corrupt on-disk artifact).
// Kept distinct from std::runtime_error so the command-line tool can map it
// to its io exit code.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace clusternet
