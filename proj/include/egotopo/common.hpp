#pragma once

#include <stdexcept>
#include <string>

namespace egotopo {

// Error taxonomy mirrored by the C API status codes and the CLI exit codes:
// usage/config = 1, data = 2, internal invariant = 3.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

constexpr int kSchemaVersion = 1;

}  // namespace egotopo

#define EGOTOPO_CHECK(cond, msg)                         \
  do {                                                   \
    if (!(cond)) throw ::egotopo::InternalError((msg));  \
  } while (0)
