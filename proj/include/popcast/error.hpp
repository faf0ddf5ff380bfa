#pragma once
#include <stdexcept>
#include <string>

namespace popcast {

// Contract violations (bad shapes, bad configs, malformed files) throw this.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

[[noreturn]] inline void fail(const std::string& what) { throw error(what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(what);
}

}  // namespace popcast
