#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace routedet {

// Error categories map 1:1 onto C API status values and CLI exit codes.
enum class ErrorCode : int {
    internal = 1,
    config = 2,
    missing_artifact = 3,
    pipeline_order = 4,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

// Shortest round-trip decimal rendering. Every number written to an artifact
// goes through here so that regenerated files are byte-identical and parsing
// the text back yields the exact same double.
std::string fmt_double(double v);

// Runs fn(i) for i in [0, n) on up to `workers` threads. Results must be
// written to preallocated per-index slots; the split is deterministic.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

std::string join(const std::vector<std::string>& parts, const std::string& sep);

}  // namespace routedet
