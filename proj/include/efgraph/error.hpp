#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace efgraph {

// Raised on any contract violation or unusable input. Messages name the
// offending column, window, or line where there is one.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-fatal notes emitted by operations that silently adjust their input
// (dropped regressor columns, trailing partial EEG segments, ...).
using Warnings = std::vector<std::string>;

inline void warn(Warnings* sink, std::string message) {
  if (sink != nullptr) {
    sink->push_back(std::move(message));
  }
}

}  // namespace efgraph
