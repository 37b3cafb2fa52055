#pragma once

#include <stdexcept>
#include <string>

namespace treespace {

// Bad input: malformed spec string, violated precondition, unusable argument.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// Work refused because it exceeds a configured resource bound.  The message
// names the bound; `lower_bound` carries the best count established so far
// (decimal string, empty if none).
class ResourceError : public std::runtime_error {
 public:
  explicit ResourceError(const std::string& what, std::string lower_bound = "")
      : std::runtime_error(what), lower_bound_(std::move(lower_bound)) {}
  const std::string& lower_bound() const { return lower_bound_; }

 private:
  std::string lower_bound_;
};

}  // namespace treespace
