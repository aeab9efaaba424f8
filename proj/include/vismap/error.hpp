#pragma once

#include <stdexcept>
#include <string>

namespace vismap {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters or inputs rejected before any work is done.
class ConfigError : public Error {
  public:
    using Error::Error;
};

enum class BundleErrc {
    io,
    bad_magic,
    bad_version,
    truncated,
    count_mismatch,
    malformed_manifest,
    index_mismatch,
    non_monotonic_route,
    memorability_out_of_range,
    mixed_position_kinds,
    non_finite_descriptor,
    empty_traversal,
};

/// Raised by the traversal bundle reader/writer. Each rejection reason has
/// its own code so callers can tell them apart without parsing messages.
class BundleError : public Error {
  public:
    BundleError(BundleErrc code, const std::string& what) : Error(what), code_(code) {}
    BundleErrc code() const noexcept { return code_; }

  private:
    BundleErrc code_;
};

} // namespace vismap
