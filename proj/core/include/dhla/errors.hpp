#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dhla {

/// Invalid sketch parameters, or two sketches whose parameters disagree.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed snapshot or trace data. Carries the byte offset where decoding
/// stopped.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::uint64_t offset)
      : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  [[nodiscard]] std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Candidate buffer of the restore pipeline exceeded its configured size.
class CapacityError : public std::runtime_error {
 public:
  CapacityError(const std::string& stage, std::size_t needed, std::size_t capacity)
      : std::runtime_error("candidate buffer overflow in " + stage + ": " +
                           std::to_string(needed) + " partials exceed capacity " +
                           std::to_string(capacity)),
        stage_(stage) {}

  [[nodiscard]] const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace dhla
