#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace magdial {

// Base of every error thrown by the library. The kind() tag is what the CLI
// and the collection service map onto exit codes and reply statuses.
class Error : public std::runtime_error {
 public:
  enum class Kind {
    parse,
    schema,
    missing_argument,
    not_found,
    argument,
    sequencing,
    predictor,
    realization,
    split_leakage,
    config,
    generation,
    encoding,
    degenerate_input,
    compile,
    validation,
    unsupported,
    forbidden,
  };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

const char* kind_name(Error::Kind kind) noexcept;

class ParseError : public Error {
 public:
  ParseError(std::size_t byte_offset, const std::string& what)
      : Error(Kind::parse, what + " at byte " + std::to_string(byte_offset)),
        byte_offset_(byte_offset) {}

  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

}  // namespace magdial
