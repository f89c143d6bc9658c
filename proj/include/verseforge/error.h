#ifndef VERSEFORGE_ERROR_H_
#define VERSEFORGE_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace verseforge {

// Base class for every error the library throws. The CLI maps subclasses to
// distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Input text or a record does not follow its documented layout. `line` is
// 1-based; 0 means "not line addressed".
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A domain value violates one of its invariants (e.g. a strophe with five
// verses). `field` names the offending field.
class InvariantError : public Error {
 public:
  InvariantError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// An artifact was produced for a different configuration (e.g. a model file
// trained against another vocabulary).
class SchemaMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace verseforge

#endif  // VERSEFORGE_ERROR_H_
