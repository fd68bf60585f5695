#pragma once

#include <stdexcept>
#include <string>

namespace unitlab {

// Every failure carries a kind so callers (and the CLI exit-code mapping)
// can tell format problems apart without parsing messages.
enum class ErrorKind {
    Io,           // file missing / unreadable / unwritable
    BadMagic,     // wrong magic bytes in a binary header
    BadVersion,   // unsupported format version
    Truncated,    // payload shorter than the header declares
    ZeroDims,     // declared rows/cols/period of zero or less
    NonFinite,    // NaN or Inf where a finite value is required
    BadToken,     // unparsable or negative token in a text format
    DuplicateId,  // repeated utt_id / pair_id
    EmptyField,   // empty unit list, empty pair member, ...
    Format,       // any other malformed content
    Domain,       // precondition violation on an operation
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
    if (!cond) fail(kind, msg);
}

}  // namespace unitlab
