#pragma once

#include <stdexcept>
#include <string>

namespace probmotion {

enum class Errc {
    shape,      // incompatible tensor shapes / dimensions
    numeric,    // NaN or Inf produced by an operation
    data,       // invalid data model contents (topology, partitions, ...)
    io,         // filesystem / stream failures
    format,     // file present but malformed (schema, checksum, version)
    config,     // invalid configuration values
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace probmotion
