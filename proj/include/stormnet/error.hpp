#pragma once

#include <stdexcept>
#include <string>

namespace stormnet {

// Error categories surface in CLI output as one machine-parseable line:
//   error: <category>: <message>
enum class errc {
    io,         // filesystem / stream failure
    format,     // malformed or inconsistent on-disk data
    validation, // invariant or precondition violation
    usage,      // bad arguments / configuration
};

inline const char* errc_name(errc c) {
    switch (c) {
    case errc::io: return "io";
    case errc::format: return "format";
    case errc::validation: return "validation";
    case errc::usage: return "usage";
    }
    return "unknown";
}

class error : public std::runtime_error {
public:
    error(errc category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    errc category() const noexcept { return category_; }
    const char* category_name() const noexcept { return errc_name(category_); }

private:
    errc category_;
};

} // namespace stormnet
