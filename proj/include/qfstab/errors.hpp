#ifndef QFSTAB_ERRORS_HPP
#define QFSTAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qfs {

// Error categories; the C API maps these one-to-one onto qfs_status codes.
enum class errc {
    invalid_argument,
    config,
    synthesis,
    domain,    // point left the operating region of W
    range,     // quantizer input beyond its designed range
    monitor,   // a runtime monitor reported a violation
    io,
    internal,
};

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

} // namespace qfs

#endif
