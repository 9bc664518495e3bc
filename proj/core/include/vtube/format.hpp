#ifndef VTUBE_FORMAT_HPP
#define VTUBE_FORMAT_HPP

#include <charconv>
#include <string>

namespace vtube {

/// Shortest decimal form that round-trips the exact double; keeps every
/// exported text format byte-reproducible.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace vtube

#endif  // VTUBE_FORMAT_HPP
