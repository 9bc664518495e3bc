#ifndef VTUBE_HASH_HPP
#define VTUBE_HASH_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <cstring>
#include <string>

namespace vtube {

/// FNV-1a 64-bit running hash over raw bytes; stable across runs, used for
/// artifact content hashes and provenance checks.
class Fnv1a {
  public:
    void bytes(const void* data, std::size_t size) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            state_ ^= p[i];
            state_ *= 0x100000001b3ULL;
        }
    }
    void value(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        bytes(&bits, sizeof(bits));
    }
    void value(std::uint64_t v) { bytes(&v, sizeof(v)); }
    void value(int v) { bytes(&v, sizeof(v)); }
    void value(const std::string& s) { bytes(s.data(), s.size()); }
    void matrix(const Eigen::MatrixXd& m) {
        value(static_cast<int>(m.rows()));
        value(static_cast<int>(m.cols()));
        for (int c = 0; c < m.cols(); ++c)
            for (int r = 0; r < m.rows(); ++r) value(m(r, c));
    }
    void vector(const Eigen::VectorXd& v) {
        value(static_cast<int>(v.size()));
        for (int i = 0; i < v.size(); ++i) value(v(i));
    }
    std::uint64_t digest() const { return state_; }

  private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace vtube

#endif  // VTUBE_HASH_HPP
