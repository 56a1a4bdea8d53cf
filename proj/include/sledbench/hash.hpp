#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace sledbench {

// 64-bit FNV-1a, used for config and checkpoint fingerprints.
class Fnv1a {
public:
    void add(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h_ ^= p[i];
            h_ *= 0x100000001b3ull;
        }
    }
    void add(std::string_view s) { add(s.data(), s.size()); }
    template <class T>
    void add_value(const T& v) {
        add(&v, sizeof(T));
    }
    std::uint64_t value() const { return h_; }

private:
    std::uint64_t h_{0xcbf29ce484222325ull};
};

inline std::uint64_t fnv1a(std::string_view s) {
    Fnv1a h;
    h.add(s);
    return h.value();
}

} // namespace sledbench
