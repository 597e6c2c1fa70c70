#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace stance {

// Trims outer ASCII whitespace; the view aliases the input.
std::string_view trim(std::string_view s);

std::string to_lower(std::string s);

// Maximal non-whitespace runs, as views into the input.
std::vector<std::string_view> whitespace_tokens(std::string_view s);

// FNV-1a 64-bit over raw bytes; used for artifact fingerprints.
std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string hex64(std::uint64_t v);

// Fisher-Yates backed by std::mt19937_64 with modulo index draws.
// mt19937_64 is fully specified by the standard, so shuffles are
// reproducible across platforms; std::shuffle is not.
template <typename T, typename Rng>
void deterministic_shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace stance
