#include "portbot/rng.hpp"

namespace portbot {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t root_seed, std::string_view label)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(splitmix64(root_seed) ^ h);
}

RngStream RngStream::derive(std::uint64_t root_seed, std::string_view label)
{
    return RngStream(derive_seed(root_seed, label));
}

std::uint64_t RngStream::below(std::uint64_t n)
{
    if (n <= 1)
        return 0;
    // rejection sampling, unbiased
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v;
    do {
        v = engine_();
    } while (v >= limit);
    return v % n;
}

} // namespace portbot
