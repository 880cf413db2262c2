#include "syntonize/rng.hpp"

namespace syntonize {

std::uint64_t mix_seed(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng make_rng(std::uint64_t seed)
{
    return Rng(seed);
}

Rng replica_rng(std::uint64_t master, std::uint64_t replica, std::uint64_t lane)
{
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(mix_seed(replica)),
                      static_cast<std::uint32_t>(mix_seed(replica) >> 32),
                      static_cast<std::uint32_t>(lane)};
    return Rng(seq);
}

} // namespace syntonize
