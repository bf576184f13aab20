#include "dmi/rng.hpp"

#include <numeric>
#include <utility>

#include "dmi/types.hpp"

namespace dmi
{

std::vector<std::size_t> sample_without_replacement(std::size_t size, std::size_t n, std::uint64_t seed,
                                                    std::uint64_t stream)
{
    if (n > size) {
        throw ParameterError("sample_without_replacement: n exceeds population size");
    }
    std::vector<std::size_t> idx(size);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    CounterRng rng(seed, stream);
    for (std::size_t i = 0; i < n; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(size - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(n);
    return idx;
}

} // namespace dmi
