#include "hoigs/hexplane.hpp"

#include <algorithm>
#include <deque>

namespace hoigs {

PartPartition partition_by_weights(const Tensor& weights, int n_parts) {
    const int v = weights.shape[0];
    const int j_count = weights.shape[1];
    if (n_parts < 1 || n_parts > v)
        throw InvalidConfig("partition_by_weights: part count out of range");

    // group by dominant joint first
    std::vector<std::vector<int>> groups(static_cast<std::size_t>(j_count));
    for (int i = 0; i < v; ++i) {
        int best = 0;
        for (int j = 1; j < j_count; ++j)
            if (weights.at(i, j) > weights.at(i, best)) best = j;
        groups[static_cast<std::size_t>(best)].push_back(i);
    }
    std::deque<std::vector<int>> parts;
    for (auto& g : groups)
        if (!g.empty()) parts.push_back(std::move(g));

    // split the largest group until the requested count is reached
    while (static_cast<int>(parts.size()) < n_parts) {
        auto it = std::max_element(parts.begin(), parts.end(),
                                   [](const auto& a, const auto& b) {
                                       return a.size() < b.size();
                                   });
        if (it->size() < 2)
            throw InvalidConfig("partition_by_weights: too few vertices for part count");
        const std::size_t half = it->size() / 2;
        std::vector<int> tail(it->begin() + static_cast<long>(half), it->end());
        it->resize(half);
        parts.push_back(std::move(tail));
    }
    // merge the smallest groups if the dominant-joint split overshot
    while (static_cast<int>(parts.size()) > n_parts) {
        std::sort(parts.begin(), parts.end(),
                  [](const auto& a, const auto& b) { return a.size() < b.size(); });
        parts[1].insert(parts[1].end(), parts[0].begin(), parts[0].end());
        parts.pop_front();
    }

    PartPartition out;
    out.parts.assign(parts.begin(), parts.end());
    for (auto& p : out.parts) std::sort(p.begin(), p.end());
    out.validate(v);
    return out;
}

} // namespace hoigs
