#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace ucc::detail {

// Longest common subsequence over suffixes. Shared by the flow diff and
// ROUGE-L; both need deterministic results.
//
// lcs_pairs returns one maximal set of matched (i, j) index pairs in
// ascending order. Ties are resolved by matching equal heads greedily, which
// prefers the earliest-starting common subsequence, and by consuming the
// first sequence before the second otherwise.
template <typename Seq>
std::vector<std::vector<int>> lcs_table(const Seq& a, const Seq& b) {
    const size_t n = a.size();
    const size_t m = b.size();
    std::vector<std::vector<int>> dp(n + 1, std::vector<int>(m + 1, 0));
    for (size_t i = n; i-- > 0;) {
        for (size_t j = m; j-- > 0;) {
            if (a[i] == b[j]) {
                dp[i][j] = 1 + dp[i + 1][j + 1];
            } else {
                dp[i][j] = std::max(dp[i + 1][j], dp[i][j + 1]);
            }
        }
    }
    return dp;
}

template <typename Seq>
size_t lcs_length(const Seq& a, const Seq& b) {
    if (a.empty() || b.empty()) return 0;
    return static_cast<size_t>(lcs_table(a, b)[0][0]);
}

template <typename Seq>
std::vector<std::pair<size_t, size_t>> lcs_pairs(const Seq& a, const Seq& b) {
    std::vector<std::pair<size_t, size_t>> out;
    if (a.empty() || b.empty()) return out;
    auto dp = lcs_table(a, b);
    size_t i = 0;
    size_t j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) {
            out.emplace_back(i, j);
            ++i;
            ++j;
        } else if (dp[i + 1][j] >= dp[i][j + 1]) {
            ++i;
        } else {
            ++j;
        }
    }
    return out;
}

} // namespace ucc::detail
