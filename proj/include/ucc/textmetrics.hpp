#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ucc {

struct TokenSequence {
    std::vector<std::string> tokens;

    bool empty() const { return tokens.empty(); }
    std::size_t size() const { return tokens.size(); }

    friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

/// ASCII case-folds, splits on Unicode whitespace, and breaks leading and
/// trailing ASCII punctuation off each word as separate tokens. Interior
/// punctuation ("opts-in", "insert_flow") stays attached.
TokenSequence tokenize(std::string_view text);

/// Classic BLEU: geometric mean of modified (clipped) n-gram precisions times
/// a brevity penalty of exp(1 - |ref|/|cand|) when the candidate is shorter.
/// No smoothing: any zero precision zeroes the score, as does an empty
/// candidate. The order runs 1..min(max_n, |cand|) so identical inputs score
/// exactly 1 regardless of length.
double bleu(const TokenSequence& candidate, const TokenSequence& reference, int max_n = 4);

struct RougeScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Clipped unigram overlap. All zeros when either side is empty.
RougeScore rouge1(const TokenSequence& candidate, const TokenSequence& reference);

/// Longest-common-subsequence overlap. All zeros when either side is empty.
RougeScore rougeL(const TokenSequence& candidate, const TokenSequence& reference);

} // namespace ucc
