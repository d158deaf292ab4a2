#include "ucc/textmetrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "ucc/detail/lcs.hpp"
#include "ucc/detail/strings.hpp"

namespace ucc {

namespace {

bool is_boundary_punct(const std::string& token, size_t i) {
    unsigned char c = static_cast<unsigned char>(token[i]);
    return c < 0x80 && std::ispunct(c) != 0;
}

// Splits boundary punctuation off one whitespace-delimited word.
void emit_word(const std::string& word, std::vector<std::string>& out) {
    size_t begin = 0;
    size_t end = word.size();
    std::vector<std::string> leading;
    while (begin < end && is_boundary_punct(word, begin)) {
        leading.push_back(word.substr(begin, 1));
        ++begin;
    }
    std::vector<std::string> trailing;
    while (end > begin && is_boundary_punct(word, end - 1)) {
        trailing.push_back(word.substr(end - 1, 1));
        --end;
    }
    for (auto& t : leading) out.push_back(std::move(t));
    if (end > begin) out.push_back(word.substr(begin, end - begin));
    for (auto it = trailing.rbegin(); it != trailing.rend(); ++it) {
        out.push_back(std::move(*it));
    }
}

std::unordered_map<std::string, int> ngram_counts(const std::vector<std::string>& tokens, int n) {
    std::unordered_map<std::string, int> counts;
    if (static_cast<int>(tokens.size()) < n) return counts;
    for (size_t i = 0; i + static_cast<size_t>(n) <= tokens.size(); ++i) {
        std::string key;
        for (int k = 0; k < n; ++k) {
            if (k > 0) key += '\x1E';
            key += tokens[i + static_cast<size_t>(k)];
        }
        ++counts[key];
    }
    return counts;
}

double f1_of(double precision, double recall) {
    if (precision + recall <= 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

} // namespace

TokenSequence tokenize(std::string_view text) {
    TokenSequence seq;
    std::string word;
    size_t i = 0;
    while (i < text.size()) {
        char32_t cp = detail::next_codepoint(text, i);
        if (detail::is_unicode_space(cp)) {
            if (!word.empty()) {
                emit_word(word, seq.tokens);
                word.clear();
            }
            continue;
        }
        if (cp < 0x80) {
            word.push_back(static_cast<char>(
                std::tolower(static_cast<unsigned char>(static_cast<char>(cp)))));
        } else {
            // Re-encode the code point unchanged; case folding is ASCII-only.
            if (cp < 0x800) {
                word.push_back(static_cast<char>(0xC0 | (cp >> 6)));
                word.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
            } else if (cp < 0x10000) {
                word.push_back(static_cast<char>(0xE0 | (cp >> 12)));
                word.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
                word.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
            } else {
                word.push_back(static_cast<char>(0xF0 | (cp >> 18)));
                word.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
                word.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
                word.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
            }
        }
    }
    if (!word.empty()) emit_word(word, seq.tokens);
    return seq;
}

double bleu(const TokenSequence& candidate, const TokenSequence& reference, int max_n) {
    if (max_n < 1) throw std::invalid_argument("bleu: max_n must be >= 1");
    if (candidate.empty()) return 0.0;

    const int order = std::min<int>(max_n, static_cast<int>(candidate.size()));
    double log_sum = 0.0;
    for (int n = 1; n <= order; ++n) {
        auto cand = ngram_counts(candidate.tokens, n);
        auto ref = ngram_counts(reference.tokens, n);
        long long matched = 0;
        long long total = 0;
        for (const auto& [gram, count] : cand) {
            total += count;
            auto it = ref.find(gram);
            if (it != ref.end()) matched += std::min(count, it->second);
        }
        if (matched == 0) return 0.0;
        log_sum += std::log(static_cast<double>(matched) / static_cast<double>(total));
    }

    double brevity = 1.0;
    if (candidate.size() < reference.size()) {
        brevity = std::exp(1.0 - static_cast<double>(reference.size()) /
                                     static_cast<double>(candidate.size()));
    }
    return brevity * std::exp(log_sum / order);
}

RougeScore rouge1(const TokenSequence& candidate, const TokenSequence& reference) {
    if (candidate.empty() || reference.empty()) return {};
    auto cand = ngram_counts(candidate.tokens, 1);
    auto ref = ngram_counts(reference.tokens, 1);
    long long overlap = 0;
    for (const auto& [token, count] : cand) {
        auto it = ref.find(token);
        if (it != ref.end()) overlap += std::min(count, it->second);
    }
    RougeScore score;
    score.precision = static_cast<double>(overlap) / static_cast<double>(candidate.size());
    score.recall = static_cast<double>(overlap) / static_cast<double>(reference.size());
    score.f1 = f1_of(score.precision, score.recall);
    return score;
}

RougeScore rougeL(const TokenSequence& candidate, const TokenSequence& reference) {
    if (candidate.empty() || reference.empty()) return {};
    const double lcs = static_cast<double>(detail::lcs_length(candidate.tokens, reference.tokens));
    RougeScore score;
    score.precision = lcs / static_cast<double>(candidate.size());
    score.recall = lcs / static_cast<double>(reference.size());
    score.f1 = f1_of(score.precision, score.recall);
    return score;
}

} // namespace ucc
