#include <doctest.h>

#include <cmath>
#include <random>

#include "ucc/textmetrics.hpp"

#include "support/testutil.hpp"

using namespace ucc;

namespace {

TokenSequence seq(std::initializer_list<const char*> tokens) {
    TokenSequence s;
    for (const char* t : tokens) s.tokens.emplace_back(t);
    return s;
}

constexpr double kTol = 1e-9;

} // namespace

TEST_CASE("tokenize case-folds, splits whitespace, and peels boundary punctuation") {
    CHECK(tokenize("The user opts-in.").tokens ==
          std::vector<std::string>{"the", "user", "opts-in", "."});
    CHECK(tokenize("").tokens.empty());
    CHECK(tokenize("   \t\n ").tokens.empty());
    CHECK(tokenize("Insert_flow 5 X").tokens == std::vector<std::string>{"insert_flow", "5", "x"});
    CHECK(tokenize("(hello)!").tokens == std::vector<std::string>{"(", "hello", ")", "!"});
    CHECK(tokenize("e.g., 15 minutes").tokens ==
          std::vector<std::string>{"e.g", ".", ",", "15", "minutes"});
    // Unicode whitespace splits; non-ASCII text is preserved.
    CHECK(tokenize("a b").tokens == std::vector<std::string>{"a", "b"});
    CHECK(tokenize("café").tokens == std::vector<std::string>{"café"});
}

TEST_CASE("bleu is exactly 1 on identical sequences and 0 on disjoint ones") {
    auto x = tokenize("the user clearly requests to opt-in");
    CHECK(bleu(x, x) == 1.0);
    CHECK(bleu(tokenize("alpha beta gamma delta"), tokenize("one two three four")) == 0.0);
    CHECK(bleu(TokenSequence{}, x) == 0.0);
    // Short identical sequences still score exactly 1 (effective order).
    auto brief = seq({"yes"});
    CHECK(bleu(brief, brief) == 1.0);
}

TEST_CASE("bleu clips repeated candidate n-grams") {
    // Candidate repeats "the" seven times; the reference contains it twice,
    // so the modified unigram precision is 2/7.
    auto cand = tokenize("the the the the the the the");
    auto ref = tokenize("the cat is on the mat");
    CHECK(std::abs(bleu(cand, ref, 1) - 2.0 / 7.0) < kTol);
    // With bigrams included, "the the" never appears in the reference.
    CHECK(bleu(cand, ref, 4) == 0.0);
}

TEST_CASE("bleu applies the brevity penalty only when the candidate is shorter") {
    auto ref = seq({"a", "b", "c", "d"});
    auto cand = seq({"a", "b"});
    // p1 = 1, p2 = 1 over the effective order 2; BP = exp(1 - 4/2).
    CHECK(std::abs(bleu(cand, ref) - std::exp(-1.0)) < kTol);
    auto longer = seq({"a", "b", "c", "d", "d"});
    // Candidate longer than reference: no penalty.
    CHECK(std::abs(bleu(longer, ref, 1) - 4.0 / 5.0) < kTol);
}

TEST_CASE("bleu rejects a non-positive max_n") {
    CHECK_THROWS_AS(bleu(seq({"a"}), seq({"a"}), 0), std::invalid_argument);
}

TEST_CASE("rouge1 hand-counted example") {
    auto r = rouge1(tokenize("the cat sat"), tokenize("the cat ran"));
    CHECK(std::abs(r.precision - 2.0 / 3.0) < kTol);
    CHECK(std::abs(r.recall - 2.0 / 3.0) < kTol);
    CHECK(std::abs(r.f1 - 2.0 / 3.0) < kTol);
}

TEST_CASE("rouge1 identity and empty edges") {
    auto x = tokenize("a b c");
    CHECK(rouge1(x, x).f1 == 1.0);
    auto zero = rouge1(TokenSequence{}, x);
    CHECK(zero.precision == 0.0);
    CHECK(zero.recall == 0.0);
    CHECK(zero.f1 == 0.0);
    CHECK(rouge1(x, TokenSequence{}).f1 == 0.0);
}

TEST_CASE("rouge1 clips repeated tokens") {
    auto r = rouge1(tokenize("the the the"), tokenize("the cat"));
    CHECK(std::abs(r.precision - 1.0 / 3.0) < kTol);
    CHECK(std::abs(r.recall - 1.0 / 2.0) < kTol);
}

TEST_CASE("rougeL hand DP example") {
    auto r = rougeL(seq({"a", "b", "c", "d"}), seq({"a", "c", "b", "d"}));
    CHECK(std::abs(r.recall - 3.0 / 4.0) < kTol);
    CHECK(std::abs(r.precision - 3.0 / 4.0) < kTol);
    CHECK(std::abs(r.f1 - 3.0 / 4.0) < kTol);
}

TEST_CASE("rougeL identity and empty edges") {
    auto x = tokenize("one two three");
    CHECK(rougeL(x, x).f1 == 1.0);
    CHECK(rougeL(TokenSequence{}, x).f1 == 0.0);
    CHECK(rougeL(x, TokenSequence{}).precision == 0.0);
}

TEST_CASE("property: scores stay in [0,1] and identity is maximal") {
    std::mt19937 rng(23);
    const char* words[] = {"user", "app", "opt-in", "shares", "data", "the", "confirms"};
    std::uniform_int_distribution<size_t> pick(0, 6);
    std::uniform_int_distribution<int> len(1, 12);
    for (int i = 0; i < 200; ++i) {
        TokenSequence a, b;
        for (int k = len(rng); k > 0; --k) a.tokens.push_back(words[pick(rng)]);
        for (int k = len(rng); k > 0; --k) b.tokens.push_back(words[pick(rng)]);
        double s = bleu(a, b);
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
        CHECK(bleu(a, a) == 1.0);
        auto r1 = rouge1(a, b);
        auto rl = rougeL(a, b);
        for (double v : {r1.precision, r1.recall, r1.f1, rl.precision, rl.recall, rl.f1}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        // rouge1 precision(a,b) == rouge1 recall(b,a); LCS is symmetric.
        CHECK(std::abs(r1.precision - rouge1(b, a).recall) < kTol);
        CHECK(std::abs(rl.recall * b.size() - rougeL(b, a).recall * a.size()) < kTol);
        // Permuting the candidate never beats identity for n-gram precision.
        TokenSequence shuffled = a;
        std::shuffle(shuffled.tokens.begin(), shuffled.tokens.end(), rng);
        CHECK(bleu(shuffled, a) <= 1.0);
    }
}
