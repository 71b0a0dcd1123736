#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <eager/errors.hpp>
#include <eager/evaluation.hpp>
#include <eager/rng.hpp>

using namespace eager;

namespace {

constexpr TokenId kEos = 0;
constexpr TokenId kDelim = 1;

AnswerExtractorConfig delim_cfg() {
  AnswerExtractorConfig cfg;
  cfg.strategy = ExtractStrategy::delimiter_suffix;
  cfg.delimiter = kDelim;
  return cfg;
}

TokenList seq_with_answer(const TokenList& answer) {
  TokenList seq{9, 8, 7, kDelim};
  seq.insert(seq.end(), answer.begin(), answer.end());
  seq.push_back(kEos);
  return seq;
}

// Textbook raw-score Pearson formula, deliberately a different arithmetic
// path from the implementation.
double pearson_oracle(const std::vector<std::pair<double, double>>& pairs) {
  const double n = static_cast<double>(pairs.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (const auto& [x, y] : pairs) {
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) /
         std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

}  // namespace

TEST_CASE("extract_answer strategies") {
  SUBCASE("delimiter_suffix takes tokens after the last delimiter") {
    CHECK(extract_answer({4, 5, kDelim, 7, kEos}, kEos, delim_cfg()) == "7");
    CHECK(extract_answer({4, 5, 6, kEos}, kEos, delim_cfg()) == "");
    CHECK(extract_answer({kDelim, 2, 3, kDelim, 9, 9, kEos}, kEos,
                         delim_cfg()) == "9 9");
  }
  SUBCASE("boxed_pattern reads the detokenized tail") {
    AnswerExtractorConfig cfg;
    cfg.strategy = ExtractStrategy::boxed_pattern;
    const std::string text = "find \\boxed{42} here";
    TokenList tokens;
    for (char c : text) tokens.push_back(static_cast<TokenId>(c));
    tokens.push_back(kEos);
    CHECK(extract_answer(tokens, kEos, cfg) == "42");

    TokenList plain;
    for (char c : std::string("nothing boxed")) {
      plain.push_back(static_cast<TokenId>(c));
    }
    CHECK(extract_answer(plain, kEos, cfg) == "");
  }
  SUBCASE("full_tail takes the last N tokens before EOS") {
    AnswerExtractorConfig cfg;
    cfg.strategy = ExtractStrategy::full_tail;
    cfg.tail_length = 2;
    CHECK(extract_answer({4, 5, 6, kEos}, kEos, cfg) == "5 6");
  }
}

TEST_CASE("evaluate_prompt metric definitions") {
  const TokenList target{7};
  SUBCASE("one correct among three") {
    const std::vector<TokenList> seqs{
        seq_with_answer({3}), seq_with_answer({3}), seq_with_answer({7})};
    const PromptEvaluation eval =
        evaluate_prompt("p", seqs, target, kEos, delim_cfg());
    CHECK(eval.pass_at_k == 1);
    CHECK(eval.pass_rate == doctest::Approx(1.0 / 3.0));
    CHECK(eval.cons_at_k == 0);  // majority answer is 3
  }
  SUBCASE("majority correct") {
    const std::vector<TokenList> seqs{
        seq_with_answer({7}), seq_with_answer({7}), seq_with_answer({3})};
    const PromptEvaluation eval =
        evaluate_prompt("p", seqs, target, kEos, delim_cfg());
    CHECK(eval.cons_at_k == 1);
    CHECK(eval.pass_at_k == 1);
  }
  SUBCASE("lexicographic tie-break can defeat the target") {
    // Answers "3" and "7" tie; "3" < "7" so the vote resolves to "3".
    const std::vector<TokenList> seqs{seq_with_answer({3}),
                                      seq_with_answer({7})};
    const PromptEvaluation eval =
        evaluate_prompt("p", seqs, target, kEos, delim_cfg());
    CHECK(eval.cons_at_k == 0);
    CHECK(eval.pass_at_k == 1);
  }
  SUBCASE("no sequences is an error") {
    CHECK_THROWS_AS(evaluate_prompt("p", {}, target, kEos, delim_cfg()),
                    InvalidInputError);
  }
}

TEST_CASE("metric implications hold on random prompts") {
  RandomStream rng(0xEA11);
  for (int iter = 0; iter < 500; ++iter) {
    const int k = 1 + static_cast<int>(rng.next_below(8));
    std::vector<TokenList> seqs;
    for (int i = 0; i < k; ++i) {
      seqs.push_back(seq_with_answer(
          {static_cast<TokenId>(2 + rng.next_below(4))}));
    }
    const TokenList target{static_cast<TokenId>(2 + rng.next_below(4))};
    const PromptEvaluation eval =
        evaluate_prompt("p", seqs, target, kEos, delim_cfg());

    if (eval.cons_at_k == 1) CHECK(eval.pass_at_k == 1);
    if (eval.pass_rate == 1.0) {
      CHECK(eval.pass_at_k == 1);
      CHECK(eval.cons_at_k == 1);
    }

    // Permutation invariance.
    std::vector<TokenList> shuffled = seqs;
    for (size_t i = shuffled.size(); i > 1; --i) {
      std::swap(shuffled[i - 1], shuffled[rng.next_below(i)]);
    }
    const PromptEvaluation again =
        evaluate_prompt("p", shuffled, target, kEos, delim_cfg());
    CHECK(again.pass_at_k == eval.pass_at_k);
    CHECK(again.cons_at_k == eval.cons_at_k);
    CHECK(again.pass_rate == doctest::Approx(eval.pass_rate));
  }
}

TEST_CASE("cons@k matches exhaustive majority enumeration for small k") {
  RandomStream rng(0xC0);
  for (int iter = 0; iter < 300; ++iter) {
    const int k = 1 + static_cast<int>(rng.next_below(5));
    std::vector<TokenList> seqs;
    std::vector<std::string> answers;
    for (int i = 0; i < k; ++i) {
      const TokenId a = static_cast<TokenId>(2 + rng.next_below(3));
      seqs.push_back(seq_with_answer({a}));
      answers.push_back(std::to_string(a));
    }
    const TokenList target{static_cast<TokenId>(2 + rng.next_below(3))};

    // Exhaustive majority with lexicographically-smallest tie-break.
    std::string best;
    int best_count = 0;
    for (const std::string& candidate : answers) {
      const int count = static_cast<int>(
          std::count(answers.begin(), answers.end(), candidate));
      if (count > best_count ||
          (count == best_count && candidate < best)) {
        best = candidate;
        best_count = count;
      }
    }
    const int expected = best == std::to_string(target[0]) ? 1 : 0;
    const PromptEvaluation eval =
        evaluate_prompt("p", seqs, target, kEos, delim_cfg());
    CHECK(eval.cons_at_k == expected);
  }
}

TEST_CASE("aggregate averages over prompts and sums tree counters") {
  PromptEvaluation a;
  a.prompt_id = "p0";
  a.pass_at_k = 1;
  a.cons_at_k = 1;
  a.pass_rate = 0.5;
  PromptEvaluation b;
  b.prompt_id = "p1";
  b.pass_at_k = 0;
  b.cons_at_k = 0;
  b.pass_rate = 0.0;

  GenerationTree ta;
  ta.prompt_id = "p0";
  ta.new_token_count = 100;
  ta.sequence_count = 4;
  GenerationTree tb;
  tb.prompt_id = "p1";
  tb.new_token_count = 50;
  tb.sequence_count = 2;

  const MetricsReport report = aggregate({a, b}, {ta, tb});
  CHECK(report.mean_pass_at_k == doctest::Approx(0.5));
  CHECK(report.mean_cons_at_k == doctest::Approx(0.5));
  CHECK(report.mean_pass_rate == doctest::Approx(0.25));
  CHECK(report.total_new_tokens == 150);
  CHECK(report.total_sequences == 6);

  SUBCASE("single prompt reproduces its own values") {
    const MetricsReport solo = aggregate({a}, {ta});
    CHECK(solo.mean_pass_at_k == doctest::Approx(1.0));
    CHECK(solo.mean_pass_rate == doctest::Approx(0.5));
  }
  SUBCASE("prompt set mismatch is an error") {
    CHECK_THROWS_AS(aggregate({a, b}, {tb, ta}), InvalidInputError);
    CHECK_THROWS_AS(aggregate({a}, {ta, tb}), InvalidInputError);
  }
}

TEST_CASE("peak_pass_correlation") {
  SUBCASE("perfectly anti-monotone pairs give r = -1") {
    const Correlation c =
        peak_pass_correlation({{1.0, 1.0}, {2.0, 0.5}, {3.0, 0.0}});
    CHECK(c.coefficient == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(c.n == 3);
  }
  SUBCASE("zero variance is undefined") {
    CHECK_THROWS_AS(
        peak_pass_correlation({{1.0, 0.2}, {1.0, 0.4}, {1.0, 0.9}}),
        UndefinedCorrelationError);
  }
  SUBCASE("too few pairs") {
    CHECK_THROWS_AS(peak_pass_correlation({{1.0, 0.2}, {2.0, 0.4}}),
                    InvalidInputError);
  }
  SUBCASE("matches the textbook raw-score formula to 1e-12") {
    RandomStream rng(0xC0FFEE);
    for (int iter = 0; iter < 50; ++iter) {
      std::vector<std::pair<double, double>> pairs;
      const int n = 3 + static_cast<int>(rng.next_below(200));
      for (int i = 0; i < n; ++i) {
        pairs.emplace_back(3.0 * rng.next_unit(), rng.next_unit());
      }
      const Correlation c = peak_pass_correlation(pairs);
      CHECK(std::abs(c.coefficient - pearson_oracle(pairs)) < 1e-12);
    }
  }
}
