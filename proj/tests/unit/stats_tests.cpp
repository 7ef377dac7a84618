#include <cmath>

#include "doctest.h"

#include "diarylens/stats.hpp"
#include "diarylens/util.hpp"
#include "helpers.hpp"

using namespace diarylens;
namespace dt = diarylens::testing;

namespace {

// Known confusion matrix: TP=8 FN=2 TN=5 FP=5.
void known_confusion(std::vector<bool>& decisions, std::vector<bool>& labels) {
    for (int i = 0; i < 8; ++i) { decisions.push_back(true);  labels.push_back(true);  }
    for (int i = 0; i < 2; ++i) { decisions.push_back(false); labels.push_back(true);  }
    for (int i = 0; i < 5; ++i) { decisions.push_back(false); labels.push_back(false); }
    for (int i = 0; i < 5; ++i) { decisions.push_back(true);  labels.push_back(false); }
}

}  // namespace

TEST_SUITE("stats") {

TEST_CASE("balanced accuracy from a known confusion matrix") {
    std::vector<bool> decisions, labels;
    known_confusion(decisions, labels);
    // sensitivity 0.8, specificity 0.5
    CHECK(balanced_accuracy(decisions, labels) == doctest::Approx(0.65));
}

TEST_CASE("balanced accuracy matches the brute-force oracle on random inputs") {
    Rng rng(19);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = static_cast<int>(rng.uniform_int(2, 60));
        std::vector<bool> decisions, labels;
        for (int i = 0; i < n; ++i) {
            decisions.push_back(rng.bernoulli(0.5));
            labels.push_back(rng.bernoulli(0.5));
        }
        bool single_class = true;
        for (std::size_t i = 1; i < labels.size(); ++i) {
            if (labels[i] != labels[0]) single_class = false;
        }
        if (single_class) {
            CHECK_THROWS_AS(balanced_accuracy(decisions, labels), MetricUndefined);
        } else {
            CHECK(balanced_accuracy(decisions, labels) ==
                  doctest::Approx(dt::brute_balanced_accuracy(decisions, labels))
                      .epsilon(1e-12));
        }
    }
}

TEST_CASE("single-class labels raise MetricUndefined with counts") {
    try {
        balanced_accuracy({true, false, true}, {true, true, true});
        FAIL("expected MetricUndefined");
    } catch (const MetricUndefined& e) {
        CHECK(e.metric() == "balanced_accuracy");
        CHECK(e.positives() == 3);
        CHECK(e.negatives() == 0);
    }
    CHECK_THROWS_AS(balanced_accuracy({}, {}), MetricUndefined);
    CHECK_THROWS_AS(roc_auc({0.3, 0.7}, {false, false}), MetricUndefined);
}

TEST_CASE("mismatched lengths are a usage error") {
    CHECK_THROWS_AS(balanced_accuracy({true}, {true, false}), std::invalid_argument);
    CHECK_THROWS_AS(roc_auc({0.5}, {true, false}), std::invalid_argument);
}

TEST_CASE("auc matches the pairwise oracle on random inputs") {
    Rng rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = static_cast<int>(rng.uniform_int(2, 80));
        std::vector<double> scores;
        std::vector<bool> labels;
        bool saw_true = false, saw_false = false;
        for (int i = 0; i < n; ++i) {
            // coarse grid so score ties actually occur
            scores.push_back(std::round(rng.uniform() * 10.0) / 10.0);
            const bool y = rng.bernoulli(0.5);
            labels.push_back(y);
            (y ? saw_true : saw_false) = true;
        }
        if (!saw_true || !saw_false) continue;
        CHECK(roc_auc(scores, labels) ==
              doctest::Approx(dt::pairwise_auc(scores, labels)).epsilon(1e-12));
    }
}

TEST_CASE("auc counts score ties as half") {
    CHECK(roc_auc({0.5, 0.5}, {true, false}) == doctest::Approx(0.5));
    CHECK(roc_auc({0.9, 0.1}, {true, false}) == doctest::Approx(1.0));
    CHECK(roc_auc({0.1, 0.9}, {true, false}) == doctest::Approx(0.0));
}

TEST_CASE("average ranks spread ties evenly") {
    CHECK(average_ranks({10, 20, 30}) == std::vector<double>{1, 2, 3});
    CHECK(average_ranks({20, 10, 20}) == std::vector<double>{2.5, 1, 2.5});
    CHECK(average_ranks({5, 5, 5, 5}) == std::vector<double>{2.5, 2.5, 2.5, 2.5});
    CHECK(average_ranks({}).empty());
}

TEST_CASE("spearman hits the poles on monotone data") {
    const std::vector<double> xs{1, 2, 3, 4, 5};
    CHECK(spearman_rho(xs, {2, 4, 8, 16, 32}) == doctest::Approx(1.0));
    CHECK(spearman_rho(xs, {9, 7, 5, 3, 1}) == doctest::Approx(-1.0));
}

TEST_CASE("spearman degenerate inputs") {
    const std::vector<double> xs{1, 2, 3, 4};
    CHECK(spearman_rho(xs, {7, 7, 7, 7}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(spearman_rho({3, 3, 3, 3}, {1, 2, 3, 4}), MetricUndefined);
    CHECK_THROWS_AS(spearman_rho({1, 2}, {1, 2}), MetricUndefined);  // n < 3
}

TEST_CASE("spearman test p-value behaves sensibly") {
    std::vector<double> xs, noisy;
    Rng rng(31);
    for (int i = 0; i < 30; ++i) {
        xs.push_back(i);
        noisy.push_back(i + rng.normal() * 2.0);
    }
    const auto strong = spearman_test(xs, noisy);
    CHECK(strong.rho > 0.9);
    CHECK(strong.p_value < 0.001);
    CHECK(strong.n == 30);

    std::vector<double> unrelated;
    for (int i = 0; i < 30; ++i) unrelated.push_back(rng.normal());
    const auto weak = spearman_test(xs, unrelated);
    CHECK(weak.p_value > 0.01);

    const auto perfect = spearman_test({1, 2, 3, 4}, {1, 2, 3, 4});
    CHECK(perfect.rho == doctest::Approx(1.0));
    CHECK(perfect.p_value < 1e-6);
}

TEST_CASE("benjamini-hochberg worked example") {
    const auto adjusted = bh_adjust({0.01, 0.04, 0.03});
    REQUIRE(adjusted.size() == 3);
    CHECK(adjusted[0] == doctest::Approx(0.03));
    CHECK(adjusted[1] == doctest::Approx(0.04));
    CHECK(adjusted[2] == doctest::Approx(0.04));
}

TEST_CASE("benjamini-hochberg edge cases") {
    CHECK(bh_adjust({}).empty());
    CHECK(bh_adjust({0.2}) == std::vector<double>{0.2});
    // already significant everywhere stays put
    const auto same = bh_adjust({0.5, 0.5});
    CHECK(same == std::vector<double>{0.5, 0.5});
    // adjusted values never drop below raw and never exceed 1
    const auto caps = bh_adjust({0.9, 0.95, 0.99});
    for (std::size_t i = 0; i < caps.size(); ++i) {
        CHECK(caps[i] >= 0.9 - 1e-12);
        CHECK(caps[i] <= 1.0);
    }
}

TEST_CASE("wilcoxon on symmetric differences is null") {
    // mirrored differences: no signed-rank asymmetry to detect
    const auto r = wilcoxon_signed_rank({1, -1, 2, -2, 3, -3, 4, -4});
    CHECK(r.n == 8);
    CHECK(r.p_value >= 0.9);
    CHECK(r.p_value <= 1.0);
    CHECK(std::abs(r.z) < 0.2);
}

TEST_CASE("wilcoxon detects a one-sided shift") {
    std::vector<double> diffs;
    Rng rng(41);
    for (int i = 0; i < 25; ++i) diffs.push_back(0.5 + rng.normal() * 0.2);
    const auto r = wilcoxon_signed_rank(diffs);
    CHECK(r.p_value < 0.001);
    CHECK(r.z > 3.0);
}

TEST_CASE("wilcoxon drops zeros and requires a remainder") {
    const auto r = wilcoxon_signed_rank({0, 0, 1, -1, 2, -2, 3, -3});
    CHECK(r.n == 6);
    CHECK_THROWS_AS(wilcoxon_signed_rank({0, 0, 0}), MetricUndefined);
    CHECK_THROWS_AS(wilcoxon_signed_rank({}), MetricUndefined);
}

TEST_CASE("wilcoxon tie correction changes the variance") {
    // heavy ties shrink the variance; z should grow relative to tie-free data
    const auto tied = wilcoxon_signed_rank({1, 1, 1, 1, 1, 1, 1, 1, 1, 1});
    CHECK(tied.w_plus == doctest::Approx(55.0));  // all positive, ranks sum 1..10
    CHECK(tied.p_value < 0.01);
}

TEST_CASE("normal cdf reference points") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
    CHECK(normal_cdf(1.96) == doctest::Approx(0.975).epsilon(1e-3));
    CHECK(normal_cdf(-1.96) == doctest::Approx(0.025).epsilon(1e-3));
    CHECK(normal_cdf(6.0) > 0.999999);
}

TEST_CASE("population std divides by n") {
    CHECK(population_std({2, 4, 4, 4, 5, 5, 7, 9}) == doctest::Approx(2.0));
    CHECK(population_std({5}) == doctest::Approx(0.0));
    CHECK(population_std({3, 3, 3}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(population_std({}), std::invalid_argument);
}

}  // TEST_SUITE
