#pragma once
// Evaluation metrics and the significance tests used by the post-hoc
// analyses. Everything here is a pure function; undefined cases (single-class
// label sets, zero-variance rank inputs) surface as MetricUndefined rather
// than NaN so callers must decide how to report them.

#include <stdexcept>
#include <string>
#include <vector>

namespace diarylens {

class MetricUndefined : public std::runtime_error {
public:
    MetricUndefined(std::string metric, int positives, int negatives)
        : std::runtime_error(metric + " undefined: " + std::to_string(positives) +
                             " positive / " + std::to_string(negatives) + " negative labels"),
          metric_(std::move(metric)),
          positives_(positives),
          negatives_(negatives) {}

    MetricUndefined(std::string metric, const std::string& detail)
        : std::runtime_error(metric + " undefined: " + detail), metric_(std::move(metric)) {}

    const std::string& metric() const { return metric_; }
    int positives() const { return positives_; }  // -1 when not applicable
    int negatives() const { return negatives_; }

private:
    std::string metric_;
    int positives_ = -1;
    int negatives_ = -1;
};

// Mean of sensitivity and specificity. Requires at least one label of each
// class; throws MetricUndefined carrying the class counts otherwise.
double balanced_accuracy(const std::vector<bool>& decisions, const std::vector<bool>& labels);

// Probability that a random positive outscores a random negative, ties
// counted half (rank formulation). Requires both classes.
double roc_auc(const std::vector<double>& scores, const std::vector<bool>& labels);

// 1-based ranks with ties assigned their average rank.
std::vector<double> average_ranks(const std::vector<double>& values);

// Rank correlation with average ranks on ties. Requires n >= 3 and variance
// in xs (all-tied xs throw); constant ys against varying xs yield 0.
double spearman_rho(const std::vector<double>& xs, const std::vector<double>& ys);

struct SpearmanResult {
    double rho = 0;
    double p_value = 1;  // two-sided, Student-t approximation
    int n = 0;
};
SpearmanResult spearman_test(const std::vector<double>& xs, const std::vector<double>& ys);

// Benjamini-Hochberg step-up adjustment with monotonicity enforcement;
// output order matches input order.
std::vector<double> bh_adjust(const std::vector<double>& p_values);

struct WilcoxonResult {
    double w_plus = 0;   // sum of ranks of positive differences
    double z = 0;
    double p_value = 1;  // two-sided
    int n = 0;           // nonzero differences used
};

// Two-sided signed-rank test via the normal approximation with tie
// correction; zero differences are dropped first, no continuity correction.
// Intended for n >= 6; throws MetricUndefined when no nonzero differences
// remain.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& diffs);

// Standard normal CDF.
double normal_cdf(double z);

// Population standard deviation (divide by n). Used for across-fold spread.
double population_std(const std::vector<double>& values);

}  // namespace diarylens
