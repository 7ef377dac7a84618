#include "diarylens/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

namespace diarylens {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw std::invalid_argument(std::string(what) + ": size mismatch " + std::to_string(a) +
                                    " vs " + std::to_string(b));
    }
}

}  // namespace

double balanced_accuracy(const std::vector<bool>& decisions, const std::vector<bool>& labels) {
    require_same_size(decisions.size(), labels.size(), "balanced_accuracy");
    int tp = 0, fn = 0, tn = 0, fp = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i]) {
            (decisions[i] ? tp : fn)++;
        } else {
            (decisions[i] ? fp : tn)++;
        }
    }
    const int pos = tp + fn, neg = tn + fp;
    if (pos == 0 || neg == 0) throw MetricUndefined("balanced_accuracy", pos, neg);
    const double sensitivity = static_cast<double>(tp) / pos;
    const double specificity = static_cast<double>(tn) / neg;
    return (sensitivity + specificity) / 2.0;
}

double roc_auc(const std::vector<double>& scores, const std::vector<bool>& labels) {
    require_same_size(scores.size(), labels.size(), "roc_auc");
    int pos = 0, neg = 0;
    for (bool l : labels) (l ? pos : neg)++;
    if (pos == 0 || neg == 0) throw MetricUndefined("roc_auc", pos, neg);

    const auto ranks = average_ranks(scores);
    double rank_sum_pos = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i]) rank_sum_pos += ranks[i];
    }
    const double p = pos, n = neg;
    return (rank_sum_pos - p * (p + 1) / 2.0) / (p * n);
}

std::vector<double> average_ranks(const std::vector<double>& values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&values](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double spearman_rho(const std::vector<double>& xs, const std::vector<double>& ys) {
    require_same_size(xs.size(), ys.size(), "spearman_rho");
    if (xs.size() < 3) {
        throw MetricUndefined("spearman_rho",
                              "need at least 3 pairs, got " + std::to_string(xs.size()));
    }
    const auto rx = average_ranks(xs);
    const auto ry = average_ranks(ys);
    const auto n = static_cast<double>(rx.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        const double dx = rx[i] - mx;
        const double dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0) throw MetricUndefined("spearman_rho", "all x values tied");
    // constant y against varying x: no monotone association
    if (syy == 0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

SpearmanResult spearman_test(const std::vector<double>& xs, const std::vector<double>& ys) {
    SpearmanResult result;
    result.n = static_cast<int>(xs.size());
    result.rho = spearman_rho(xs, ys);
    const double abs_rho = std::abs(result.rho);
    if (abs_rho >= 1.0) {
        result.p_value = 0.0;
        return result;
    }
    const double df = result.n - 2;
    const double t = result.rho * std::sqrt(df / (1.0 - result.rho * result.rho));
    const boost::math::students_t dist(df);
    result.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    return result;
}

std::vector<double> bh_adjust(const std::vector<double>& p_values) {
    const std::size_t m = p_values.size();
    if (m == 0) return {};
    for (double p : p_values) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("bh_adjust: p-value outside [0,1]");
        }
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&p_values](std::size_t a, std::size_t b) {
        if (p_values[a] != p_values[b]) return p_values[a] < p_values[b];
        return a < b;
    });

    // step-up: scaled values, then a right-to-left running minimum
    std::vector<double> adjusted(m);
    double running_min = 1.0;
    for (std::size_t r = m; r-- > 0;) {
        const double scaled =
            p_values[order[r]] * static_cast<double>(m) / static_cast<double>(r + 1);
        running_min = std::min(running_min, scaled);
        adjusted[order[r]] = running_min;
    }
    return adjusted;
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& diffs) {
    std::vector<double> abs_diffs;
    std::vector<bool> positive;
    for (double d : diffs) {
        if (d == 0) continue;  // zeros carry no sign information
        abs_diffs.push_back(std::abs(d));
        positive.push_back(d > 0);
    }
    const std::size_t n = abs_diffs.size();
    if (n == 0) throw MetricUndefined("wilcoxon_signed_rank", "all differences are zero");

    const auto ranks = average_ranks(abs_diffs);
    WilcoxonResult result;
    result.n = static_cast<int>(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (positive[i]) result.w_plus += ranks[i];
    }

    const double dn = static_cast<double>(n);
    const double mean = dn * (dn + 1) / 4.0;
    double variance = dn * (dn + 1) * (2 * dn + 1) / 24.0;
    // tie correction: subtract (t^3 - t)/48 per group of tied |d|
    std::vector<double> sorted(abs_diffs);
    std::sort(sorted.begin(), sorted.end());
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        variance -= (t * t * t - t) / 48.0;
        i = j + 1;
    }
    if (variance <= 0) {
        throw MetricUndefined("wilcoxon_signed_rank", "zero variance after tie correction");
    }
    result.z = (result.w_plus - mean) / std::sqrt(variance);
    result.p_value = std::clamp(2.0 * (1.0 - normal_cdf(std::abs(result.z))), 0.0, 1.0);
    return result;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double population_std(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("population_std: empty input");
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / n);
}

}  // namespace diarylens
