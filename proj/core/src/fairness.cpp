#include "admitml/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace admitml {
namespace {

void check_aligned(std::size_t predictions, std::size_t rows, const char* what) {
    if (predictions != rows) {
        throw std::invalid_argument(std::string(what) + ": vectors differ in length");
    }
}

void check_binary(const std::vector<int>& values, const char* what) {
    for (int v : values) {
        if (v != 0 && v != 1) {
            throw std::invalid_argument(std::string(what) + " must contain only 0 or 1, got " +
                                        std::to_string(v));
        }
    }
}

// Group labels in first-seen order mapped to per-group confusion counts.
std::vector<GroupStats> group_stats(const std::vector<int>& predictions,
                                    const std::vector<int>& labels,
                                    const std::vector<std::string>& groups) {
    std::vector<GroupStats> stats;
    std::vector<long long> positive_predictions;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        std::size_t g = 0;
        while (g < stats.size() && stats[g].group != groups[i]) ++g;
        if (g == stats.size()) {
            stats.push_back(GroupStats{});
            stats.back().group = groups[i];
            positive_predictions.push_back(0);
        }
        GroupStats& s = stats[g];
        ++s.count;
        positive_predictions[g] += predictions[i];
        if (labels[i] == 1) {
            (predictions[i] == 1 ? s.tp : s.fn)++;
        } else {
            (predictions[i] == 1 ? s.fp : s.tn)++;
        }
    }
    for (std::size_t g = 0; g < stats.size(); ++g) {
        GroupStats& s = stats[g];
        s.selection_rate = static_cast<double>(positive_predictions[g]) / static_cast<double>(s.count);
        s.base_rate = static_cast<double>(s.tp + s.fn) / static_cast<double>(s.count);
        s.usable = (s.tp + s.fn > 0) && (s.fp + s.tn > 0);
        if (s.usable) {
            s.tpr = static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fn);
            s.fpr = static_cast<double>(s.fp) / static_cast<double>(s.fp + s.tn);
        }
    }
    std::sort(stats.begin(), stats.end(),
              [](const GroupStats& a, const GroupStats& b) { return a.group < b.group; });
    return stats;
}

double max_pairwise_eo(const std::vector<GroupStats>& stats) {
    std::vector<const GroupStats*> usable;
    for (const GroupStats& s : stats) {
        if (s.usable) usable.push_back(&s);
    }
    if (usable.size() < 2) {
        throw std::invalid_argument(
            "equalized_odds_gap: fewer than two groups have both ground-truth classes");
    }
    double gap = 0.0;
    for (std::size_t a = 0; a < usable.size(); ++a) {
        for (std::size_t b = a + 1; b < usable.size(); ++b) {
            gap = std::max(gap, equalized_odds_gap(usable[a]->tpr, usable[a]->fpr, usable[b]->tpr,
                                                   usable[b]->fpr));
        }
    }
    return gap;
}

}  // namespace

double demographic_parity_gap(const std::vector<double>& positive_rates) {
    if (positive_rates.size() < 2) {
        throw std::invalid_argument("demographic_parity_gap: needs at least two groups");
    }
    for (double r : positive_rates) {
        if (!(r >= 0.0 && r <= 1.0)) {
            throw std::invalid_argument("demographic_parity_gap: rates must lie in [0, 1]");
        }
    }
    const auto [lo, hi] = std::minmax_element(positive_rates.begin(), positive_rates.end());
    return *hi - *lo;
}

double demographic_parity_gap(const std::vector<int>& predictions,
                              const std::vector<std::string>& groups) {
    check_aligned(predictions.size(), groups.size(), "demographic_parity_gap");
    if (predictions.empty()) {
        throw std::invalid_argument("demographic_parity_gap: empty input");
    }
    check_binary(predictions, "demographic_parity_gap: predictions");
    const std::vector<int> labels(predictions.size(), 0);
    std::vector<double> rates;
    for (const GroupStats& s : group_stats(predictions, labels, groups)) {
        rates.push_back(s.selection_rate);
    }
    return demographic_parity_gap(rates);
}

double equalized_odds_gap(double tpr_a, double fpr_a, double tpr_b, double fpr_b) {
    for (double r : {tpr_a, fpr_a, tpr_b, fpr_b}) {
        if (!(r >= 0.0 && r <= 1.0)) {
            throw std::invalid_argument("equalized_odds_gap: rates must lie in [0, 1]");
        }
    }
    return 0.5 * (std::abs(tpr_a - tpr_b) + std::abs(fpr_a - fpr_b));
}

double equalized_odds_gap(const std::vector<int>& predictions, const std::vector<int>& labels,
                          const std::vector<std::string>& groups) {
    check_aligned(predictions.size(), labels.size(), "equalized_odds_gap");
    check_aligned(predictions.size(), groups.size(), "equalized_odds_gap");
    if (predictions.empty()) {
        throw std::invalid_argument("equalized_odds_gap: empty input");
    }
    check_binary(predictions, "equalized_odds_gap: predictions");
    check_binary(labels, "equalized_odds_gap: labels");
    return max_pairwise_eo(group_stats(predictions, labels, groups));
}

FairnessReport fairness_audit(const std::vector<int>& predictions, const std::vector<int>& labels,
                              const std::map<std::string, std::vector<std::string>>& attributes,
                              double tau) {
    if (tau < 0.0) {
        throw std::invalid_argument("fairness_audit: tau must be non-negative");
    }
    if (attributes.empty()) {
        throw std::invalid_argument("fairness_audit: no sensitive attributes supplied");
    }
    check_aligned(predictions.size(), labels.size(), "fairness_audit");
    if (predictions.empty()) {
        throw std::invalid_argument("fairness_audit: empty input");
    }
    check_binary(predictions, "fairness_audit: predictions");
    check_binary(labels, "fairness_audit: labels");

    FairnessReport report;
    report.tau = tau;
    for (const auto& [name, groups] : attributes) {
        check_aligned(predictions.size(), groups.size(), "fairness_audit");
        AttributeAudit audit;
        audit.attribute = name;
        audit.groups = group_stats(predictions, labels, groups);
        if (audit.groups.size() < 2) {
            throw std::invalid_argument("fairness_audit: attribute '" + name +
                                        "' has fewer than two groups");
        }
        std::vector<double> rates;
        for (const GroupStats& s : audit.groups) {
            rates.push_back(s.selection_rate);
            if (!s.usable) {
                audit.warnings.push_back("group '" + s.group + "' of attribute '" + name +
                                         "' lacks a ground-truth class; excluded from the "
                                         "equalized-odds gap");
            }
        }
        audit.dp_gap = demographic_parity_gap(rates);
        audit.eo_gap = max_pairwise_eo(audit.groups);
        audit.flagged = audit.dp_gap > tau || audit.eo_gap > tau;
        report.attributes.push_back(std::move(audit));
    }
    return report;
}

}  // namespace admitml
