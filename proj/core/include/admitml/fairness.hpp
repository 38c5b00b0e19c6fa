#pragma once

#include <map>
#include <string>
#include <vector>

namespace admitml {

// Per-group prediction and outcome rates for one sensitive attribute.
// tpr/fpr are meaningful only when `usable` (both ground-truth classes
// present in the group).
struct GroupStats {
    std::string group;
    long long count = 0;
    double selection_rate = 0.0;  // Pr(prediction = 1 | group)
    double base_rate = 0.0;       // Pr(label = 1 | group)
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;
    long long tn = 0;
    double tpr = 0.0;
    double fpr = 0.0;
    bool usable = false;

    bool operator==(const GroupStats&) const = default;
};

// Largest pairwise absolute difference of positive-prediction rates.
// With two groups this is exactly |rate_a - rate_b|.
double demographic_parity_gap(const std::vector<double>& positive_rates);
double demographic_parity_gap(const std::vector<int>& predictions,
                              const std::vector<std::string>& groups);

// Equalized-odds gap for one pair of groups: the mean of the absolute TPR
// and FPR differences.
double equalized_odds_gap(double tpr_a, double fpr_a, double tpr_b, double fpr_b);

// Largest pairwise equalized-odds gap. Groups missing a ground-truth class
// have undefined rates and are excluded; fewer than two usable groups is an
// error.
double equalized_odds_gap(const std::vector<int>& predictions, const std::vector<int>& labels,
                          const std::vector<std::string>& groups);

// Audit result for one sensitive attribute. Groups are sorted by label so
// reports are deterministic.
struct AttributeAudit {
    std::string attribute;
    std::vector<GroupStats> groups;
    double dp_gap = 0.0;
    double eo_gap = 0.0;
    bool flagged = false;
    std::vector<std::string> warnings;

    bool operator==(const AttributeAudit&) const = default;
};

struct FairnessReport {
    double tau = 0.05;
    std::vector<AttributeAudit> attributes;

    bool operator==(const FairnessReport&) const = default;
};

// Audits every attribute: per-group stats, both gaps, flagged when either
// gap exceeds tau. `attributes` maps attribute name to per-row group labels
// aligned with predictions and labels.
FairnessReport fairness_audit(const std::vector<int>& predictions, const std::vector<int>& labels,
                              const std::map<std::string, std::vector<std::string>>& attributes,
                              double tau = 0.05);

}  // namespace admitml
