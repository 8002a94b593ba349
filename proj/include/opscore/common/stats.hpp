#pragma once

#include <span>
#include <vector>

namespace opscore {

// Ranks starting at 1; tied values share their average rank.
std::vector<double> average_ranks(std::span<const double> values);

// Spearman rank correlation (Pearson correlation of average ranks).
// Returns 0 when either input is constant.
double spearman(std::span<const double> x, std::span<const double> y);

// Probability that a random positive scores above a random negative, ties
// counting one half (Mann-Whitney form of the ROC AUC).
double roc_auc(std::span<const double> positives, std::span<const double> negatives);

double mean(std::span<const double> values);
double median(std::vector<double> values);

}  // namespace opscore
