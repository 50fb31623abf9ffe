#pragma once

#include <vector>

#include "lrloc/classify.hpp"

namespace lrloc::detail {

// Training rows are pre-validated (consistent width, >= 2 classes).
// Labels are indices into the model's sorted class list.
SvmModel train_svm(const SvmConfig& cfg, const std::vector<std::vector<double>>& rows,
                   const std::vector<int>& label_idx, const std::vector<ClassId>& classes);

ForestModel train_forest(const ForestConfig& cfg,
                         const std::vector<std::vector<double>>& rows,
                         const std::vector<int>& label_idx, int n_classes);

std::vector<double> forest_proba(const ForestModel& model, std::span<const double> x,
                                 int n_classes);

int svm_vote(const SvmModel& model, std::span<const double> x,
             const std::vector<ClassId>& classes, std::vector<double>* proba);

}  // namespace lrloc::detail
