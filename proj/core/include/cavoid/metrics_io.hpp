#pragma once

// Training metrics as CSV with a fixed header:
//
//   episode,cumulative_reward,mean_loss,epsilon,steps,updates,collision,fuel_used
//
// Doubles use 17 significant digits; episodes without a gradient step have
// mean_loss "nan". Wall-clock time is deliberately not part of the file so
// that identical runs produce identical bytes.

#include <filesystem>
#include <string>

#include "cavoid/drqn.hpp"

namespace cavoid {

inline constexpr const char* kMetricsHeader =
    "episode,cumulative_reward,mean_loss,epsilon,steps,updates,collision,fuel_used";

std::string metrics_to_csv(const TrainingMetrics& metrics);
TrainingMetrics metrics_from_csv(const std::string& text, const std::string& source = "<metrics>");
void save_metrics(const TrainingMetrics& metrics, const std::filesystem::path& path);
TrainingMetrics load_metrics(const std::filesystem::path& path);

/// Plot-ready table: the metrics columns plus trailing moving averages of
/// reward and loss over `window` episodes.
std::string export_plot_table(const TrainingMetrics& metrics, int window);

}  // namespace cavoid
