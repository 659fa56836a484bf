#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "matrix.hpp"

namespace poetopics {

struct TrendPoint {
  int slot = 0;
  int start_year = 0;
  int end_year = 0;                  // inclusive
  std::optional<double> value;       // absent for slots without documents
  std::size_t doc_count = 0;
};

struct TrendSeries {
  int topic = 0;
  std::vector<TrendPoint> points;    // one per slot, in slot order
};

/// Average of theta[d, topic] over the documents d of each slot.
TrendSeries topic_trend(const Matrix& theta, std::span<const int> slots, int topic,
                        const TimeSlotConfig& config);
std::vector<TrendSeries> all_topic_trends(const Matrix& theta, std::span<const int> slots,
                                          const TimeSlotConfig& config);

std::vector<std::size_t> slot_histogram(std::span<const PoemRecord> corpus,
                                        const TimeSlotConfig& config);

/// Header `topic,slot_start,slot_end,avg_prob,doc_count`; empty slots have an
/// empty avg_prob field.
std::string trends_csv(std::span<const TrendSeries> series);

/// 800x300 line chart. Element ids: `chart`, `title`, `x-axis`, `y-axis`,
/// `y-max-label`, `segment-<i>` (one polyline per run of non-empty slots) and
/// `point-<slot>` (one circle per non-empty slot).
std::string trend_svg(const TrendSeries& series);

/// Bar chart of documents per slot. Ids: `chart`, `title`, `x-axis`,
/// `y-axis`, `bar-<slot>`.
std::string histogram_svg(std::span<const std::size_t> counts, const TimeSlotConfig& config,
                          std::string_view title);
std::string histogram_csv(std::span<const std::size_t> counts, const TimeSlotConfig& config);

enum class TrendFormat { Csv, Svg };

/// Csv writes `trends.csv` into out_dir; Svg writes `topic_<k>.svg` per series.
std::vector<std::filesystem::path> emit_trends(std::span<const TrendSeries> series,
                                               TrendFormat format,
                                               const std::filesystem::path& out_dir);

}  // namespace poetopics
