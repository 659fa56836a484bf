#include "trends.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "io.hpp"

namespace poetopics {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 300.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 20.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 40.0;

std::string num(double x) { return io::format_fixed(x, 2); }

// Smallest 1/2/5 x 10^n value >= x.
double nice_ceiling(double x) {
  if (!(x > 0.0)) return 1.0;
  const double mag = std::pow(10.0, std::floor(std::log10(x)));
  for (double step : {1.0, 2.0, 5.0, 10.0}) {
    if (step * mag >= x * (1 - 1e-12)) return step * mag;
  }
  return 10.0 * mag;
}

std::string svg_open(std::string_view title) {
  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg id=\"chart\" xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 300\" "
       "width=\"800\" height=\"300\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"300\" fill=\"#ffffff\"/>\n";
  s += "<text id=\"title\" x=\"400\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">";
  s += title;
  s += "</text>\n";
  return s;
}

std::string axes(const TimeSlotConfig& config, int slots, double y_max, bool centred_ticks) {
  const double plot_w = kWidth - kLeft - kRight;
  const double base = kHeight - kBottom;
  std::string s;
  s += "<line id=\"x-axis\" x1=\"" + num(kLeft) + "\" y1=\"" + num(base) + "\" x2=\"" +
       num(kWidth - kRight) + "\" y2=\"" + num(base) + "\" stroke=\"#000000\"/>\n";
  s += "<line id=\"y-axis\" x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) +
       "\" y2=\"" + num(base) + "\" stroke=\"#000000\"/>\n";
  s += "<text id=\"y-max-label\" x=\"" + num(kLeft - 4) + "\" y=\"" + num(kTop + 4) +
       "\" text-anchor=\"end\">" + io::format_double(y_max) + "</text>\n";
  s += "<text x=\"" + num(kLeft - 4) + "\" y=\"" + num(base + 4) + "\" text-anchor=\"end\">0</text>\n";
  const double step = plot_w / std::max(slots, 1);
  for (int i = 0; i < slots; ++i) {
    const double x = kLeft + step * (centred_ticks ? i + 0.5 : i);
    s += "<text class=\"x-tick\" x=\"" + num(x) + "\" y=\"" + num(base + 16) +
         "\" text-anchor=\"middle\">" + std::to_string(config.slot_start(i)) + "</text>\n";
  }
  return s;
}

}  // namespace

TrendSeries topic_trend(const Matrix& theta, std::span<const int> slots, int topic,
                        const TimeSlotConfig& config) {
  config.validate();
  if (topic < 0 || static_cast<std::size_t>(topic) >= theta.cols()) {
    fail(ErrorKind::Validation, "topic index " + std::to_string(topic) + " out of range");
  }
  if (slots.size() != theta.rows()) {
    fail(ErrorKind::Validation, "trend: one slot per document required");
  }
  const int n_slots = config.slot_count();
  std::vector<double> sum(static_cast<std::size_t>(n_slots), 0.0);
  std::vector<std::size_t> count(static_cast<std::size_t>(n_slots), 0);
  for (std::size_t d = 0; d < theta.rows(); ++d) {
    if (slots[d] < 0 || slots[d] >= n_slots) {
      fail(ErrorKind::Validation, "trend: slot index out of range for document " + std::to_string(d));
    }
    sum[static_cast<std::size_t>(slots[d])] += theta(d, static_cast<std::size_t>(topic));
    ++count[static_cast<std::size_t>(slots[d])];
  }
  TrendSeries series;
  series.topic = topic;
  for (int s = 0; s < n_slots; ++s) {
    TrendPoint p;
    p.slot = s;
    p.start_year = config.slot_start(s);
    p.end_year = config.slot_end(s);
    p.doc_count = count[static_cast<std::size_t>(s)];
    if (p.doc_count) p.value = sum[static_cast<std::size_t>(s)] / static_cast<double>(p.doc_count);
    series.points.push_back(p);
  }
  return series;
}

std::vector<TrendSeries> all_topic_trends(const Matrix& theta, std::span<const int> slots,
                                          const TimeSlotConfig& config) {
  std::vector<TrendSeries> out;
  out.reserve(theta.cols());
  for (std::size_t k = 0; k < theta.cols(); ++k) {
    out.push_back(topic_trend(theta, slots, static_cast<int>(k), config));
  }
  return out;
}

std::vector<std::size_t> slot_histogram(std::span<const PoemRecord> corpus,
                                        const TimeSlotConfig& config) {
  config.validate();
  std::vector<std::size_t> counts(static_cast<std::size_t>(config.slot_count()), 0);
  for (const auto& p : corpus) ++counts[static_cast<std::size_t>(assign_time_slot(p.year, config))];
  return counts;
}

std::string trends_csv(std::span<const TrendSeries> series) {
  std::string out = "topic,slot_start,slot_end,avg_prob,doc_count\n";
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      out += std::to_string(s.topic) + "," + std::to_string(p.start_year) + "," +
             std::to_string(p.end_year) + "," + (p.value ? io::format_double(*p.value) : "") + "," +
             std::to_string(p.doc_count) + "\n";
    }
  }
  return out;
}

std::string trend_svg(const TrendSeries& series) {
  TimeSlotConfig config;
  const int n = static_cast<int>(series.points.size());
  if (n > 0) {
    config.origin_year = series.points.front().start_year;
    config.end_year = series.points.back().end_year;
    config.slot_width_years = n > 1 ? series.points[1].start_year - series.points[0].start_year
                                    : series.points[0].end_year - series.points[0].start_year + 1;
  }
  double vmax = 0.0;
  for (const auto& p : series.points) {
    if (p.value) vmax = std::max(vmax, *p.value);
  }
  // Each topic gets its own y scale.
  const double y_max = nice_ceiling(vmax);

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const double step = plot_w / std::max(n, 1);
  auto x_of = [&](int slot) { return kLeft + step * (slot + 0.5); };
  auto y_of = [&](double v) { return kHeight - kBottom - plot_h * (v / y_max); };

  std::string s = svg_open("Topic" + std::to_string(series.topic));
  s += axes(config, n, y_max, true);

  int segment = 0;
  std::string points;
  auto flush = [&] {
    if (points.empty()) return;
    s += "<polyline id=\"segment-" + std::to_string(segment++) +
         "\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
    points.clear();
  };
  for (const auto& p : series.points) {
    if (!p.value) {
      flush();
      continue;
    }
    if (!points.empty()) points += ' ';
    points += num(x_of(p.slot)) + "," + num(y_of(*p.value));
  }
  flush();
  for (const auto& p : series.points) {
    if (!p.value) continue;
    s += "<circle id=\"point-" + std::to_string(p.slot) + "\" cx=\"" + num(x_of(p.slot)) +
         "\" cy=\"" + num(y_of(*p.value)) + "\" r=\"3\" fill=\"#1f77b4\"><title>" +
         std::to_string(p.start_year) + "-" + std::to_string(p.end_year) + ": " +
         io::format_double(*p.value) + " (" + std::to_string(p.doc_count) + " docs)</title></circle>\n";
  }
  s += "</svg>\n";
  return s;
}

std::string histogram_svg(std::span<const std::size_t> counts, const TimeSlotConfig& config,
                          std::string_view title) {
  const int n = static_cast<int>(counts.size());
  std::size_t cmax = 0;
  for (auto c : counts) cmax = std::max(cmax, c);
  const double y_max = nice_ceiling(static_cast<double>(cmax));
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const double step = plot_w / std::max(n, 1);

  std::string s = svg_open(title);
  s += axes(config, n, y_max, true);
  for (int i = 0; i < n; ++i) {
    const double h = plot_h * (static_cast<double>(counts[static_cast<std::size_t>(i)]) / y_max);
    s += "<rect id=\"bar-" + std::to_string(i) + "\" x=\"" + num(kLeft + step * i + step * 0.1) +
         "\" y=\"" + num(kHeight - kBottom - h) + "\" width=\"" + num(step * 0.8) + "\" height=\"" +
         num(h) + "\" fill=\"#4c72b0\"><title>" + std::to_string(config.slot_start(i)) + "-" +
         std::to_string(config.slot_end(i)) + ": " +
         std::to_string(counts[static_cast<std::size_t>(i)]) + "</title></rect>\n";
  }
  s += "</svg>\n";
  return s;
}

std::string histogram_csv(std::span<const std::size_t> counts, const TimeSlotConfig& config) {
  std::string out = "slot,slot_start,slot_end,doc_count\n";
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const int s = static_cast<int>(i);
    out += std::to_string(s) + "," + std::to_string(config.slot_start(s)) + "," +
           std::to_string(config.slot_end(s)) + "," + std::to_string(counts[i]) + "\n";
  }
  return out;
}

std::vector<std::filesystem::path> emit_trends(std::span<const TrendSeries> series,
                                               TrendFormat format,
                                               const std::filesystem::path& out_dir) {
  if (series.empty()) fail(ErrorKind::Validation, "no trend series to emit");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create " + out_dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  if (format == TrendFormat::Csv) {
    const auto path = out_dir / "trends.csv";
    io::write_file(path, trends_csv(series));
    written.push_back(path);
  } else {
    for (const auto& s : series) {
      const auto path = out_dir / ("topic_" + std::to_string(s.topic) + ".svg");
      io::write_file(path, trend_svg(s));
      written.push_back(path);
    }
  }
  return written;
}

}  // namespace poetopics
